//! Directed topologies and the random geometric (unit-disk) generator.
//!
//! An edge `(i, j)` means oscillator `j` hears the pulses of oscillator `i`.
//! The degree of a node is `min(in, out)`; the network degree `d` is the
//! minimum over nodes.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism::{MechanismConfig, MechanismKind};

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    n: usize,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    positions: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDegree {
    pub in_deg: usize,
    pub out_deg: usize,
    pub min: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Degrees {
    pub nodes: Vec<NodeDegree>,
    /// `d = min_i d(i)`; zero for an empty graph.
    pub network: usize,
}

impl Topology {
    /// Builds a topology from ordered pairs; duplicates collapse, self-loops
    /// and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Topology(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(Error::Topology(format!("self-loop at node {i}")));
            }
            set.insert((i, j));
        }
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for (i, j) in set {
            out_adj[i].push(j);
            in_adj[j].push(i);
        }
        for v in &mut in_adj {
            v.sort_unstable();
        }
        Ok(Self {
            n,
            out_adj,
            in_adj,
            positions: None,
        })
    }

    /// Symmetric edges between every pair within `radius` (distance ties connect).
    pub fn from_positions(positions: Vec<(f64, f64)>, radius: f64) -> Self {
        let n = positions.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && within_range(positions[i], positions[j], radius) {
                    edges.push((i, j));
                }
            }
        }
        let mut topo = Self::from_edges(n, edges).expect("disk edges are valid");
        topo.positions = Some(positions);
        topo
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)));
        Self::from_edges(n, edges).expect("complete graph is valid")
    }

    /// Symmetric edges along a path `0 – 1 – … – n-1`.
    pub fn path(n: usize) -> Self {
        let edges = (1..n).flat_map(|i| [(i - 1, i), (i, i - 1)]);
        Self::from_edges(n, edges).expect("path graph is valid")
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out_adj[i]
    }

    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.in_adj[i]
    }

    pub fn positions(&self) -> Option<&[(f64, f64)]> {
        self.positions.as_deref()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.out_adj[i].binary_search(&j).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(i, outs)| outs.iter().map(move |&j| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.iter().map(Vec::len).sum()
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.in_adj[i].len()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.in_adj[i].len().min(self.out_adj[i].len())
    }

    pub fn degrees(&self) -> Degrees {
        let nodes: Vec<NodeDegree> = (0..self.n)
            .map(|i| NodeDegree {
                in_deg: self.in_adj[i].len(),
                out_deg: self.out_adj[i].len(),
                min: self.degree(i),
            })
            .collect();
        let network = nodes.iter().map(|d| d.min).min().unwrap_or(0);
        Degrees { nodes, network }
    }

    pub fn network_degree(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).min().unwrap_or(0)
    }

    /// Connected when edges are read as undirected links.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in self.out_adj[u].iter().chain(&self.in_adj[u]) {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == self.n
    }

    pub fn is_symmetric(&self) -> bool {
        self.edges().all(|(i, j)| self.has_edge(j, i))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("pco-topology v1 n={}\n", self.n);
        if let Some(pos) = &self.positions {
            for (i, (x, y)) in pos.iter().enumerate() {
                let _ = writeln!(s, "# pos {i} {x:?} {y:?}");
            }
        }
        for (i, j) in self.edges() {
            let _ = writeln!(s, "{i} {j}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::TopologyParse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let n: usize = header
            .trim()
            .strip_prefix("pco-topology v1 n=")
            .and_then(|rest| rest.parse().ok())
            .ok_or_else(|| Error::TopologyParse {
                line: 1,
                msg: format!("expected `pco-topology v1 n=<N>`, got `{header}`"),
            })?;
        let mut edges = Vec::new();
        let mut positions: Vec<Option<(f64, f64)>> = Vec::new();
        for (idx, raw) in lines {
            let line_no = idx + 1;
            let line = raw.trim();
            let bad = |msg: &str| Error::TopologyParse {
                line: line_no,
                msg: msg.to_string(),
            };
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let mut parts = comment.split_whitespace();
                if parts.next() != Some("pos") {
                    continue;
                }
                let fields: Vec<&str> = parts.collect();
                if fields.len() != 3 {
                    return Err(bad("expected `# pos i x y`"));
                }
                let i: usize = fields[0].parse().map_err(|_| bad("bad node index"))?;
                let x: f64 = fields[1].parse().map_err(|_| bad("bad x coordinate"))?;
                let y: f64 = fields[2].parse().map_err(|_| bad("bad y coordinate"))?;
                if i >= n {
                    return Err(bad("position index out of range"));
                }
                if positions.is_empty() {
                    positions = vec![None; n];
                }
                positions[i] = Some((x, y));
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(bad("expected `i j`"));
            };
            let i: usize = a.parse().map_err(|_| bad("bad source index"))?;
            let j: usize = b.parse().map_err(|_| bad("bad target index"))?;
            edges.push((i, j));
        }
        let mut topo = Self::from_edges(n, edges).map_err(|e| Error::TopologyParse {
            line: 0,
            msg: e.to_string(),
        })?;
        if !positions.is_empty() {
            let all: Option<Vec<_>> = positions.into_iter().collect();
            topo.positions = Some(all.ok_or(Error::TopologyParse {
                line: 0,
                msg: "positions given for some nodes only".into(),
            })?);
        }
        Ok(topo)
    }
}

/// Disk-model link predicate shared by generation and verification.
pub fn within_range(a: (f64, f64), b: (f64, f64), radius: f64) -> bool {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    (dx * dx + dy * dy).sqrt() <= radius
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub bound_on_m: usize,
    pub violated: Vec<String>,
}

/// Evaluates the synchronization conditions for `mech` with `attackers`
/// compromised nodes.
///
/// | mechanism | degree       | non-colluding M        | colluding M          |
/// |-----------|--------------|------------------------|----------------------|
/// | 1         | d > ⌊N/2⌋    | ≤ 2⌊(d − ⌊N/2⌋)/4⌋     | ≤ ⌊(d − ⌊N/2⌋)/4⌋    |
/// | 2         | d > ⌊2N/3⌋   | ≤ 2⌊d/9⌋               | ≤ ⌊d/9⌋              |
pub fn check_admissibility(
    topo: &Topology,
    mech: &MechanismConfig,
    attackers: usize,
    colluding: bool,
) -> AdmissibilityReport {
    let n = topo.node_count();
    let d = topo.network_degree();
    let mut violated = Vec::new();
    if !topo.is_connected() {
        violated.push("topology is not connected".to_string());
    }
    let (degree_floor, base) = match mech.kind {
        MechanismKind::Conventional => {
            violated.push("no resilience guarantee under the conventional mechanism".to_string());
            return AdmissibilityReport {
                admissible: false,
                bound_on_m: 0,
                violated,
            };
        }
        MechanismKind::Mechanism1 => {
            let half = n / 2;
            if mech.population.is_some_and(|p| p != n) {
                violated.push(format!(
                    "configured population {} differs from node count {n}",
                    mech.population.unwrap_or(0)
                ));
            }
            (half, d.saturating_sub(half) / 4)
        }
        MechanismKind::Mechanism2 => ((2 * n) / 3, d / 9),
    };
    let degree_ok = d > degree_floor;
    let floor_name = match mech.kind {
        MechanismKind::Mechanism1 => "⌊N/2⌋",
        _ => "⌊2N/3⌋",
    };
    if !degree_ok {
        violated.push(format!("network degree d = {d} must exceed {floor_name} = {degree_floor}"));
    }
    let bound_on_m = if !degree_ok {
        0
    } else if colluding {
        base
    } else {
        2 * base
    };
    if attackers > bound_on_m {
        violated.push(format!(
            "{attackers} {} attackers exceed the bound M ≤ {bound_on_m}",
            if colluding { "colluding" } else { "non-colluding" }
        ));
    }
    AdmissibilityReport {
        admissible: violated.is_empty(),
        bound_on_m,
        violated,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricParams {
    pub n: usize,
    #[serde(default = "default_area_side")]
    pub area_side: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    pub seed: u64,
    #[serde(default)]
    pub min_degree: usize,
    #[serde(default = "default_true")]
    pub connected: bool,
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
}

fn default_area_side() -> f64 {
    100.0
}
fn default_radius() -> f64 {
    50.0
}
fn default_true() -> bool {
    true
}
fn default_attempts() -> usize {
    10_000
}

impl GeometricParams {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            area_side: default_area_side(),
            radius: default_radius(),
            seed,
            min_degree: 0,
            connected: true,
            max_attempts: default_attempts(),
        }
    }
}

/// Uniform i.i.d. positions in `[0, area_side]²`, resampled until the
/// degree/connectivity constraints hold.
pub fn generate_geometric(params: &GeometricParams) -> Result<Topology> {
    if params.n < 2 {
        return Err(Error::Config("geometric graph needs at least 2 nodes".into()));
    }
    if !(params.radius.is_finite() && params.radius > 0.0 && params.area_side.is_finite() && params.area_side > 0.0) {
        return Err(Error::Config("radius and area side must be positive".into()));
    }
    if params.max_attempts == 0 {
        return Err(Error::Config("max_attempts must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best = (0usize, false);
    for _ in 0..params.max_attempts {
        let positions: Vec<(f64, f64)> = (0..params.n)
            .map(|_| {
                let x = rng.random::<f64>() * params.area_side;
                let y = rng.random::<f64>() * params.area_side;
                (x, y)
            })
            .collect();
        let topo = Topology::from_positions(positions, params.radius);
        let d = topo.network_degree();
        let connected = topo.is_connected();
        if (d, connected) > best {
            best = (d, connected);
        }
        if d >= params.min_degree && (connected || !params.connected) {
            return Ok(topo);
        }
    }
    Err(Error::Generation {
        attempts: params.max_attempts,
        best_min_degree: best.0,
        best_connected: best.1,
    })
}

/// Parameters of the shipped 30-node deployment: 50 m radius in a 50 m
/// square, first instance of the seed that is connected with `d = 24`.
pub const PAPER30_PARAMS: GeometricParams = GeometricParams {
    n: 30,
    area_side: 50.0,
    radius: 50.0,
    seed: PAPER30_SEED,
    min_degree: 24,
    connected: true,
    max_attempts: 10_000,
};

pub const PAPER30_SEED: u64 = 1;

pub fn paper30() -> Topology {
    generate_geometric(&PAPER30_PARAMS).expect("preset parameters generate a topology")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_degrees() {
        let deg = Topology::complete(11).degrees();
        assert!(deg.nodes.iter().all(|d| d.min == 10 && d.in_deg == 10 && d.out_deg == 10));
        assert_eq!(deg.network, 10);
    }

    #[test]
    fn single_edge_degrees() {
        let t = Topology::from_edges(2, [(0, 1)]).unwrap();
        let deg = t.degrees();
        assert_eq!(deg.nodes[0], NodeDegree { in_deg: 0, out_deg: 1, min: 0 });
        assert_eq!(deg.network, 0);
    }

    #[test]
    fn rejects_self_loops_and_out_of_range() {
        assert!(matches!(Topology::from_edges(3, [(1, 1)]), Err(Error::Topology(_))));
        assert!(Topology::from_edges(3, [(0, 3)]).is_err());
    }

    #[test]
    fn connectivity() {
        assert!(Topology::complete(5).is_connected());
        assert!(Topology::path(3).is_connected());
        let two_cliques = Topology::from_edges(4, [(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        assert!(!two_cliques.is_connected());
        // direction is ignored for reachability
        assert!(Topology::from_edges(3, [(0, 1), (2, 1)]).unwrap().is_connected());
    }

    #[test]
    fn paper_bounds() {
        // a 30-node topology with d = 24: complete graph minus a 5-regular symmetric removal
        let topo = sparse_complement(30, 5);
        assert_eq!(topo.network_degree(), 24);
        let m1 = MechanismConfig::mechanism1(0.1, 30);
        let m2 = MechanismConfig::mechanism2(0.1);
        let r = check_admissibility(&topo, &m1, 4, false);
        assert!(r.admissible, "{r:?}");
        assert_eq!(r.bound_on_m, 4);
        assert!(!check_admissibility(&topo, &m1, 5, false).admissible);
        assert_eq!(check_admissibility(&topo, &m1, 2, true).bound_on_m, 2);
        assert!(!check_admissibility(&topo, &m1, 4, true).admissible);
        assert_eq!(check_admissibility(&topo, &m2, 2, true).bound_on_m, 2);
        assert_eq!(check_admissibility(&topo, &m2, 4, false).bound_on_m, 4);
    }

    #[test]
    fn conventional_is_never_admissible() {
        let r = check_admissibility(&Topology::complete(5), &MechanismConfig::conventional(1.0), 0, false);
        assert!(!r.admissible);
        assert!(r.violated[0].contains("no resilience guarantee"));
    }

    #[test]
    fn low_degree_is_reported() {
        let r = check_admissibility(&Topology::path(5), &MechanismConfig::mechanism1(0.5, 5), 0, false);
        assert!(!r.admissible);
        assert!(r.violated.iter().any(|v| v.contains("⌊N/2⌋")));
        let r = check_admissibility(&Topology::complete(6), &MechanismConfig::mechanism2(0.5), 0, false);
        // d = 5 > ⌊12/3⌋ = 4
        assert!(r.admissible);
    }

    #[test]
    fn generator_all_in_range() {
        let mut p = GeometricParams::new(2, 7);
        p.radius = p.area_side * 2f64.sqrt();
        let t = generate_geometric(&p).unwrap();
        assert_eq!(t.edge_count(), 2);
    }

    #[test]
    fn generator_fails_when_unreachable() {
        let mut p = GeometricParams::new(3, 1);
        p.radius = 1e-9;
        p.max_attempts = 20;
        let err = generate_geometric(&p).unwrap_err();
        assert!(matches!(err, Error::Generation { attempts: 20, best_connected: false, .. }));
    }

    #[test]
    fn generator_is_deterministic_and_disk_consistent() {
        let mut p = GeometricParams::new(25, 42);
        p.area_side = 80.0;
        p.connected = false;
        let a = generate_geometric(&p).unwrap();
        let b = generate_geometric(&p).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert!(a.is_symmetric());
        let pos = a.positions().unwrap();
        for i in 0..25 {
            for j in 0..25 {
                if i != j {
                    assert_eq!(a.has_edge(i, j), within_range(pos[i], pos[j], 50.0));
                }
            }
        }
    }

    #[test]
    fn paper_preset_has_degree_24() {
        let t = paper30();
        assert_eq!(t.node_count(), 30);
        assert!(t.is_connected());
        assert_eq!(t.network_degree(), 24);
    }

    #[test]
    fn text_format() {
        let t = Topology::from_edges(3, [(0, 1), (2, 0)]).unwrap();
        assert_eq!(t.to_text(), "pco-topology v1 n=3\n0 1\n2 0\n");
        let parsed = Topology::from_text("pco-topology v1 n=3\n\n# a comment\n2 0\n0 1\n").unwrap();
        assert_eq!(parsed, t);
        assert!(matches!(
            Topology::from_text("pco-topology v2 n=3\n"),
            Err(Error::TopologyParse { line: 1, .. })
        ));
        assert!(matches!(
            Topology::from_text("pco-topology v1 n=3\n0 1 2\n"),
            Err(Error::TopologyParse { line: 2, .. })
        ));
    }

    fn sparse_complement(n: usize, k: usize) -> Topology {
        // remove the k nearest ring neighbours (k odd → symmetric with the antipode)
        let removed = |i: usize, j: usize| {
            let diff = (i + n - j) % n;
            let dist = diff.min(n - diff);
            dist <= k / 2 || (k % 2 == 1 && dist == n / 2)
        };
        let edges = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i && !removed(i, j)).map(move |j| (i, j)));
        Topology::from_edges(n, edges).unwrap()
    }
}
