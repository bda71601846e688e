use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pco_core::experiment::{
    self, run_delay_sweep, run_experiment, run_verification, Campaign, ExperimentSpec, Horizon, Sweep,
};
use pco_core::graph::{check_admissibility, generate_geometric, GeometricParams};
use pco_core::{MechanismKind, Topology};

/// Pulse-coupled oscillator synchronization experiments.
#[derive(Parser)]
#[command(name = "pco", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON file.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a named preset (`pco scenario list` prints the catalog).
    Scenario {
        name: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Randomized property-verification campaign.
    Verify {
        campaign: PathBuf,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report as JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Delay-robustness sweep; prints or writes a CSV table.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Generate or inspect topologies.
    Topo {
        #[command(subcommand)]
        command: TopoCommand,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    mechanism: Option<MechanismKind>,
    #[arg(long)]
    coupling: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Seconds, or periods with a `T` suffix (`200T`).
    #[arg(long)]
    horizon: Option<Horizon>,
    #[arg(long)]
    reps: Option<usize>,
    /// Trace CSV path (repetitions after the first get a `-repK` suffix).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Summary JSON path.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Directory for outputs not given explicitly.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum TopoCommand {
    /// Random geometric deployment.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100.0)]
        side: f64,
        #[arg(long, default_value_t = 50.0)]
        radius: f64,
        #[arg(long, default_value_t = 0)]
        min_degree: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Degree statistics and admissibility of a topology file.
    Check {
        file: PathBuf,
        #[arg(long, default_value = "m1")]
        mechanism: MechanismKind,
        #[arg(long, default_value_t = 0)]
        attackers: usize,
        #[arg(long)]
        colluding: bool,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, run } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let spec = ExperimentSpec::from_json(&text)?;
            execute(spec, run)
        }
        Command::Scenario { name, run } => {
            if name == "list" {
                for s in experiment::SCENARIOS {
                    println!("{s}");
                }
                return Ok(());
            }
            execute(experiment::scenario(&name)?, run)
        }
        Command::Verify { campaign, reps, seed, report } => {
            let text = fs::read_to_string(&campaign).with_context(|| format!("reading {}", campaign.display()))?;
            let mut c = Campaign::from_json(&text)?;
            if let Some(r) = reps {
                c.reps = r;
            }
            if let Some(s) = seed {
                c.seed = s;
            }
            let result = run_verification(&c)?;
            for (name, tally) in &result.tallies {
                println!("{name}: {} passed, {} failed", tally.passed, tally.failed);
            }
            for f in &result.failures {
                println!("FAIL {f}");
            }
            if let Some(path) = report {
                write(&path, &serde_json::to_string_pretty(&result)?)?;
            }
            if result.total_failures() > 0 {
                bail!("{} property violations over {} runs", result.total_failures(), result.runs);
            }
            Ok(())
        }
        Command::Sweep { config, reps, seed, out } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut s = Sweep::from_json(&text)?;
            if let Some(r) = reps {
                s.reps = r;
            }
            if let Some(v) = seed {
                s.seed = v;
            }
            let csv = experiment::sweep_csv(&run_delay_sweep(&s)?);
            match out {
                Some(path) => write(&path, &csv),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
        Command::Topo { command } => topo(command),
    }
}

fn execute(mut spec: ExperimentSpec, args: RunArgs) -> Result<()> {
    if let Some(m) = args.mechanism {
        spec.mechanism = m;
    }
    if let Some(l) = args.coupling {
        spec.coupling = l;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(h) = args.horizon {
        spec.horizon = h;
    }
    if let Some(r) = args.reps {
        spec.repetitions = r;
    }
    let trace_path = args
        .trace
        .or_else(|| spec.outputs.trace.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| args.out_dir.join(format!("{}.csv", spec.name)));
    let summary_path = args
        .summary
        .or_else(|| spec.outputs.summary.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| args.out_dir.join(format!("{}.summary.json", spec.name)));

    let results = run_experiment(&spec)?;
    for r in &results {
        let path = if r.rep == 0 { trace_path.clone() } else { with_rep_suffix(&trace_path, r.rep) };
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        r.trace
            .write_csv(std::io::BufWriter::new(file))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let summaries: Vec<_> = results.iter().map(|r| &r.summary).collect();
    let json = if summaries.len() == 1 {
        serde_json::to_string_pretty(summaries[0])?
    } else {
        serde_json::to_string_pretty(&summaries)?
    };
    write(&summary_path, &json)?;
    println!("{json}");
    for r in &results {
        for o in &r.outcomes {
            println!("{} {} (rep {})", if o.passed { "PASS" } else { "FAIL" }, o.check.name(), r.rep);
        }
    }
    if let Some((r, o)) = results.iter().find_map(|r| r.first_failure().map(|o| (r.rep, o))) {
        bail!("assertion `{}` failed in repetition {r}: {}", o.check.name(), o.detail);
    }
    Ok(())
}

fn with_rep_suffix(path: &Path, rep: usize) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-rep{rep}.{}", ext.to_string_lossy()),
        None => format!("{stem}-rep{rep}"),
    };
    path.with_file_name(name)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn topo(cmd: TopoCommand) -> Result<()> {
    match cmd {
        TopoCommand::Gen { n, seed, side, radius, min_degree, out } => {
            let params = GeometricParams {
                area_side: side,
                radius,
                min_degree,
                ..GeometricParams::new(n, seed)
            };
            let text = generate_geometric(&params)?.to_text();
            match out {
                Some(path) => write(&path, &text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        TopoCommand::Check { file, mechanism, attackers, colluding } => {
            let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let topo = Topology::from_text(&text)?;
            let n = topo.node_count();
            let mech = experiment::mechanism_config(mechanism, 0.5, n);
            println!("nodes {n}, edges {}, network degree {}", topo.edge_count(), topo.network_degree());
            println!("connected {}, symmetric {}", topo.is_connected(), topo.is_symmetric());
            let report = check_admissibility(&topo, &mech, attackers, colluding);
            println!("attacker bound M <= {}", report.bound_on_m);
            for v in &report.violated {
                println!("violated: {v}");
            }
            if !report.admissible {
                bail!("topology is not admissible for {}", mechanism.name());
            }
            println!("admissible");
            Ok(())
        }
    }
}
