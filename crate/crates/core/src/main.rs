use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use polystab::numerics::Verdict;
use polystab::report::{self, ExperimentConfig, ExperimentOutcome};
use polystab::Error;

#[derive(Parser)]
#[command(name = "polystab", version, about = "Decay rates of semigroups and their Cayley transforms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weighted semigroup decay (paper-example-semigroup, rate-normalization)
    SemigroupDecay(RunArgs),
    /// Cayley power decay (paper-example-cayley, paper-example-optimality, normal-case-envelope, guo-zwart)
    CayleyDecay(RunArgs),
    /// Lyapunov experiments (lyapunov-limit-scan, lyapunov-cross-validation, plancherel-bridge, trajectory-bound)
    Lyapunov(RunArgs),
    /// Perturbation experiments (perturbation-robustness, perturbed-lyapunov, resolvent-factorization)
    Perturb(RunArgs),
    /// The three rate experiments on the diagonal example operator
    ExamplePaper {
        /// Output directory; one subdirectory per experiment
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a preset of experiments with default parameters
    Suite {
        /// paper, properties or all
        #[arg(default_value = "paper")]
        preset: String,
        /// Output directory; one subdirectory per experiment plus summary.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List registered experiments
    List,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config JSON
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's `outputs`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Experiment id (overrides the config's `experiment_id`)
    #[arg(long)]
    experiment: Option<String>,
    /// Operator JSON file (overrides the config's `operator`)
    #[arg(long)]
    operator: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    /// Comma-separated list, e.g. 0.25,0.5
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Grid as start,stop,points
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
}

struct Family {
    name: &'static str,
    default: &'static str,
    members: &'static [&'static str],
}

const SEMIGROUP: Family = Family {
    name: "semigroup-decay",
    default: "paper-example-semigroup",
    members: &["paper-example-semigroup", "rate-normalization"],
};
const CAYLEY: Family = Family {
    name: "cayley-decay",
    default: "paper-example-cayley",
    members: &["paper-example-cayley", "paper-example-optimality", "normal-case-envelope", "guo-zwart"],
};
const LYAPUNOV: Family = Family {
    name: "lyapunov",
    default: "lyapunov-limit-scan",
    members: &["lyapunov-limit-scan", "lyapunov-cross-validation", "plancherel-bridge", "trajectory-bound"],
};
const PERTURB: Family = Family {
    name: "perturb",
    default: "perturbation-robustness",
    members: &["perturbation-robustness", "perturbed-lyapunov", "resolvent-factorization"],
};

fn build_config(family: &Family, args: RunArgs) -> polystab::Result<(ExperimentConfig, Option<PathBuf>)> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(family.default),
    };
    if let Some(id) = args.experiment {
        cfg.experiment_id = id;
    }
    if !family.members.contains(&cfg.experiment_id.as_str()) {
        return Err(Error::config(
            "experiment_id",
            format!(
                "'{}' is not run by {} (expected one of: {})",
                cfg.experiment_id,
                family.name,
                family.members.join(", ")
            ),
        ));
    }
    if let Some(path) = &args.operator {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        let value: Value =
            serde_json::from_str(&text).map_err(|e| Error::config("operator", format!("invalid JSON: {e}")))?;
        cfg.operator = Some(value);
    }
    let scalars = [
        ("alpha", args.alpha),
        ("beta", args.beta),
        ("r", args.r),
        ("tolerance", args.tolerance),
    ];
    for (key, v) in scalars {
        if let Some(v) = v {
            cfg.set(key, json!(v));
        }
    }
    if let Some(g) = args.gammas {
        cfg.set("gammas", json!(g));
    }
    if let Some(s) = args.seed {
        cfg.set("seed", json!(s));
    }
    if let Some(t) = args.trials {
        cfg.set("trials", json!(t));
    }
    if let Some(g) = args.grid {
        if g.len() != 3 {
            return Err(Error::config("grid", format!("expected start,stop,points, got {} values", g.len())));
        }
        let points = g[2];
        if !(points >= 0.0 && points.fract() == 0.0) {
            return Err(Error::config("grid", format!("points must be a nonnegative integer, got {points}")));
        }
        cfg.set("grid", json!({"start": g[0], "stop": g[1], "points": points as u64}));
    }
    let out = args.out.or_else(|| cfg.outputs.clone());
    Ok((cfg, out))
}

fn print_outcome(o: &ExperimentOutcome, out: Option<&Path>) {
    let r = &o.report;
    println!("{}: {}", r.experiment_id, r.verdict);
    if let Some(f) = &r.fitted {
        println!(
            "  fitted exponent {:.4} (r^2 {:.5}) over [{}, {}]",
            f.exponent, f.r_squared, f.window.0, f.window.1
        );
    }
    if let Some(g) = &r.guarantee {
        println!(
            "  guarantee exponent {:.4}{}",
            g.exponent,
            if g.log_factor { " with log factor" } else { "" }
        );
    }
    for c in &r.checks {
        println!(
            "  [{}{}] {} = {:.6e} ({})",
            if c.pass { "ok" } else { "FAILED" },
            if c.gating { "" } else { ", observation" },
            c.name,
            c.value,
            c.condition
        );
    }
    for n in &r.notes {
        println!("  note: {n}");
    }
    if let Some(dir) = out {
        println!("  wrote {}", dir.display());
    }
}

fn run_one(family: &Family, args: RunArgs) -> polystab::Result<bool> {
    let (cfg, out) = build_config(family, args)?;
    let outcome = match &out {
        Some(dir) => report::run_and_write(&cfg, dir)?,
        None => report::run_experiment(&cfg)?,
    };
    print_outcome(&outcome, out.as_deref());
    Ok(outcome.report.verdict != Verdict::Fail)
}

fn run(cli: Cli) -> polystab::Result<bool> {
    match cli.command {
        Command::SemigroupDecay(a) => run_one(&SEMIGROUP, a),
        Command::CayleyDecay(a) => run_one(&CAYLEY, a),
        Command::Lyapunov(a) => run_one(&LYAPUNOV, a),
        Command::Perturb(a) => run_one(&PERTURB, a),
        Command::ExamplePaper { out } => {
            let mut ok = true;
            for id in ["paper-example-semigroup", "paper-example-cayley", "paper-example-optimality"] {
                let cfg = ExperimentConfig::new(id);
                let dir = out.as_ref().map(|d| d.join(id));
                let outcome = match &dir {
                    Some(d) => report::run_and_write(&cfg, d)?,
                    None => report::run_experiment(&cfg)?,
                };
                print_outcome(&outcome, dir.as_deref());
                ok &= outcome.report.verdict != Verdict::Fail;
            }
            Ok(ok)
        }
        Command::Suite { preset, out } => {
            let summary = report::suite(&preset, out.as_deref())?;
            print!("{}", summary.table());
            Ok(!summary.failed())
        }
        Command::List => {
            for e in report::REGISTRY {
                println!("{:<26} {:?}  {}", e.id, e.preset, e.claim);
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
