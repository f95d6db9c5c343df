use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use matvec_lab::experiments::{self, csv_string, emit_csv, show_config, ConfigMap, ExperimentKind, Outcome};
use matvec_lab::operators::hard_spectrum;

#[derive(Parser, Debug)]
#[command(name = "matvec-lab", version, about = "Low-rank approximation experiments in the matrix-vector query model")]
struct Cli {
    /// Worker threads for trial-level parallelism.
    #[arg(long, env = "MATVEC_LAB_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the hard spectrum for (n, eps, q) as `value,multiplicity` lines.
    GenInstance(GenArgs),
    /// Single-vector Krylov on the hard instance: correlation and error against q.
    LowerSingle(RunArgs),
    /// Block Krylov on the hard instance over an (r, s) grid or a fixed budget.
    LowerBlock(RunArgs),
    /// Rectangular Krylov on a spectrum library, Schatten-p error against t.
    UpperSchatten(RunArgs),
    /// Good-vector polynomials on one fixed spectrum per case.
    GoodVector(RunArgs),
    /// Adaptive algorithms against the block Krylov simulator.
    LiftSim(RunArgs),
    /// Chebyshev growth at 1 + eps against its exponential envelope.
    ChebEnvelope(RunArgs),
    /// Print every config key with its default for an experiment.
    ShowConfig { experiment: Option<String> },
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long = "q-spec", alias = "q")]
    q_spec: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// key = value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long = "q-spec")]
    q_spec: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    budget: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// CSV path; `-` or absent writes to stdout.
    #[arg(long)]
    out: Option<String>,
    /// Any other key, as KEY=VALUE. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Skip the single rerun with 4x trials after a statistical failure.
    #[arg(long)]
    no_rerun: bool,
}

impl RunArgs {
    fn config_map(&self) -> anyhow::Result<ConfigMap> {
        let mut map = match &self.config {
            Some(path) => ConfigMap::read_file(path)?,
            None => ConfigMap::new(),
        };
        let flags = [
            ("n", &self.n),
            ("d", &self.d),
            ("eps", &self.eps),
            ("p", &self.p),
            ("q_spec", &self.q_spec),
            ("q", &self.q),
            ("r", &self.r),
            ("s", &self.s),
            ("t", &self.t),
            ("k", &self.k),
            ("budget", &self.budget),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("out", &self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                map.set(key, v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got '{kv}'"))?;
            map.set(k.trim(), v.trim())?;
        }
        Ok(map)
    }
}

/// Process outcome before it becomes an exit code.
enum Status {
    Pass,
    Fail,
}

fn report(outcome: &Outcome, label: &str) {
    for c in &outcome.checks {
        eprintln!("{label}{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
}

fn run_experiment(kind: ExperimentKind, args: &RunArgs) -> anyhow::Result<Status> {
    let cfg = args.config_map()?.resolve(kind)?;
    log::info!("running {kind} with seed {}", cfg.seed);
    let deciding = if args.no_rerun {
        experiments::run(&cfg)?
    } else {
        let (first, second) = experiments::run_with_rerun(&cfg)?;
        match second {
            Some(second) => {
                report(&first, "[first run] ");
                second
            }
            None => first,
        }
    };
    match &cfg.out {
        Some(path) => emit_csv(&deciding.rows, path)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(csv_string(&deciding.rows).as_bytes())?;
            stdout.flush()?;
        }
    }
    report(&deciding, "");
    Ok(if deciding.passed() { Status::Pass } else { Status::Fail })
}

fn gen_instance(args: &GenArgs) -> anyhow::Result<Status> {
    let spec = hard_spectrum(args.n, args.eps, args.q_spec)?;
    match &args.out {
        Some(path) => spec.write_file(path)?,
        None => print!("{}", spec.to_text()),
    }
    Ok(Status::Pass)
}

fn dispatch(cli: &Cli) -> anyhow::Result<Status> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::GenInstance(a) => gen_instance(a),
        Command::LowerSingle(a) => run_experiment(ExperimentKind::LowerSingle, a),
        Command::LowerBlock(a) => run_experiment(ExperimentKind::LowerBlock, a),
        Command::UpperSchatten(a) => run_experiment(ExperimentKind::UpperSchatten, a),
        Command::GoodVector(a) => run_experiment(ExperimentKind::GoodVector, a),
        Command::LiftSim(a) => run_experiment(ExperimentKind::LiftSim, a),
        Command::ChebEnvelope(a) => run_experiment(ExperimentKind::ChebEnvelope, a),
        Command::ShowConfig { experiment } => {
            let kinds = match experiment {
                Some(name) => vec![name.parse::<ExperimentKind>()?],
                None => ExperimentKind::ALL.to_vec(),
            };
            for kind in kinds {
                println!("{}", show_config(kind));
            }
            Ok(Status::Pass)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
