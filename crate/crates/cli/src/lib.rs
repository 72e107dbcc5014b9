//! Command-line runner: argument parsing, configuration and dispatch.

mod commands;
pub mod config;
mod output;

use std::ffi::OsString;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use gatekeeper_core::Scale;

use config::RunConfig;
use output::{Output, UsageError};

const SYNOPSIS: &str =
    "usage: gatekeeper [--config <path>] [--seed <u64>] [--out <dir>] [--force] [--threads <n>] \
<design|simulate|fit|equilibrium|sweep|des|analyze> [options]";

#[derive(Parser, Debug)]
#[command(
    name = "gatekeeper",
    version,
    about = "Chatbot/live-agent channel choice: experiments, estimation and staffing"
)]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory [default: out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    force: bool,
    /// Worker threads; the environment default is overridden by this flag.
    #[arg(long, global = true, env = "GATEKEEPER_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the decision grid.
    Design {
        #[arg(long, value_parser = parse_scale)]
        scale: Option<Scale>,
    },
    /// Simulate choices for the configured study.
    Simulate,
    /// Maximum-likelihood fit with bootstrap standard errors.
    Fit {
        /// Choice CSV; the configured synthetic study otherwise.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        bootstrap: Option<usize>,
    },
    /// Solve one scenario point.
    Equilibrium {
        #[arg(long)]
        t_bar: Option<f64>,
    },
    /// Staffing cost and savings over the wait grid.
    Sweep,
    /// Discrete-event check of the queueing formula.
    Des {
        #[arg(long)]
        arrivals: Option<usize>,
        #[arg(long)]
        replications: Option<usize>,
        /// Also write the per-customer trace.
        #[arg(long)]
        trace: bool,
    },
    /// Uptake tests on a choice dataset.
    Analyze {
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn parse_scale(s: &str) -> Result<Scale, String> {
    let n: u8 = s
        .parse()
        .map_err(|_| format!("scale must be 1 or 2, got {s}"))?;
    Scale::try_from(n).map_err(|e| e.to_string())
}

fn run(cli: Cli, command: Command) -> anyhow::Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(|e| UsageError(format!("{e:#}")))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    // flag and environment beat the config file
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads.or(cfg.threads) {
        if n == 0 {
            return Err(UsageError("--threads must be at least 1".into()).into());
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    let out = Output {
        dir: cli
            .out
            .or(cfg.out.clone())
            .unwrap_or_else(|| PathBuf::from("out")),
        force: cli.force,
    };
    pool.install(|| execute(cfg, &out, command))
}

fn execute(mut cfg: RunConfig, out: &Output, command: Command) -> anyhow::Result<()> {
    match command {
        Command::Design { scale } => {
            if let Some(s) = scale {
                cfg.design.scale = s;
            }
            commands::design(&cfg, out)
        }
        Command::Simulate => commands::simulate_cmd(&cfg, out),
        Command::Fit { input, bootstrap } => {
            if input.is_some() {
                cfg.fit.input = input;
            }
            if let Some(n) = bootstrap {
                cfg.fit.bootstrap_replicates = n;
            }
            commands::fit(&cfg, out)
        }
        Command::Equilibrium { t_bar } => {
            if let Some(t) = t_bar {
                cfg.equilibrium.t_bar_line = t;
            }
            commands::equilibrium(&cfg, out)
        }
        Command::Sweep => commands::sweep(&cfg, out),
        Command::Des {
            arrivals,
            replications,
            trace,
        } => {
            if let Some(n) = arrivals {
                cfg.des.n_arrivals = n;
            }
            if let Some(n) = replications {
                cfg.des.replications = n;
            }
            cfg.des.trace |= trace;
            commands::des(&cfg, out)
        }
        Command::Analyze { input } => {
            if input.is_some() {
                cfg.analyze.input = input;
            }
            commands::analyze(&cfg, out)
        }
    }
}

/// Runs one invocation and returns the process exit code: 0 on success, 1
/// on a usage error, 2 on a computation error.
pub fn dispatch<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return 0;
            }
            eprintln!("{SYNOPSIS}");
            return 1;
        }
    };
    let Some(command) = cli.command else {
        eprintln!("error: no subcommand given");
        eprintln!("{SYNOPSIS}");
        return 1;
    };
    match run(
        Cli {
            command: None,
            ..cli
        },
        command,
    ) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                eprintln!("{SYNOPSIS}");
                1
            } else {
                2
            }
        }
    }
}
