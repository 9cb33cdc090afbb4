use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fdra::experiment::{load_config, parse_list, run_experiment, Overrides, RunConfig, RunStatus, Summary};
use fdra::schedulers::Algorithm;

/// Downlink FDRA scheduling simulator.
#[derive(Parser, Debug)]
#[command(name = "fdra", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a single algorithm at a single UE count.
    Run(RunArgs),
    /// Run every (algorithm, UE count) pair of the configuration.
    Sweep(RunArgs),
    /// Parse and check a configuration file, then print the sweep plan.
    ValidateConfig {
        #[arg(long, env = "FDRA_CONFIG")]
        config: PathBuf,
    },
    /// List the registered scheduling algorithms.
    ListAlgorithms,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, env = "FDRA_CONFIG")]
    config: Option<PathBuf>,
    /// Algorithm name(s), comma separated.
    #[arg(long, env = "FDRA_ALGO", value_delimiter = ',', value_parser = parse_algorithm)]
    algo: Option<Vec<Algorithm>>,
    /// UE counts, e.g. `10,20,30` or `10..51`.
    #[arg(long, env = "FDRA_UES")]
    ues: Option<String>,
    /// Seeds, e.g. `0..10` or `1,2,3`.
    #[arg(long, env = "FDRA_SEEDS")]
    seeds: Option<String>,
    /// Slots per seed.
    #[arg(long, env = "FDRA_SLOTS")]
    slots: Option<u64>,
    /// Output directory for results.csv and summary.json.
    #[arg(long, env = "FDRA_OUT")]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "FDRA_PARALLEL")]
    parallel: Option<usize>,
    /// Print the resolved sweep plan and exit.
    #[arg(long, env = "FDRA_DRY_RUN")]
    dry_run: bool,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.trim().parse().map_err(|e: fdra::Error| e.to_string())
}

fn list<T: std::str::FromStr + TryFrom<u64>>(flag: &str, s: &str) -> fdra::Result<Vec<T>> {
    parse_list(s).map_err(|e| fdra::Error::Config(format!("--{flag}: {e}")))
}

impl RunArgs {
    fn resolve(&self) -> fdra::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => load_config(p)?,
            None => RunConfig::default(),
        };
        cfg.apply(&Overrides {
            algorithms: self.algo.clone(),
            ues: self.ues.as_deref().map(|s| list("ues", s)).transpose()?,
            seeds: self.seeds.as_deref().map(|s| list("seeds", s)).transpose()?,
            slots: self.slots,
            out_dir: self.out.clone(),
            parallel: self.parallel,
        });
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_summary(s: &Summary) {
    for run in &s.runs {
        match (&run.status, &run.report) {
            (RunStatus::Ok, Some(r)) => println!(
                "{:<16} ues={:<4} throughput={:.3} Mbit/s loss={:.4} tbs_calcs/slot={:.1}",
                run.algorithm.name(),
                run.num_ues,
                r.aggregate.throughput_bps.mean / 1e6,
                r.aggregate.loss_rate.mean,
                r.counters.tbs_calcs_per_call.mean,
            ),
            _ => println!(
                "{:<16} ues={:<4} ABORTED: {}",
                run.algorithm.name(),
                run.num_ues,
                run.error.as_deref().unwrap_or("unknown error")
            ),
        }
    }
}

fn execute(args: &RunArgs, single: bool) -> fdra::Result<ExitCode> {
    let cfg = args.resolve()?;
    if single && (cfg.algorithms.len() != 1 || cfg.ues.len() != 1) {
        return Err(fdra::Error::Config(
            "run: exactly one algorithm and one UE count are required (use `sweep` for lists)".into(),
        ));
    }
    if args.dry_run {
        print!("{}", cfg.describe_plan());
        return Ok(ExitCode::SUCCESS);
    }
    let summary = run_experiment(&cfg)?;
    print_summary(&summary);
    println!("results written to {}", cfg.out_dir.display());
    let aborted = summary.aborted();
    if aborted > 0 {
        eprintln!("error: {aborted} run(s) aborted; their rows are marked `aborted`");
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Run(a) => execute(a, true),
        Command::Sweep(a) => execute(a, false),
        Command::ValidateConfig { config } => load_config(config).map(|cfg| {
            println!("ok: {}", config.display());
            print!("{}", cfg.describe_plan());
            ExitCode::SUCCESS
        }),
        Command::ListAlgorithms => {
            for a in Algorithm::ALL {
                println!("{:<16} {}", a.name(), a.description());
            }
            Ok(ExitCode::SUCCESS)
        }
    };
    res.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
