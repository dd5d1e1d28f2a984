use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use roadsearch_core::harness::{
    self, parse_config, render_failures, replay, summary_table, write_report, write_summary,
    Archive, Config, HarnessError, SutDescriptor,
};
use roadsearch_core::search::{Budget, LogReporter, SutFault, Variant};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_PROTOCOL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "roadsearch",
    version,
    about = "Search-based road generation for lane-keeping tests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the genetic search and write an archive, a summary table and
    /// renderings of failing roads.
    Run(RunArgs),
    /// Re-execute one archived test and check that the verdict is unchanged.
    Replay {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long = "test")]
        test_id: u64,
        /// SUT command; required for archives produced by an external SUT.
        #[arg(long)]
        sut: Option<String>,
    },
    /// Draw every failing test of an archive as SVG.
    Render {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the built-in simulator over the external-SUT protocol on
    /// standard input and output.
    #[command(hide = true)]
    Sut,
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, conflicts_with = "budget_seconds")]
    budget_evals: Option<u64>,
    #[arg(long)]
    budget_seconds: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    /// Shell command of an external SUT speaking the line protocol.
    #[arg(long)]
    sut: Option<String>,
    /// Independent runs with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    runs: u32,
    /// Admit offspring only if they raise the population's Fréchet diversity.
    #[arg(long)]
    novelty: bool,
    /// Evaluate offspring on all cores.
    #[arg(long)]
    parallel: bool,
}

fn exit_code(e: &HarnessError) -> u8 {
    match e {
        HarnessError::Syntax(_) | HarnessError::Config { .. } | HarnessError::Search(_) => {
            EXIT_CONFIG
        }
        _ => EXIT_FAILURE,
    }
}

fn build_config(args: &RunArgs) -> Result<Config, HarnessError> {
    let mut config = match &args.config {
        Some(path) => parse_config(path)?,
        None => Config::default(),
    };
    if let Some(v) = args.variant {
        let explicit_pop =
            config.search.population_size != config.search.variant.default_population();
        let explicit_budget = config.search.budget != config.search.variant.default_budget();
        config.search.variant = v;
        if !explicit_pop {
            config.search.population_size = v.default_population();
        }
        if !explicit_budget {
            config.search.budget = v.default_budget();
        }
    }
    if let Some(s) = args.seed {
        config.search.seed = s;
    }
    if let Some(n) = args.budget_evals {
        config.search.budget = Budget::Evaluations(n);
    }
    if let Some(s) = args.budget_seconds {
        config.search.budget = Budget::WallTime(s);
    }
    if let Some(cmd) = &args.sut {
        config.sut = SutDescriptor {
            timeout: config.sut.timeout,
            ..SutDescriptor::external(cmd.clone())
        };
    }
    config.search.novelty_filter |= args.novelty;
    config.search.parallel |= args.parallel;
    config.check()?;
    Ok(config)
}

fn faults(archive: &Archive) -> usize {
    archive
        .run
        .records
        .iter()
        .filter(|r| {
            matches!(
                r.fault,
                Some(SutFault::Spawn(_) | SutFault::Timeout | SutFault::Protocol(_))
            )
        })
        .count()
}

fn run(args: RunArgs) -> Result<u8, HarnessError> {
    let config = build_config(&args)?;
    let mut archives = Vec::new();
    for i in 0..args.runs {
        let mut c = config.clone();
        c.search.seed = config.search.seed.wrapping_add(i as u64);
        let dir = if args.runs == 1 {
            args.out.clone()
        } else {
            args.out.join(format!("run_{}", i + 1))
        };
        log::info!(
            "run {} of {}: variant {}, seed {}",
            i + 1,
            args.runs,
            c.search.variant,
            c.search.seed
        );
        let archive = harness::execute(&c, &mut LogReporter)?;
        if archive.run.partial_seed {
            log::warn!("budget ran out before the seed population was evaluated");
        }
        write_report(&archive, &dir)?;
        archives.push(archive);
    }
    let aggregates: Vec<_> = archives.iter().map(|a| a.aggregates).collect();
    if args.runs > 1 {
        write_summary(&aggregates, args.out.join("summary.csv"))?;
    }
    print!("{}", summary_table(&aggregates));

    let faulted: usize = archives.iter().map(faults).sum();
    if faulted > 0 {
        log::error!(
            "{faulted} test(s) hit SUT errors (spawn, timeout or protocol); they count as invalid"
        );
        return Ok(EXIT_PROTOCOL);
    }
    Ok(0)
}

fn replay_cmd(archive: &Path, test_id: u64, sut: Option<&str>) -> Result<u8, HarnessError> {
    let archive = Archive::load(archive)?;
    let e = replay(&archive, test_id, sut)?;
    println!(
        "test {test_id}: {} max_oob {} (matches archive)",
        e.verdict, e.fitness
    );
    Ok(0)
}

fn render_cmd(archive: &Path, out: &Path) -> Result<u8, HarnessError> {
    let archive = Archive::load(archive)?;
    let written = render_failures(&archive, out)?;
    println!("{} failing test(s) rendered", written.len());
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ROADSEARCH_LOG", "warn"))
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Replay {
            archive,
            test_id,
            sut,
        } => replay_cmd(&archive, test_id, sut.as_deref()),
        Command::Render { archive, out } => render_cmd(&archive, &out),
        Command::Sut => harness::serve(io::stdin().lock(), io::stdout().lock())
            .map(|_| 0)
            .map_err(|e| HarnessError::Io {
                path: PathBuf::from("<stdin>"),
                source: e,
            }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
