use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use codeconv::experiments::{load_experiment_file, ExperimentFile, ExperimentName, FailureDraw, VERSION};
use codeconv::scenario::{ScenarioConfig, StragglerMode, DEFAULT_SCALE};
use codeconv::strategies::StrategyKind;
use codeconv::Error;

#[derive(Parser)]
#[command(name = "codeconv", version = VERSION, about = "Simulate coded distributed convolution over mobile workers")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// First episode seed; repetition r uses seed + r.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Repetitions per data point.
    #[arg(long, global = true, default_value_t = 25)]
    reps: usize,
    /// Output directory for CSV files and manifests.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// Divide the reference vector lengths by this factor.
    #[arg(long, global = true, default_value_t = DEFAULT_SCALE)]
    scale: usize,
    /// Worker threads for running episodes (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Reference scenarios to run, e.g. `1` or `1,2,3,4`.
    #[arg(long, value_delimiter = ',')]
    scenario: Vec<usize>,
    /// Override the dynamic strategy's piece length.
    #[arg(long)]
    b: Option<usize>,
    /// Override the traditional strategy's sub-vector length.
    #[arg(long)]
    s: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Mean dynamic-strategy time as a function of the piece length b.
    SweepB {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Piece lengths to try (default: N2 / 2^k for k = 0..=5).
        #[arg(long = "b-values", value_delimiter = ',')]
        b_values: Vec<usize>,
        /// Fraction of 15x-delayed stragglers.
        #[arg(long, default_value_t = 0.0)]
        ratio: f64,
    },
    /// All three strategies at one straggler ratio.
    Compare {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 0.5)]
        ratio: f64,
        /// Delay factor applied to stragglers.
        #[arg(long, default_value_t = 15.0)]
        factor: f64,
    },
    /// All three strategies over a range of straggler ratios.
    Stress {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Ratios to test (default: k/P for k = 0..=P).
        #[arg(long, value_delimiter = ',')]
        ratios: Vec<f64>,
        #[arg(long, default_value_t = 15.0)]
        factor: f64,
    },
    /// Success rates under permanent worker failures.
    SuccessRate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 2000)]
        runs: usize,
        /// Draw failure counts independently instead of balancing them.
        #[arg(long, conflicts_with = "per_worker")]
        iid: bool,
        /// Fail each worker independently with this probability.
        #[arg(long)]
        per_worker: Option<f64>,
    },
    /// One episode with its event log exported.
    Episode {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "dynamic")]
        strategy: String,
        #[arg(long, default_value_t = 0.0)]
        ratio: f64,
    },
    /// Run the experiment described by a TOML file.
    Run { config: PathBuf },
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn scenarios(args: &ScenarioArgs, default: &[usize], scale: usize) -> Result<Vec<ScenarioConfig>, Error> {
    let ids = if args.scenario.is_empty() { default.to_vec() } else { args.scenario.clone() };
    ids.into_iter()
        .map(|i| {
            let mut sc = ScenarioConfig::preset(i, scale)?;
            if args.b.is_some() {
                sc.b = args.b;
            }
            if args.s.is_some() {
                sc.s = args.s;
            }
            Ok(sc)
        })
        .collect()
}

fn plan(cli: &Cli) -> Result<ExperimentFile, Error> {
    let c = &cli.common;
    let mut p = match &cli.command {
        Command::Run { config } => return load_experiment_file(config),
        Command::SweepB { scenario, b_values, ratio } => {
            let scs = scenarios(scenario, &[1], c.scale)?
                .into_iter()
                .map(|sc| sc.with_stragglers(*ratio, StragglerMode::Delayed(15.0)))
                .collect();
            let mut p = ExperimentFile::new(ExperimentName::SweepB, scs);
            p.b_values = b_values.clone();
            p
        }
        Command::Compare { scenario, ratio, factor } => {
            let scs = scenarios(scenario, &[1, 2, 3, 4], c.scale)?
                .into_iter()
                .map(|sc| sc.with_stragglers(*ratio, StragglerMode::Delayed(*factor)))
                .collect();
            let mut p = ExperimentFile::new(ExperimentName::Compare, scs);
            p.ratio = *ratio;
            p
        }
        Command::Stress { scenario, ratios, factor } => {
            let scs: Vec<ScenarioConfig> = scenarios(scenario, &[4], c.scale)?
                .into_iter()
                .map(|sc| sc.with_stragglers(0.0, StragglerMode::Delayed(*factor)))
                .collect();
            let mut p = ExperimentFile::new(ExperimentName::Stress, scs.clone());
            if !ratios.is_empty() {
                p.ratios = ratios.clone();
            } else if let Some(sc) = scs.first() {
                let n = sc.workers;
                p.ratios = (0..=n).map(|k| k as f64 / n as f64).collect();
            }
            p
        }
        Command::SuccessRate { scenario, runs, iid, per_worker } => {
            let scs = scenarios(scenario, &[1, 2, 3, 4], c.scale)?
                .into_iter()
                .map(|sc| sc.with_stragglers(0.0, StragglerMode::Fail { at: 0.0 }))
                .collect();
            let mut p = ExperimentFile::new(ExperimentName::SuccessRate, scs);
            p.runs = *runs;
            p.failure_draw = match (iid, per_worker) {
                (_, Some(q)) => FailureDraw::PerWorker(*q),
                (true, None) => FailureDraw::UniformCount,
                (false, None) => FailureDraw::Balanced,
            };
            p
        }
        Command::Episode { scenario, strategy, ratio } => {
            let scs = scenarios(scenario, &[1], c.scale)?
                .into_iter()
                .map(|sc| sc.with_stragglers(*ratio, StragglerMode::Delayed(15.0)))
                .collect();
            let mut p = ExperimentFile::new(ExperimentName::Episode, scs);
            p.strategy = strategy.parse::<StrategyKind>()?;
            p
        }
    };
    p.reps = c.reps;
    p.seed = c.seed;
    p.validate()?;
    Ok(p)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.common.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.common.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    let plan = match plan(&cli) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    match plan.execute(&cli.common.out) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
