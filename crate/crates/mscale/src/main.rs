//! `mscale` command line: evaluate the multiscale statistic on data,
//! simulate null quantile tables, and run the runtime-scaling benchmark.
//!
//! Exit codes: 0 success, 2 usage/parse error, 3 infeasible data, 4 I/O.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mscale::cli::{
    bench_records_to_csv, parse_grid, parse_observations, run_bench, write_atomic, Method,
    DEFAULT_CUBIC_CAP, DEFAULT_QUADRATIC_CAP,
};
use mscale::engine::{evaluate_tn, ObservationSeries};
use mscale::model::{ModelSpec, PenaltySpec};
use mscale::simulate::{simulate_null, SimulationPlan};
use mscale::Error;

#[derive(Parser)]
#[command(name = "mscale", version, about = "Multiscale change-point statistic toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the statistic on a newline-delimited observation file
    Stat {
        /// Input file, one observation per line (`#` comments allowed)
        input: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Simulate null quantiles by Monte Carlo and write them as CSV
    Quantile {
        #[command(flatten)]
        model: ModelArgs,
        /// Sample size of each simulated series
        #[arg(long)]
        n: usize,
        /// Number of Monte Carlo repetitions
        #[arg(long, default_value_t = 5000)]
        reps: usize,
        /// Comma-separated significance levels in (0,1), increasing
        #[arg(long, default_value = "0.05,0.1,0.5", value_delimiter = ',')]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for the repetition loop
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Time the evaluators over a size grid and write CSV records
    Bench {
        /// Geometric size grid `start:end:xF`, e.g. 2000:100000:x2
        #[arg(long = "n-grid", default_value = "2000:100000:x2")]
        n_grid: String,
        /// Repetitions per (n, method) cell
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Comma-separated subset of linear,quadratic,cubic
        #[arg(long, default_value = "linear", value_delimiter = ',')]
        methods: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Skip the quadratic method above this n
        #[arg(long, default_value_t = DEFAULT_QUADRATIC_CAP)]
        quad_cap: usize,
        /// Skip the cubic method above this n
        #[arg(long, default_value_t = DEFAULT_CUBIC_CAP)]
        cubic_cap: usize,
        /// Output CSV path (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum FamilyArg {
    Gaussian,
    Poisson,
    Bernoulli,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum PenaltyArg {
    Fms,
    None,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: FamilyArg,
    /// Gaussian noise scale
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Poisson null mean
    #[arg(long, default_value_t = 1.0)]
    lambda0: f64,
    /// Bernoulli null success probability
    #[arg(long, default_value_t = 0.5)]
    p0: f64,
    #[arg(long, value_enum, default_value_t = PenaltyArg::Fms)]
    penalty: PenaltyArg,
}

impl ModelArgs {
    fn build(&self, n: usize) -> Result<ModelSpec, Error> {
        let penalty = match self.penalty {
            PenaltyArg::Fms => PenaltySpec::Fms,
            PenaltyArg::None => PenaltySpec::Zero,
        };
        match self.model {
            FamilyArg::Gaussian => ModelSpec::gaussian(self.sigma, penalty, n),
            FamilyArg::Poisson => ModelSpec::poisson(self.lambda0, penalty, n),
            FamilyArg::Bernoulli => ModelSpec::bernoulli(self.p0, penalty, n),
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_) | Error::RejectedPenalty(_) => 2,
        Error::InfeasibleData(_) => 3,
        Error::Io(_) => 4,
    }
}

fn emit(out: Option<&PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => write_atomic(path, content).map_err(Error::Io),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Stat { input, model } => {
            let text = std::fs::read_to_string(&input)?;
            let values = parse_observations(&text)?;
            let spec = model.build(values.len())?;
            let objective = spec.objective()?;
            let series = ObservationSeries::new(values)?;
            let result = evaluate_tn(&series, &objective)?;
            println!("t_n={:.6} i={} j={}", result.t_n, result.argmax.0, result.argmax.1);
            Ok(())
        }
        Command::Quantile { model, n, reps, alpha, seed, out, threads } => {
            let spec = model.build(n)?;
            let plan = SimulationPlan::new(spec, reps, seed, alpha)?;
            let table = run_in_pool(threads, || simulate_null(&plan))?;
            emit(out.as_ref(), &table.to_csv())
        }
        Command::Bench { n_grid, reps, methods, seed, quad_cap, cubic_cap, out } => {
            let sizes = parse_grid(&n_grid)?;
            let methods: Vec<Method> =
                methods.iter().map(|m| m.parse()).collect::<Result<_, _>>()?;
            let records = run_bench(&sizes, &methods, reps, seed, quad_cap, cubic_cap)?;
            emit(out.as_ref(), &bench_records_to_csv(&records, seed))
        }
    }
}

#[cfg(feature = "parallel")]
fn run_in_pool<T>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T, Error> + Send,
) -> Result<T, Error>
where
    T: Send,
{
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            pool.install(f)
        }
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_in_pool<T>(
    _threads: Option<usize>,
    f: impl FnOnce() -> Result<T, Error> + Send,
) -> Result<T, Error>
where
    T: Send,
{
    f()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
