//! Machinery behind the `mscale` binary: observation-file parsing, the
//! benchmark harness with its CSV record format, and atomic output
//! writing. Kept in the library so the acceptance suite can drive the
//! harness directly.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use crate::engine::{evaluate_tn, oracle_tn, oracle_tn_naive, ObservationSeries};
use crate::model::Objective;
use crate::simulate::rng_substream;
use crate::{Error, Result};

/// Which evaluator a benchmark row timed.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Method {
    Linear,
    Quadratic,
    Cubic,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Linear => write!(f, "linear"),
            Method::Quadratic => write!(f, "quadratic"),
            Method::Cubic => write!(f, "cubic"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Method::Linear),
            "quadratic" => Ok(Method::Quadratic),
            "cubic" => Ok(Method::Cubic),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

/// One benchmark measurement: mean wall time of `method` at size `n` over
/// `reps` fresh datasets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchRecord {
    pub n: usize,
    pub method: Method,
    pub mean_seconds: f64,
    pub reps: usize,
}

/// Default size caps for the slow evaluators.
pub const DEFAULT_QUADRATIC_CAP: usize = 50_000;
pub const DEFAULT_CUBIC_CAP: usize = 2_000;

/// Parse a geometric grid spec `start:end:xF`, e.g. `2000:100000:x2`.
pub fn parse_grid(spec: &str) -> Result<Vec<usize>> {
    let err = || Error::InvalidArgument(format!("bad grid spec '{spec}', expected start:end:xF"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(err());
    }
    let start: usize = parts[0].parse().map_err(|_| err())?;
    let end: usize = parts[1].parse().map_err(|_| err())?;
    let factor: usize = parts[2].strip_prefix('x').ok_or_else(err)?.parse().map_err(|_| err())?;
    if start == 0 || end < start || factor < 2 {
        return Err(err());
    }
    let mut sizes = Vec::new();
    let mut n = start;
    while n <= end {
        sizes.push(n);
        match n.checked_mul(factor) {
            Some(next) => n = next,
            None => break,
        }
    }
    Ok(sizes)
}

/// Time the requested evaluators on fresh standard-normal data. Data
/// generation happens outside the timed region; only the evaluator call is
/// measured, and the mean over `reps` repetitions is recorded. Methods
/// over their cap at a given size are skipped.
pub fn run_bench(
    sizes: &[usize],
    methods: &[Method],
    reps: usize,
    seed: u64,
    quadratic_cap: usize,
    cubic_cap: usize,
) -> Result<Vec<BenchRecord>> {
    if reps == 0 {
        return Err(Error::InvalidArgument("bench reps must be at least 1".into()));
    }
    let mut records = Vec::new();
    for (size_index, &n) in sizes.iter().enumerate() {
        let objective = crate::model::gaussian_objective(1.0, n)?;
        for &method in methods {
            let capped = match method {
                Method::Linear => false,
                Method::Quadratic => n > quadratic_cap,
                Method::Cubic => n > cubic_cap,
            };
            if capped {
                continue;
            }
            let mut total = 0.0f64;
            for rep in 0..reps {
                let mut rng = rng_substream(seed, (size_index * reps + rep) as u64);
                let values: Vec<f64> = (0..n)
                    .map(|_| rand::Rng::sample::<f64, _>(&mut rng, rand_distr::StandardNormal))
                    .collect();
                let series = ObservationSeries::new(values)?;
                let start = Instant::now();
                let result = run_method(method, &series, &objective)?;
                total += start.elapsed().as_secs_f64();
                std::hint::black_box(result.t_n);
            }
            records.push(BenchRecord { n, method, mean_seconds: total / reps as f64, reps });
        }
    }
    Ok(records)
}

fn run_method(
    method: Method,
    series: &ObservationSeries,
    objective: &Objective,
) -> Result<crate::engine::StatisticResult> {
    match method {
        Method::Linear => evaluate_tn(series, objective),
        Method::Quadratic => oracle_tn(series, objective),
        Method::Cubic => oracle_tn_naive(series, objective),
    }
}

/// CSV for benchmark records, with a `#` metadata header.
pub fn bench_records_to_csv(records: &[BenchRecord], seed: u64) -> String {
    let mut out = String::new();
    out.push_str(&format!("# mscale bench seed={seed}\n"));
    out.push_str("n,method,mean_seconds,reps\n");
    for r in records {
        out.push_str(&format!("{},{},{},{}\n", r.n, r.method, r.mean_seconds, r.reps));
    }
    out
}

/// Parse the CSV produced by [`bench_records_to_csv`].
pub fn parse_bench_csv(text: &str) -> Result<Vec<BenchRecord>> {
    let mut records = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == "n,method,mean_seconds,reps" {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::InvalidArgument(format!("bad bench row '{line}'")));
        }
        records.push(BenchRecord {
            n: fields[0]
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad n in '{line}'")))?,
            method: fields[1].parse()?,
            mean_seconds: fields[2]
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad time in '{line}'")))?,
            reps: fields[3]
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad reps in '{line}'")))?,
        });
    }
    Ok(records)
}

/// Least-squares slope of `log(time)` against `log(n)`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("slope fit needs at least two points".into()));
    }
    if points.iter().any(|&(n, t)| n <= 0.0 || t <= 0.0) {
        return Err(Error::InvalidArgument("slope fit needs positive coordinates".into()));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, t)| (n.ln(), t.ln())).collect();
    let m = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let cov: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let var: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    Ok(cov / var)
}

/// Parse a newline-delimited observation file: one value per line, blank
/// lines and `#` comments ignored.
pub fn parse_observations(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            Error::InvalidArgument(format!("line {}: cannot parse '{line}'", lineno + 1))
        })?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::InvalidArgument("no observations in input".into()));
    }
    Ok(values)
}

/// Write `content` to `path` via a temporary file and atomic rename, so a
/// failed run leaves no partial output behind.
pub fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(content.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
