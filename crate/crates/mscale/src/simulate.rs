//! Monte Carlo estimation of null-distribution quantiles of the statistic.
//!
//! Each repetition draws a fresh series from the null model, evaluates the
//! statistic with the O(n) engine, and the sorted sample yields empirical
//! quantiles (upper order statistic convention). Repetitions use
//! independent RNG substreams keyed by `(seed, repetition index)`, so the
//! output is a pure function of the plan: thread count and scheduling are
//! invisible in the result.
//!
//! The generator is pinned to ChaCha8 seeded through a SplitMix64 mix;
//! changing it would change what a given seed reproduces, so it is fixed
//! per release.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::engine::{evaluate_tn, ObservationSeries};
use crate::model::{Family, ModelSpec, Objective};
use crate::{Error, Result};

/// What to simulate: model, sample size, repetitions, seed, and the
/// significance levels to extract.
#[derive(Clone, Debug)]
pub struct SimulationPlan {
    pub model: ModelSpec,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    /// Strictly increasing, each in (0, 1).
    pub alphas: Vec<f64>,
}

impl SimulationPlan {
    pub fn new(model: ModelSpec, reps: usize, seed: u64, alphas: Vec<f64>) -> Result<Self> {
        let n = model.n;
        let plan = SimulationPlan { model, n, reps, seed, alphas };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidArgument("reps must be at least 1".into()));
        }
        if self.n == 0 || self.n != self.model.n {
            return Err(Error::InvalidArgument(format!(
                "plan n={} must be positive and match the model's n={}",
                self.n, self.model.n
            )));
        }
        if self.alphas.is_empty() {
            return Err(Error::InvalidArgument("at least one alpha is required".into()));
        }
        if self.alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(Error::InvalidArgument("alphas must lie in (0, 1)".into()));
        }
        if self.alphas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("alphas must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// Simulation metadata carried alongside the quantiles.
#[derive(Clone, Debug, PartialEq)]
pub struct SimMeta {
    pub model: String,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
}

/// Sorted simulated statistic values and the extracted quantiles.
#[derive(Clone, Debug)]
pub struct QuantileTable {
    /// Non-decreasing, length `reps`.
    pub samples: Vec<f64>,
    /// `(alpha, quantile)` pairs, quantiles non-increasing in alpha.
    pub quantiles: Vec<(f64, f64)>,
    pub meta: SimMeta,
}

impl QuantileTable {
    /// CSV with a `#`-prefixed metadata line; deterministic byte-for-byte
    /// for a given plan.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# model={} n={} reps={} seed={}\n",
            self.meta.model, self.meta.n, self.meta.reps, self.meta.seed
        ));
        out.push_str("alpha,quantile\n");
        for (alpha, q) in &self.quantiles {
            out.push_str(&format!("{alpha},{q}\n"));
        }
        out
    }
}

/// The `ceil(len * (1 - alpha))`-th smallest sample (1-based, clamped).
pub fn empirical_quantile(samples: &[f64], alpha: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("empty sample set".into()));
    }
    if samples.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("samples must be sorted".into()));
    }
    let len = samples.len();
    let rank = (len as f64 * (1.0 - alpha)).ceil() as usize;
    let rank = rank.clamp(1, len);
    Ok(samples[rank - 1])
}

/// A reproducible RNG substream for one repetition: the same
/// `(seed, rep_index)` pair always yields the same stream, distinct pairs
/// are statistically independent.
pub fn rng_substream(seed: u64, rep_index: u64) -> ChaCha8Rng {
    let mut state = seed ^ rep_index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Draw one null series of length `n` from the model.
fn draw_null_series(model: &ModelSpec, n: usize, rng: &mut ChaCha8Rng) -> ObservationSeries {
    let values: Vec<f64> = match model.family {
        // sigma-independence of the statistic lets the Gaussian null fix sigma = 1
        Family::Gaussian => {
            (0..n).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect()
        }
        Family::Poisson => {
            let dist = rand_distr::Poisson::new(model.null_mean()).expect("positive mean");
            (0..n).map(|_| rng.sample::<f64, _>(&dist)).collect()
        }
        Family::Bernoulli => {
            let p0 = model.null_mean();
            (0..n).map(|_| if rng.random_bool(p0) { 1.0 } else { 0.0 }).collect()
        }
    };
    ObservationSeries::new(values).expect("simulated series is valid")
}

fn simulate_one(plan: &SimulationPlan, objective: &Objective, rep: u64) -> f64 {
    let mut rng = rng_substream(plan.seed, rep);
    let series = draw_null_series(&plan.model, plan.n, &mut rng);
    evaluate_tn(&series, objective).expect("null draws are feasible").t_n
}

fn assemble(plan: &SimulationPlan, mut samples: Vec<f64>) -> Result<QuantileTable> {
    samples.sort_by(f64::total_cmp);
    let quantiles = plan
        .alphas
        .iter()
        .map(|&a| empirical_quantile(&samples, a).map(|q| (a, q)))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuantileTable {
        samples,
        quantiles,
        meta: SimMeta {
            model: plan.model.summary(),
            n: plan.n,
            reps: plan.reps,
            seed: plan.seed,
        },
    })
}

/// Monte Carlo null quantiles for `plan`. With the `parallel` feature the
/// repetitions run on the current rayon thread pool; the result is
/// bit-identical to the sequential path either way.
pub fn simulate_null(plan: &SimulationPlan) -> Result<QuantileTable> {
    plan.validate()?;
    let objective = plan.model.objective()?;
    #[cfg(feature = "parallel")]
    let samples: Vec<f64> =
        (0..plan.reps as u64).into_par_iter().map(|rep| simulate_one(plan, &objective, rep)).collect();
    #[cfg(not(feature = "parallel"))]
    let samples: Vec<f64> =
        (0..plan.reps as u64).map(|rep| simulate_one(plan, &objective, rep)).collect();
    assemble(plan, samples)
}

/// Sequential reference path, independent of the `parallel` feature. Used
/// by the benchmark suite and the determinism tests.
pub fn simulate_null_serial(plan: &SimulationPlan) -> Result<QuantileTable> {
    plan.validate()?;
    let objective = plan.model.objective()?;
    let samples: Vec<f64> =
        (0..plan.reps as u64).map(|rep| simulate_one(plan, &objective, rep)).collect();
    assemble(plan, samples)
}
