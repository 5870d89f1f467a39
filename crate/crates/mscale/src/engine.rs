//! End-to-end evaluation of the multiscale statistic: builds the point
//! sets P and Q from cumulative sums, runs the constrained-Minkowski
//! sweep, and maximizes the model objective over the candidate set.
//!
//! Also hosts the quadratic ([`oracle_tn`]) and cubic ([`oracle_tn_naive`])
//! evaluators. They share the contract of [`evaluate_tn`] and exist as
//! independent ground truth for tests and benchmarks.

use crate::geometry::{constrained_minkowski_candidates, Point2};
use crate::model::{Family, Objective};
use crate::{Error, Result};

/// The data vector together with its cumulative sums (`cumsum[0] = 0`).
#[derive(Clone, Debug)]
pub struct ObservationSeries {
    values: Vec<f64>,
    cumsum: Vec<f64>,
}

impl ObservationSeries {
    /// Plain left-to-right summation. Adequate for n up to ~1e7.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::build(values, false)
    }

    /// Kahan-compensated cumulative sums, for very long series where plain
    /// summation error would matter.
    pub fn new_compensated(values: Vec<f64>) -> Result<Self> {
        Self::build(values, true)
    }

    fn build(values: Vec<f64>, compensated: bool) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("series must contain at least one value".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("series contains non-finite values".into()));
        }
        let mut cumsum = Vec::with_capacity(values.len() + 1);
        cumsum.push(0.0);
        if compensated {
            let (mut sum, mut carry) = (0.0f64, 0.0f64);
            for &v in &values {
                let y = v - carry;
                let t = sum + y;
                carry = (t - sum) - y;
                sum = t;
                cumsum.push(sum);
            }
        } else {
            let mut sum = 0.0f64;
            for &v in &values {
                sum += v;
                cumsum.push(sum);
            }
        }
        Ok(ObservationSeries { values, cumsum })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cumsum(&self) -> &[f64] {
        &self.cumsum
    }

    /// Sum of values on the 1-based inclusive interval `[i, j]`.
    #[inline]
    pub fn sum_range(&self, i: usize, j: usize) -> f64 {
        self.cumsum[j] - self.cumsum[i - 1]
    }
}

/// Value and argmax of the statistic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StatisticResult {
    pub t_n: f64,
    /// 1-based interval `(i, j)` attaining the maximum; ties broken to the
    /// smallest `i`, then the smallest `j`.
    pub argmax: (usize, usize),
    /// Number of `(l, s)` pairs the objective was evaluated at.
    pub candidates_evaluated: usize,
}

/// The point sets `P = {(i, cs_i)}` and `Q = {(i - n, -cs_{n-i})}`, both
/// sorted strictly increasing in x1. For 1-based indices,
/// `p_j + q_{n-i+1} = (l_{i,j}, s_{i,j})`, and the sum has x1 > 0 exactly
/// when the index pair is admissible.
pub fn build_pq(series: &ObservationSeries) -> (Vec<Point2>, Vec<Point2>) {
    let n = series.n();
    let cs = series.cumsum();
    let p = (1..=n).map(|i| Point2::new(i as f64, cs[i])).collect();
    let q = (1..=n).map(|i| Point2::new(i as f64 - n as f64, -cs[n - i])).collect();
    (p, q)
}

fn check_feasible(series: &ObservationSeries, objective: &Objective) -> Result<()> {
    if objective.n() != series.n() {
        return Err(Error::InvalidArgument(format!(
            "objective built for n={} but series has n={}",
            objective.n(),
            series.n()
        )));
    }
    match objective.family() {
        Family::Gaussian => Ok(()),
        Family::Poisson => {
            if series.values().iter().all(|&v| v >= 0.0 && v.fract() == 0.0) {
                Ok(())
            } else {
                Err(Error::InfeasibleData(
                    "Poisson data must be nonnegative integer counts".into(),
                ))
            }
        }
        Family::Bernoulli => {
            if series.values().iter().all(|&v| v == 0.0 || v == 1.0) {
                Ok(())
            } else {
                Err(Error::InfeasibleData("Bernoulli data must be 0/1 valued".into()))
            }
        }
    }
}

struct Best {
    h: f64,
    argmax: (usize, usize),
}

impl Best {
    fn new() -> Self {
        Best { h: f64::NEG_INFINITY, argmax: (0, 0) }
    }

    #[inline]
    fn offer(&mut self, h: f64, ij: (usize, usize)) {
        if h > self.h || (h == self.h && ij < self.argmax) {
            self.h = h;
            self.argmax = ij;
        }
    }
}

/// O(n) evaluation of the statistic: maximize the objective over the
/// candidate superset of the constrained-Minkowski hull vertices.
pub fn evaluate_tn(series: &ObservationSeries, objective: &Objective) -> Result<StatisticResult> {
    check_feasible(series, objective)?;
    let n = series.n();
    if n == 1 {
        // single interval; the hull machinery needs two points per chain
        let h = objective.eval(1.0, series.values()[0]);
        return Ok(StatisticResult { t_n: h, argmax: (1, 1), candidates_evaluated: 1 });
    }
    let (p, q) = build_pq(series);
    let cand = constrained_minkowski_candidates(&p, &q)?;
    let mut best = Best::new();
    for (pt, &(ip, iq)) in cand.points.iter().zip(&cand.pairs) {
        let i = n - iq;
        let j = ip + 1;
        best.offer(objective.eval(pt.x1, pt.x2), (i, j));
    }
    Ok(StatisticResult {
        t_n: best.h,
        argmax: best.argmax,
        candidates_evaluated: cand.points.len(),
    })
}

/// O(n^2) evaluation via cumulative-sum differences over all intervals.
/// Ground truth for tests; intended for n up to ~1e4.
pub fn oracle_tn(series: &ObservationSeries, objective: &Objective) -> Result<StatisticResult> {
    check_feasible(series, objective)?;
    let n = series.n();
    let mut best = Best::new();
    let mut evaluated = 0usize;
    for i in 1..=n {
        for j in i..=n {
            let ell = (j - i + 1) as f64;
            let s = series.sum_range(i, j);
            best.offer(objective.eval(ell, s), (i, j));
            evaluated += 1;
        }
    }
    Ok(StatisticResult { t_n: best.h, argmax: best.argmax, candidates_evaluated: evaluated })
}

/// O(n^3) evaluation with the inner sum recomputed per interval. A second
/// independent oracle; intended for n up to ~500.
pub fn oracle_tn_naive(series: &ObservationSeries, objective: &Objective) -> Result<StatisticResult> {
    check_feasible(series, objective)?;
    let n = series.n();
    let values = series.values();
    let mut best = Best::new();
    let mut evaluated = 0usize;
    for i in 1..=n {
        for j in i..=n {
            let ell = (j - i + 1) as f64;
            let s: f64 = values[i - 1..j].iter().sum();
            best.offer(objective.eval(ell, s), (i, j));
            evaluated += 1;
        }
    }
    Ok(StatisticResult { t_n: best.h, argmax: best.argmax, candidates_evaluated: evaluated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gaussian_objective, general_objective, ModelSpec, PenaltySpec};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn series(values: &[f64]) -> ObservationSeries {
        ObservationSeries::new(values.to_vec()).unwrap()
    }

    fn gaussian_series(rng: &mut ChaCha8Rng, n: usize) -> ObservationSeries {
        series(&(0..n).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect::<Vec<_>>())
    }

    #[test]
    fn series_invariants() {
        let s = series(&[1.0, -1.0, 2.0]);
        assert_eq!(s.cumsum(), &[0.0, 1.0, 0.0, 2.0]);
        assert_eq!(s.sum_range(2, 3), 1.0);
        assert!(ObservationSeries::new(vec![]).is_err());
        assert!(ObservationSeries::new(vec![f64::NAN]).is_err());
        let c = ObservationSeries::new_compensated(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(c.cumsum(), &[0.0, 1.0, 3.0, 6.0]);
    }

    #[test]
    fn build_pq_examples() {
        let (p, q) = build_pq(&series(&[1.0, 2.0]));
        assert_eq!(p, vec![Point2::new(1., 1.), Point2::new(2., 3.)]);
        assert_eq!(q, vec![Point2::new(-1., -1.), Point2::new(0., 0.)]);

        let (p, q) = build_pq(&series(&[0.0]));
        assert_eq!(p, vec![Point2::new(1., 0.)]);
        assert_eq!(q, vec![Point2::new(0., 0.)]);
    }

    #[test]
    fn build_pq_maps_all_admissible_pairs() {
        let s = series(&[1.0, -1.0, 2.0]);
        let n = s.n();
        let (p, q) = build_pq(&s);
        let mut admissible = 0;
        for i in 1..=n {
            for j in i..=n {
                let sum = p[j - 1] + q[n - i]; // q_{n-i+1}, 1-based
                assert_eq!(sum.x1, (j - i + 1) as f64);
                assert_eq!(sum.x2, s.sum_range(i, j));
                assert!(sum.x1 > 0.0);
                admissible += 1;
            }
        }
        assert_eq!(admissible, 6);
        // inadmissible pairs land at x1 <= 0
        for (ip, pp) in p.iter().enumerate() {
            for (iq, qq) in q.iter().enumerate() {
                let sum = *pp + *qq;
                let admissible = ip + 1 + iq + 1 > n;
                assert_eq!(sum.x1 > 0.0, admissible);
            }
        }
    }

    #[test]
    fn evaluate_tn_all_zero() {
        let obj = gaussian_objective(1.0, 4).unwrap();
        let r = evaluate_tn(&series(&[0.0; 4]), &obj).unwrap();
        assert!((r.t_n - (-SQRT2)).abs() < 1e-12);
        assert_eq!(r.argmax, (1, 4));
    }

    #[test]
    fn evaluate_tn_two_points() {
        let obj = gaussian_objective(1.0, 2).unwrap();
        let r = evaluate_tn(&series(&[1.0, 2.0]), &obj).unwrap();
        assert!((r.t_n - (3.0 / SQRT2 - SQRT2)).abs() < 1e-12);
        assert_eq!(r.argmax, (1, 2));
    }

    #[test]
    fn oracle_tn_poisson_examples() {
        let m = ModelSpec::poisson(1.0, PenaltySpec::Zero, 3).unwrap();
        let obj = general_objective(&m).unwrap();
        let r = oracle_tn(&series(&[1.0, 1.0, 1.0]), &obj).unwrap();
        assert!(r.t_n.abs() < 1e-12);
        assert_eq!(r.argmax, (1, 1)); // tie broken to the smallest interval

        let m = ModelSpec::poisson(1.0, PenaltySpec::Zero, 2).unwrap();
        let obj = general_objective(&m).unwrap();
        let r = oracle_tn(&series(&[4.0, 0.0]), &obj).unwrap();
        let expected = 4.0 * 4.0f64.ln() - 3.0;
        assert!((r.t_n - expected).abs() < 1e-12);
        assert_eq!(r.argmax, (1, 1));
        assert!((expected - 2.5452).abs() < 1e-4);
    }

    #[test]
    fn naive_oracle_degenerate() {
        let obj = gaussian_objective(1.0, 1).unwrap();
        let r = oracle_tn_naive(&series(&[0.0]), &obj).unwrap();
        assert!((r.t_n - (-SQRT2)).abs() < 1e-12);
        assert_eq!(r.argmax, (1, 1));
        let fast = evaluate_tn(&series(&[0.0]), &obj).unwrap();
        assert_eq!(fast.candidates_evaluated, 1);
        assert!((fast.t_n - r.t_n).abs() < 1e-12);
    }

    #[test]
    fn oracle_equivalence_gaussian() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let n = rng.random_range(1..=200);
            let s = gaussian_series(&mut rng, n);
            let obj = gaussian_objective(1.0, n).unwrap();
            let fast = evaluate_tn(&s, &obj).unwrap();
            let slow = oracle_tn(&s, &obj).unwrap();
            let tol = 1e-9 * slow.t_n.abs().max(1.0);
            assert!(
                (fast.t_n - slow.t_n).abs() <= tol,
                "n={n}: fast {} vs oracle {}",
                fast.t_n,
                slow.t_n
            );
        }
    }

    #[test]
    fn oracle_equivalence_poisson_bernoulli() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..100 {
            let n = rng.random_range(1..=120);
            let values: Vec<f64> = (0..n)
                .map(|_| rng.sample::<f64, _>(rand_distr::Poisson::new(1.0).unwrap()))
                .collect();
            let s = series(&values);
            let m = ModelSpec::poisson(1.0, PenaltySpec::Zero, n).unwrap();
            let obj = general_objective(&m).unwrap();
            let fast = evaluate_tn(&s, &obj).unwrap();
            let slow = oracle_tn(&s, &obj).unwrap();
            assert!((fast.t_n - slow.t_n).abs() <= 1e-9 * slow.t_n.abs().max(1.0));
        }
        for _ in 0..100 {
            let n = rng.random_range(1..=120);
            let values: Vec<f64> =
                (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect();
            let s = series(&values);
            let m = ModelSpec::bernoulli(0.5, PenaltySpec::Zero, n).unwrap();
            let obj = general_objective(&m).unwrap();
            let fast = evaluate_tn(&s, &obj).unwrap();
            let slow = oracle_tn(&s, &obj).unwrap();
            assert!((fast.t_n - slow.t_n).abs() <= 1e-9 * slow.t_n.abs().max(1.0));
        }
    }

    #[test]
    fn cross_oracle_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let n = rng.random_range(1..=100);
            let s = gaussian_series(&mut rng, n);
            let obj = gaussian_objective(1.0, n).unwrap();
            let a = oracle_tn(&s, &obj).unwrap();
            let b = oracle_tn_naive(&s, &obj).unwrap();
            assert!((a.t_n - b.t_n).abs() <= 1e-9 * a.t_n.abs().max(1.0));
            assert_eq!(a.argmax, b.argmax);
        }
    }

    #[test]
    fn vertex_sufficiency() {
        // the max over the candidate set equals the max over every
        // admissible (l, s) pair
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..50 {
            let n = rng.random_range(2..=200);
            let s = gaussian_series(&mut rng, n);
            let obj = gaussian_objective(1.0, n).unwrap();
            let fast = evaluate_tn(&s, &obj).unwrap();
            let mut exhaustive = f64::NEG_INFINITY;
            for i in 1..=n {
                for j in i..=n {
                    exhaustive = exhaustive.max(obj.eval((j - i + 1) as f64, s.sum_range(i, j)));
                }
            }
            assert!((fast.t_n - exhaustive).abs() <= 1e-9 * exhaustive.abs().max(1.0));
        }
    }

    #[test]
    fn argmax_attainment() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..50 {
            let n = rng.random_range(1..=150);
            let s = gaussian_series(&mut rng, n);
            let obj = gaussian_objective(1.0, n).unwrap();
            let r = evaluate_tn(&s, &obj).unwrap();
            let (i, j) = r.argmax;
            assert!(1 <= i && i <= j && j <= n);
            let h = obj.eval((j - i + 1) as f64, s.sum_range(i, j));
            assert_eq!(h, r.t_n);
        }
    }

    #[test]
    fn sigma_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let s = gaussian_series(&mut rng, 100);
        let base = evaluate_tn(&s, &gaussian_objective(1.0, 100).unwrap()).unwrap();
        for &c in &[0.1, 1.0, 10.0] {
            let scaled = series(&s.values().iter().map(|v| c * v).collect::<Vec<_>>());
            let r = evaluate_tn(&scaled, &gaussian_objective(c, 100).unwrap()).unwrap();
            assert!((r.t_n - base.t_n).abs() < 1e-12, "sigma={c}: {} vs {}", r.t_n, base.t_n);
        }
    }

    #[test]
    fn permutation_sensitivity_witness() {
        let obj = gaussian_objective(1.0, 4).unwrap();
        let a = evaluate_tn(&series(&[3.0, -3.0, 3.0, -3.0]), &obj).unwrap();
        let b = evaluate_tn(&series(&[3.0, 3.0, -3.0, -3.0]), &obj).unwrap();
        assert!((a.t_n - b.t_n).abs() > 1e-6, "expected order sensitivity");
    }

    #[test]
    fn candidate_count_stays_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        for &n in &[100usize, 1_000, 10_000] {
            let s = gaussian_series(&mut rng, n);
            let obj = gaussian_objective(1.0, n).unwrap();
            let r = evaluate_tn(&s, &obj).unwrap();
            assert!(r.candidates_evaluated <= 3 * n - 2);
        }
    }

    #[test]
    fn infeasible_data_is_rejected() {
        let m = ModelSpec::poisson(1.0, PenaltySpec::Zero, 2).unwrap();
        let obj = general_objective(&m).unwrap();
        assert!(matches!(
            evaluate_tn(&series(&[1.0, -2.0]), &obj),
            Err(Error::InfeasibleData(_))
        ));
        assert!(matches!(
            evaluate_tn(&series(&[1.5, 1.0]), &obj),
            Err(Error::InfeasibleData(_))
        ));
        let m = ModelSpec::bernoulli(0.5, PenaltySpec::Zero, 2).unwrap();
        let obj = general_objective(&m).unwrap();
        assert!(matches!(
            evaluate_tn(&series(&[0.0, 0.5]), &obj),
            Err(Error::InfeasibleData(_))
        ));
        // size mismatch between objective and series
        let obj = gaussian_objective(1.0, 3).unwrap();
        assert!(evaluate_tn(&series(&[0.0, 0.0]), &obj).is_err());
    }
}
