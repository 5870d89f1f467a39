//! Exponential-family regression models, scale penalties, and the bivariate
//! objective `h(l, s)` maximized by the engine.
//!
//! Two statistic forms are provided, each with its own quasiconvexity
//! argument, and they are deliberately not algebraic transforms of each
//! other:
//!
//! - [`Objective::GaussianDirect`]: `h(l, s) = |s| / (sigma sqrt(l)) -
//!   sqrt(2 log(en/l))`, quasiconvex on `(0, n] x R`.
//! - [`Objective::GeneralFamily`]:
//!   `h(l, s) = sup_theta {(theta - theta0) s - l (psi(theta) - psi(theta0))} - p(l)`
//!   with `p` concave, convex on the feasible region (hence quasiconvex).
//!
//! Natural parameterizations: Poisson uses `theta = log(mean)`,
//! `psi = exp(theta)`; Bernoulli uses `theta = logit(p)`,
//! `psi = log(1 + exp(theta))`; Gaussian uses `theta = mean`,
//! `psi = theta^2 / 2` with data pre-scaled by `1/sigma`.

use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

/// One-dimensional exponential-family choice.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Family {
    Gaussian,
    Poisson,
    Bernoulli,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Gaussian => write!(f, "gaussian"),
            Family::Poisson => write!(f, "poisson"),
            Family::Bernoulli => write!(f, "bernoulli"),
        }
    }
}

/// Scale penalty `p(l)` subtracted from the local statistic.
#[derive(Clone)]
pub enum PenaltySpec {
    /// `sqrt(2 log(en/l))`, the standard multiscale calibration. Convex in
    /// `l`, so it is only admitted on the Gaussian direct path, whose
    /// quasiconvexity has a dedicated sublevel-set proof.
    Fms,
    /// No penalty.
    Zero,
    /// A caller-supplied penalty taken on trust as concave in `l` on
    /// `(0, n]`. Only accepted on the general-family path.
    CustomConcave(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for PenaltySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PenaltySpec::Fms => write!(f, "Fms"),
            PenaltySpec::Zero => write!(f, "Zero"),
            PenaltySpec::CustomConcave(_) => write!(f, "CustomConcave(..)"),
        }
    }
}

impl fmt::Display for PenaltySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PenaltySpec::Fms => write!(f, "fms"),
            PenaltySpec::Zero => write!(f, "none"),
            PenaltySpec::CustomConcave(_) => write!(f, "custom"),
        }
    }
}

/// `log(en/l)` computed as `1 + ln n - ln l` for stability at large `n`.
#[inline]
pub fn log_en_over(ell: f64, n: usize) -> f64 {
    1.0 + (n as f64).ln() - ell.ln()
}

/// The FMS penalty `sqrt(2 log(en/l))` for `l` in `(0, n]`.
#[inline]
pub fn fms_penalty(ell: f64, n: usize) -> f64 {
    (2.0 * log_en_over(ell, n)).sqrt()
}

impl PenaltySpec {
    /// Evaluate the penalty at interval length `ell` for sample size `n`.
    pub fn eval(&self, ell: f64, n: usize) -> f64 {
        match self {
            PenaltySpec::Fms => fms_penalty(ell, n),
            PenaltySpec::Zero => 0.0,
            PenaltySpec::CustomConcave(p) => p(ell),
        }
    }

    /// Midpoint concavity spot-check on an even grid over `(0, n]`.
    ///
    /// Returns the largest observed violation of
    /// `p((a+b)/2) >= (p(a)+p(b))/2`; a flagrantly convex penalty yields a
    /// clearly positive value. Custom penalties are accepted on trust, this
    /// is only a test-suite guard.
    pub fn max_midpoint_concavity_violation(&self, n: usize, grid: usize) -> f64 {
        let mut worst = 0.0f64;
        for i in 1..=grid {
            for j in i..=grid {
                let a = i as f64 * n as f64 / grid as f64;
                let b = j as f64 * n as f64 / grid as f64;
                let mid = 0.5 * (a + b);
                let violation = 0.5 * (self.eval(a, n) + self.eval(b, n)) - self.eval(mid, n);
                worst = worst.max(violation);
            }
        }
        worst
    }
}

/// An exponential-family regression model under the null, together with
/// its penalty and sample size.
///
/// `null_param` holds the natural null parameter `theta0`, except for
/// `Family::Gaussian` where it holds the noise scale `sigma`.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub family: Family,
    pub null_param: f64,
    pub penalty: PenaltySpec,
    pub n: usize,
}

impl ModelSpec {
    /// Gaussian mean regression with noise scale `sigma > 0`.
    pub fn gaussian(sigma: f64, penalty: PenaltySpec, n: usize) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        Ok(ModelSpec { family: Family::Gaussian, null_param: sigma, penalty, n })
    }

    /// Poisson regression with null mean `lambda0 > 0`.
    pub fn poisson(lambda0: f64, penalty: PenaltySpec, n: usize) -> Result<Self> {
        if !lambda0.is_finite() || lambda0 <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "lambda0 must be positive, got {lambda0}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        Self::check_concave_penalty(&penalty)?;
        Ok(ModelSpec { family: Family::Poisson, null_param: lambda0.ln(), penalty, n })
    }

    /// Bernoulli regression with null success probability `p0` in `(0, 1)`.
    pub fn bernoulli(p0: f64, penalty: PenaltySpec, n: usize) -> Result<Self> {
        if !(p0 > 0.0 && p0 < 1.0) {
            return Err(Error::InvalidArgument(format!("p0 must be in (0,1), got {p0}")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        Self::check_concave_penalty(&penalty)?;
        Ok(ModelSpec { family: Family::Bernoulli, null_param: (p0 / (1.0 - p0)).ln(), penalty, n })
    }

    fn check_concave_penalty(penalty: &PenaltySpec) -> Result<()> {
        if matches!(penalty, PenaltySpec::Fms) {
            return Err(Error::RejectedPenalty(
                "the fms penalty is convex in l; non-Gaussian families require a \
                 concave penalty (use Zero or CustomConcave)"
                    .into(),
            ));
        }
        Ok(())
    }

    /// Null mean of the observation distribution.
    pub fn null_mean(&self) -> f64 {
        match self.family {
            Family::Gaussian => 0.0,
            Family::Poisson => self.null_param.exp(),
            Family::Bernoulli => {
                let e = self.null_param.exp();
                e / (1.0 + e)
            }
        }
    }

    /// Natural null parameter `theta0` (0 for the Gaussian mean-zero null).
    pub fn theta0(&self) -> f64 {
        match self.family {
            Family::Gaussian => 0.0,
            _ => self.null_param,
        }
    }

    /// The objective this model routes through: Gaussian + FMS takes the
    /// direct form, everything else the general-family form.
    pub fn objective(&self) -> Result<Objective> {
        match (self.family, &self.penalty) {
            (Family::Gaussian, PenaltySpec::Fms) => gaussian_objective(self.null_param, self.n),
            _ => general_objective(self),
        }
    }

    /// One-line deterministic summary used in CSV metadata headers.
    pub fn summary(&self) -> String {
        match self.family {
            Family::Gaussian => {
                format!("gaussian sigma={} penalty={}", self.null_param, self.penalty)
            }
            Family::Poisson => {
                format!("poisson lambda0={} penalty={}", self.null_mean(), self.penalty)
            }
            Family::Bernoulli => {
                format!("bernoulli p0={} penalty={}", self.null_mean(), self.penalty)
            }
        }
    }
}

/// A bivariate objective `h(l, s)` on `(0, n] x R` (intersected with the
/// family's feasible region).
#[derive(Clone, Debug)]
pub enum Objective {
    /// `h(l, s) = |s| / (sigma sqrt(l)) - sqrt(2 log(en/l))`.
    GaussianDirect { sigma: f64, n: usize },
    /// `h(l, s) = sup_theta {(theta - theta0) s - l (psi(theta) -
    /// psi(theta0))} - p(l)`.
    GeneralFamily { family: Family, theta0: f64, penalty: PenaltySpec, n: usize },
}

impl Objective {
    pub fn n(&self) -> usize {
        match self {
            Objective::GaussianDirect { n, .. } => *n,
            Objective::GeneralFamily { n, .. } => *n,
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Objective::GaussianDirect { .. } => Family::Gaussian,
            Objective::GeneralFamily { family, .. } => *family,
        }
    }

    /// Is `(ell, s)` in the feasible region of this objective?
    pub fn feasible(&self, ell: f64, s: f64) -> bool {
        if !(ell > 0.0 && ell.is_finite() && s.is_finite()) {
            return false;
        }
        match self.family() {
            Family::Gaussian => true,
            Family::Poisson => s >= 0.0,
            Family::Bernoulli => s >= 0.0 && s <= ell,
        }
    }

    /// Evaluate `h(ell, s)`. The caller is responsible for feasibility;
    /// the engine's inputs are feasible by construction.
    pub fn eval(&self, ell: f64, s: f64) -> f64 {
        match self {
            Objective::GaussianDirect { sigma, n } => {
                s.abs() / (sigma * ell.sqrt()) - fms_penalty(ell, *n)
            }
            Objective::GeneralFamily { family, theta0, penalty, n } => {
                loglik_sup_unchecked(*family, *theta0, ell, s) - penalty.eval(ell, *n)
            }
        }
    }
}

/// The Gaussian direct objective of sample size `n` with noise scale
/// `sigma`.
pub fn gaussian_objective(sigma: f64, n: usize) -> Result<Objective> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    Ok(Objective::GaussianDirect { sigma, n })
}

/// The general-family objective for `model`. Rejects the FMS penalty: its
/// convexity in `l` is outside the concave-penalty guarantee of this path;
/// Gaussian callers wanting FMS use [`gaussian_objective`].
pub fn general_objective(model: &ModelSpec) -> Result<Objective> {
    if matches!(model.penalty, PenaltySpec::Fms) {
        return Err(Error::RejectedPenalty(
            "the general-family path requires a concave penalty; for Gaussian + fms use \
             gaussian_objective"
                .into(),
        ));
    }
    Ok(Objective::GeneralFamily {
        family: model.family,
        theta0: model.theta0(),
        penalty: model.penalty.clone(),
        n: model.n,
    })
}

/// `sup_theta {(theta - theta0) s - ell (psi(theta) - psi(theta0))}` in
/// closed form via the MLE mean `s/ell`. Always nonnegative; zero iff
/// `s/ell` equals the null mean.
pub fn loglik_sup(family: Family, theta0: f64, ell: f64, s: f64) -> Result<f64> {
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::InvalidArgument(format!("ell must be positive, got {ell}")));
    }
    if !s.is_finite() {
        return Err(Error::InvalidArgument(format!("s must be finite, got {s}")));
    }
    match family {
        Family::Poisson if s < 0.0 => {
            return Err(Error::InvalidArgument(format!("Poisson requires s >= 0, got {s}")));
        }
        Family::Bernoulli if !(0.0..=ell).contains(&s) => {
            return Err(Error::InvalidArgument(format!(
                "Bernoulli requires 0 <= s <= ell, got s={s}, ell={ell}"
            )));
        }
        _ => {}
    }
    Ok(loglik_sup_unchecked(family, theta0, ell, s))
}

fn loglik_sup_unchecked(family: Family, theta0: f64, ell: f64, s: f64) -> f64 {
    let mean_hat = s / ell;
    match family {
        // sigma = 1 convention; pre-scale data for other scales.
        Family::Gaussian => {
            let d = s - ell * theta0;
            d * d / (2.0 * ell)
        }
        Family::Poisson => ell * kl_poisson(mean_hat, theta0.exp()),
        Family::Bernoulli => {
            let p0 = theta0.exp() / (1.0 + theta0.exp());
            ell * kl_bernoulli(mean_hat.clamp(0.0, 1.0), p0)
        }
    }
}

/// `a log(a/b) - a + b` with the `0 log 0 := 0` convention.
#[inline]
pub fn kl_poisson(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        b
    } else {
        a * (a / b).ln() - a + b
    }
}

/// `a log(a/b) + (1-a) log((1-a)/(1-b))` with boundary limits at 0 and 1.
#[inline]
pub fn kl_bernoulli(a: f64, b: f64) -> f64 {
    let left = if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    let right = if a == 1.0 { 0.0 } else { (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln() };
    left + right
}
