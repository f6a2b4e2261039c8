//! Inverse-Gamma lengthscale prior fitted to a central credible interval.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::{gamma_lr, gamma_ur};

use crate::{Error, Result};

/// Inverse-Gamma prior on a single lengthscale, together with the interval it
/// was fitted to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthscalePrior {
    pub shape: f64,
    pub scale: f64,
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

const MAX_ITERS: usize = 200;
const TOL: f64 = 1e-9;

impl LengthscalePrior {
    /// Default prior: 99% of the mass on `[0.1, 0.4]`.
    pub fn default_unit_cube() -> Self {
        fit_inverse_gamma(0.1, 0.4, 0.99).expect("default prior fit")
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        gamma_ur(self.shape, self.scale / x)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.scale / gamma_quantile(self.shape, 1.0 - p)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let gamma = Gamma::new(self.shape, 1.0).expect("validated shape");
        loop {
            let y: f64 = gamma.sample(rng);
            if y > 0.0 {
                return self.scale / y;
            }
        }
    }
}

/// Quantile of the unit-rate Gamma(shape) distribution, by safeguarded Newton
/// iteration on the regularised lower incomplete gamma function.
pub fn gamma_quantile(shape: f64, p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let mut lo = 0.0_f64;
    let mut hi = shape.max(1.0);
    while gamma_lr(shape, hi) < p {
        lo = hi;
        hi *= 2.0;
    }
    let log_norm = statrs::function::gamma::ln_gamma(shape);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_ITERS {
        let f = gamma_lr(shape, x) - p;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let density = ((shape - 1.0) * x.ln() - x - log_norm).exp();
        let mut next = x - f / density;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.max(1e-300) || hi - lo <= 1e-15 * hi {
            return next;
        }
        x = next;
    }
    x
}

/// Finds the inverse-Gamma `(shape, scale)` whose central `mass` interval is
/// `[lo, hi]`.
///
/// The two quantile equations are solved jointly: the ratio of the two
/// quantiles depends on the shape alone, so the shape is found by bisection in
/// log space and the scale then follows from the lower quantile.
pub fn fit_inverse_gamma(lo: f64, hi: f64, mass: f64) -> Result<LengthscalePrior> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!("need 0 < lo < hi, got lo={lo}, hi={hi}")));
    }
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::InvalidArgument(format!("mass must lie in (0,1), got {mass}")));
    }
    let tail = 0.5 * (1.0 - mass);
    let target = (hi / lo).ln();
    // ln of q_hi/q_lo for a given shape; decreasing in shape.
    let log_ratio = |shape: f64| gamma_quantile(shape, 1.0 - tail).ln() - gamma_quantile(shape, tail).ln();

    let (mut a, mut b) = (-3.0_f64, 8.0_f64);
    if log_ratio(a.exp()) < target || log_ratio(b.exp()) > target {
        return Err(Error::InvalidArgument(format!(
            "interval [{lo}, {hi}] at mass {mass} outside the representable shape range"
        )));
    }
    let mut iterations = 0;
    while iterations < MAX_ITERS && b - a > 1e-15 {
        let mid = 0.5 * (a + b);
        if log_ratio(mid.exp()) > target {
            a = mid;
        } else {
            b = mid;
        }
        iterations += 1;
    }
    let shape = (0.5 * (a + b)).exp();
    let scale = lo * gamma_quantile(shape, 1.0 - tail);
    let prior = LengthscalePrior { shape, scale, lo, hi, mass };

    let residual_lo = prior.quantile(tail) - lo;
    let residual_hi = prior.quantile(1.0 - tail) - hi;
    if residual_lo.abs() > TOL * lo.max(1.0) || residual_hi.abs() > TOL * hi.max(1.0) {
        return Err(Error::PriorFit { iterations, residual_lo, residual_hi });
    }
    Ok(prior)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_quantile_inverts_cdf() {
        for &shape in &[0.5, 1.0, 3.7, 20.0] {
            for &p in &[0.005, 0.3, 0.5, 0.995] {
                let x = gamma_quantile(shape, p);
                assert!((gamma_lr(shape, x) - p).abs() < 1e-12, "shape {shape} p {p}");
            }
        }
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(fit_inverse_gamma(0.4, 0.1, 0.99).is_err());
        assert!(fit_inverse_gamma(0.0, 0.1, 0.99).is_err());
        assert!(fit_inverse_gamma(0.1, 0.4, 1.0).is_err());
    }

    #[test]
    fn quantiles_hit_interval() {
        let p = fit_inverse_gamma(0.1, 0.4, 0.99).unwrap();
        assert!((p.quantile(0.005) - 0.1).abs() < 1e-6);
        assert!((p.quantile(0.995) - 0.4).abs() < 1e-6);
        let q = fit_inverse_gamma(0.02, 3.0, 0.9).unwrap();
        assert!((q.quantile(0.05) - 0.02).abs() < 1e-6);
        assert!((q.quantile(0.95) - 3.0).abs() < 1e-6);
    }
}
