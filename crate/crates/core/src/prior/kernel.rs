use rand::Rng;

use super::LengthscalePrior;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelFamily {
    #[default]
    Matern52,
}

/// Stationary kernel with one lengthscale per input dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub lengthscales: Vec<f64>,
    pub variance: f64,
}

impl KernelSpec {
    pub fn new(lengthscales: Vec<f64>, variance: f64) -> Result<Self> {
        if lengthscales.is_empty() || lengthscales.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidArgument(format!("lengthscales must be positive: {lengthscales:?}")));
        }
        if !(variance > 0.0) {
            return Err(Error::InvalidArgument(format!("variance must be positive, got {variance}")));
        }
        Ok(Self { family: KernelFamily::Matern52, lengthscales, variance })
    }

    pub fn isotropic(d: usize, lengthscale: f64, variance: f64) -> Result<Self> {
        Self::new(vec![lengthscale; d], variance)
    }

    pub fn dimension(&self) -> usize {
        self.lengthscales.len()
    }

    /// Scaled distance `sqrt(sum ((a_i - b_i) / l_i)^2)`.
    pub fn scaled_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.lengthscales)
            .map(|((p, q), l)| {
                let u = (p - q) / l;
                u * u
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        self.variance * matern52(self.scaled_distance(a, b))
    }
}

/// Unit-variance Matérn 5/2 correlation at scaled distance `r`.
pub fn matern52(r: f64) -> f64 {
    let s = 5.0_f64.sqrt() * r;
    (1.0 + s + s * s / 3.0) * (-s).exp()
}

/// Draws `d` independent lengthscales from `prior`, with unit variance.
pub fn sample_kernel_spec<R: Rng + ?Sized>(prior: &LengthscalePrior, d: usize, rng: &mut R) -> Result<KernelSpec> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let lengthscales = (0..d).map(|_| prior.sample(rng)).collect();
    KernelSpec::new(lengthscales, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matern_known_values() {
        assert_eq!(matern52(0.0), 1.0);
        // (1 + sqrt5 + 5/3) e^{-sqrt5}
        let expected = (1.0 + 5f64.sqrt() + 5.0 / 3.0) * (-(5f64.sqrt())).exp();
        assert!((matern52(1.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(KernelSpec::new(vec![0.1, 0.0], 1.0).is_err());
        assert!(KernelSpec::new(vec![0.1], -1.0).is_err());
    }
}
