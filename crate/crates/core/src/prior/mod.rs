//! Synthetic training objectives: approximate Matérn 5/2 GP samples built
//! from random Fourier features, plus an optional random convex bowl and
//! Gaussian observation noise.

mod bowl;
mod fourier;
mod invgamma;
mod kernel;

pub use bowl::{bowl_offset, sample_quadratic_bowl, QuadraticBowl};
pub use fourier::{sample_fourier_features, FourierSample};
pub use invgamma::{fit_inverse_gamma, LengthscalePrior};
pub use kernel::{matern52, sample_kernel_spec, KernelFamily, KernelSpec};

use rand::Rng;

use crate::objective::{add_noise, Differentiable, Objective};
use crate::{Error, Result};

/// One fully analytic training objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveInstance {
    pub fourier: FourierSample,
    pub bowl: Option<QuadraticBowl>,
    pub noise_variance: f64,
    pub dimension: usize,
}

/// How training objectives are drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorConfig {
    pub dimension: usize,
    pub num_features: usize,
    pub include_bowl: bool,
    pub noise_variance: f64,
    pub lengthscale_prior: LengthscalePrior,
}

impl PriorConfig {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            num_features: 100,
            include_bowl: true,
            noise_variance: 0.0,
            lengthscale_prior: LengthscalePrior::default_unit_cube(),
        }
    }
}

impl ObjectiveInstance {
    pub fn new(fourier: FourierSample, bowl: Option<QuadraticBowl>, noise_variance: f64) -> Result<Self> {
        let dimension = fourier.dimension;
        if let Some(b) = &bowl {
            if b.dimension != dimension {
                return Err(Error::DimensionMismatch { expected: dimension, got: b.dimension });
            }
        }
        if !(noise_variance >= 0.0) {
            return Err(Error::InvalidArgument(format!("noise variance must be >= 0, got {noise_variance}")));
        }
        Ok(Self { fourier, bowl, noise_variance, dimension })
    }

    /// Draws a kernel, its Fourier features and (optionally) a bowl.
    pub fn sample<R: Rng + ?Sized>(config: &PriorConfig, rng: &mut R) -> Result<Self> {
        let kernel = sample_kernel_spec(&config.lengthscale_prior, config.dimension, rng)?;
        let fourier = sample_fourier_features(&kernel, config.num_features, rng)?;
        let bowl = if config.include_bowl { Some(sample_quadratic_bowl(config.dimension, rng)?) } else { None };
        Self::new(fourier, bowl, config.noise_variance)
    }

    /// Noiseless value and exact gradient.
    pub fn evaluate(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check(x)?;
        let mut grad = vec![0.0; self.dimension];
        let value = self.value_and_gradient(x, &mut grad);
        Ok((value, grad))
    }

    /// Noisy observation: value plus a `N(0, noise_variance)` draw.
    pub fn observe_noisy<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Result<f64> {
        self.check(x)?;
        Ok(add_noise(self.value(x), self.noise_variance, rng))
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, got: x.len() });
        }
        Ok(())
    }
}

impl Objective for ObjectiveInstance {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut v = self.fourier.value(x);
        if let Some(b) = &self.bowl {
            v += b.value(x);
        }
        v
    }

    fn noise_variance(&self) -> f64 {
        self.noise_variance
    }
}

impl Differentiable for ObjectiveInstance {
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut v = self.fourier.value_and_gradient(x, grad);
        if let Some(b) = &self.bowl {
            v += b.value_and_gradient(x, grad);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::from_seed;

    #[test]
    fn zero_function() {
        let obj = ObjectiveInstance::new(FourierSample::zero(3, 10), None, 0.0).unwrap();
        let (v, g) = obj.evaluate(&[0.1, 0.7, 0.3]).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(g, vec![0.0; 3]);
    }

    #[test]
    fn bowl_minimum() {
        let bowl = QuadraticBowl::new(vec![1.0, 0.0, 0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let obj = ObjectiveInstance::new(FourierSample::zero(2, 4), Some(bowl), 0.0).unwrap();
        let (v, g) = obj.evaluate(&[0.5, 0.5]).unwrap();
        assert_eq!(v, 0.125);
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let obj = ObjectiveInstance::new(FourierSample::zero(2, 4), None, 0.0).unwrap();
        assert!(matches!(obj.evaluate(&[0.5]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn noiseless_observation_equals_value() {
        let obj = ObjectiveInstance::sample(&PriorConfig::new(2), &mut from_seed(5)).unwrap();
        let x = [0.3, 0.9];
        assert_eq!(obj.observe_noisy(&x, &mut from_seed(1)).unwrap(), obj.value(&x));
    }

    #[test]
    fn noisy_observation_is_reproducible() {
        let mut cfg = PriorConfig::new(2);
        cfg.noise_variance = 0.1;
        let obj = ObjectiveInstance::sample(&cfg, &mut from_seed(5)).unwrap();
        let a = obj.observe_noisy(&[0.2, 0.2], &mut from_seed(9)).unwrap();
        let b = obj.observe_noisy(&[0.2, 0.2], &mut from_seed(9)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, obj.value(&[0.2, 0.2]));
    }
}
