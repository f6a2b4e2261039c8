use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use super::KernelSpec;
use crate::{Error, Result};

/// A random-Fourier-feature approximation of one Matérn 5/2 GP sample:
/// `f(x) = amplitude * sum_m w_m cos(omega_m . x + b_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSample {
    pub dimension: usize,
    /// `num_features x dimension`, row-major.
    pub frequencies: Vec<f64>,
    pub phases: Vec<f64>,
    pub weights: Vec<f64>,
    pub amplitude: f64,
}

impl FourierSample {
    pub fn num_features(&self) -> usize {
        self.phases.len()
    }

    pub fn frequency(&self, m: usize) -> &[f64] {
        &self.frequencies[m * self.dimension..(m + 1) * self.dimension]
    }

    /// An identically-zero sample with the given shape.
    pub fn zero(dimension: usize, num_features: usize) -> Self {
        Self {
            dimension,
            frequencies: vec![0.0; dimension * num_features],
            phases: vec![0.0; num_features],
            weights: vec![0.0; num_features],
            amplitude: (2.0 / num_features as f64).sqrt(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for m in 0..self.num_features() {
            let w = self.weights[m];
            if w == 0.0 {
                continue;
            }
            let arg = dot(self.frequency(m), x) + self.phases[m];
            acc += w * arg.cos();
        }
        self.amplitude * acc
    }

    /// Adds the gradient to `grad` and returns the value.
    pub fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let mut acc = 0.0;
        for m in 0..self.num_features() {
            let w = self.weights[m];
            if w == 0.0 {
                continue;
            }
            let omega = self.frequency(m);
            let arg = dot(omega, x) + self.phases[m];
            let (s, c) = arg.sin_cos();
            acc += w * c;
            let g = -self.amplitude * w * s;
            for (gi, oi) in grad.iter_mut().zip(omega) {
                *gi += g * oi;
            }
        }
        self.amplitude * acc
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Samples `num_features` features from the Matérn 5/2 spectral measure, a
/// multivariate t with 5 degrees of freedom scaled by `1/l` per dimension.
/// Each feature gets its own chi-squared draw.
pub fn sample_fourier_features<R: Rng + ?Sized>(
    kernel: &KernelSpec,
    num_features: usize,
    rng: &mut R,
) -> Result<FourierSample> {
    if num_features == 0 {
        return Err(Error::InvalidArgument("need at least one Fourier feature".into()));
    }
    let d = kernel.dimension();
    let chi2 = ChiSquared::new(5.0).expect("valid dof");
    let mut frequencies = Vec::with_capacity(num_features * d);
    for _ in 0..num_features {
        let u = loop {
            let u: f64 = chi2.sample(rng);
            if u > 0.0 {
                break u;
            }
        };
        let t_scale = (5.0 / u).sqrt();
        for l in &kernel.lengthscales {
            let z: f64 = rng.sample(StandardNormal);
            frequencies.push(z / l * t_scale);
        }
    }
    let phases = (0..num_features)
        .map(|_| {
            let p = rng.random::<f64>() * TAU;
            if p >= TAU {
                0.0
            } else {
                p
            }
        })
        .collect();
    let weights = (0..num_features).map(|_| rng.sample(StandardNormal)).collect();
    Ok(FourierSample {
        dimension: d,
        frequencies,
        phases,
        weights,
        amplitude: (2.0 * kernel.variance / num_features as f64).sqrt(),
    })
}
