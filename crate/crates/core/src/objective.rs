//! The black-box interface shared by policies, baselines and benchmarks.

use rand::Rng;
use rand_distr::StandardNormal;

/// A function on the unit cube `[0,1]^d` that an optimiser may query.
pub trait Objective: Sync {
    fn dimension(&self) -> usize;

    /// Noiseless value at `x`. Callers guarantee `x.len() == self.dimension()`.
    fn value(&self, x: &[f64]) -> f64;

    /// Variance of the Gaussian noise added to observations.
    fn noise_variance(&self) -> f64 {
        0.0
    }
}

/// An objective with an exact gradient.
pub trait Differentiable: Objective {
    /// Writes the gradient into `grad` and returns the value.
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

/// Adds a fresh observation-noise draw to `value`. No randomness is consumed
/// when the noise variance is zero.
pub fn add_noise<R: Rng + ?Sized>(value: f64, noise_variance: f64, rng: &mut R) -> f64 {
    if noise_variance > 0.0 {
        let z: f64 = rng.sample(StandardNormal);
        value + noise_variance.sqrt() * z
    } else {
        value
    }
}

/// Noisy observation of `obj` at `x`.
pub fn observe<O: Objective + ?Sized, R: Rng + ?Sized>(obj: &O, x: &[f64], rng: &mut R) -> f64 {
    add_noise(obj.value(x), obj.noise_variance(), rng)
}

/// Which norm measures the cost of moving between two query points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostNorm {
    L1,
    #[default]
    L2,
}

impl CostNorm {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            CostNorm::L1 => a.iter().zip(b).map(|(p, q)| (q - p).abs()).sum(),
            CostNorm::L2 => a.iter().zip(b).map(|(p, q)| (q - p) * (q - p)).sum::<f64>().sqrt(),
        }
    }

    /// Adds `scale * d distance(a, b) / d b` to `grad_b` and subtracts it from
    /// `grad_a`. At zero displacement the L2 subgradient is taken as zero.
    pub fn accumulate_gradient(self, a: &[f64], b: &[f64], scale: f64, grad_a: &mut [f64], grad_b: &mut [f64]) {
        match self {
            CostNorm::L1 => {
                for i in 0..a.len() {
                    let diff = b[i] - a[i];
                    let s = if diff > 0.0 {
                        1.0
                    } else if diff < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    grad_b[i] += scale * s;
                    grad_a[i] -= scale * s;
                }
            }
            CostNorm::L2 => {
                let dist = self.distance(a, b);
                if dist == 0.0 {
                    return;
                }
                for i in 0..a.len() {
                    let g = scale * (b[i] - a[i]) / dist;
                    grad_b[i] += g;
                    grad_a[i] -= g;
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CostNorm::L1 => "l1",
            CostNorm::L2 => "l2",
        }
    }
}

impl std::str::FromStr for CostNorm {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(CostNorm::L1),
            "l2" => Ok(CostNorm::L2),
            other => Err(crate::Error::InvalidArgument(format!("unknown cost norm '{other}'"))),
        }
    }
}
