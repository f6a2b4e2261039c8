//! Exact GP regression with a Matérn 5/2 kernel.

use nalgebra::{DMatrix, DVector};

use crate::prior::KernelSpec;
use crate::{Error, Result};

const JITTER_START: f64 = 1e-8;
const JITTER_MAX: f64 = 1e-4;

/// Default cap on the number of training points.
pub const MAX_POINTS: usize = 256;

/// A fitted GP: Cholesky factor of `K + (noise + jitter) I` and the weights
/// `alpha = (K + ...)^-1 (y - mean)`.
#[derive(Debug, Clone)]
pub struct GpModel {
    pub kernel: KernelSpec,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    /// Constant prior mean.
    pub mean: f64,
    pub noise_variance: f64,
    pub jitter: f64,
    pub chol: DMatrix<f64>,
    pub alpha_vec: DVector<f64>,
}

pub fn kernel_matrix(kernel: &KernelSpec, inputs: &[Vec<f64>]) -> DMatrix<f64> {
    let n = inputs.len();
    DMatrix::from_fn(n, n, |i, j| kernel.eval(&inputs[i], &inputs[j]))
}

/// Fits a zero-mean GP.
pub fn gp_fit(kernel: &KernelSpec, inputs: &[Vec<f64>], targets: &[f64], noise_variance: f64) -> Result<GpModel> {
    gp_fit_with_mean(kernel, inputs, targets, noise_variance, 0.0)
}

/// Fits a GP with constant prior mean `mean`. The factorisation is first
/// attempted without jitter; on failure jitter starts at 1e-8 and grows
/// tenfold per attempt, up to 1e-4.
pub fn gp_fit_with_mean(
    kernel: &KernelSpec,
    inputs: &[Vec<f64>],
    targets: &[f64],
    noise_variance: f64,
    mean: f64,
) -> Result<GpModel> {
    let n = inputs.len();
    if n == 0 {
        return Err(Error::InvalidArgument("GP needs at least one training point".into()));
    }
    if targets.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: targets.len() });
    }
    if n > MAX_POINTS {
        return Err(Error::InvalidArgument(format!("GP limited to {MAX_POINTS} points, got {n}")));
    }
    let d = kernel.dimension();
    if let Some(x) = inputs.iter().find(|x| x.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    let k = kernel_matrix(kernel, inputs);
    let centred = DVector::from_iterator(n, targets.iter().map(|y| y - mean));
    let mut jitter = 0.0;
    loop {
        let mut reg = k.clone();
        for i in 0..n {
            reg[(i, i)] += noise_variance + jitter;
        }
        if let Some(chol) = reg.cholesky() {
            let alpha_vec = chol.solve(&centred);
            let l = chol.unpack();
            return Ok(GpModel {
                kernel: kernel.clone(),
                inputs: inputs.to_vec(),
                targets: targets.to_vec(),
                mean,
                noise_variance,
                jitter,
                chol: l,
                alpha_vec,
            });
        }
        if jitter >= JITTER_MAX {
            return Err(Error::Cholesky { jitter });
        }
        jitter = if jitter == 0.0 { JITTER_START } else { (jitter * 10.0).min(JITTER_MAX) };
    }
}

impl GpModel {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    fn cross(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.inputs.iter().map(|xi| self.kernel.eval(xi, x)))
    }

    /// Posterior mean and (non-negative) variance of the latent function.
    pub fn posterior(&self, x: &[f64]) -> (f64, f64) {
        let ks = self.cross(x);
        let mean = self.mean + ks.dot(&self.alpha_vec);
        let v = self.chol.solve_lower_triangular(&ks).expect("cholesky factor has a positive diagonal");
        let var = (self.kernel.variance - v.dot(&v)).max(0.0);
        (mean, var)
    }

    /// Log marginal likelihood of the training targets.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.len() as f64;
        let centred = DVector::from_iterator(self.len(), self.targets.iter().map(|y| y - self.mean));
        let fit = -0.5 * centred.dot(&self.alpha_vec);
        let logdet: f64 = (0..self.len()).map(|i| self.chol[(i, i)].ln()).sum();
        fit - logdet - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
    }
}

pub fn gp_posterior(model: &GpModel, x: &[f64]) -> (f64, f64) {
    model.posterior(x)
}
