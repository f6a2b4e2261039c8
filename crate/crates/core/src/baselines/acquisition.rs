use statrs::function::erf::erfc;

use super::gp::GpModel;
use crate::objective::CostNorm;

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Expected improvement below `best_y` for a Gaussian with the given mean
/// and standard deviation.
pub fn expected_improvement(mean: f64, sd: f64, best_y: f64) -> f64 {
    let gain = best_y - mean;
    if sd < 1e-12 {
        return gain.max(0.0);
    }
    let z = gain / sd;
    (gain * std_normal_cdf(z) + sd * std_normal_pdf(z)).max(0.0)
}

pub fn ei_acquisition(model: &GpModel, x: &[f64], best_y: f64) -> f64 {
    let (mean, var) = model.posterior(x);
    expected_improvement(mean, var.sqrt(), best_y)
}

/// EI divided by `gamma` plus the cost of moving from `x_current` to `x`.
pub fn eipu_acquisition(model: &GpModel, x_current: &[f64], x: &[f64], best_y: f64, gamma: f64, norm: CostNorm) -> f64 {
    ei_acquisition(model, x, best_y) / (gamma + norm.distance(x_current, x))
}
