//! Gaussian-process baselines run under the same trajectory and cost
//! accounting as the learned policy.

mod acquisition;
mod design;
pub mod gp;

pub use acquisition::{ei_acquisition, eipu_acquisition, expected_improvement};
pub use design::shifted_halton;
pub use gp::{gp_fit, gp_fit_with_mean, gp_posterior, GpModel};

use rand::Rng;

use crate::objective::{add_noise, CostNorm, Objective};
use crate::policy::Trajectory;
use crate::prior::KernelSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Ei,
    Eipu,
    Random,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ei => "ei",
            Method::Eipu => "eipu",
            Method::Random => "random",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ei" => Ok(Method::Ei),
            "eipu" => Ok(Method::Eipu),
            "random" => Ok(Method::Random),
            other => Err(Error::InvalidArgument(format!("unknown baseline '{other}' (ei, eipu, random)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub method: Method,
    /// EIpu cost offset.
    pub gamma: f64,
    /// Size of the warm-start design; `None` means `10 d`.
    pub warm_start_points: Option<usize>,
    /// Uniform starts for acquisition maximisation; `None` means `64 d`.
    pub acq_restarts: Option<usize>,
    /// How many of the best starts get local refinement.
    pub refine_starts: usize,
    /// Golden-section iterations per coordinate line search.
    pub refine_iters: usize,
    pub cost_norm: CostNorm,
}

impl BaselineConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            gamma: 1.0,
            warm_start_points: None,
            acq_restarts: None,
            refine_starts: 4,
            refine_iters: 100,
            cost_norm: CostNorm::L2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidArgument(format!("gamma must be positive, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Hyperparameters estimated once from the warm-start design.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    pub kernel: KernelSpec,
    pub mean: f64,
}

const LOG_LS_MIN: f64 = -4.6; // ~0.01
const LOG_LS_MAX: f64 = 1.6; // ~5
const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn golden_max(mut lo: f64, mut hi: f64, iters: usize, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let mut a = hi - GOLDEN * (hi - lo);
    let mut b = lo + GOLDEN * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    for _ in 0..iters {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - GOLDEN * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + GOLDEN * (hi - lo);
            fb = f(b);
        }
    }
    if fa >= fb {
        (a, fa)
    } else {
        (b, fb)
    }
}

fn log_likelihood(xs: &[Vec<f64>], ys: &[f64], log_ls: &[f64], variance: f64, noise: f64, mean: f64) -> f64 {
    let kernel = match KernelSpec::new(log_ls.iter().map(|l| l.exp()).collect(), variance) {
        Ok(k) => k,
        Err(_) => return f64::NEG_INFINITY,
    };
    match gp_fit_with_mean(&kernel, xs, ys, noise, mean) {
        Ok(m) => m.log_marginal_likelihood(),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Maximum-marginal-likelihood lengthscales on the warm-start data: a shared
/// lengthscale grid, then per-dimension golden-section refinement in log space.
/// Mean and signal variance are the sample moments of the targets.
pub fn estimate_hyperparameters(xs: &[Vec<f64>], ys: &[f64], noise_variance: f64) -> Result<WarmStart> {
    if xs.is_empty() {
        return Err(Error::InvalidArgument("warm start needs at least one point".into()));
    }
    let d = xs[0].len();
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let variance = (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n).max(1e-6);
    let mut best = (f64::NEG_INFINITY, LOG_LS_MIN);
    for i in 0..25 {
        let l = LOG_LS_MIN + (LOG_LS_MAX - LOG_LS_MIN) * i as f64 / 24.0;
        let ll = log_likelihood(xs, ys, &vec![l; d], variance, noise_variance, mean);
        if ll > best.0 {
            best = (ll, l);
        }
    }
    let mut log_ls = vec![best.1; d];
    for _sweep in 0..2 {
        for j in 0..d {
            let mut trial = log_ls.clone();
            let (arg, val) = golden_max(LOG_LS_MIN, LOG_LS_MAX, 20, |l| {
                trial[j] = l;
                log_likelihood(xs, ys, &trial, variance, noise_variance, mean)
            });
            let mut current = log_ls.clone();
            let cur_val = log_likelihood(xs, ys, &current, variance, noise_variance, mean);
            if val > cur_val {
                current[j] = arg;
                log_ls = current;
            }
        }
    }
    Ok(WarmStart { kernel: KernelSpec::new(log_ls.iter().map(|l| l.exp()).collect(), variance)?, mean })
}

/// Multi-start maximisation of `acq` over the unit cube: uniform starts, then
/// coordinate-wise golden-section refinement of the best few.
pub fn maximise_acquisition<R: Rng + ?Sized>(
    d: usize,
    restarts: usize,
    refine_starts: usize,
    refine_iters: usize,
    rng: &mut R,
    acq: impl Fn(&[f64]) -> f64,
) -> Vec<f64> {
    let mut starts: Vec<(f64, Vec<f64>)> = (0..restarts.max(1))
        .map(|_| {
            let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            (acq(&x), x)
        })
        .collect();
    starts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let radius = 0.5 / (restarts.max(1) as f64).powf(1.0 / d as f64);
    let mut best = starts[0].clone();
    for (val, x) in starts.into_iter().take(refine_starts.max(1)) {
        let mut x = x;
        let mut val = val;
        for _sweep in 0..2 {
            for j in 0..d {
                let lo = (x[j] - radius).max(0.0);
                let hi = (x[j] + radius).min(1.0);
                let mut trial = x.clone();
                let (arg, v) = golden_max(lo, hi, refine_iters, |t| {
                    trial[j] = t;
                    acq(&trial)
                });
                if v > val {
                    x[j] = arg;
                    val = v;
                }
            }
        }
        if val > best.0 {
            best = (val, x);
        }
    }
    best.1
}

/// Runs one baseline for `horizon` steps from the origin.
///
/// GP methods first evaluate a shifted-Halton design of `10 d` points to fit
/// lengthscales; those evaluations are neither added to the surrogate nor
/// charged as movement. Every later step refits the GP on all points gathered
/// since the origin and moves to the acquisition maximiser.
pub fn run_baseline_loop<O, R>(
    objective: &O,
    horizon: usize,
    config: &BaselineConfig,
    rng: &mut R,
) -> Result<Trajectory>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    config.validate()?;
    let d = objective.dimension();
    let noise = objective.noise_variance();

    let warm = match config.method {
        Method::Random => None,
        Method::Ei | Method::Eipu => {
            let n = config.warm_start_points.unwrap_or(10 * d).max(1);
            let xs = shifted_halton(n, d, rng);
            let ys: Vec<f64> = xs.iter().map(|x| add_noise(objective.value(x), noise, rng)).collect();
            Some(estimate_hyperparameters(&xs, &ys, noise)?)
        }
    };

    let origin = vec![0.0; d];
    let y0 = objective.value(&origin);
    let mut points = vec![origin];
    let mut true_values = vec![y0];
    let mut observed = vec![add_noise(y0, noise, rng)];
    let restarts = config.acq_restarts.unwrap_or(64 * d);

    for _ in 0..horizon {
        let next = match (&warm, config.method) {
            (_, Method::Random) | (None, _) => (0..d).map(|_| rng.random::<f64>()).collect(),
            (Some(w), method) => {
                let model = gp_fit_with_mean(&w.kernel, &points, &observed, noise, w.mean)?;
                let best_y = observed.iter().copied().fold(f64::INFINITY, f64::min);
                let current = points.last().expect("origin present").clone();
                let gamma = config.gamma;
                let norm = config.cost_norm;
                maximise_acquisition(d, restarts, config.refine_starts, config.refine_iters, rng, |x| match method {
                    Method::Eipu => eipu_acquisition(&model, &current, x, best_y, gamma, norm),
                    _ => ei_acquisition(&model, x, best_y),
                })
            }
        };
        let y = objective.value(&next);
        true_values.push(y);
        observed.push(add_noise(y, noise, rng));
        points.push(next);
    }
    Ok(Trajectory::from_points(points, true_values, observed, config.cost_norm))
}
