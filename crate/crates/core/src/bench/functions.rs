//! Analytic benchmark functions, rescaled to a common output range.
//!
//! Each raw function is defined on its usual native box and evaluated through
//! an affine map from the unit cube. The rescaled function is
//! `(f - f_min) / (max f - f_min) * 6 - 3 + f_opt`, with the maximum found by
//! random search and `f_opt ~ U[0, 1]`, so outputs lie in
//! `[-3 + f_opt, 3 + f_opt]` and the minimum value is exactly `-3 + f_opt`.

use std::f64::consts::PI;

use rand::Rng;

use crate::objective::Objective;
use crate::{Error, Result};

pub const REGISTRY: [&str; 7] = ["sphere", "rastrigin", "rosenbrock", "ackley", "branin", "hartmann3", "hartmann6"];

/// Number of uniform probes used to estimate the maximum.
pub const MAX_PROBES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Sphere,
    Rastrigin,
    Rosenbrock,
    Ackley,
    Branin,
    Hartmann3,
    Hartmann6,
}

/// How a benchmark's outputs were rescaled.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalisation {
    /// Known raw minimum, subtracted before scaling.
    pub raw_min: f64,
    /// Estimated raw maximum over the domain.
    pub max_estimate: f64,
    pub f_opt: f64,
    pub probes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkFn {
    pub name: String,
    pub dimension: usize,
    kind: Kind,
    lower: Vec<f64>,
    upper: Vec<f64>,
    pub normalisation: Normalisation,
    /// Known minimisers in unit-cube coordinates.
    pub optima: Vec<Vec<f64>>,
    pub noise_variance: f64,
}

fn sphere(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum()
}

fn rastrigin(z: &[f64]) -> f64 {
    10.0 * z.len() as f64 + z.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
}

fn rosenbrock(z: &[f64]) -> f64 {
    z.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2)).sum()
}

fn ackley(z: &[f64]) -> f64 {
    let n = z.len() as f64;
    let sq = (z.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    let cs = z.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
    // Grouped so each pair cancels exactly at the origin.
    (20.0 - 20.0 * (-0.2 * sq).exp()) + (std::f64::consts::E - cs.exp())
}

pub fn branin_raw(x1: f64, x2: f64) -> f64 {
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    (x2 - b * x1 * x1 + c * x1 - 6.0).powi(2) + 10.0 * (1.0 - t) * x1.cos() + 10.0
}

const H3_A: [[f64; 3]; 4] = [[3.0, 10.0, 30.0], [0.1, 10.0, 35.0], [3.0, 10.0, 30.0], [0.1, 10.0, 35.0]];
const H3_P: [[f64; 3]; 4] =
    [[0.3689, 0.1170, 0.2673], [0.4699, 0.4387, 0.7470], [0.1091, 0.8732, 0.5547], [0.0381, 0.5743, 0.8828]];
const H6_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];
const H6_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];
const H_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];

fn hartmann<const N: usize>(z: &[f64], a: &[[f64; N]; 4], p: &[[f64; N]; 4]) -> f64 {
    -(0..4)
        .map(|i| {
            let inner: f64 = (0..N).map(|j| a[i][j] * (z[j] - p[i][j]).powi(2)).sum();
            H_ALPHA[i] * (-inner).exp()
        })
        .sum::<f64>()
}

impl Kind {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "sphere" => Kind::Sphere,
            "rastrigin" => Kind::Rastrigin,
            "rosenbrock" => Kind::Rosenbrock,
            "ackley" => Kind::Ackley,
            "branin" => Kind::Branin,
            "hartmann3" => Kind::Hartmann3,
            "hartmann6" => Kind::Hartmann6,
            _ => return None,
        })
    }

    fn fixed_dimension(self) -> Option<usize> {
        match self {
            Kind::Branin => Some(2),
            Kind::Hartmann3 => Some(3),
            Kind::Hartmann6 => Some(6),
            _ => None,
        }
    }

    fn bounds(self, d: usize) -> (Vec<f64>, Vec<f64>) {
        match self {
            Kind::Sphere => (vec![-5.0; d], vec![5.0; d]),
            Kind::Rastrigin => (vec![-5.12; d], vec![5.12; d]),
            Kind::Rosenbrock => (vec![-2.048; d], vec![2.048; d]),
            Kind::Ackley => (vec![-32.768; d], vec![32.768; d]),
            Kind::Branin => (vec![-5.0, 0.0], vec![10.0, 15.0]),
            Kind::Hartmann3 | Kind::Hartmann6 => (vec![0.0; d], vec![1.0; d]),
        }
    }

    fn raw(self, z: &[f64]) -> f64 {
        match self {
            Kind::Sphere => sphere(z),
            Kind::Rastrigin => rastrigin(z),
            Kind::Rosenbrock => rosenbrock(z),
            Kind::Ackley => ackley(z),
            Kind::Branin => branin_raw(z[0], z[1]),
            Kind::Hartmann3 => hartmann(z, &H3_A, &H3_P),
            Kind::Hartmann6 => hartmann(z, &H6_A, &H6_P),
        }
    }

    /// Known raw minimum and minimisers in native coordinates.
    fn minimum(self, d: usize) -> (f64, Vec<Vec<f64>>) {
        match self {
            Kind::Sphere | Kind::Rastrigin | Kind::Ackley => (0.0, vec![vec![0.0; d]]),
            Kind::Rosenbrock => (0.0, vec![vec![1.0; d]]),
            Kind::Branin => (0.397_887_357_729_738_2, vec![vec![-PI, 12.275], vec![PI, 2.275], vec![9.424_78, 2.475]]),
            Kind::Hartmann3 => (-3.862_782_147_820_756, vec![vec![0.114_614, 0.555_649, 0.852_547]]),
            Kind::Hartmann6 => {
                (-3.322_368_011_391_339, vec![vec![0.201_69, 0.150_011, 0.476_874, 0.275_332, 0.311_652, 0.657_3]])
            }
        }
    }
}

impl BenchmarkFn {
    fn to_native(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(self.lower.iter().zip(&self.upper)).map(|(u, (lo, hi))| lo + u * (hi - lo)).collect()
    }

    /// Raw (unnormalised) value at a unit-cube point.
    pub fn raw_value(&self, x: &[f64]) -> f64 {
        self.kind.raw(&self.to_native(x))
    }

    /// Raw value at a native-domain point.
    pub fn raw_native(&self, z: &[f64]) -> f64 {
        self.kind.raw(z)
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    /// Normalised optimum value, `-3 + f_opt`.
    pub fn optimum_value(&self) -> f64 {
        -3.0 + self.normalisation.f_opt
    }

    pub fn with_noise(mut self, noise_variance: f64) -> Self {
        self.noise_variance = noise_variance;
        self
    }

    fn normalise(&self, raw: f64) -> f64 {
        let n = &self.normalisation;
        (raw - n.raw_min) / (n.max_estimate - n.raw_min) * 6.0 - 3.0 + n.f_opt
    }
}

impl Objective for BenchmarkFn {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.normalise(self.raw_value(x))
    }

    fn noise_variance(&self) -> f64 {
        self.noise_variance
    }
}

/// Coordinate pattern search climbing from `start`; returns the best raw value.
fn refine_max(f: &BenchmarkFn, start: &[f64], start_val: f64) -> f64 {
    let mut x = start.to_vec();
    let mut best = start_val;
    let mut step = 0.05;
    while step > 1e-9 {
        let mut improved = false;
        for j in 0..x.len() {
            for dir in [-1.0, 1.0] {
                let mut y = x.clone();
                y[j] = (y[j] + dir * step).clamp(0.0, 1.0);
                let v = f.raw_value(&y);
                if v > best {
                    best = v;
                    x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

/// Builds a named benchmark in dimension `d`, estimating its maximum with
/// [`MAX_PROBES`] uniform probes plus a local climb from the best probe, and
/// drawing `f_opt ~ U[0,1]`.
pub fn make_benchmark<R: Rng + ?Sized>(name: &str, d: usize, rng: &mut R) -> Result<BenchmarkFn> {
    let kind = Kind::parse(name)
        .ok_or_else(|| Error::UnknownBenchmark { name: name.to_string(), available: REGISTRY.join(", ") })?;
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if let Some(fixed) = kind.fixed_dimension() {
        if d != fixed {
            return Err(Error::InvalidArgument(format!("{name} is only defined for d = {fixed}")));
        }
    }
    if kind == Kind::Rosenbrock && d < 2 {
        return Err(Error::InvalidArgument("rosenbrock needs d >= 2".into()));
    }
    let (lower, upper) = kind.bounds(d);
    let (raw_min, native_optima) = kind.minimum(d);
    let optima = native_optima
        .iter()
        .map(|z| z.iter().zip(lower.iter().zip(&upper)).map(|(v, (lo, hi))| (v - lo) / (hi - lo)).collect())
        .collect();
    let mut f = BenchmarkFn {
        name: name.to_string(),
        dimension: d,
        kind,
        lower,
        upper,
        normalisation: Normalisation { raw_min, max_estimate: raw_min + 1.0, f_opt: 0.0, probes: MAX_PROBES },
        optima,
        noise_variance: 0.0,
    };
    let mut best = (f64::NEG_INFINITY, vec![0.0; d]);
    let mut probe = vec![0.0; d];
    for _ in 0..MAX_PROBES {
        probe.iter_mut().for_each(|v| *v = rng.random::<f64>());
        let v = f.raw_value(&probe);
        if v > best.0 {
            best = (v, probe.clone());
        }
    }
    let max_estimate = refine_max(&f, &best.1, best.0);
    f.normalisation.max_estimate = max_estimate;
    f.normalisation.f_opt = rng.random::<f64>();
    Ok(f)
}
