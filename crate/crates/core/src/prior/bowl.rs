use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::{Error, Result};

/// Convex quadratic `(1/d) (x - a)^T W (x - a) + c` added to a GP sample to
/// give it a central global structure.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticBowl {
    pub dimension: usize,
    /// `d x d`, row-major, symmetric.
    pub weights: Vec<f64>,
    pub center: Vec<f64>,
    pub offset: f64,
}

/// `c = sum_ij W_ij / (8 d)`: half the expected maximum of the quadratic term.
pub fn bowl_offset(weights: &[f64], d: usize) -> f64 {
    weights.iter().sum::<f64>() / (8.0 * d as f64)
}

impl QuadraticBowl {
    pub fn new(weights: Vec<f64>, center: Vec<f64>) -> Result<Self> {
        let d = center.len();
        if weights.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, got: weights.len() });
        }
        let offset = bowl_offset(&weights, d);
        Ok(Self { dimension: d, weights, center, offset })
    }

    /// Quadratic part only, without the offset.
    pub fn quadratic(&self, x: &[f64]) -> f64 {
        let d = self.dimension;
        let mut acc = 0.0;
        for i in 0..d {
            let ui = x[i] - self.center[i];
            let row = &self.weights[i * d..(i + 1) * d];
            let mut inner = 0.0;
            for j in 0..d {
                inner += row[j] * (x[j] - self.center[j]);
            }
            acc += ui * inner;
        }
        acc / d as f64
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.quadratic(x) + self.offset
    }

    /// Adds `(2/d) W (x - a)` to `grad` and returns the value.
    pub fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let d = self.dimension;
        let scale = 2.0 / d as f64;
        for (g, row) in grad.iter_mut().zip(self.weights.chunks_exact(d)) {
            let mut inner = 0.0;
            for j in 0..d {
                inner += row[j] * (x[j] - self.center[j]);
            }
            *g += scale * inner;
        }
        self.value(x)
    }
}

/// Draws `W ~ Wishart(I/d, d)` by the Bartlett decomposition, a centre
/// uniform on `[0.2, 0.8]^d`, and the matching offset.
pub fn sample_quadratic_bowl<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<QuadraticBowl> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    // Lower-triangular Bartlett factor A: A_ii^2 ~ chi2(d - i), A_ij ~ N(0,1) for j < i.
    let mut a = vec![0.0; d * d];
    for i in 0..d {
        let chi2 = ChiSquared::new((d - i) as f64).expect("positive dof");
        a[i * d + i] = chi2.sample(rng).sqrt();
        for j in 0..i {
            a[i * d + j] = rng.sample(StandardNormal);
        }
    }
    // W = L A A^T L^T with L = I / sqrt(d).
    let mut w = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut acc = 0.0;
            for k in 0..=i.min(j) {
                acc += a[i * d + k] * a[j * d + k];
            }
            w[i * d + j] = acc / d as f64;
        }
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let s = 0.5 * (w[i * d + j] + w[j * d + i]);
            w[i * d + j] = s;
            w[j * d + i] = s;
        }
    }
    let center = (0..d).map(|_| 0.2 + 0.6 * rng.random::<f64>()).collect();
    QuadraticBowl::new(w, center)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_offset() {
        let bowl = QuadraticBowl::new(vec![1.0, 0.0, 0.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(bowl.offset, 0.125);
        assert_eq!(bowl.value(&[0.5, 0.5]), 0.125);
        let mut g = [0.0; 2];
        bowl.value_and_gradient(&[0.5, 0.5], &mut g);
        assert_eq!(g, [0.0, 0.0]);
    }

    #[test]
    fn draws_are_symmetric_and_centred() {
        let mut rng = crate::rng::from_seed(11);
        for _ in 0..50 {
            let b = sample_quadratic_bowl(3, &mut rng).unwrap();
            for i in 0..3 {
                assert!((0.2..=0.8).contains(&b.center[i]));
                for j in 0..3 {
                    assert_eq!(b.weights[i * 3 + j], b.weights[j * 3 + i]);
                }
            }
            assert_eq!(b.offset, bowl_offset(&b.weights, 3));
        }
    }
}
