use rand::Rng;

use crate::params::{ParamVector, Segment};
use crate::{Error, Result};

/// Number of LSTM gates (input, forget, candidate, output).
pub const GATES: usize = 4;

pub const INPUT_WEIGHTS: &str = "input_weights";
pub const RECURRENT_WEIGHTS: &str = "recurrent_weights";
pub const GATE_BIASES: &str = "gate_biases";
pub const DECODER_WEIGHTS: &str = "decoder_weights";
pub const DECODER_BIAS: &str = "decoder_bias";

/// All learnable weights of the LSTM cell and its sigmoid decoder.
///
/// Matrices are row-major: `input_weights` is `(d+1) x 4H`,
/// `recurrent_weights` is `H x 4H` and `decoder_weights` is `H x d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub dimension: usize,
    pub hidden_size: usize,
    pub vector: ParamVector,
    offsets: [usize; 5],
}

pub fn policy_layout(d: usize, h: usize) -> Vec<Segment> {
    vec![
        Segment::new(INPUT_WEIGHTS, d + 1, GATES * h),
        Segment::new(RECURRENT_WEIGHTS, h, GATES * h),
        Segment::new(GATE_BIASES, 1, GATES * h),
        Segment::new(DECODER_WEIGHTS, h, d),
        Segment::new(DECODER_BIAS, 1, d),
    ]
}

impl PolicyParams {
    pub fn zeros(d: usize, h: usize) -> Result<Self> {
        Self::from_vector(d, h, ParamVector::zeros(policy_layout(d, h)))
    }

    /// Uniform `U(-1/sqrt(H), 1/sqrt(H))` weights, forget-gate bias 1, decoder bias 0.
    pub fn init<R: Rng + ?Sized>(d: usize, h: usize, rng: &mut R) -> Result<Self> {
        let mut p = Self::zeros(d, h)?;
        let s = 1.0 / (h as f64).sqrt();
        let (dec_bias_off, _) = p.range(4);
        for v in p.vector.values[..dec_bias_off].iter_mut() {
            *v = rng.random_range(-s..s);
        }
        for v in p.forget_bias_mut() {
            *v = 1.0;
        }
        Ok(p)
    }

    pub fn from_vector(d: usize, h: usize, vector: ParamVector) -> Result<Self> {
        if d == 0 || h == 0 {
            return Err(Error::InvalidArgument(format!("dimension and hidden size must be >= 1 (got d={d}, H={h})")));
        }
        let layout = policy_layout(d, h);
        if vector.layout != layout {
            return Err(Error::InvalidArgument("parameter layout does not match (d, H)".into()));
        }
        let expected: usize = layout.iter().map(Segment::len).sum();
        if vector.values.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: vector.values.len() });
        }
        let mut offsets = [0; 5];
        let mut off = 0;
        for (i, s) in layout.iter().enumerate() {
            offsets[i] = off;
            off += s.len();
        }
        Ok(Self { dimension: d, hidden_size: h, vector, offsets })
    }

    pub fn len(&self) -> usize {
        self.vector.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vector.is_empty()
    }

    fn range(&self, i: usize) -> (usize, usize) {
        let end = if i + 1 < 5 { self.offsets[i + 1] } else { self.vector.len() };
        (self.offsets[i], end)
    }

    pub fn input_weights(&self) -> &[f64] {
        let (a, b) = self.range(0);
        &self.vector.values[a..b]
    }

    pub fn recurrent_weights(&self) -> &[f64] {
        let (a, b) = self.range(1);
        &self.vector.values[a..b]
    }

    pub fn gate_biases(&self) -> &[f64] {
        let (a, b) = self.range(2);
        &self.vector.values[a..b]
    }

    pub fn decoder_weights(&self) -> &[f64] {
        let (a, b) = self.range(3);
        &self.vector.values[a..b]
    }

    pub fn decoder_bias(&self) -> &[f64] {
        let (a, b) = self.range(4);
        &self.vector.values[a..b]
    }

    pub fn decoder_weights_mut(&mut self) -> &mut [f64] {
        let (a, b) = self.range(3);
        &mut self.vector.values[a..b]
    }

    pub fn decoder_bias_mut(&mut self) -> &mut [f64] {
        let (a, b) = self.range(4);
        &mut self.vector.values[a..b]
    }

    /// The forget-gate slice of the gate biases.
    pub fn forget_bias(&self) -> &[f64] {
        let h = self.hidden_size;
        &self.gate_biases()[h..2 * h]
    }

    fn forget_bias_mut(&mut self) -> &mut [f64] {
        let (a, _) = self.range(2);
        let h = self.hidden_size;
        &mut self.vector.values[a + h..a + 2 * h]
    }

    /// Segment offsets in flat order: input, recurrent, biases, decoder, decoder bias.
    pub fn offsets(&self) -> [usize; 5] {
        self.offsets
    }

    pub fn values(&self) -> &[f64] {
        &self.vector.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.vector.values
    }
}
