//! The memory-based optimiser: a single-layer LSTM whose hidden state is
//! decoded through a sigmoid into the next query location.

mod params;

pub use params::{policy_layout, PolicyParams, GATES};

use rand::Rng;

use crate::objective::{add_noise, CostNorm, Objective};
use crate::{Error, Result};

/// Recurrent memory carried between decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    pub hidden: Vec<f64>,
    pub cell: Vec<f64>,
}

impl PolicyState {
    pub fn zeros(hidden_size: usize) -> Self {
        Self { hidden: vec![0.0; hidden_size], cell: vec![0.0; hidden_size] }
    }
}

/// Evaluations `x_0..x_T` made by an optimiser on one objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<Vec<f64>>,
    pub true_values: Vec<f64>,
    pub observed_values: Vec<f64>,
    /// `step_costs[t]` is the cost of moving from `points[t]` to `points[t+1]`.
    pub step_costs: Vec<f64>,
    pub norm: CostNorm,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.points.len() - 1
    }

    pub fn dimension(&self) -> usize {
        self.points[0].len()
    }

    /// Builds a trajectory from points and values, computing step costs.
    pub fn from_points(
        points: Vec<Vec<f64>>,
        true_values: Vec<f64>,
        observed_values: Vec<f64>,
        norm: CostNorm,
    ) -> Self {
        let step_costs = points.windows(2).map(|w| norm.distance(&w[0], &w[1])).collect();
        Self { points, true_values, observed_values, step_costs, norm }
    }
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Activations of one LSTM step. Gate order is input, forget, candidate, output.
pub(crate) struct CellOutput<'a> {
    pub gates: &'a mut [f64],
    pub cell: &'a mut [f64],
    pub tanh_cell: &'a mut [f64],
    pub hidden: &'a mut [f64],
    pub next_x: &'a mut [f64],
}

/// One LSTM update on input `(x, y)` followed by the sigmoid decoder. Shared
/// by plain rollouts and the taped rollout used for differentiation, so both
/// produce identical bits.
pub(crate) fn cell_forward(p: &PolicyParams, h_prev: &[f64], c_prev: &[f64], input: &[f64], out: CellOutput<'_>) {
    let hs = p.hidden_size;
    let d = p.dimension;
    let wide = GATES * hs;
    let z = &mut *out.gates;
    z.copy_from_slice(p.gate_biases());
    let wi = p.input_weights();
    for (k, &u) in input.iter().enumerate() {
        let row = &wi[k * wide..(k + 1) * wide];
        for (zj, wj) in z.iter_mut().zip(row) {
            *zj += u * wj;
        }
    }
    let wh = p.recurrent_weights();
    for (k, &h) in h_prev.iter().enumerate() {
        if h == 0.0 {
            continue;
        }
        let row = &wh[k * wide..(k + 1) * wide];
        for (zj, wj) in z.iter_mut().zip(row) {
            *zj += h * wj;
        }
    }
    for j in 0..hs {
        z[j] = sigmoid(z[j]);
        z[hs + j] = sigmoid(z[hs + j]);
        z[2 * hs + j] = z[2 * hs + j].tanh();
        z[3 * hs + j] = sigmoid(z[3 * hs + j]);
    }
    for j in 0..hs {
        let c = z[hs + j] * c_prev[j] + z[j] * z[2 * hs + j];
        out.cell[j] = c;
        let tc = c.tanh();
        out.tanh_cell[j] = tc;
        out.hidden[j] = z[3 * hs + j] * tc;
    }
    let wd = p.decoder_weights();
    let logits = &mut *out.next_x;
    logits.copy_from_slice(p.decoder_bias());
    for (k, &h) in out.hidden.iter().enumerate() {
        let row = &wd[k * d..(k + 1) * d];
        for (lj, wj) in logits.iter_mut().zip(row) {
            *lj += h * wj;
        }
    }
    for v in logits.iter_mut() {
        *v = sigmoid(*v);
    }
}

/// Scratch buffers for repeated steps without reallocation.
pub(crate) struct StepScratch {
    pub input: Vec<f64>,
    pub gates: Vec<f64>,
    pub tanh_cell: Vec<f64>,
}

impl StepScratch {
    pub fn new(p: &PolicyParams) -> Self {
        Self {
            input: vec![0.0; p.dimension + 1],
            gates: vec![0.0; GATES * p.hidden_size],
            tanh_cell: vec![0.0; p.hidden_size],
        }
    }
}

pub(crate) fn step_in_place(
    p: &PolicyParams,
    state: &mut PolicyState,
    x: &[f64],
    y: f64,
    scratch: &mut StepScratch,
    next_x: &mut [f64],
) {
    scratch.input[..x.len()].copy_from_slice(x);
    scratch.input[x.len()] = y;
    let h_prev = std::mem::take(&mut state.hidden);
    let c_prev = std::mem::take(&mut state.cell);
    let mut hidden = vec![0.0; p.hidden_size];
    let mut cell = vec![0.0; p.hidden_size];
    cell_forward(
        p,
        &h_prev,
        &c_prev,
        &scratch.input,
        CellOutput {
            gates: &mut scratch.gates,
            cell: &mut cell,
            tanh_cell: &mut scratch.tanh_cell,
            hidden: &mut hidden,
            next_x,
        },
    );
    state.hidden = hidden;
    state.cell = cell;
}

/// Feeds one observation `(x_t, y_t)` and returns the updated state and the
/// next query point, which always lies strictly inside the unit cube.
pub fn policy_step(params: &PolicyParams, state: &PolicyState, x: &[f64], y: f64) -> Result<(PolicyState, Vec<f64>)> {
    if x.len() != params.dimension {
        return Err(Error::DimensionMismatch { expected: params.dimension, got: x.len() });
    }
    if state.hidden.len() != params.hidden_size || state.cell.len() != params.hidden_size {
        return Err(Error::DimensionMismatch { expected: params.hidden_size, got: state.hidden.len() });
    }
    if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { step: 0, tensor: "policy input".into() });
    }
    let mut next = state.clone();
    let mut scratch = StepScratch::new(params);
    let mut x_next = vec![0.0; params.dimension];
    step_in_place(params, &mut next, x, y, &mut scratch, &mut x_next);
    if next.hidden.iter().chain(&next.cell).chain(&x_next).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { step: 0, tensor: "policy state".into() });
    }
    Ok((next, x_next))
}

/// Runs the policy for `horizon` decisions from the origin.
///
/// `x_0 = 0` is evaluated first; each step feeds the latest location and its
/// observed (possibly noisy) value and queries the returned point.
pub fn rollout<O, R>(params: &PolicyParams, obj: &O, horizon: usize, norm: CostNorm, rng: &mut R) -> Result<Trajectory>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let d = params.dimension;
    if obj.dimension() != d {
        return Err(Error::DimensionMismatch { expected: d, got: obj.dimension() });
    }
    let noise = obj.noise_variance();
    let mut points = Vec::with_capacity(horizon + 1);
    let mut true_values = Vec::with_capacity(horizon + 1);
    let mut observed = Vec::with_capacity(horizon + 1);
    let origin = vec![0.0; d];
    let y0 = obj.value(&origin);
    true_values.push(y0);
    observed.push(add_noise(y0, noise, rng));
    points.push(origin);

    let mut state = PolicyState::zeros(params.hidden_size);
    let mut scratch = StepScratch::new(params);
    for t in 0..horizon {
        let mut next = vec![0.0; d];
        step_in_place(params, &mut state, &points[t], observed[t], &mut scratch, &mut next);
        if next.iter().any(|v| !v.is_finite()) || state.hidden.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: t, tensor: "policy state".into() });
        }
        let y = obj.value(&next);
        true_values.push(y);
        observed.push(add_noise(y, noise, rng));
        points.push(next);
    }
    Ok(Trajectory::from_points(points, true_values, observed, norm))
}
