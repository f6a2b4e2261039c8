//! Exact reverse-mode gradients of the training objective through a full
//! policy rollout, and a central-difference oracle to check them.
//!
//! The architecture is fixed, so the adjoints are written out by hand: the
//! forward pass records every gate activation and the backward pass walks the
//! rollout in reverse, carrying hidden/cell adjoints and the adjoint of each
//! query location. A location `x_t` influences the loss through its value
//! `y_t`, through the movement cost, and through being fed back to the LSTM,
//! and all three paths are followed.

use crate::objective::{add_noise, Differentiable};
use crate::parallel::Executor;
use crate::params::ParamVector;
use crate::policy::{self, cell_forward, CellOutput, PolicyParams, Trajectory, GATES};
use crate::prior::{ObjectiveInstance, PriorConfig};
use crate::rng::{self, Domain};
use crate::train::loss::{
    combine, combine_partials, improvement, improvement_gradient, mc_improvement, mean_cost, LossForm, LossSpec,
};
use crate::{Error, Result};

/// Loss, gradient and the two batch statistics that make up the loss.
#[derive(Debug, Clone)]
pub struct BackpropOutput {
    pub loss: f64,
    pub grad: ParamVector,
    pub mean_improvement: f64,
    pub mean_cost: f64,
}

/// Recorded forward pass for one objective.
struct Tape {
    horizon: usize,
    /// `(d+1)` per step: the fed `(x_t, y_t)`.
    inputs: Vec<f64>,
    /// `H` per state, `T+1` states (`h_0 = 0`).
    hidden: Vec<f64>,
    cell: Vec<f64>,
    tanh_cell: Vec<f64>,
    /// `4H` per step, activated.
    gates: Vec<f64>,
    /// `d` per point, `T+1` points.
    points: Vec<f64>,
    /// `d` per point; gradient of the objective at each point.
    value_grads: Vec<f64>,
    true_values: Vec<f64>,
    observed: Vec<f64>,
}

fn noise_stream(seed: u64, index: usize) -> rng::StreamRng {
    rng::child(seed, Domain::TrainNoise, index as u64)
}

fn check_finite(values: &[f64], step: usize, tensor: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { step, tensor: tensor.to_string() })
    }
}

fn forward_tape<O: Differentiable>(
    p: &PolicyParams,
    obj: &O,
    horizon: usize,
    noise_seed: u64,
    index: usize,
) -> Result<Tape> {
    let d = p.dimension;
    let hs = p.hidden_size;
    let steps = horizon;
    let mut tape = Tape {
        horizon,
        inputs: vec![0.0; steps * (d + 1)],
        hidden: vec![0.0; (steps + 1) * hs],
        cell: vec![0.0; (steps + 1) * hs],
        tanh_cell: vec![0.0; (steps + 1) * hs],
        gates: vec![0.0; steps * GATES * hs],
        points: vec![0.0; (steps + 1) * d],
        value_grads: vec![0.0; (steps + 1) * d],
        true_values: Vec::with_capacity(steps + 1),
        observed: Vec::with_capacity(steps + 1),
    };
    let mut rng = noise_stream(noise_seed, index);
    let noise = obj.noise_variance();
    let y0 = obj.value(&tape.points[..d]);
    tape.true_values.push(y0);
    tape.observed.push(add_noise(y0, noise, &mut rng));

    for t in 0..steps {
        let input = &mut tape.inputs[t * (d + 1)..(t + 1) * (d + 1)];
        input[..d].copy_from_slice(&tape.points[t * d..(t + 1) * d]);
        input[d] = tape.observed[t];
        let (h_done, h_rest) = tape.hidden.split_at_mut((t + 1) * hs);
        let (c_done, c_rest) = tape.cell.split_at_mut((t + 1) * hs);
        let (_, x_rest) = tape.points.split_at_mut((t + 1) * d);
        cell_forward(
            p,
            &h_done[t * hs..],
            &c_done[t * hs..],
            &tape.inputs[t * (d + 1)..(t + 1) * (d + 1)],
            CellOutput {
                gates: &mut tape.gates[t * GATES * hs..(t + 1) * GATES * hs],
                cell: &mut c_rest[..hs],
                tanh_cell: &mut tape.tanh_cell[(t + 1) * hs..(t + 2) * hs],
                hidden: &mut h_rest[..hs],
                next_x: &mut x_rest[..d],
            },
        );
        check_finite(&tape.gates[t * GATES * hs..(t + 1) * GATES * hs], t, "gates")?;
        check_finite(&tape.cell[(t + 1) * hs..(t + 2) * hs], t, "cell")?;
        let x = &tape.points[(t + 1) * d..(t + 2) * d];
        check_finite(x, t, "query")?;
        let y = obj.value_and_gradient(x, &mut tape.value_grads[(t + 1) * d..(t + 2) * d]);
        if !y.is_finite() {
            return Err(Error::NonFinite { step: t + 1, tensor: "objective value".into() });
        }
        tape.true_values.push(y);
        tape.observed.push(add_noise(y, noise, &mut rng));
    }
    Ok(tape)
}

impl Tape {
    fn trajectory(&self, d: usize, spec: &LossSpec) -> Trajectory {
        let points = self.points.chunks(d).map(<[f64]>::to_vec).collect();
        Trajectory::from_points(points, self.true_values.clone(), self.observed.clone(), spec.cost_norm)
    }
}

/// Reverse sweep for one tape. `scale_improvement` and `scale_cost` are the
/// loss's partial derivatives w.r.t. this instance's improvement and cost.
fn backward_tape(
    p: &PolicyParams,
    tape: &Tape,
    spec: &LossSpec,
    scale_improvement: f64,
    scale_cost: f64,
    grad: &mut [f64],
) {
    let d = p.dimension;
    let hs = p.hidden_size;
    let wide = GATES * hs;
    let steps = tape.horizon;
    let [off_wi, off_wh, off_b, off_wd, off_bd] = p.offsets();

    let mut gy = vec![0.0; steps + 1];
    let mut gx = vec![0.0; (steps + 1) * d];
    improvement_gradient(&tape.observed, scale_improvement, spec.myopic_detach, &mut gy);
    if scale_cost != 0.0 {
        for t in 1..steps {
            let (head, tail) = gx.split_at_mut((t + 1) * d);
            spec.cost_norm.accumulate_gradient(
                &tape.points[t * d..(t + 1) * d],
                &tape.points[(t + 1) * d..(t + 2) * d],
                scale_cost,
                &mut head[t * d..],
                &mut tail[..d],
            );
        }
    }

    let wi = p.input_weights();
    let wh = p.recurrent_weights();
    let wd = p.decoder_weights();
    let mut dh_next = vec![0.0; hs];
    let mut dc_next = vec![0.0; hs];
    let mut dh = vec![0.0; hs];
    let mut dz = vec![0.0; wide];
    let mut logit_grad = vec![0.0; d];

    for t in (0..steps).rev() {
        let x = &tape.points[(t + 1) * d..(t + 2) * d];
        let fgrad = &tape.value_grads[(t + 1) * d..(t + 2) * d];
        let mut any = false;
        for j in 0..d {
            let gxj = gx[(t + 1) * d + j] + gy[t + 1] * fgrad[j];
            logit_grad[j] = gxj * x[j] * (1.0 - x[j]);
            any |= logit_grad[j] != 0.0;
        }

        let h = &tape.hidden[(t + 1) * hs..(t + 2) * hs];
        dh.copy_from_slice(&dh_next);
        if any {
            for k in 0..hs {
                let row = &wd[k * d..(k + 1) * d];
                let grow = &mut grad[off_wd + k * d..off_wd + (k + 1) * d];
                let mut acc = 0.0;
                for j in 0..d {
                    grow[j] += h[k] * logit_grad[j];
                    acc += row[j] * logit_grad[j];
                }
                dh[k] += acc;
            }
            for j in 0..d {
                grad[off_bd + j] += logit_grad[j];
            }
        }

        let gates = &tape.gates[t * wide..(t + 1) * wide];
        let c_prev = &tape.cell[t * hs..(t + 1) * hs];
        let tc = &tape.tanh_cell[(t + 1) * hs..(t + 2) * hs];
        for k in 0..hs {
            let i = gates[k];
            let f = gates[hs + k];
            let g = gates[2 * hs + k];
            let o = gates[3 * hs + k];
            let dc = dc_next[k] + dh[k] * o * (1.0 - tc[k] * tc[k]);
            dz[k] = dc * g * i * (1.0 - i);
            dz[hs + k] = dc * c_prev[k] * f * (1.0 - f);
            dz[2 * hs + k] = dc * i * (1.0 - g * g);
            dz[3 * hs + k] = dh[k] * tc[k] * o * (1.0 - o);
            dc_next[k] = dc * f;
        }

        for (gb, z) in grad[off_b..off_b + wide].iter_mut().zip(&dz) {
            *gb += z;
        }
        let input = &tape.inputs[t * (d + 1)..(t + 1) * (d + 1)];
        for (k, &u) in input.iter().enumerate() {
            let grow = &mut grad[off_wi + k * wide..off_wi + (k + 1) * wide];
            for (g, z) in grow.iter_mut().zip(&dz) {
                *g += u * z;
            }
        }
        let h_prev = &tape.hidden[t * hs..(t + 1) * hs];
        for (k, &hp) in h_prev.iter().enumerate() {
            let row = &wh[k * wide..(k + 1) * wide];
            dh_next[k] = row.iter().zip(&dz).map(|(w, z)| w * z).sum();
            if hp != 0.0 {
                let grow = &mut grad[off_wh + k * wide..off_wh + (k + 1) * wide];
                for (g, z) in grow.iter_mut().zip(&dz) {
                    *g += hp * z;
                }
            }
        }
        if t > 0 {
            for k in 0..=d {
                let row = &wi[k * wide..(k + 1) * wide];
                let du: f64 = row.iter().zip(&dz).map(|(w, z)| w * z).sum();
                if k < d {
                    gx[t * d + k] += du;
                } else {
                    gy[t] += du;
                }
            }
        }
    }
}

/// Loss and exact gradient of the configured objective over a batch.
///
/// Instance `b` draws its observation noise from the stream
/// `(noise_seed, TrainNoise, b)`. Per-instance gradients are summed in batch
/// order, so the result does not depend on the executor's worker count.
pub fn backprop_rollout<O: Differentiable>(
    params: &PolicyParams,
    batch: &[O],
    spec: &LossSpec,
    noise_seed: u64,
    exec: &Executor,
) -> Result<BackpropOutput> {
    validate(params, batch, spec)?;
    let tapes = exec.map(batch.len(), |b| forward_tape(params, &batch[b], spec.horizon, noise_seed, b));
    let tapes: Vec<Tape> = tapes.into_iter().collect::<Result<_>>()?;
    let trajectories: Vec<Trajectory> = tapes.iter().map(|t| t.trajectory(params.dimension, spec)).collect();

    let mean_improvement = mc_improvement(&trajectories);
    let mean_cost = mean_cost(&trajectories, spec.cost_norm);
    let loss = combine(mean_improvement, mean_cost, spec.alpha, spec.loss_form);
    if !loss.is_finite() {
        return Err(Error::NonFinite { step: spec.horizon, tensor: "loss".into() });
    }
    let (d_imp, d_cost) = combine_partials(mean_improvement, mean_cost, spec.alpha, spec.loss_form);
    let n = batch.len() as f64;
    let (scale_imp, scale_cost) = (d_imp / n, d_cost / n);

    let partials = exec.map(tapes.len(), |b| {
        let mut g = vec![0.0; params.len()];
        backward_tape(params, &tapes[b], spec, scale_imp, scale_cost, &mut g);
        g
    });
    let mut grad = params.vector.zeros_like();
    for g in &partials {
        for (acc, v) in grad.values.iter_mut().zip(g) {
            *acc += v;
        }
    }
    if let Some(i) = grad.values.iter().position(|v| !v.is_finite()) {
        let (name, _) = grad.coordinate_name(i);
        return Err(Error::NonFinite { step: 0, tensor: format!("gradient {name}") });
    }
    Ok(BackpropOutput { loss, grad, mean_improvement, mean_cost })
}

/// Forward-only loss using plain rollouts, with the same noise streams as
/// [`backprop_rollout`].
pub fn rollout_loss<O: Differentiable>(
    params: &PolicyParams,
    batch: &[O],
    spec: &LossSpec,
    noise_seed: u64,
) -> Result<f64> {
    validate(params, batch, spec)?;
    let trajectories = batch
        .iter()
        .enumerate()
        .map(|(b, obj)| policy::rollout(params, obj, spec.horizon, spec.cost_norm, &mut noise_stream(noise_seed, b)))
        .collect::<Result<Vec<_>>>()?;
    Ok(crate::train::loss::composite_loss(&trajectories, spec))
}

/// Mean improvement of one trajectory batch on true values; used for validation.
pub fn mean_true_improvement(trajectories: &[Trajectory]) -> f64 {
    if trajectories.is_empty() {
        return 0.0;
    }
    trajectories.iter().map(|t| improvement(&t.true_values)).sum::<f64>() / trajectories.len() as f64
}

fn validate<O: Differentiable>(params: &PolicyParams, batch: &[O], spec: &LossSpec) -> Result<()> {
    if spec.horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    if batch.is_empty() {
        return Err(Error::InvalidArgument("batch must be nonempty".into()));
    }
    for obj in batch {
        if obj.dimension() != params.dimension {
            return Err(Error::DimensionMismatch { expected: params.dimension, got: obj.dimension() });
        }
    }
    Ok(())
}

/// One row of a gradient check.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateCheck {
    pub segment: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientReport {
    pub max_rel_err: f64,
    /// `(segment, index within segment)` of the worst coordinate.
    pub worst_coordinate: (String, usize),
    pub num_checked: usize,
    pub rows: Vec<CoordinateCheck>,
}

impl GradientReport {
    pub fn passes(&self, threshold: f64) -> bool {
        self.max_rel_err < threshold
    }

    pub fn to_table(&self) -> String {
        let mut out =
            format!("{:<20} {:>6} {:>16} {:>16} {:>12}\n", "segment", "index", "analytic", "numeric", "rel_err");
        for r in &self.rows {
            out.push_str(&format!(
                "{:<20} {:>6} {:>16.9e} {:>16.9e} {:>12.3e}\n",
                r.segment, r.index, r.analytic, r.numeric, r.rel_err
            ));
        }
        out.push_str(&format!(
            "checked {} coordinates; max relative error {:.3e} at {}[{}]\n",
            self.num_checked, self.max_rel_err, self.worst_coordinate.0, self.worst_coordinate.1
        ));
        out
    }
}

/// Relative error with denominator `max(|a|, |b|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Central differences `(L(p + h e_i) - L(p - h e_i)) / 2h` at the listed
/// coordinates, compared against `analytic`.
pub fn finite_diff_gradient<F>(
    loss_fn: F,
    params: &ParamVector,
    analytic: &ParamVector,
    coords: &[usize],
    h: f64,
) -> Result<GradientReport>
where
    F: Fn(&ParamVector) -> f64,
{
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
    }
    if coords.is_empty() {
        return Err(Error::InvalidArgument("no coordinates to check".into()));
    }
    if !params.same_layout(analytic) {
        return Err(Error::InvalidArgument("gradient layout differs from parameter layout".into()));
    }
    let mut probe = params.clone();
    let mut rows = Vec::with_capacity(coords.len());
    for &i in coords {
        let orig = probe.values[i];
        probe.values[i] = orig + h;
        let up = loss_fn(&probe);
        probe.values[i] = orig - h;
        let down = loss_fn(&probe);
        probe.values[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let (segment, index) = params.coordinate_name(i);
        rows.push(CoordinateCheck {
            segment,
            index,
            analytic: analytic.values[i],
            numeric,
            rel_err: relative_error(analytic.values[i], numeric),
        });
    }
    let worst = rows.iter().enumerate().fold(0, |best, (i, r)| if r.rel_err > rows[best].rel_err { i } else { best });
    Ok(GradientReport {
        max_rel_err: rows[worst].rel_err,
        worst_coordinate: (rows[worst].segment.clone(), rows[worst].index),
        num_checked: rows.len(),
        rows,
    })
}

/// Settings for [`gradient_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckConfig {
    pub dimension: usize,
    pub hidden_size: usize,
    pub horizon: usize,
    pub batch_size: usize,
    pub num_coords: usize,
    pub alpha: f64,
    pub loss_form: LossForm,
    pub myopic_detach: bool,
    /// Central-difference step.
    pub step: f64,
    pub seed: u64,
}

impl GradCheckConfig {
    pub fn new(dimension: usize, hidden_size: usize, horizon: usize) -> Self {
        Self {
            dimension,
            hidden_size,
            horizon,
            batch_size: 2,
            num_coords: 50,
            alpha: 0.05,
            loss_form: LossForm::Divide,
            myopic_detach: false,
            step: 1e-5,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckOutcome {
    pub loss: f64,
    pub mean_improvement: f64,
    pub mean_cost: f64,
    pub report: GradientReport,
}

/// Compares the BPTT gradient of the composite loss with central differences
/// at `num_coords` distinct random coordinates of a freshly initialised
/// policy on a batch of prior samples.
pub fn gradient_check(cfg: &GradCheckConfig) -> Result<GradCheckOutcome> {
    let (d, h) = (cfg.dimension, cfg.hidden_size);
    let params = PolicyParams::init(d, h, &mut rng::child(cfg.seed, Domain::GradCheck, 0))?;
    let prior = PriorConfig::new(d);
    let batch: Vec<ObjectiveInstance> = (0..cfg.batch_size)
        .map(|b| ObjectiveInstance::sample(&prior, &mut rng::child(cfg.seed, Domain::GradCheck, 1 + b as u64)))
        .collect::<Result<_>>()?;
    let mut spec = LossSpec::new(cfg.horizon);
    spec.alpha = cfg.alpha;
    spec.loss_form = cfg.loss_form;
    spec.myopic_detach = cfg.myopic_detach;

    let out = backprop_rollout(&params, &batch, &spec, cfg.seed, &Executor::serial())?;
    let n = cfg.num_coords.min(params.len());
    let mut pick = rng::child(cfg.seed, Domain::GradCheck, u64::MAX);
    let coords = rand::seq::index::sample(&mut pick, params.len(), n).into_vec();
    let report = finite_diff_gradient(
        |v| {
            PolicyParams::from_vector(d, h, v.clone())
                .and_then(|p| rollout_loss(&p, &batch, &spec, cfg.seed))
                .unwrap_or(f64::NAN)
        },
        &params.vector,
        &out.grad,
        &coords,
        cfg.step,
    )?;
    Ok(GradCheckOutcome { loss: out.loss, mean_improvement: out.mean_improvement, mean_cost: out.mean_cost, report })
}
