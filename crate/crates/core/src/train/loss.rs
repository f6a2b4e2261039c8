//! Training objectives: Monte-Carlo improvement and its cost-penalised forms.

use crate::objective::CostNorm;
use crate::policy::Trajectory;

/// How the movement cost enters the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossForm {
    /// `improvement / (1 + alpha * cost)`
    #[default]
    Divide,
    /// `improvement - alpha * cost`
    Add,
}

impl LossForm {
    pub fn name(self) -> &'static str {
        match self {
            LossForm::Divide => "divide",
            LossForm::Add => "add",
        }
    }
}

impl std::str::FromStr for LossForm {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "divide" | "div" => Ok(LossForm::Divide),
            "add" => Ok(LossForm::Add),
            other => Err(crate::Error::InvalidArgument(format!("unknown loss form '{other}'"))),
        }
    }
}

/// Everything needed to score a batch of rollouts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSpec {
    pub horizon: usize,
    pub alpha: f64,
    pub cost_norm: CostNorm,
    pub loss_form: LossForm,
    /// Treat the running best value as a constant when differentiating.
    pub myopic_detach: bool,
}

impl LossSpec {
    pub fn new(horizon: usize) -> Self {
        Self { horizon, alpha: 0.0, cost_norm: CostNorm::L2, loss_form: LossForm::Divide, myopic_detach: false }
    }
}

/// Index of the earliest minimum of `values`.
pub(crate) fn argmin_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// `y(x_1) - min_{t=1..T} y(x_t)` on the given value series (indexed from `x_0`).
pub fn improvement(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let tail = &values[1..];
    tail[0] - tail[argmin_first(tail)]
}

/// Batch mean of the per-trajectory improvement on observed values.
pub fn mc_improvement(trajectories: &[Trajectory]) -> f64 {
    if trajectories.is_empty() {
        return 0.0;
    }
    let total: f64 = trajectories.iter().map(|t| improvement(&t.observed_values)).sum();
    total / trajectories.len() as f64
}

/// Sum of hop costs from `x_1` to `x_T`; the hop out of the origin is excluded.
pub fn trajectory_cost(traj: &Trajectory, norm: CostNorm) -> f64 {
    traj.points.windows(2).skip(1).map(|w| norm.distance(&w[0], &w[1])).sum()
}

pub fn mean_cost(trajectories: &[Trajectory], norm: CostNorm) -> f64 {
    if trajectories.is_empty() {
        return 0.0;
    }
    let total: f64 = trajectories.iter().map(|t| trajectory_cost(t, norm)).sum();
    total / trajectories.len() as f64
}

/// Combines improvement and mean cost into the value the trainer maximises.
pub fn combine(improvement: f64, cost: f64, alpha: f64, form: LossForm) -> f64 {
    match form {
        LossForm::Divide => improvement / (1.0 + alpha * cost),
        LossForm::Add => improvement - alpha * cost,
    }
}

/// The value maximised during training. Larger is better in both forms.
pub fn composite_loss(trajectories: &[Trajectory], spec: &LossSpec) -> f64 {
    combine(mc_improvement(trajectories), mean_cost(trajectories, spec.cost_norm), spec.alpha, spec.loss_form)
}

/// Partial derivatives of [`combine`] w.r.t. the batch means `(I, C)`.
pub(crate) fn combine_partials(improvement: f64, cost: f64, alpha: f64, form: LossForm) -> (f64, f64) {
    match form {
        LossForm::Divide => {
            let denom = 1.0 + alpha * cost;
            (1.0 / denom, -improvement * alpha / (denom * denom))
        }
        LossForm::Add => (1.0, -alpha),
    }
}

/// Adds `scale * d improvement / d y_t` into `grad_y` (indexed from `x_0`).
///
/// Without detaching, the baseline `y_1` gets `+1` and the earliest minimiser
/// gets `-1`. With detaching, the improvement is read as a sum of one-step
/// gains `max(m_{t-1} - y_t, 0)` with the running best `m_{t-1}` held
/// constant, so only the step that made each gain is credited.
pub(crate) fn improvement_gradient(values: &[f64], scale: f64, detach: bool, grad_y: &mut [f64]) {
    if values.len() < 2 {
        return;
    }
    if detach {
        let mut best = values[1];
        for t in 2..values.len() {
            if values[t] < best {
                grad_y[t] -= scale;
                best = values[t];
            }
        }
    } else {
        let k = argmin_first(&values[1..]) + 1;
        grad_y[1] += scale;
        grad_y[k] -= scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(points: Vec<Vec<f64>>, values: Vec<f64>) -> Trajectory {
        Trajectory::from_points(points, values.clone(), values, CostNorm::L2)
    }

    #[test]
    fn improvement_direct_formula() {
        // y_0 is ignored; (y_1..y_3) = (1.0, 0.2, 0.6)
        let t = traj(vec![vec![0.0]; 4], vec![5.0, 1.0, 0.2, 0.6]);
        assert!((mc_improvement(&[t]) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn improvement_batch_mean() {
        let a = traj(vec![vec![0.0]; 3], vec![0.0, 1.0, 0.2]);
        let b = traj(vec![vec![0.0]; 3], vec![0.0, 0.5, 0.1]);
        assert!((mc_improvement(&[a, b]) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn constant_batch_has_no_improvement() {
        let a = traj(vec![vec![0.0]; 5], vec![2.0; 5]);
        assert_eq!(mc_improvement(&[a]), 0.0);
    }

    #[test]
    fn cost_skips_origin_hop() {
        let pts = vec![vec![0.9, 0.9], vec![0.0, 0.0], vec![0.3, 0.4]];
        let t = traj(pts, vec![0.0; 3]);
        assert!((trajectory_cost(&t, CostNorm::L2) - 0.5).abs() < 1e-15);
        assert!((trajectory_cost(&t, CostNorm::L1) - 0.7).abs() < 1e-15);
        let still = traj(vec![vec![0.4, 0.4]; 4], vec![0.0; 4]);
        assert_eq!(trajectory_cost(&still, CostNorm::L2), 0.0);
    }

    #[test]
    fn combine_forms() {
        assert_eq!(combine(0.6, 10.0, 0.0, LossForm::Divide), 0.6);
        assert_eq!(combine(0.6, 10.0, 0.0, LossForm::Add), 0.6);
        assert!((combine(0.6, 10.0, 0.05, LossForm::Divide) - 0.4).abs() < 1e-15);
        assert!((combine(0.6, 10.0, 0.01, LossForm::Add) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ties_route_to_earliest() {
        let mut g = vec![0.0; 5];
        improvement_gradient(&[0.0, 3.0, 1.0, 1.0, 2.0], 1.0, false, &mut g);
        assert_eq!(g, vec![0.0, 1.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn detached_credits_each_gain() {
        let mut g = vec![0.0; 5];
        improvement_gradient(&[0.0, 3.0, 1.0, 2.0, 0.5], 1.0, true, &mut g);
        assert_eq!(g, vec![0.0, 0.0, -1.0, 0.0, -1.0]);
    }
}
