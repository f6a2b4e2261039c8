//! Regret-versus-cost evaluation of optimisers.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::baselines::{run_baseline_loop, BaselineConfig};
use crate::objective::{add_noise, CostNorm, Objective};
use crate::parallel::Executor;
use crate::policy::{rollout, PolicyParams, Trajectory};
use crate::rng::{self, Domain, StreamRng};
use crate::{Error, Result};

use super::functions::BenchmarkFn;

/// Something that picks `horizon` query points after evaluating the origin.
pub trait Actor: Sync {
    fn name(&self) -> String;

    fn trajectory(&self, obj: &dyn Objective, horizon: usize, rng: &mut StreamRng) -> Result<Trajectory>;
}

/// A trained recurrent policy.
#[derive(Debug, Clone)]
pub struct PolicyActor {
    pub label: String,
    pub params: PolicyParams,
    pub norm: CostNorm,
}

impl PolicyActor {
    pub fn new(label: impl Into<String>, params: PolicyParams) -> Self {
        Self { label: label.into(), params, norm: CostNorm::L2 }
    }
}

impl Actor for PolicyActor {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn trajectory(&self, obj: &dyn Objective, horizon: usize, rng: &mut StreamRng) -> Result<Trajectory> {
        rollout(&self.params, obj, horizon, self.norm, rng)
    }
}

#[derive(Debug, Clone)]
pub struct BaselineActor(pub BaselineConfig);

impl Actor for BaselineActor {
    fn name(&self) -> String {
        self.0.method.name().to_string()
    }

    fn trajectory(&self, obj: &dyn Objective, horizon: usize, rng: &mut StreamRng) -> Result<Trajectory> {
        run_baseline_loop(obj, horizon, &self.0, rng)
    }
}

/// Moves once to a fixed point and stays there.
#[derive(Debug, Clone)]
pub struct OracleActor {
    pub target: Vec<f64>,
}

/// Never leaves the origin.
#[derive(Debug, Clone, Copy, Default)]
pub struct StationaryActor;

fn fixed_path(obj: &dyn Objective, horizon: usize, target: &[f64], rng: &mut StreamRng) -> Result<Trajectory> {
    let d = obj.dimension();
    if target.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: target.len() });
    }
    let mut points = vec![vec![0.0; d]];
    points.extend((0..horizon).map(|_| target.to_vec()));
    let true_values: Vec<f64> = points.iter().map(|x| obj.value(x)).collect();
    let observed = true_values.iter().map(|&y| add_noise(y, obj.noise_variance(), rng)).collect();
    Ok(Trajectory::from_points(points, true_values, observed, CostNorm::L2))
}

impl Actor for OracleActor {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn trajectory(&self, obj: &dyn Objective, horizon: usize, rng: &mut StreamRng) -> Result<Trajectory> {
        fixed_path(obj, horizon, &self.target, rng)
    }
}

impl Actor for StationaryActor {
    fn name(&self) -> String {
        "stationary".into()
    }

    fn trajectory(&self, obj: &dyn Objective, horizon: usize, rng: &mut StreamRng) -> Result<Trajectory> {
        fixed_path(obj, horizon, &vec![0.0; obj.dimension()], rng)
    }
}

/// One evaluation run. Both series are indexed by step `t = 0..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRun {
    pub seed: u64,
    /// Best true value up to step `t` minus the known minimum.
    pub regret: Vec<f64>,
    /// Distance travelled from the origin up to step `t`.
    pub cum_cost: Vec<f64>,
    pub wall_time: f64,
}

/// Per-step mean and 5%/95% band of a set of curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub mean: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub actor: String,
    pub function: String,
    pub horizon: usize,
    pub runs: Vec<EvalRun>,
    pub regret: Band,
    pub cost: Band,
}

/// Simple-regret and cumulative-cost series of a trajectory against `f_min`.
pub fn regret_cost_series(traj: &Trajectory, f_min: f64) -> (Vec<f64>, Vec<f64>) {
    let mut best = f64::INFINITY;
    let regret = traj
        .true_values
        .iter()
        .map(|&y| {
            best = best.min(y);
            best - f_min
        })
        .collect();
    let mut total = 0.0;
    let mut cum_cost = vec![0.0];
    for c in &traj.step_costs {
        total += c;
        cum_cost.push(total);
    }
    (regret, cum_cost)
}

/// Percentile with linear interpolation between order statistics.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty sample");
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Pointwise mean and 5/95 percentiles of equal-length curves.
pub fn band(curves: &[&[f64]]) -> Band {
    let len = curves.first().map_or(0, |c| c.len());
    let mut out = Band { mean: Vec::with_capacity(len), lo: Vec::with_capacity(len), hi: Vec::with_capacity(len) };
    let mut column = Vec::with_capacity(curves.len());
    for t in 0..len {
        column.clear();
        column.extend(curves.iter().map(|c| c[t]));
        out.mean.push(column.iter().sum::<f64>() / column.len() as f64);
        column.sort_by(f64::total_cmp);
        out.lo.push(percentile(&column, 0.05));
        out.hi.push(percentile(&column, 0.95));
    }
    out
}

impl EvalReport {
    pub fn from_runs(actor: String, function: String, horizon: usize, runs: Vec<EvalRun>) -> Self {
        let regret = band(&runs.iter().map(|r| r.regret.as_slice()).collect::<Vec<_>>());
        let cost = band(&runs.iter().map(|r| r.cum_cost.as_slice()).collect::<Vec<_>>());
        Self { actor, function, horizon, runs, regret, cost }
    }
}

/// Evaluates `actor` on an arbitrary objective whose minimum is `f_min`.
///
/// Seed `s` drives the actor through `child(s, Eval, 0)`; runs are returned in
/// the order of `seeds` whatever the worker count.
pub fn run_eval_on(
    actor: &dyn Actor,
    obj: &dyn Objective,
    function: &str,
    f_min: f64,
    horizon: usize,
    seeds: &[u64],
    exec: &Executor,
) -> Result<EvalReport> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("at least one seed is required".into()));
    }
    let runs = exec.map(seeds.len(), |i| {
        let seed = seeds[i];
        let started = Instant::now();
        let traj = actor.trajectory(obj, horizon, &mut rng::child(seed, Domain::Eval, 0))?;
        let wall_time = started.elapsed().as_secs_f64();
        let (regret, cum_cost) = regret_cost_series(&traj, f_min);
        Ok(EvalRun { seed, regret, cum_cost, wall_time })
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_runs(actor.name(), function.to_string(), horizon, runs))
}

/// Evaluates `actor` on a benchmark, measuring regret against its known optimum.
pub fn run_eval(
    actor: &dyn Actor,
    bench: &BenchmarkFn,
    horizon: usize,
    seeds: &[u64],
    exec: &Executor,
) -> Result<EvalReport> {
    run_eval_on(actor, bench, &bench.name, bench.optimum_value(), horizon, seeds, exec)
}

/// Summary of one actor across several reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorSummary {
    pub actor: String,
    pub functions: Vec<String>,
    pub regret: Band,
    pub cost: Band,
    /// `(regret level, mean cost when mean regret first reaches it)`.
    pub cost_at_regret: Vec<(f64, Option<f64>)>,
    /// `(cost budget, mean regret at the last step within budget)`.
    pub regret_at_cost: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub horizon: usize,
    pub actors: Vec<ActorSummary>,
}

pub const REGRET_LEVELS: [f64; 5] = [1.0, 0.5, 0.25, 0.1, 0.05];
pub const COST_BUDGETS: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];

/// Cost at which a mean regret curve first drops to `level`.
pub fn cost_at_regret(regret: &[f64], cost: &[f64], level: f64) -> Option<f64> {
    regret.iter().position(|&r| r <= level).map(|t| cost[t])
}

/// Regret at the last step whose cumulative cost stays within `budget`.
pub fn regret_at_cost(regret: &[f64], cost: &[f64], budget: f64) -> f64 {
    let t = cost.iter().rposition(|&c| c <= budget).unwrap_or(0);
    regret[t]
}

/// Folds reports into per-actor summaries, in sorted actor order.
///
/// Each report contributes its mean curves; the band is the 5/95 spread of
/// those means across reports (functions).
pub fn aggregate_report(reports: &[EvalReport]) -> Result<Summary> {
    let first = reports.first().ok_or_else(|| Error::InvalidArgument("no reports to aggregate".into()))?;
    let horizon = first.horizon;
    if let Some(bad) = reports.iter().find(|r| r.horizon != horizon) {
        return Err(Error::InvalidArgument(format!(
            "horizon mismatch: {} on {} has T = {}, expected {horizon}",
            bad.actor, bad.function, bad.horizon
        )));
    }
    let mut grouped: BTreeMap<&str, Vec<&EvalReport>> = BTreeMap::new();
    for r in reports {
        grouped.entry(r.actor.as_str()).or_default().push(r);
    }
    let actors = grouped
        .into_iter()
        .map(|(actor, reps)| {
            let regret = band(&reps.iter().map(|r| r.regret.mean.as_slice()).collect::<Vec<_>>());
            let cost = band(&reps.iter().map(|r| r.cost.mean.as_slice()).collect::<Vec<_>>());
            let cost_at = REGRET_LEVELS.iter().map(|&l| (l, cost_at_regret(&regret.mean, &cost.mean, l))).collect();
            let regret_at = COST_BUDGETS.iter().map(|&b| (b, regret_at_cost(&regret.mean, &cost.mean, b))).collect();
            ActorSummary {
                actor: actor.to_string(),
                functions: reps.iter().map(|r| r.function.clone()).collect(),
                regret,
                cost,
                cost_at_regret: cost_at,
                regret_at_cost: regret_at,
            }
        })
        .collect();
    Ok(Summary { horizon, actors })
}

/// Mean wall time of `repeats` runs of `steps` decisions by `actor` on `obj`.
pub fn time_decisions(actor: &dyn Actor, obj: &dyn Objective, steps: usize, repeats: usize) -> Result<f64> {
    let repeats = repeats.max(1);
    let started = Instant::now();
    for r in 0..repeats {
        let traj = actor.trajectory(obj, steps, &mut rng::child(0, Domain::Eval, r as u64))?;
        std::hint::black_box(traj);
    }
    Ok(started.elapsed().as_secs_f64() / repeats as f64)
}
