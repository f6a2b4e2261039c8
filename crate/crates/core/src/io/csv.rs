//! CSV writers. Column orders are fixed; floats use the shortest
//! round-tripping representation so output bytes are reproducible.

use std::io::Write;

use crate::bench::{EvalReport, Summary};
use crate::policy::Trajectory;
use crate::train::TrainMetrics;

pub const REPORT_HEADER: &str = "actor,fn,seed,step,regret,cum_cost,wall_time";
pub const SUMMARY_HEADER: &str = "actor,step,mean_regret,regret_p05,regret_p95,mean_cost,cost_p05,cost_p95";
pub const TABLES_HEADER: &str = "actor,table,level,value";
pub const METRICS_HEADER: &str = "step,horizon,loss,mean_improvement,mean_cost,grad_norm,wall_time";

/// Comment lines stating the accounting behind `report.csv`.
pub const REPORT_NOTES: [&str; 3] = [
    "# regret: best true value up to step minus the known minimum",
    "# cum_cost: distance travelled from x_0 including the first hop (the training penalty omits that hop)",
    "# baseline warm-start designs are not charged as movement",
];

/// One row per (run, step). `wall_time` is only filled when `timing` is set
/// and is then the run's total time, repeated on each of its rows.
pub fn write_report<W: Write>(mut w: W, reports: &[EvalReport], timing: bool) -> std::io::Result<()> {
    for line in REPORT_NOTES {
        writeln!(w, "{line}")?;
    }
    writeln!(w, "{REPORT_HEADER}")?;
    for r in reports {
        for run in &r.runs {
            let wall = if timing { run.wall_time.to_string() } else { String::new() };
            for (t, (reg, cost)) in run.regret.iter().zip(&run.cum_cost).enumerate() {
                writeln!(w, "{},{},{},{t},{reg},{cost},{wall}", r.actor, r.function, run.seed)?;
            }
        }
    }
    Ok(())
}

pub fn write_summary<W: Write>(mut w: W, summary: &Summary) -> std::io::Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for a in &summary.actors {
        for t in 0..a.regret.mean.len() {
            writeln!(
                w,
                "{},{t},{},{},{},{},{},{}",
                a.actor, a.regret.mean[t], a.regret.lo[t], a.regret.hi[t], a.cost.mean[t], a.cost.lo[t], a.cost.hi[t]
            )?;
        }
    }
    Ok(())
}

/// Cost-at-matched-regret and regret-at-matched-cost; unreached levels are blank.
pub fn write_tables<W: Write>(mut w: W, summary: &Summary) -> std::io::Result<()> {
    writeln!(w, "{TABLES_HEADER}")?;
    for a in &summary.actors {
        for (level, cost) in &a.cost_at_regret {
            let v = cost.map(|c| c.to_string()).unwrap_or_default();
            writeln!(w, "{},cost_at_regret,{level},{v}", a.actor)?;
        }
        for (budget, regret) in &a.regret_at_cost {
            writeln!(w, "{},regret_at_cost,{budget},{regret}", a.actor)?;
        }
    }
    Ok(())
}

pub fn write_metrics_header<W: Write>(mut w: W) -> std::io::Result<()> {
    writeln!(w, "{METRICS_HEADER}")
}

pub fn write_metrics_row<W: Write>(mut w: W, m: &TrainMetrics, timing: bool) -> std::io::Result<()> {
    let wall = if timing { m.wall_time.to_string() } else { String::new() };
    writeln!(w, "{},{},{},{},{},{},{wall}", m.step, m.horizon, m.loss, m.mean_improvement, m.mean_cost, m.grad_norm)
}

/// `t,x1..xd,value,observed,step_cost`, where `step_cost` is the hop into step `t`.
pub fn write_trajectory<W: Write>(mut w: W, traj: &Trajectory) -> std::io::Result<()> {
    let d = traj.dimension();
    let coords: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    writeln!(w, "t,{},value,observed,step_cost", coords.join(","))?;
    for (t, x) in traj.points.iter().enumerate() {
        let xs: Vec<String> = x.iter().map(f64::to_string).collect();
        let cost = if t == 0 { 0.0 } else { traj.step_costs[t - 1] };
        writeln!(w, "{t},{},{},{},{cost}", xs.join(","), traj.true_values[t], traj.observed_values[t])?;
    }
    Ok(())
}

/// `x1..xd,value` rows.
pub fn write_samples<W: Write>(mut w: W, points: &[Vec<f64>], values: &[f64]) -> std::io::Result<()> {
    let d = points.first().map_or(0, |p| p.len());
    let coords: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    writeln!(w, "{},value", coords.join(","))?;
    for (x, v) in points.iter().zip(values) {
        let xs: Vec<String> = x.iter().map(f64::to_string).collect();
        writeln!(w, "{},{v}", xs.join(","))?;
    }
    Ok(())
}
