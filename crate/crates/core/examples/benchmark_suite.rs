//! Builds every benchmark, shows how it was normalised, and evaluates random
//! search plus a stay-at-origin reference on each.
//!
//! ```bash
//! cargo run --release -p mongoose --example benchmark_suite
//! ```

use mongoose::baselines::{BaselineConfig, Method};
use mongoose::bench::{aggregate_report, make_benchmark, run_eval, BaselineActor, StationaryActor, REGISTRY};
use mongoose::objective::Objective;
use mongoose::parallel::Executor;
use mongoose::rng::{self, Domain};

fn main() -> mongoose::Result<()> {
    let horizon = 30;
    let seeds: Vec<u64> = (0..4).collect();
    let exec = Executor::serial();
    let mut reports = Vec::new();
    println!("{:<11} {:>3} {:>12} {:>12} {:>7} {:>9}", "function", "d", "raw min", "raw max", "f_opt", "optimum");
    for (k, name) in REGISTRY.iter().enumerate() {
        let d = match *name {
            "hartmann3" => 3,
            "hartmann6" => 6,
            _ => 2,
        };
        let f = make_benchmark(name, d, &mut rng::child(0, Domain::Benchmark, k as u64))?;
        let n = &f.normalisation;
        let at_opt = f.value(&f.optima[0]);
        println!("{name:<11} {d:>3} {:>12.5} {:>12.3} {:>7.3} {:>9.4}", n.raw_min, n.max_estimate, n.f_opt, at_opt);
        if d == 2 {
            reports.push(run_eval(&BaselineActor(BaselineConfig::new(Method::Random)), &f, horizon, &seeds, &exec)?);
            reports.push(run_eval(&StationaryActor, &f, horizon, &seeds, &exec)?);
        }
    }
    let summary = aggregate_report(&reports)?;
    println!("\nmean over the 2-d functions after {horizon} steps:");
    for a in &summary.actors {
        println!(
            "{:<11} regret {:.3} [{:.3}, {:.3}]  cost {:.3}",
            a.actor, a.regret.mean[horizon], a.regret.lo[horizon], a.regret.hi[horizon], a.cost.mean[horizon]
        );
    }
    Ok(())
}
