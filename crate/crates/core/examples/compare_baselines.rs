//! Expected improvement, EI per unit cost and random search on Branin,
//! reported as regret against distance travelled.
//!
//! ```bash
//! cargo run --release -p mongoose --example compare_baselines -- [seeds] [horizon]
//! ```

use mongoose::baselines::{BaselineConfig, Method};
use mongoose::bench::{aggregate_report, make_benchmark, run_eval, BaselineActor};
use mongoose::parallel::Executor;
use mongoose::rng::{self, Domain};

fn main() -> mongoose::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let horizon: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(20);
    let branin = make_benchmark("branin", 2, &mut rng::child(0, Domain::Benchmark, 0))?;
    let seeds: Vec<u64> = (0..seeds).collect();
    let exec = Executor::new(std::thread::available_parallelism().map_or(1, |n| n.get()));

    let mut reports = Vec::new();
    for method in [Method::Ei, Method::Eipu, Method::Random] {
        let actor = BaselineActor(BaselineConfig::new(method));
        reports.push(run_eval(&actor, &branin, horizon, &seeds, &exec)?);
    }
    let summary = aggregate_report(&reports)?;
    println!("{:<8} {:>6} {:>10} {:>10}", "actor", "step", "regret", "cost");
    for a in &summary.actors {
        for t in (0..=horizon).step_by(5.max(horizon / 4)) {
            println!("{:<8} {t:>6} {:>10.4} {:>10.4}", a.actor, a.regret.mean[t], a.cost.mean[t]);
        }
    }
    println!("\nregret reached within a movement budget:");
    for a in &summary.actors {
        let row: Vec<String> = a.regret_at_cost.iter().map(|(b, r)| format!("{b}:{r:.3}")).collect();
        println!("{:<8} {}", a.actor, row.join("  "));
    }
    Ok(())
}
