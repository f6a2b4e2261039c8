//! Desk-scale meta-training in two dimensions, then a before/after
//! comparison on held-out prior samples.
//!
//! ```bash
//! cargo run --release -p mongoose --example train_desk -- [alpha] [hidden] [steps]
//! ```

use std::time::Instant;

use mongoose::objective::CostNorm;
use mongoose::policy::{rollout, PolicyParams};
use mongoose::prior::ObjectiveInstance;
use mongoose::rng::{self, Domain};
use mongoose::train::{loss::improvement, trajectory_cost, TrainConfig, TrainEvent, Trainer};

fn held_out(config: &TrainConfig, n: usize) -> Vec<ObjectiveInstance> {
    let prior = config.prior().expect("valid prior");
    (0..n)
        .map(|i| ObjectiveInstance::sample(&prior, &mut rng::child(999, Domain::Validation, i as u64)).expect("sample"))
        .collect()
}

fn score(params: &PolicyParams, objs: &[ObjectiveInstance], horizon: usize) -> (f64, f64) {
    let mut imp = 0.0;
    let mut cost = 0.0;
    for (i, obj) in objs.iter().enumerate() {
        let traj =
            rollout(params, obj, horizon, CostNorm::L2, &mut rng::child(5, Domain::Eval, i as u64)).expect("rollout");
        imp += improvement(&traj.true_values);
        cost += trajectory_cost(&traj, CostNorm::L2);
    }
    (imp / objs.len() as f64, cost / objs.len() as f64)
}

/// Equal-budget random search: `horizon` uniform points after the origin.
fn random_search(objs: &[ObjectiveInstance], horizon: usize) -> (f64, f64) {
    use mongoose::baselines::{run_baseline_loop, BaselineConfig, Method};
    let cfg = BaselineConfig::new(Method::Random);
    let mut imp = 0.0;
    let mut cost = 0.0;
    for (i, obj) in objs.iter().enumerate() {
        let traj = run_baseline_loop(obj, horizon, &cfg, &mut rng::child(5, Domain::Baseline, i as u64))
            .expect("random search");
        imp += improvement(&traj.true_values);
        cost += trajectory_cost(&traj, CostNorm::L2);
    }
    (imp / objs.len() as f64, cost / objs.len() as f64)
}

fn main() -> mongoose::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let alpha: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let hidden: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(32);
    let steps: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(2000);

    let mut config = TrainConfig::new(2, 20);
    config.hidden_size = hidden;
    config.batch_size = 64;
    config.total_steps = Some(steps);
    config.alpha = alpha;
    config.seed = 1;

    let objs = held_out(&config, 256);
    let mut trainer = Trainer::new(config.clone(), 1)?;
    let (imp0, cost0) = score(&trainer.params, &objs, 20);
    println!("before: improvement {imp0:.4} cost {cost0:.4}");
    let started = Instant::now();
    trainer.run(|ev| {
        if let TrainEvent::Metrics(m) = ev {
            if m.step % 200 == 0 {
                println!(
                    "step {:5} h {:2} loss {:.4} imp {:.4} cost {:.4} |g| {:.3} ({:.1}s)",
                    m.step,
                    m.horizon,
                    m.loss,
                    m.mean_improvement,
                    m.mean_cost,
                    m.grad_norm,
                    started.elapsed().as_secs_f64()
                );
            }
        }
        Ok(())
    })?;
    let (imp1, cost1) = score(&trainer.params, &objs, 20);
    println!("after:  improvement {imp1:.4} cost {cost1:.4}");
    let (imp_r, cost_r) = random_search(&objs, 20);
    println!("random: improvement {imp_r:.4} cost {cost_r:.4}");
    Ok(())
}
