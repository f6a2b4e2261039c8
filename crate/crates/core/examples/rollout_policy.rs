//! Trains a small policy for a few hundred steps, then rolls it out on
//! Branin and writes the path over a heat map.
//!
//! ```bash
//! cargo run --release -p mongoose --example rollout_policy -- [out.svg]
//! ```

use mongoose::bench::make_benchmark;
use mongoose::io::svg;
use mongoose::objective::{CostNorm, Objective};
use mongoose::policy::rollout;
use mongoose::rng::{self, Domain};
use mongoose::train::{curriculum_train, TrainConfig};

fn main() -> mongoose::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "rollout.svg".into());
    let mut config = TrainConfig::new(2, 20);
    config.hidden_size = 32;
    config.batch_size = 32;
    config.total_steps = Some(400);
    config.alpha = 0.01;
    config.seed = 2;
    let (ckpt, _) = curriculum_train(&config, 1)?;
    let params = ckpt.policy()?;

    let branin = make_benchmark("branin", 2, &mut rng::child(0, Domain::Benchmark, 0))?;
    let traj = rollout(&params, &branin, 20, CostNorm::L2, &mut rng::child(0, Domain::Eval, 0))?;
    let mut best = f64::INFINITY;
    println!("{:>3} {:>8} {:>8} {:>9} {:>9}", "t", "x1", "x2", "value", "best");
    for (t, (x, y)) in traj.points.iter().zip(&traj.true_values).enumerate() {
        best = best.min(*y);
        println!("{t:>3} {:>8.4} {:>8.4} {y:>9.4} {best:>9.4}", x[0], x[1]);
    }
    println!("optimum {:.4}, distance travelled {:.4}", branin.optimum_value(), traj.step_costs.iter().sum::<f64>());

    let n = 60;
    let values: Vec<f64> = (0..n * n)
        .map(|k| branin.value(&[((k % n) as f64 + 0.5) / n as f64, ((k / n) as f64 + 0.5) / n as f64]))
        .collect();
    std::fs::write(&out, svg::heatmap(&values, n, &[&traj.points]))?;
    println!("wrote {out}");
    Ok(())
}
