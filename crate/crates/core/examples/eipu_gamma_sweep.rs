//! Sweeps the offset of EI per unit cost, `EI / (gamma + cost)`, on prior
//! samples. A small offset lets the movement cost dominate.
//!
//! ```bash
//! cargo run --release -p mongoose --example eipu_gamma_sweep
//! ```

use mongoose::baselines::{BaselineConfig, Method};
use mongoose::bench::{run_eval_on, BaselineActor};
use mongoose::objective::Objective;
use mongoose::parallel::Executor;
use mongoose::prior::{ObjectiveInstance, PriorConfig};
use mongoose::rng::{self, Domain};

fn main() -> mongoose::Result<()> {
    let horizon = 15;
    let prior = PriorConfig::new(2);
    let objs: Vec<ObjectiveInstance> = (0..4)
        .map(|i| ObjectiveInstance::sample(&prior, &mut rng::child(3, Domain::Validation, i)))
        .collect::<Result<_, _>>()?;
    let exec = Executor::serial();
    println!("{:>6} {:>12} {:>12}", "gamma", "best value", "cost");
    for gamma in [0.01, 0.1, 1.0] {
        let mut config = BaselineConfig::new(Method::Eipu);
        config.gamma = gamma;
        let actor = BaselineActor(config);
        let (mut best, mut cost) = (0.0, 0.0);
        for (i, obj) in objs.iter().enumerate() {
            // Regret is measured against zero here; only the best value matters.
            let r = run_eval_on(&actor, obj as &dyn Objective, "prior", 0.0, horizon, &[i as u64], &exec)?;
            best += r.regret.mean[horizon];
            cost += r.cost.mean[horizon];
        }
        let n = objs.len() as f64;
        println!("{gamma:>6} {:>12.4} {:>12.4}", best / n, cost / n);
    }
    Ok(())
}
