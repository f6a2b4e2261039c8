//! Times 50 decisions of a policy against 50 steps of GP expected
//! improvement on the same two-dimensional objective.
//!
//! ```bash
//! cargo run --release -p mongoose --example inference_speed
//! ```

use mongoose::baselines::{BaselineConfig, Method};
use mongoose::bench::{make_benchmark, time_decisions, BaselineActor, PolicyActor};
use mongoose::policy::PolicyParams;
use mongoose::rng::{self, Domain};

fn main() -> mongoose::Result<()> {
    let f = make_benchmark("branin", 2, &mut rng::child(0, Domain::Benchmark, 0))?;
    let policy = PolicyActor::new("policy", PolicyParams::init(2, 64, &mut rng::child(0, Domain::Init, 0))?);
    let ei = BaselineActor(BaselineConfig::new(Method::Ei));
    let t_policy = time_decisions(&policy, &f, 50, 20)?;
    let t_ei = time_decisions(&ei, &f, 50, 1)?;
    println!("policy (H=64) : {:.3} ms per 50 decisions", t_policy * 1e3);
    println!("EI:             {:.3} s per 50 steps", t_ei);
    println!("speed-up:       {:.0}x", t_ei / t_policy);
    Ok(())
}
