//! Checks the hand-derived BPTT gradient of the cost-penalised objective
//! against central finite differences on a small network.
//!
//! ```bash
//! cargo run -p mongoose --example gradient_check -- [seed] [step]
//! ```

use mongoose::diff::{gradient_check, GradCheckConfig};

fn main() -> mongoose::Result<()> {
    let mut cfg = GradCheckConfig::new(2, 8, 5);
    let mut args = std::env::args().skip(1);
    if let Some(seed) = args.next().and_then(|s| s.parse().ok()) {
        cfg.seed = seed;
    }
    if let Some(step) = args.next().and_then(|s| s.parse().ok()) {
        cfg.step = step;
    }
    let out = gradient_check(&cfg)?;
    println!("loss {:.6}  improvement {:.6}  cost {:.6}", out.loss, out.mean_improvement, out.mean_cost);
    print!("{}", out.report.to_table());
    Ok(())
}
