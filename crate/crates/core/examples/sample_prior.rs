//! Draws objectives from the training prior and writes a heat map of one.
//!
//! ```bash
//! cargo run -p mongoose --example sample_prior -- [seed] [out.svg]
//! ```

use mongoose::io::svg;
use mongoose::objective::Objective;
use mongoose::prior::{LengthscalePrior, ObjectiveInstance, PriorConfig};
use mongoose::rng::{self, Domain};

fn main() -> mongoose::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let out = std::env::args().nth(2).unwrap_or_else(|| "prior_sample.svg".into());

    let ls = LengthscalePrior::default_unit_cube();
    println!(
        "lengthscale prior: inverse-gamma(shape {:.4}, scale {:.4}), P[{} < l < {}] = {:.4}",
        ls.shape,
        ls.scale,
        ls.lo,
        ls.hi,
        ls.cdf(ls.hi) - ls.cdf(ls.lo)
    );

    let config = PriorConfig::new(2);
    let n = 60;
    for i in 0..5u64 {
        let obj = ObjectiveInstance::sample(&config, &mut rng::child(seed, Domain::Misc, i))?;
        let values: Vec<f64> = (0..n * n)
            .map(|k| obj.value(&[((k % n) as f64 + 0.5) / n as f64, ((k / n) as f64 + 0.5) / n as f64]))
            .collect();
        let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        println!("sample {i}: value at origin {:+.3}, grid range [{lo:+.3}, {hi:+.3}]", obj.value(&[0.0, 0.0]));
        if i == 0 {
            std::fs::write(&out, svg::heatmap(&values, n, &[]))?;
            println!("wrote {out}");
        }
    }
    Ok(())
}
