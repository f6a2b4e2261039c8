//! Command-line front end. `run_command` parses arguments, dispatches to the
//! library and maps failures to exit codes: 2 for usage errors, 1 for
//! anything that fails at run time.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::Rng;

use crate::baselines::{BaselineConfig, Method};
use crate::bench::{aggregate_report, make_benchmark, run_eval, Actor, BaselineActor, PolicyActor};
use crate::diff::{gradient_check, GradCheckConfig};
use crate::io::checkpoint::Checkpoint;
use crate::io::{csv, kv, svg};
use crate::objective::Objective;
use crate::parallel::Executor;
use crate::policy::rollout;
use crate::prior::{ObjectiveInstance, PriorConfig};
use crate::rng::{self, Domain};
use crate::train::{LossForm, TrainConfig, TrainEvent, Trainer};
use crate::{Error, Result};

pub const SEED_ENV: &str = "MONGOOSE_SEED";

#[derive(Debug, Parser)]
#[command(name = "mongoose", about = "Meta-learned optimisation under movement costs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Meta-train a policy from a key/value config file.
    Train(TrainArgs),
    /// Evaluate policies and baselines on benchmark functions.
    Bench(BenchArgs),
    /// Roll a trained policy out on one objective and write its path.
    Rollout(RolloutArgs),
    /// Draw one objective from the training prior and tabulate it.
    SamplePrior(SamplePriorArgs),
    /// Compare BPTT gradients with central finite differences.
    GradCheck(GradCheckArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Master seed; falls back to $MONGOOSE_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long, required_unless_present = "resume")]
    config: Option<PathBuf>,
    /// Continue from a checkpoint, including optimiser state.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Record wall-clock times in metrics.csv.
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// `checkpoint:<path>`, `ei`, `eipu` or `random`; repeatable.
    #[arg(long = "actor", required = true)]
    actors: Vec<String>,
    /// Benchmark name; repeatable.
    #[arg(long = "fn", required = true)]
    functions: Vec<String>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 50)]
    horizon: usize,
    /// Number of evaluation seeds.
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    /// Cost offset for `eipu`, which scores `EI / (gamma + cost)`.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Also write regret-versus-cost plots.
    #[arg(long)]
    svg: bool,
    /// Record wall-clock times in report.csv.
    #[arg(long)]
    timing: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct RolloutArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Benchmark name, or `prior` for a fresh prior sample.
    #[arg(long = "fn", default_value = "prior")]
    function: String,
    #[arg(long, default_value_t = 50)]
    horizon: usize,
    #[arg(long)]
    svg: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SamplePriorArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Points per axis for d <= 2, total random points otherwise.
    #[arg(long, default_value_t = 50)]
    grid: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long = "no-bowl")]
    no_bowl: bool,
    #[arg(long)]
    svg: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct GradCheckArgs {
    #[arg(long, default_value_t = 8)]
    hidden: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 5)]
    horizon: usize,
    #[arg(long, default_value_t = 2)]
    batch: usize,
    #[arg(long, default_value_t = 50)]
    coords: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long = "loss-form", default_value = "divide")]
    loss_form: LossForm,
    #[arg(long)]
    detach: bool,
    #[arg(long, default_value_t = 1e-5)]
    step: f64,
    #[arg(long, default_value_t = 1e-4)]
    threshold: f64,
    #[arg(long)]
    seed: Option<u64>,
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run_command<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Train(a) => train(a),
        Command::Bench(a) => bench(a),
        Command::Rollout(a) => rollout_cmd(a),
        Command::SamplePrior(a) => sample_prior(a),
        Command::GradCheck(a) => grad_check(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// `--seed`, then `$MONGOOSE_SEED`.
fn seed_from(flag: Option<u64>) -> Result<Option<u64>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{SEED_ENV} must be an unsigned integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn train(a: TrainArgs) -> Result<i32> {
    fs::create_dir_all(&a.common.out)?;
    let seed = seed_from(a.common.seed)?;
    let mut trainer = match (&a.resume, &a.config) {
        (Some(path), _) => Trainer::resume(&Checkpoint::load(path)?, a.workers)?,
        (None, Some(path)) => {
            let pairs = kv::parse_kv(&fs::read_to_string(path)?)?;
            let mut config = TrainConfig::from_pairs(&pairs)?;
            match (a.common.seed, pairs.contains_key("seed"), seed) {
                (Some(s), _, _) | (None, false, Some(s)) => config.seed = s,
                _ => {}
            }
            Trainer::new(config, a.workers)?
        }
        (None, None) => return Err(Error::Config("either --config or --resume is required".into())),
    };
    let metrics_path = a.common.out.join("metrics.csv");
    let mut metrics = if a.resume.is_some() && metrics_path.exists() {
        BufWriter::new(OpenOptions::new().append(true).open(&metrics_path)?)
    } else {
        let mut w = create(&metrics_path)?;
        csv::write_metrics_header(&mut w)?;
        w
    };
    let out = a.common.out.clone();
    let total = trainer.config.total();
    let result = trainer.run(|ev| {
        match ev {
            TrainEvent::Metrics(m) => csv::write_metrics_row(&mut metrics, m, a.timing)?,
            TrainEvent::PhaseEnd { phase, horizon, checkpoint } => {
                checkpoint.save(&out.join(format!("phase{phase}_h{horizon}.ckpt")))?;
                eprintln!("phase {phase} (horizon {horizon}) done at step {} of {total}", checkpoint.step);
            }
        }
        Ok(())
    });
    metrics.flush()?;
    if let Err(Error::Diverged { step, reason, last_good }) = result {
        last_good.save(&out.join("last_good.ckpt"))?;
        return Err(Error::Diverged { step, reason, last_good });
    }
    result?;
    trainer.checkpoint().save(&out.join("final.ckpt"))?;
    Ok(0)
}

fn parse_actor(spec: &str, dim: usize, gamma: f64) -> Result<Box<dyn Actor>> {
    if let Some(path) = spec.strip_prefix("checkpoint:") {
        let ckpt = Checkpoint::load(Path::new(path))?;
        ckpt.expect_dimension(dim)?;
        let label = Path::new(path).file_stem().map_or("policy".into(), |s| s.to_string_lossy().into_owned());
        return Ok(Box::new(PolicyActor::new(format!("policy:{label}"), ckpt.policy()?)));
    }
    let method: Method = spec.parse()?;
    let mut config = BaselineConfig::new(method);
    config.gamma = gamma;
    config.validate()?;
    Ok(Box::new(BaselineActor(config)))
}

fn bench(a: BenchArgs) -> Result<i32> {
    if a.horizon == 0 || a.seeds == 0 {
        return Err(Error::InvalidArgument("--horizon and --seeds must be at least 1".into()));
    }
    let seed = seed_from(a.common.seed)?.unwrap_or(0);
    let actors = a.actors.iter().map(|s| parse_actor(s, a.dim, a.gamma)).collect::<Result<Vec<_>>>()?;
    let exec = Executor::new(a.workers);
    let seeds: Vec<u64> = (0..a.seeds as u64).map(|i| seed.wrapping_add(i)).collect();
    let mut reports = Vec::new();
    for (k, name) in a.functions.iter().enumerate() {
        let bench_fn = make_benchmark(name, a.dim, &mut rng::child(seed, Domain::Benchmark, k as u64))?;
        for actor in &actors {
            reports.push(run_eval(actor.as_ref(), &bench_fn, a.horizon, &seeds, &exec)?);
        }
    }
    let summary = aggregate_report(&reports)?;
    fs::create_dir_all(&a.common.out)?;
    let out = &a.common.out;
    csv::write_report(create(&out.join("report.csv"))?, &reports, a.timing)?;
    csv::write_summary(create(&out.join("summary.csv"))?, &summary)?;
    csv::write_tables(create(&out.join("tables.csv"))?, &summary)?;
    if a.svg {
        fs::write(out.join("regret_vs_cost.svg"), svg::regret_vs_cost(&summary, "mean over functions"))?;
        for name in &a.functions {
            let per_fn: Vec<_> = reports.iter().filter(|r| &r.function == name).cloned().collect();
            let s = aggregate_report(&per_fn)?;
            fs::write(out.join(format!("regret_vs_cost_{name}.svg")), svg::regret_vs_cost(&s, name))?;
        }
    }
    for s in &summary.actors {
        let t = summary.horizon;
        println!("{:<24} final regret {:.4}  cost {:.4}", s.actor, s.regret.mean[t], s.cost.mean[t]);
    }
    Ok(0)
}

/// Values on an `n × n` grid with row `i` at `x2 = (i + 0.5)/n`.
fn grid_2d(obj: &dyn Objective, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut points = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            points.push(vec![(j as f64 + 0.5) / n as f64, (i as f64 + 0.5) / n as f64]);
        }
    }
    let values = points.iter().map(|x| obj.value(x)).collect();
    (points, values)
}

fn rollout_cmd(a: RolloutArgs) -> Result<i32> {
    let seed = seed_from(a.common.seed)?.unwrap_or(0);
    let ckpt = Checkpoint::load(&a.checkpoint)?;
    let params = ckpt.policy()?;
    let d = params.dimension;
    let obj: Box<dyn Objective> = if a.function == "prior" {
        let prior = ckpt.train_config()?.prior()?;
        Box::new(ObjectiveInstance::sample(&prior, &mut rng::child(seed, Domain::Misc, 0))?)
    } else {
        Box::new(make_benchmark(&a.function, d, &mut rng::child(seed, Domain::Benchmark, 0))?)
    };
    let traj = rollout(&params, obj.as_ref(), a.horizon, Default::default(), &mut rng::child(seed, Domain::Eval, 0))?;
    fs::create_dir_all(&a.common.out)?;
    csv::write_trajectory(create(&a.common.out.join("trajectory.csv"))?, &traj)?;
    if a.svg && d == 2 {
        let (_, values) = grid_2d(obj.as_ref(), 60);
        fs::write(a.common.out.join("trajectory.svg"), svg::heatmap(&values, 60, &[&traj.points]))?;
    }
    let best = traj.true_values.iter().copied().fold(f64::INFINITY, f64::min);
    println!("best value {best:.6}  total cost {:.6}", traj.step_costs.iter().sum::<f64>());
    Ok(0)
}

fn sample_prior(a: SamplePriorArgs) -> Result<i32> {
    if a.dim == 0 || a.grid == 0 {
        return Err(Error::InvalidArgument("--dim and --grid must be at least 1".into()));
    }
    let seed = seed_from(a.common.seed)?.unwrap_or(0);
    let mut prior = PriorConfig::new(a.dim);
    prior.noise_variance = a.noise;
    prior.include_bowl = !a.no_bowl;
    let obj = ObjectiveInstance::sample(&prior, &mut rng::child(seed, Domain::Misc, 0))?;
    let (points, values) = match a.dim {
        1 => {
            let pts: Vec<Vec<f64>> = (0..a.grid).map(|i| vec![(i as f64 + 0.5) / a.grid as f64]).collect();
            let vals = pts.iter().map(|x| obj.value(x)).collect();
            (pts, vals)
        }
        2 => grid_2d(&obj, a.grid),
        d => {
            let mut r = rng::child(seed, Domain::Misc, 1);
            let pts: Vec<Vec<f64>> = (0..a.grid).map(|_| (0..d).map(|_| r.random::<f64>()).collect()).collect();
            let vals = pts.iter().map(|x| obj.value(x)).collect();
            (pts, vals)
        }
    };
    fs::create_dir_all(&a.common.out)?;
    csv::write_samples(create(&a.common.out.join("prior_sample.csv"))?, &points, &values)?;
    if a.svg && a.dim == 2 {
        fs::write(a.common.out.join("prior_sample.svg"), svg::heatmap(&values, a.grid, &[]))?;
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!("{} points  range [{lo:.4}, {hi:.4}]  bowl {}", values.len(), obj.bowl.is_some());
    Ok(0)
}

fn grad_check(a: GradCheckArgs) -> Result<i32> {
    let mut cfg = GradCheckConfig::new(a.dim, a.hidden, a.horizon);
    cfg.batch_size = a.batch;
    cfg.num_coords = a.coords;
    cfg.alpha = a.alpha;
    cfg.loss_form = a.loss_form;
    cfg.myopic_detach = a.detach;
    cfg.step = a.step;
    if let Some(s) = seed_from(a.seed)? {
        cfg.seed = s;
    }
    let out = gradient_check(&cfg)?;
    println!("loss {:.9}  improvement {:.9}  cost {:.9}", out.loss, out.mean_improvement, out.mean_cost);
    print!("{}", out.report.to_table());
    let pass = out.report.passes(a.threshold);
    println!("{} (threshold {:e})", if pass { "PASS" } else { "FAIL" }, a.threshold);
    Ok(if pass { 0 } else { 1 })
}
