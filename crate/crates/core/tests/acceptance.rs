//! Acceptance criteria AC-1 to AC-10. Each test prints one PASS/FAIL line
//! straight to stdout (bypassing capture) before asserting.
//!
//! The desk-scale criteria (AC-4 to AC-7) share trained policies through a
//! cache, and every test holds a global lock so timings are uncontended.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use mongoose::baselines::gp::kernel_matrix;
use mongoose::baselines::{
    ei_acquisition, eipu_acquisition, gp_fit_with_mean, run_baseline_loop, BaselineConfig, GpModel, Method,
};
use mongoose::bench::{time_decisions, BaselineActor, PolicyActor};
use mongoose::cli::run_command;
use mongoose::diff::{gradient_check, GradCheckConfig};
use mongoose::objective::CostNorm;
use mongoose::policy::{rollout, PolicyParams};
use mongoose::prior::{
    bowl_offset, matern52, sample_fourier_features, sample_quadratic_bowl, KernelSpec, ObjectiveInstance,
};
use mongoose::rng::{self, Domain};
use mongoose::train::loss::improvement;
use mongoose::train::{TrainConfig, Trainer};

fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(id: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout();
    let _ = writeln!(out, "{id} {verdict}: {detail}");
    let _ = out.flush();
}

// ---------------------------------------------------------------- desk regime

const DESK_HORIZON: usize = 20;
const HELD_OUT: usize = 256;

fn desk_config(alpha: f64, detach: bool) -> TrainConfig {
    let mut c = TrainConfig::new(2, DESK_HORIZON);
    c.hidden_size = 64;
    c.batch_size = 64;
    c.total_steps = Some(2000);
    c.alpha = alpha;
    c.myopic_detach = detach;
    c.seed = 1;
    c
}

type PolicyCache = Mutex<HashMap<(u64, bool), (PolicyParams, f64)>>;

/// Trained desk policies keyed by `(alpha bits, detach)`, with training time.
fn desk_policy(alpha: f64, detach: bool) -> (PolicyParams, f64) {
    static CACHE: OnceLock<PolicyCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (alpha.to_bits(), detach);
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return hit.clone();
    }
    let started = Instant::now();
    let mut trainer = Trainer::new(desk_config(alpha, detach), 1).expect("valid desk config");
    trainer.run(|_| Ok(())).expect("desk training");
    let entry = (trainer.params.clone(), started.elapsed().as_secs_f64());
    cache.lock().unwrap().insert(key, entry.clone());
    entry
}

fn held_out(master: u64) -> Vec<ObjectiveInstance> {
    let prior = desk_config(0.0, false).prior().unwrap();
    (0..HELD_OUT as u64)
        .map(|i| ObjectiveInstance::sample(&prior, &mut rng::child(master, Domain::Validation, i)).unwrap())
        .collect()
}

/// Per-instance true-value improvement and cumulative cost from the origin.
fn policy_scores(params: &PolicyParams, objs: &[ObjectiveInstance]) -> (Vec<f64>, Vec<f64>) {
    objs.iter()
        .enumerate()
        .map(|(i, obj)| {
            let traj = rollout(params, obj, DESK_HORIZON, CostNorm::L2, &mut rng::child(5, Domain::Eval, i as u64))
                .expect("rollout");
            (improvement(&traj.true_values), traj.step_costs.iter().sum::<f64>())
        })
        .unzip()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_error(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

// ---------------------------------------------------------------- AC-1

#[test]
fn ac1_gradient_exactness() {
    let _g = serial();
    let started = Instant::now();
    let cfg = GradCheckConfig::new(2, 8, 5);
    assert_eq!((cfg.batch_size, cfg.num_coords, cfg.step), (2, 50, 1e-5));
    let out = gradient_check(&cfg).unwrap();
    let secs = started.elapsed().as_secs_f64();
    let pass = out.loss > 0.0 && out.report.num_checked == 50 && out.report.max_rel_err < 1e-4 && secs < 10.0;
    report(
        "AC-1",
        pass,
        format!(
            "loss {:.4}, {} coordinates, max rel err {:.3e} (< 1e-4), {secs:.2}s (< 10s)",
            out.loss, out.report.num_checked, out.report.max_rel_err
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- AC-2

#[test]
fn ac2_fourier_feature_fidelity() {
    let _g = serial();
    let started = Instant::now();
    let kernel = KernelSpec::isotropic(1, 0.25, 1.0).unwrap();
    let lags = [0.0, 0.1, 0.25, 0.5];
    let bases: Vec<f64> = (0..8).map(|k| 0.0625 * k as f64).collect();
    let samples = 4096;
    // sums[lag][base] of f(a) f(a + lag), plus first moments for centring.
    let mut cross = vec![vec![0.0; bases.len()]; lags.len()];
    let mut first_a = vec![0.0; bases.len()];
    let mut first_b = vec![vec![0.0; bases.len()]; lags.len()];
    for s in 0..samples {
        let f = sample_fourier_features(&kernel, 2048, &mut rng::child(2, Domain::Misc, s)).unwrap();
        for (bi, &a) in bases.iter().enumerate() {
            let fa = f.value(&[a]);
            first_a[bi] += fa;
            for (li, &lag) in lags.iter().enumerate() {
                let fb = f.value(&[a + lag]);
                cross[li][bi] += fa * fb;
                first_b[li][bi] += fb;
            }
        }
    }
    let n = samples as f64;
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for (li, &lag) in lags.iter().enumerate() {
        let emp = (0..bases.len()).map(|bi| cross[li][bi] / n - (first_a[bi] / n) * (first_b[li][bi] / n)).sum::<f64>()
            / bases.len() as f64;
        let exact = matern52(lag / 0.25);
        worst = worst.max((emp - exact).abs());
        rows.push(format!("{lag}: {emp:.3} vs {exact:.3}"));
    }
    let secs = started.elapsed().as_secs_f64();
    let pass = worst < 0.05 && secs < 30.0;
    report("AC-2", pass, format!("[{}], max abs err {worst:.4} (< 0.05), {secs:.1}s (< 30s)", rows.join(", ")));
    assert!(pass);
}

// ---------------------------------------------------------------- AC-3

#[test]
fn ac3_wishart_structure() {
    let _g = serial();
    let d = 4;
    let draws = 10_000;
    let mut sum = vec![0.0; d * d];
    let mut min_eig = f64::INFINITY;
    let mut offsets_exact = true;
    let mut r = rng::child(3, Domain::Misc, 0);
    for _ in 0..draws {
        let bowl = sample_quadratic_bowl(d, &mut r).unwrap();
        for (s, w) in sum.iter_mut().zip(&bowl.weights) {
            *s += w;
        }
        let m = DMatrix::from_row_slice(d, d, &bowl.weights);
        min_eig = min_eig.min(SymmetricEigen::new(m).eigenvalues.min());
        let direct = bowl.weights.iter().sum::<f64>() / (8.0 * d as f64);
        offsets_exact &= bowl.offset == direct && bowl.offset == bowl_offset(&bowl.weights, d);
    }
    let dev = (0..d * d)
        .map(|k| (sum[k] / draws as f64 - if k % (d + 1) == 0 { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    let pass = dev < 0.1 && min_eig >= -1e-10 && offsets_exact;
    report(
        "AC-3",
        pass,
        format!("|mean(W) - I|_max {dev:.4} (< 0.1), min eigenvalue {min_eig:.3e} (>= -1e-10), offsets exact {offsets_exact}"),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- AC-4

#[test]
fn ac4_desk_scale_learning() {
    let _g = serial();
    let (params, secs) = desk_policy(0.0, false);
    let objs = held_out(999);
    let (imp, _) = policy_scores(&params, &objs);
    let random = BaselineConfig::new(Method::Random);
    let rand_imp: Vec<f64> = objs
        .iter()
        .enumerate()
        .map(|(i, obj)| {
            let traj =
                run_baseline_loop(obj, DESK_HORIZON, &random, &mut rng::child(5, Domain::Baseline, i as u64)).unwrap();
            improvement(&traj.true_values)
        })
        .collect();
    let (p, r) = (mean(&imp), mean(&rand_imp));
    let pass = p >= 1.2 * r && secs < 1800.0;
    report(
        "AC-4",
        pass,
        format!(
            "policy improvement {p:.4} vs random {r:.4}, ratio {:.3} (>= 1.2), training {secs:.0}s (< 1800s)",
            p / r
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- AC-5

#[test]
fn ac5_alpha_tradeoff() {
    let _g = serial();
    let alphas = [0.0, 0.01, 0.05];
    let eval_sets: Vec<Vec<ObjectiveInstance>> = (0..5).map(|s| held_out(1000 + s)).collect();
    let medians: Vec<f64> = alphas
        .iter()
        .map(|&alpha| {
            let (params, _) = desk_policy(alpha, false);
            let per_seed: Vec<f64> = eval_sets.iter().map(|objs| mean(&policy_scores(&params, objs).1)).collect();
            median(&per_seed)
        })
        .collect();
    let pass = medians.windows(2).all(|w| w[1] < w[0]);
    let rows: Vec<String> = alphas.iter().zip(&medians).map(|(a, m)| format!("alpha {a}: {m:.4}")).collect();
    report(
        "AC-5",
        pass,
        format!(
            "median cumulative L2 cost over 5 evaluation seeds [{}], strictly decreasing required",
            rows.join(", ")
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- AC-6

#[test]
fn ac6_myopia_ablation() {
    let _g = serial();
    let objs = held_out(999);
    let (full, _) = desk_policy(0.0, false);
    let (myopic, _) = desk_policy(0.0, true);
    let (imp_full, _) = policy_scores(&full, &objs);
    let (imp_myopic, _) = policy_scores(&myopic, &objs);
    let (f, m, se) = (mean(&imp_full), mean(&imp_myopic), std_error(&imp_myopic));
    let pass = f >= m - se;
    report("AC-6", pass, format!("non-detached {f:.4} vs detached {m:.4} - SE {se:.4} = {:.4}", m - se));
    assert!(pass);
}

// ---------------------------------------------------------------- AC-7

#[test]
fn ac7_inference_speed() {
    let _g = serial();
    let (params, _) = desk_policy(0.0, false);
    let prior = desk_config(0.0, false).prior().unwrap();
    let obj = ObjectiveInstance::sample(&prior, &mut rng::child(7, Domain::Validation, 0)).unwrap();
    let policy = PolicyActor::new("policy", params);
    let ei = BaselineActor(BaselineConfig::new(Method::Ei));
    let best = |f: &dyn Fn() -> f64, n: usize| (0..n).map(|_| f()).fold(f64::INFINITY, f64::min);
    let t_policy = best(&|| time_decisions(&policy, &obj, 50, 10).unwrap(), 5);
    let t_ei = best(&|| time_decisions(&ei, &obj, 50, 1).unwrap(), 3);
    let ratio = t_ei / t_policy;
    let pass = ratio >= 100.0;
    report(
        "AC-7",
        pass,
        format!(
            "policy {:.3} ms vs EI {:.1} ms per 50 steps, speed-up {ratio:.0}x (>= 100x)",
            t_policy * 1e3,
            t_ei * 1e3
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- AC-8

fn random_model(r: &mut impl Rng) -> GpModel {
    let d = r.random_range(1..=3);
    let n = r.random_range(1..=12);
    let kernel = KernelSpec::new((0..d).map(|_| r.random_range(0.1..0.5)).collect(), 1.0).unwrap();
    let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.random::<f64>()).collect()).collect();
    let ys: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
    gp_fit_with_mean(&kernel, &xs, &ys, 1e-4, 0.0).unwrap()
}

#[test]
fn ac8_eipu_algebra() {
    let _g = serial();
    let mut r = rng::child(8, Domain::Misc, 0);
    let mut exact_at_current = true;
    let mut bounded = true;
    let mut checked = 0;
    for _ in 0..50 {
        let model = random_model(&mut r);
        let d = model.kernel.dimension();
        let best_y = model.targets.iter().copied().fold(f64::INFINITY, f64::min);
        let current: Vec<f64> = (0..d).map(|_| r.random::<f64>()).collect();
        for gamma in [0.01, 0.1, 1.0, 10.0] {
            let ei = ei_acquisition(&model, &current, best_y);
            let at = eipu_acquisition(&model, &current, &current, best_y, gamma, CostNorm::L2);
            exact_at_current &= at == ei / gamma;
            for _ in 0..20 {
                let x: Vec<f64> = (0..d).map(|_| r.random::<f64>()).collect();
                let ei = ei_acquisition(&model, &x, best_y);
                bounded &= eipu_acquisition(&model, &current, &x, best_y, gamma, CostNorm::L2) <= ei / gamma;
                checked += 1;
            }
        }
    }
    let prior = desk_config(0.0, false).prior().unwrap();
    let obj = ObjectiveInstance::sample(&prior, &mut rng::child(8, Domain::Validation, 0)).unwrap();
    let mut sweep = Vec::new();
    for gamma in [0.01, 0.1, 1.0] {
        let mut cfg = BaselineConfig::new(Method::Eipu);
        cfg.gamma = gamma;
        let traj = run_baseline_loop(&obj, 10, &cfg, &mut rng::child(8, Domain::Baseline, 0)).unwrap();
        let ok = traj.points.iter().flatten().all(|v| (0.0..=1.0).contains(v))
            && traj.true_values.iter().all(|v| v.is_finite());
        sweep.push((gamma, ok, traj.step_costs.iter().sum::<f64>()));
    }
    let sweep_ok = sweep.iter().all(|s| s.1);
    let pass = exact_at_current && bounded && sweep_ok;
    let rows: Vec<String> = sweep.iter().map(|(g, _, c)| format!("gamma {g}: cost {c:.3}")).collect();
    report(
        "AC-8",
        pass,
        format!(
            "eipu(x_c, x_c) == ei/gamma exactly: {exact_at_current}; eipu <= ei/gamma on {checked} points: {bounded}; sweep [{}]",
            rows.join(", ")
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- AC-9

/// Posterior from an explicit LU inverse of the regularised kernel matrix.
fn dense_oracle(model: &GpModel, x: &[f64]) -> (f64, f64) {
    let n = model.inputs.len();
    let reg =
        kernel_matrix(&model.kernel, &model.inputs) + DMatrix::identity(n, n) * (model.noise_variance + model.jitter);
    let inv = reg.lu().try_inverse().expect("invertible");
    let ks = DVector::from_iterator(n, model.inputs.iter().map(|xi| model.kernel.eval(xi, x)));
    let centred = DVector::from_iterator(n, model.targets.iter().map(|y| y - model.mean));
    let mean = model.mean + ks.dot(&(&inv * centred));
    let var = model.kernel.eval(x, x) - ks.dot(&(&inv * &ks));
    (mean, var.max(0.0))
}

#[test]
fn ac9_gp_oracle_equivalence() {
    let _g = serial();
    let mut r = rng::child(9, Domain::Misc, 0);
    let mut worst_mean: f64 = 0.0;
    let mut worst_var: f64 = 0.0;
    for _ in 0..100 {
        let d = r.random_range(1..=4);
        let n = r.random_range(1..=20);
        let kernel =
            KernelSpec::new((0..d).map(|_| r.random_range(0.1..0.5)).collect(), r.random_range(0.5..2.0)).unwrap();
        let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.random::<f64>()).collect()).collect();
        let ys: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
        let noise = r.random_range(1e-3..1e-1);
        let model = gp_fit_with_mean(&kernel, &xs, &ys, noise, r.random_range(-1.0..1.0)).unwrap();
        for _ in 0..10 {
            let x: Vec<f64> = (0..d).map(|_| r.random::<f64>()).collect();
            let (m, v) = model.posterior(&x);
            let (mo, vo) = dense_oracle(&model, &x);
            worst_mean = worst_mean.max((m - mo).abs() / mo.abs());
            worst_var = worst_var.max((v - vo).abs() / vo.abs());
        }
    }
    let pass = worst_mean < 1e-8 && worst_var < 1e-8;
    report("AC-9", pass, format!("max relative error: mean {worst_mean:.3e}, variance {worst_var:.3e} (< 1e-8)"));
    assert!(pass);
}

// ---------------------------------------------------------------- AC-10

fn run(args: &[&str]) -> i32 {
    run_command(std::iter::once("mongoose").chain(args.iter().copied()))
}

fn pipeline(dir: &Path) {
    let cfg = dir.join("desk.cfg");
    std::fs::write(
        &cfg,
        "# tiny reproducibility run\ndimension = 2\nhidden_size = 8\nbatch_size = 4\nhorizon_schedule = 5, 10\nsteps_per_phase = 6\nalpha = 0.01\nseed = 11\n",
    )
    .unwrap();
    let train_out = dir.join("train");
    assert_eq!(
        run(&["train", "--config", cfg.to_str().unwrap(), "--out", train_out.to_str().unwrap(), "--workers", "1"]),
        0
    );
    let ckpt = format!("checkpoint:{}", train_out.join("final.ckpt").display());
    let bench_out = dir.join("bench");
    let code = run(&[
        "bench",
        "--actor",
        &ckpt,
        "--actor",
        "ei",
        "--actor",
        "random",
        "--fn",
        "branin",
        "--fn",
        "sphere",
        "--dim",
        "2",
        "--horizon",
        "8",
        "--seeds",
        "2",
        "--workers",
        "1",
        "--seed",
        "4",
        "--out",
        bench_out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
}

#[test]
fn ac10_reproducibility() {
    let _g = serial();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    pipeline(a.path());
    pipeline(b.path());
    let files = [
        "train/phase0_h5.ckpt",
        "train/phase1_h10.ckpt",
        "train/final.ckpt",
        "train/metrics.csv",
        "bench/report.csv",
        "bench/summary.csv",
        "bench/tables.csv",
    ];
    let mut mismatched = Vec::new();
    for f in files {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        if x != y || x.is_empty() {
            mismatched.push(f);
        }
    }
    let pass = mismatched.is_empty();
    report("AC-10", pass, format!("{} artifacts compared byte-for-byte, mismatched: {mismatched:?}", files.len()));
    assert!(pass);
}
