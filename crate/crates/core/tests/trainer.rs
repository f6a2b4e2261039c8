use mongoose::diff::backprop_rollout;
use mongoose::io::checkpoint::Checkpoint;
use mongoose::parallel::Executor;
use mongoose::policy::{rollout, PolicyParams};
use mongoose::prior::ObjectiveInstance;
use mongoose::rng::{child, Domain};
use mongoose::train::{
    adam_update, curriculum_train, mc_improvement, training_batch, Adam, TrainConfig, TrainEvent, Trainer,
};
use mongoose::Error;
use std::time::Instant;

fn tiny(seed: u64) -> TrainConfig {
    let mut c = TrainConfig::new(2, 8);
    c.horizon_schedule = vec![4, 8];
    c.steps_per_phase = 5;
    c.batch_size = 3;
    c.hidden_size = 6;
    c.seed = seed;
    c
}

#[test]
fn smoke_run_logs_every_step_and_checkpoints_each_phase() {
    let mut c = TrainConfig::new(2, 10);
    c.horizon_schedule = vec![10];
    c.steps_per_phase = 10;
    c.batch_size = 2;
    c.hidden_size = 8;
    let mut trainer = Trainer::new(c, 1).unwrap();
    let (mut rows, mut ckpts) = (Vec::new(), Vec::new());
    trainer
        .run(|ev| {
            match ev {
                TrainEvent::Metrics(m) => rows.push(m.clone()),
                TrainEvent::PhaseEnd { phase, horizon, checkpoint } => ckpts.push((phase, horizon, checkpoint.step)),
            }
            Ok(())
        })
        .unwrap();
    assert_eq!(rows.len(), 10);
    assert_eq!(ckpts, vec![(0, 10, 10)]);
    assert!(rows.iter().enumerate().all(|(i, m)| m.step == i && m.horizon == 10 && m.loss.is_finite()));
}

#[test]
fn curriculum_horizons_follow_schedule() {
    let (ckpt, log) = curriculum_train(&tiny(3), 1).unwrap();
    let horizons: Vec<usize> = log.iter().map(|m| m.horizon).collect();
    assert_eq!(horizons, [vec![4; 5], vec![8; 5]].concat());
    assert_eq!(ckpt.step, 10);
}

#[test]
fn runs_are_reproducible_and_worker_independent() {
    let (a, la) = curriculum_train(&tiny(4), 1).unwrap();
    let (b, lb) = curriculum_train(&tiny(4), 3).unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes());
    let strip = |l: &[mongoose::train::TrainMetrics]| {
        l.iter().map(|m| (m.loss.to_bits(), m.grad_norm.to_bits())).collect::<Vec<_>>()
    };
    assert_eq!(strip(&la), strip(&lb));
    let (c, _) = curriculum_train(&tiny(5), 1).unwrap();
    assert_ne!(a.params, c.params);
}

#[test]
fn resume_matches_uninterrupted_run() {
    let config = tiny(6);
    let (full, full_log) = curriculum_train(&config, 1).unwrap();

    let mut first = Trainer::new(config, 1).unwrap();
    let started = Instant::now();
    let mut log = Vec::new();
    for _ in 0..7 {
        log.push(first.train_step(started).unwrap());
    }
    let saved = Checkpoint::from_bytes(&first.checkpoint().to_bytes()).unwrap();
    let mut second = Trainer::resume(&saved, 2).unwrap();
    assert_eq!(second.step, 7);
    second
        .run(|ev| {
            if let TrainEvent::Metrics(m) = ev {
                log.push(m.clone());
            }
            Ok(())
        })
        .unwrap();
    assert_eq!(second.checkpoint().to_bytes(), full.to_bytes());
    let losses = |l: &[mongoose::train::TrainMetrics]| l.iter().map(|m| m.loss.to_bits()).collect::<Vec<_>>();
    assert_eq!(losses(&log), losses(&full_log));
}

#[test]
fn small_step_along_gradient_never_lowers_loss() {
    let config = tiny(7);
    let prior = config.prior().unwrap();
    let params = PolicyParams::init(2, 6, &mut child(7, Domain::Init, 0)).unwrap();
    let spec = config.loss_spec(8);
    let exec = Executor::serial();
    for step in 0..10 {
        let batch = training_batch(&config, &prior, step).unwrap();
        let before = backprop_rollout(&params, &batch, &spec, step as u64, &exec).unwrap();
        let ascent: Vec<f64> = before.grad.values.iter().map(|g| -g).collect();
        let mut moved = params.clone();
        Adam::new(moved.len()).step(moved.values_mut(), &ascent, 1e-7);
        let after = backprop_rollout(&moved, &batch, &spec, step as u64, &exec).unwrap();
        assert!(after.loss >= before.loss - 1e-15, "step {step}: {} -> {}", before.loss, after.loss);
    }
}

#[test]
fn adam_first_step_moves_by_learning_rate() {
    let mut p = vec![1.0, -2.0, 0.5];
    let g = vec![0.3, -4.0, 0.0];
    let mut adam = Adam::new(3);
    adam.step(&mut p, &g, 0.1);
    // Bias correction makes the first update lr * g / (|g| + eps').
    assert!((p[0] - 0.9).abs() < 1e-7);
    assert!((p[1] + 1.9).abs() < 1e-7);
    assert_eq!(p[2], 0.5);
    assert_eq!(adam.steps, 1);

    // Hand-rolled second step.
    let (b1, b2, eps) = (0.9_f64, 0.999_f64, 1e-8);
    let g2 = [1.0, 1.0, 1.0];
    let m: Vec<f64> = g.iter().zip(&g2).map(|(a, b)| b1 * (1.0 - b1) * a + (1.0 - b1) * b).collect();
    let v: Vec<f64> = g.iter().zip(&g2).map(|(a, b)| b2 * (1.0 - b2) * a * a + (1.0 - b2) * b * b).collect();
    let expect: Vec<f64> = p
        .iter()
        .zip(m.iter().zip(&v))
        .map(|(x, (m, v))| x - 0.1 * (m / (1.0 - b1 * b1)) / ((v / (1.0 - b2 * b2)).sqrt() + eps))
        .collect();
    adam.step(&mut p, &g2, 0.1);
    for (a, b) in p.iter().zip(&expect) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    let (mut q, mut m1, mut v1) = (vec![1.0], vec![0.0], vec![0.0]);
    adam_update(&mut q, &[2.0], &mut m1, &mut v1, 1, 0.5, (b1, b2, eps));
    assert!((q[0] - 0.5).abs() < 1e-8);
}

fn held_out_improvement(params: &PolicyParams, config: &TrainConfig, horizon: usize) -> f64 {
    let prior = config.prior().unwrap();
    let trajs: Vec<_> = (0..64)
        .map(|i| {
            let obj = ObjectiveInstance::sample(&prior, &mut child(99, Domain::Validation, i)).unwrap();
            rollout(params, &obj, horizon, config.cost_norm, &mut child(99, Domain::Eval, i)).unwrap()
        })
        .collect();
    mc_improvement(&trajs)
}

#[test]
fn training_improves_held_out_objective() {
    let mut c = TrainConfig::new(1, 8);
    c.horizon_schedule = vec![8];
    c.steps_per_phase = 300;
    c.batch_size = 16;
    c.hidden_size = 16;
    c.lr_initial = 3e-3;
    c.seed = 2;
    let init = Trainer::new(c.clone(), 1).unwrap().params;
    let (ckpt, _) = curriculum_train(&c, 1).unwrap();
    let before = held_out_improvement(&init, &c, 8);
    let after = held_out_improvement(&ckpt.policy().unwrap(), &c, 8);
    assert!(after > before, "{before} -> {after}");
}

#[test]
fn divergence_returns_last_good_checkpoint() {
    let mut c = tiny(8);
    c.lr_initial = 1e308;
    c.grad_clip = 1e308;
    let mut trainer = Trainer::new(c, 1).unwrap();
    match trainer.run(|_| Ok(())) {
        Err(Error::Diverged { step, last_good, .. }) => {
            assert_eq!(last_good.step as usize, step);
            assert!(last_good.params.values.iter().all(|v| v.is_finite()));
            assert_eq!(trainer.step, step);
        }
        other => panic!("expected divergence, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let mut c = tiny(0);
    c.horizon_schedule.clear();
    assert!(Trainer::new(c, 1).is_err());
    let mut c = tiny(0);
    c.batch_size = 0;
    assert!(Trainer::new(c, 1).is_err());
}
