//! Curriculum meta-training: fresh prior samples every step, BPTT through the
//! whole rollout, gradient ascent with Adam, horizons growing phase by phase.

use std::time::Instant;

use rand::Rng;

use crate::diff::backprop_rollout;
use crate::io::checkpoint::Checkpoint;
use crate::parallel::Executor;
use crate::policy::PolicyParams;
use crate::prior::{ObjectiveInstance, PriorConfig};
use crate::rng::{self, Domain};
use crate::train::{Adam, TrainConfig};
use crate::{Error, Result};

/// One row of the training log.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainMetrics {
    pub step: usize,
    pub horizon: usize,
    pub loss: f64,
    pub mean_improvement: f64,
    pub mean_cost: f64,
    pub grad_norm: f64,
    pub wall_time: f64,
}

pub enum TrainEvent<'a> {
    Metrics(&'a TrainMetrics),
    /// Emitted after the last step of each phase.
    PhaseEnd {
        phase: usize,
        horizon: usize,
        checkpoint: &'a Checkpoint,
    },
}

/// Owns the parameters and optimiser state for one training run.
pub struct Trainer {
    pub config: TrainConfig,
    pub params: PolicyParams,
    pub adam: Adam,
    /// Number of completed global steps.
    pub step: usize,
    prior: PriorConfig,
    exec: Executor,
}

/// The `B` training objectives for global step `step`.
pub fn training_batch(config: &TrainConfig, prior: &PriorConfig, step: usize) -> Result<Vec<ObjectiveInstance>> {
    let b = config.batch_size as u64;
    (0..b)
        .map(|i| {
            let mut r = rng::child(config.seed, Domain::TrainInstance, step as u64 * b + i);
            ObjectiveInstance::sample(prior, &mut r)
        })
        .collect()
}

impl Trainer {
    pub fn new(config: TrainConfig, workers: usize) -> Result<Self> {
        config.validate()?;
        let prior = config.prior()?;
        let params =
            PolicyParams::init(config.dimension, config.hidden_size, &mut rng::child(config.seed, Domain::Init, 0))?;
        let adam = Adam::new(params.len());
        Ok(Self { config, params, adam, step: 0, prior, exec: Executor::new(workers) })
    }

    /// Continues from a checkpoint, including optimiser state when present.
    pub fn resume(ckpt: &Checkpoint, workers: usize) -> Result<Self> {
        let config = ckpt.train_config()?;
        let params = ckpt.policy()?;
        let adam = ckpt.adam.clone().unwrap_or_else(|| Adam::new(params.len()));
        let prior = config.prior()?;
        Ok(Self { config, params, adam, step: ckpt.step as usize, prior, exec: Executor::new(workers) })
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(&self.params, &self.config, self.step as u64, Some(&self.adam))
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.config.total()
    }

    /// Runs one training step and returns its metrics.
    pub fn train_step(&mut self, started: Instant) -> Result<TrainMetrics> {
        let step = self.step;
        let (_, horizon) = self.config.phase_at(step);
        let batch = training_batch(&self.config, &self.prior, step)?;
        let noise_seed: u64 = rng::child(self.config.seed, Domain::TrainNoise, step as u64).random();
        let spec = self.config.loss_spec(horizon);
        let out = backprop_rollout(&self.params, &batch, &spec, noise_seed, &self.exec)?;

        let grad_norm = out.grad.norm();
        let clip = if grad_norm > self.config.grad_clip { self.config.grad_clip / grad_norm } else { 1.0 };
        // Ascent on the objective is descent on its negation.
        let ascent: Vec<f64> = out.grad.values.iter().map(|g| -g * clip).collect();
        let lr = self.config.learning_rate(horizon);
        self.adam.step(self.params.values_mut(), &ascent, lr);
        if let Some(i) = self.params.values().iter().position(|v| !v.is_finite()) {
            let (name, _) = self.params.vector.coordinate_name(i);
            return Err(Error::NonFinite { step, tensor: format!("parameter {name}") });
        }
        self.step += 1;
        Ok(TrainMetrics {
            step,
            horizon,
            loss: out.loss,
            mean_improvement: out.mean_improvement,
            mean_cost: out.mean_cost,
            grad_norm,
            wall_time: started.elapsed().as_secs_f64(),
        })
    }

    /// Trains to completion, reporting each step and each finished phase.
    ///
    /// On a non-finite loss or update the run stops and
    /// [`Error::Diverged`] carries the last good checkpoint.
    pub fn run(&mut self, mut on_event: impl FnMut(TrainEvent<'_>) -> Result<()>) -> Result<()> {
        let started = Instant::now();
        let phase_steps = self.config.phase_steps();
        let ends: Vec<usize> = phase_steps
            .iter()
            .scan(0, |acc, n| {
                *acc += n;
                Some(*acc)
            })
            .collect();
        while !self.is_done() {
            let good = (self.params.clone(), self.adam.clone(), self.step);
            let metrics = match self.train_step(started) {
                Ok(m) if m.loss.is_finite() => m,
                Ok(m) => {
                    Err(Error::NonFinite { step: m.step, tensor: "loss".into() }).map_err(|e| self.diverged(good, e))?
                }
                Err(e @ Error::NonFinite { .. }) => return Err(self.diverged(good, e)),
                Err(e) => return Err(e),
            };
            on_event(TrainEvent::Metrics(&metrics))?;
            if let Some(phase) = ends.iter().position(|&e| e == self.step) {
                let ckpt = self.checkpoint();
                on_event(TrainEvent::PhaseEnd {
                    phase,
                    horizon: self.config.horizon_schedule[phase],
                    checkpoint: &ckpt,
                })?;
            }
        }
        Ok(())
    }

    fn diverged(&mut self, good: (PolicyParams, Adam, usize), cause: Error) -> Error {
        self.params = good.0;
        self.adam = good.1;
        self.step = good.2;
        Error::Diverged { step: self.step, reason: cause.to_string(), last_good: Box::new(self.checkpoint()) }
    }
}

/// Trains from scratch and returns the final checkpoint plus the metrics log.
pub fn curriculum_train(config: &TrainConfig, workers: usize) -> Result<(Checkpoint, Vec<TrainMetrics>)> {
    let mut trainer = Trainer::new(config.clone(), workers)?;
    let mut log = Vec::new();
    trainer.run(|ev| {
        if let TrainEvent::Metrics(m) = ev {
            log.push(m.clone());
        }
        Ok(())
    })?;
    Ok((trainer.checkpoint(), log))
}
