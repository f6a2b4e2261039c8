use std::collections::BTreeMap;

use crate::io::kv::{parse_bool, parse_value};
use crate::objective::CostNorm;
use crate::prior::{fit_inverse_gamma, PriorConfig};
use crate::train::loss::{LossForm, LossSpec};
use crate::{Error, Result};

/// Full description of one meta-training run.
///
/// Defaults follow the published setup: batch 128, 5000 steps per curriculum
/// phase, 128 hidden units, 100 Fourier features, learning rate 1e-3 dropping
/// to 1e-4 once the curriculum horizon reaches 40.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dimension: usize,
    pub hidden_size: usize,
    pub batch_size: usize,
    pub steps_per_phase: usize,
    pub horizon_schedule: Vec<usize>,
    pub alpha: f64,
    pub cost_norm: CostNorm,
    pub loss_form: LossForm,
    pub myopic_detach: bool,
    pub include_bowl: bool,
    pub noise_variance: f64,
    pub num_features: usize,
    pub lr_initial: f64,
    pub lr_reduced: f64,
    pub lr_switch_horizon: usize,
    /// When set, overrides `steps_per_phase` by spreading this many steps
    /// evenly over the phases (the remainder goes to the last phase).
    pub total_steps: Option<usize>,
    pub seed: u64,
    pub grad_clip: f64,
    pub lengthscale_lo: f64,
    pub lengthscale_hi: f64,
    pub lengthscale_mass: f64,
}

/// `{10, 20, 30, 40, 50}` truncated below `target`, then `target` itself.
pub fn default_schedule(target: usize) -> Vec<usize> {
    let mut s: Vec<usize> = [10, 20, 30, 40, 50].into_iter().filter(|h| *h < target).collect();
    s.push(target);
    s
}

impl TrainConfig {
    pub fn new(dimension: usize, target_horizon: usize) -> Self {
        Self {
            dimension,
            hidden_size: 128,
            batch_size: 128,
            steps_per_phase: 5000,
            horizon_schedule: default_schedule(target_horizon),
            alpha: 0.0,
            cost_norm: CostNorm::L2,
            loss_form: LossForm::Divide,
            myopic_detach: false,
            include_bowl: true,
            noise_variance: 0.0,
            num_features: 100,
            lr_initial: 1e-3,
            lr_reduced: 1e-4,
            lr_switch_horizon: 40,
            total_steps: None,
            seed: 0,
            grad_clip: 10.0,
            lengthscale_lo: 0.1,
            lengthscale_hi: 0.4,
            lengthscale_mass: 0.99,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.dimension == 0 || self.hidden_size == 0 {
            return bad("dimension and hidden_size must be >= 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        if self.horizon_schedule.is_empty() || self.horizon_schedule[0] == 0 {
            return bad("horizon_schedule must be a nonempty list of positive horizons".into());
        }
        if self.horizon_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("horizon_schedule must be strictly increasing: {:?}", self.horizon_schedule));
        }
        if !(self.alpha >= 0.0) {
            return bad(format!("alpha must be >= 0, got {}", self.alpha));
        }
        if !(self.noise_variance >= 0.0) {
            return bad("noise_variance must be >= 0".into());
        }
        if self.num_features == 0 {
            return bad("num_features must be >= 1".into());
        }
        if self.phase_steps().iter().all(|s| *s == 0) {
            return bad("no training steps configured".into());
        }
        Ok(())
    }

    pub fn target_horizon(&self) -> usize {
        *self.horizon_schedule.last().expect("validated schedule")
    }

    /// Steps run in each curriculum phase.
    pub fn phase_steps(&self) -> Vec<usize> {
        let phases = self.horizon_schedule.len();
        match self.total_steps {
            None => vec![self.steps_per_phase; phases],
            Some(n) => {
                let base = n / phases;
                let mut v = vec![base; phases];
                if let Some(last) = v.last_mut() {
                    *last += n - base * phases;
                }
                v
            }
        }
    }

    pub fn total(&self) -> usize {
        self.phase_steps().iter().sum()
    }

    /// Horizon and phase index in effect at 0-based global step `step`.
    pub fn phase_at(&self, step: usize) -> (usize, usize) {
        let mut acc = 0;
        let steps = self.phase_steps();
        for (i, n) in steps.iter().enumerate() {
            acc += n;
            if step < acc {
                return (i, self.horizon_schedule[i]);
            }
        }
        let last = self.horizon_schedule.len() - 1;
        (last, self.horizon_schedule[last])
    }

    pub fn learning_rate(&self, horizon: usize) -> f64 {
        if horizon >= self.lr_switch_horizon {
            self.lr_reduced
        } else {
            self.lr_initial
        }
    }

    pub fn loss_spec(&self, horizon: usize) -> LossSpec {
        LossSpec {
            horizon,
            alpha: self.alpha,
            cost_norm: self.cost_norm,
            loss_form: self.loss_form,
            myopic_detach: self.myopic_detach,
        }
    }

    pub fn prior(&self) -> Result<PriorConfig> {
        Ok(PriorConfig {
            dimension: self.dimension,
            num_features: self.num_features,
            include_bowl: self.include_bowl,
            noise_variance: self.noise_variance,
            lengthscale_prior: fit_inverse_gamma(self.lengthscale_lo, self.lengthscale_hi, self.lengthscale_mass)?,
        })
    }

    /// Builds a config from parsed key/value pairs. `dimension` is required;
    /// `target_horizon` selects the default schedule when `horizon_schedule`
    /// is absent. Unknown keys are rejected.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let dimension: usize = match pairs.get("dimension") {
            Some(v) => parse_value("dimension", v)?,
            None => return Err(Error::Config("missing required key 'dimension'".into())),
        };
        let target: usize = match pairs.get("target_horizon") {
            Some(v) => parse_value("target_horizon", v)?,
            None => 50,
        };
        let mut c = Self::new(dimension, target);
        for (key, value) in pairs {
            let v = value.as_str();
            match key.as_str() {
                "dimension" | "target_horizon" => {}
                "hidden_size" => c.hidden_size = parse_value(key, v)?,
                "batch_size" => c.batch_size = parse_value(key, v)?,
                "steps_per_phase" => c.steps_per_phase = parse_value(key, v)?,
                "horizon_schedule" => {
                    c.horizon_schedule =
                        v.split(',').map(|s| parse_value::<usize>(key, s.trim())).collect::<Result<_>>()?
                }
                "alpha" => c.alpha = parse_value(key, v)?,
                "cost_norm" => c.cost_norm = v.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
                "loss_form" => c.loss_form = v.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
                "myopic_detach" => c.myopic_detach = parse_bool(key, v)?,
                "include_bowl" => c.include_bowl = parse_bool(key, v)?,
                "noise_variance" => c.noise_variance = parse_value(key, v)?,
                "num_features" => c.num_features = parse_value(key, v)?,
                "lr_initial" => c.lr_initial = parse_value(key, v)?,
                "lr_reduced" => c.lr_reduced = parse_value(key, v)?,
                "lr_switch_horizon" => c.lr_switch_horizon = parse_value(key, v)?,
                "total_steps" => c.total_steps = Some(parse_value(key, v)?),
                "seed" => c.seed = parse_value(key, v)?,
                "grad_clip" => c.grad_clip = parse_value(key, v)?,
                "lengthscale_lo" => c.lengthscale_lo = parse_value(key, v)?,
                "lengthscale_hi" => c.lengthscale_hi = parse_value(key, v)?,
                "lengthscale_mass" => c.lengthscale_mass = parse_value(key, v)?,
                other => return Err(Error::Config(format!("unknown key '{other}'"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    /// Canonical key/value echo; parsing it back yields the same config.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let schedule = self.horizon_schedule.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let mut v = vec![
            ("dimension", self.dimension.to_string()),
            ("hidden_size", self.hidden_size.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("steps_per_phase", self.steps_per_phase.to_string()),
            ("horizon_schedule", schedule),
            ("alpha", format!("{:?}", self.alpha)),
            ("cost_norm", self.cost_norm.name().to_string()),
            ("loss_form", self.loss_form.name().to_string()),
            ("myopic_detach", self.myopic_detach.to_string()),
            ("include_bowl", self.include_bowl.to_string()),
            ("noise_variance", format!("{:?}", self.noise_variance)),
            ("num_features", self.num_features.to_string()),
            ("lr_initial", format!("{:?}", self.lr_initial)),
            ("lr_reduced", format!("{:?}", self.lr_reduced)),
            ("lr_switch_horizon", self.lr_switch_horizon.to_string()),
            ("seed", self.seed.to_string()),
            ("grad_clip", format!("{:?}", self.grad_clip)),
            ("lengthscale_lo", format!("{:?}", self.lengthscale_lo)),
            ("lengthscale_hi", format!("{:?}", self.lengthscale_hi)),
            ("lengthscale_mass", format!("{:?}", self.lengthscale_mass)),
        ];
        if let Some(n) = self.total_steps {
            v.push(("total_steps", n.to_string()));
        }
        v.into_iter().map(|(k, val)| (k.to_string(), val)).collect()
    }
}
