/// Adam with bias correction. Moments live here; the trainer owns one of
/// these per parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    /// Number of updates applied so far.
    pub steps: u64,
}

impl Adam {
    pub fn new(len: usize) -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            first_moment: vec![0.0; len],
            second_moment: vec![0.0; len],
            steps: 0,
        }
    }

    /// One descent step along `grad`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.steps += 1;
        adam_update(
            params,
            grad,
            &mut self.first_moment,
            &mut self.second_moment,
            self.steps,
            lr,
            (self.beta1, self.beta2, self.eps),
        );
    }
}

/// Standard Adam descent update at 1-based `step_index`.
pub fn adam_update(
    params: &mut [f64],
    grad: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    step_index: u64,
    lr: f64,
    (beta1, beta2, eps): (f64, f64, f64),
) {
    assert_eq!(params.len(), grad.len());
    assert_eq!(params.len(), m.len());
    assert_eq!(params.len(), v.len());
    let t = step_index.max(1) as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    for i in 0..params.len() {
        let g = grad[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_fixed_point() {
        let mut adam = Adam::new(3);
        let mut p = vec![1.0, -2.0, 0.5];
        for _ in 0..10 {
            adam.step(&mut p, &[0.0; 3], 1e-3);
        }
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn first_step_moves_by_lr() {
        // t = 1: m_hat = g, v_hat = g^2, update = -lr * g / (|g| + eps).
        let mut adam = Adam::new(2);
        let mut p = vec![0.0, 0.0];
        adam.step(&mut p, &[0.3, -4.0], 1e-3);
        let expected0 = -1e-3 * 0.3 / (0.3 + 1e-8);
        let expected1 = 1e-3 * 4.0 / (4.0 + 1e-8);
        assert!((p[0] - expected0).abs() < 1e-18);
        assert!((p[1] - expected1).abs() < 1e-18);
    }

    #[test]
    fn constant_gradient_step_tends_to_lr() {
        let mut adam = Adam::new(1);
        let mut p = vec![0.0];
        let mut last = 0.0;
        for _ in 0..5000 {
            let before = p[0];
            adam.step(&mut p, &[2.5], 1e-2);
            last = p[0] - before;
        }
        assert!((last + 1e-2).abs() < 1e-9);
    }
}
