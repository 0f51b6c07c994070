use super::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-7 }
    }
}

/// Bias-corrected Adam over a flat parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam<S> {
    pub hyper: AdamParams,
    pub step: u64,
    pub m: Vec<S>,
    pub v: Vec<S>,
}

impl<S: Scalar> Adam<S> {
    pub fn new(hyper: AdamParams, len: usize) -> Self {
        Self { hyper, step: 0, m: vec![S::zero(); len], v: vec![S::zero(); len] }
    }

    pub fn update(&mut self, params: &mut [S], grad: &[S]) {
        assert_eq!(params.len(), grad.len());
        assert_eq!(params.len(), self.m.len());
        self.step += 1;
        let h = self.hyper;
        let (b1, b2) = (S::of(h.beta1), S::of(h.beta2));
        let c1 = S::of(1.0 - h.beta1.powf(self.step as f64));
        let c2 = S::of(1.0 - h.beta2.powf(self.step as f64));
        let (lr, eps) = (S::of(h.learning_rate), S::of(h.epsilon));
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = b1 * self.m[i] + (S::one() - b1) * g;
            self.v[i] = b2 * self.v[i] + (S::one() - b2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] = params[i] - lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_on_quadratic() {
        // f(w) = w², w₀ = 1, gradient 2: the bias-corrected step is lr·g/(|g| + ε)
        let mut w = [1.0f64];
        let mut adam = Adam::new(AdamParams::default(), 1);
        let g = [2.0 * w[0]];
        adam.update(&mut w, &g);
        let expect = 1.0 - 1e-3 * 2.0 / (2.0 + 1e-7);
        assert!((w[0] - expect).abs() < 1e-15, "{}", w[0]);
        assert!((w[0] - 0.999).abs() < 1e-9);
    }

    #[test]
    fn second_step_closed_form() {
        let h = AdamParams::default();
        let mut w = [1.0f64];
        let mut adam = Adam::new(h, 1);
        adam.update(&mut w, &[2.0]);
        let g2 = 2.0 * w[0];
        adam.update(&mut w, &[g2]);
        let m = (1.0 - h.beta1) * (h.beta1 * 2.0 + g2);
        let v = (1.0 - h.beta2) * (h.beta2 * 4.0 + g2 * g2);
        let m_hat = m / (1.0 - h.beta1 * h.beta1);
        let v_hat = v / (1.0 - h.beta2 * h.beta2);
        let expect = 1.0 - 2.0e-3 / (2.0 + 1e-7) - h.learning_rate * m_hat / (v_hat.sqrt() + h.epsilon);
        assert!((w[0] - expect).abs() < 1e-14);
    }

    #[test]
    fn converges_on_quadratic() {
        let mut w = [1.0f64];
        let mut adam = Adam::new(AdamParams { learning_rate: 0.05, ..Default::default() }, 1);
        for _ in 0..2000 {
            let g = [2.0 * w[0]];
            adam.update(&mut w, &g);
        }
        assert!(w[0].abs() < 1e-3, "{}", w[0]);
    }
}
