use super::{GradientBundle, Mlp};

/// Adam state for one network, moment buffers aligned with
/// [`Mlp::params_flat`] order.
#[derive(Debug, Clone)]
pub struct AdamState {
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Defaults: β1 = 0.9, β2 = 0.999, ε = 1e-8.
    pub fn new(param_count: usize, learning_rate: f64) -> AdamState {
        AdamState {
            first_moment: vec![0.0; param_count],
            second_moment: vec![0.0; param_count],
            step_count: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One bias-corrected Adam update over every parameter of `net`.
    pub fn step(&mut self, net: &mut Mlp, grads: &GradientBundle) {
        assert_eq!(net.param_count(), self.first_moment.len(), "optimizer/parameter shape mismatch");
        assert_eq!(net.layers().len(), grads.layers.len(), "gradient/parameter shape mismatch");
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);

        let mut at = 0;
        for (layer, lg) in net.layers_mut().iter_mut().zip(&grads.layers) {
            assert_eq!(layer.weights.len(), lg.weights.len(), "gradient/parameter shape mismatch");
            for (p, &g) in layer
                .weights
                .iter_mut()
                .chain(layer.bias.iter_mut())
                .zip(lg.weights.iter().chain(lg.bias.iter()))
            {
                let m = &mut self.first_moment[at];
                let v = &mut self.second_moment[at];
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
                at += 1;
            }
        }
    }
}
