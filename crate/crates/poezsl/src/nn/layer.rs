use rand::Rng;

use super::Activation;

/// One fully connected layer: `out = activation(W x + b)`.
///
/// Weights are row-major, `out_dim` rows of `in_dim` columns.
#[derive(Debug, Clone)]
pub struct DenseLayer {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

/// Gradients for a single layer, same shapes as `weights` and `bias`.
#[derive(Debug, Clone)]
pub struct LayerGradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    /// Xavier-uniform initialization: weights in `[-a, a]` with
    /// `a = sqrt(6 / (fan_in + fan_out))`, biases at zero.
    pub fn xavier(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut impl Rng) -> Self {
        assert!(in_dim > 0 && out_dim > 0, "layer dims must be positive");
        let a = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let weights = (0..in_dim * out_dim).map(|_| rng.gen_range(-a..=a)).collect();
        DenseLayer { weights, bias: vec![0.0; out_dim], in_dim, out_dim, activation }
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    /// Forward pass returning `(pre_activation, output)`; both are cached
    /// by [`super::Mlp::trace`] for the backward pass.
    pub fn forward(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(x.len(), self.in_dim, "dense_forward: input has wrong length");
        let mut pre = self.bias.clone();
        for (o, p) in pre.iter_mut().enumerate() {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let mut acc = 0.0;
            for (w, xi) in row.iter().zip(x) {
                acc += w * xi;
            }
            *p += acc;
        }
        let out = self.activation.apply(&pre);
        (pre, out)
    }

    /// Gradient of a scalar loss through this layer.
    ///
    /// `x`, `pre`, `out` must come from a forward pass on the same input;
    /// `upstream` is dL/dout. Returns the parameter gradients and dL/dx.
    pub fn backward(
        &self,
        x: &[f64],
        pre: &[f64],
        out: &[f64],
        upstream: &[f64],
    ) -> (LayerGradient, Vec<f64>) {
        assert_eq!(upstream.len(), self.out_dim, "backward: upstream has wrong length");
        let dpre = self.activation.backprop(pre, out, upstream);
        let mut dw = vec![0.0; self.weights.len()];
        let mut dx = vec![0.0; self.in_dim];
        for o in 0..self.out_dim {
            let g = dpre[o];
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let drow = &mut dw[o * self.in_dim..(o + 1) * self.in_dim];
            for i in 0..self.in_dim {
                drow[i] = g * x[i];
                dx[i] += g * row[i];
            }
        }
        (LayerGradient { weights: dw, bias: dpre }, dx)
    }
}

impl LayerGradient {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        LayerGradient { weights: vec![0.0; in_dim * out_dim], bias: vec![0.0; out_dim] }
    }
}
