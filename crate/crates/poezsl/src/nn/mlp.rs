use rand::Rng;

use super::{Activation, DenseLayer, LayerGradient};

/// A chain of dense layers; consecutive dimensions must match.
#[derive(Debug, Clone)]
pub struct Mlp {
    layers: Vec<DenseLayer>,
}

/// Cached activations from [`Mlp::trace`], consumed by [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct MlpTrace {
    /// Input to each layer; `inputs[0]` is the network input.
    pub inputs: Vec<Vec<f64>>,
    pub pres: Vec<Vec<f64>>,
    pub outs: Vec<Vec<f64>>,
}

/// Per-layer gradients for one network, shape-congruent with its parameters.
#[derive(Debug, Clone)]
pub struct GradientBundle {
    pub layers: Vec<LayerGradient>,
}

impl Mlp {
    /// Builds a network with the given layer widths (`dims[0]` is the input
    /// dimension). All layers use `hidden` except the last, which uses
    /// `output`.
    pub fn new(dims: &[usize], hidden: Activation, output: Activation, rng: &mut impl Rng) -> Mlp {
        assert!(dims.len() >= 2, "need at least input and output dims");
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let act = if i + 2 == dims.len() { output } else { hidden };
                DenseLayer::xavier(w[0], w[1], act, rng)
            })
            .collect();
        Mlp { layers }
    }

    pub fn from_layers(layers: Vec<DenseLayer>) -> Mlp {
        assert!(!layers.is_empty());
        for pair in layers.windows(2) {
            assert_eq!(pair[0].out_dim, pair[1].in_dim, "layer dimensions do not chain");
        }
        Mlp { layers }
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        for layer in &self.layers {
            cur = layer.forward(&cur).1;
        }
        cur
    }

    /// Forward pass retaining everything the backward pass needs.
    pub fn trace(&self, x: &[f64]) -> MlpTrace {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pres = Vec::with_capacity(self.layers.len());
        let mut outs = Vec::with_capacity(self.layers.len());
        let mut cur = x.to_vec();
        for layer in &self.layers {
            let (pre, out) = layer.forward(&cur);
            inputs.push(cur);
            pres.push(pre);
            cur = out.clone();
            outs.push(out);
        }
        MlpTrace { inputs, pres, outs }
    }

    /// Exact gradients of the scalar loss whose gradient at the network
    /// output is `upstream`. Returns parameter gradients and dL/dinput.
    pub fn backward(&self, trace: &MlpTrace, upstream: &[f64]) -> (GradientBundle, Vec<f64>) {
        assert_eq!(trace.inputs.len(), self.layers.len(), "trace does not match network");
        let mut grads = vec![LayerGradient::zeros(1, 1); self.layers.len()];
        let mut g = upstream.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let (lg, dx) = layer.backward(&trace.inputs[i], &trace.pres[i], &trace.outs[i], &g);
            grads[i] = lg;
            g = dx;
        }
        (GradientBundle { layers: grads }, g)
    }

    /// All parameters flattened in a fixed order: per layer, weights
    /// row-major then bias. Checkpointing, Adam and the finite-difference
    /// checker all rely on this order.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend_from_slice(&layer.weights);
            out.extend_from_slice(&layer.bias);
        }
        out
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_count(), "flat parameter vector has wrong length");
        let mut at = 0;
        for layer in &mut self.layers {
            let wn = layer.weights.len();
            layer.weights.copy_from_slice(&flat[at..at + wn]);
            at += wn;
            let bn = layer.bias.len();
            layer.bias.copy_from_slice(&flat[at..at + bn]);
            at += bn;
        }
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }
}

impl GradientBundle {
    pub fn zeros_like(net: &Mlp) -> GradientBundle {
        GradientBundle {
            layers: net.layers().iter().map(|l| LayerGradient::zeros(l.in_dim, l.out_dim)).collect(),
        }
    }

    pub fn add(&mut self, other: &GradientBundle) {
        assert_eq!(self.layers.len(), other.layers.len());
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.weights.iter_mut().zip(&b.weights) {
                *x += y;
            }
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for layer in &mut self.layers {
            for x in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
                *x *= s;
            }
        }
    }

    /// Flattened in the same order as [`Mlp::params_flat`].
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            out.extend_from_slice(&layer.weights);
            out.extend_from_slice(&layer.bias);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn dims_chain_through_constructor() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::new(&[4, 7, 3], Activation::Relu, Activation::Identity, &mut rng);
        assert_eq!(net.in_dim(), 4);
        assert_eq!(net.out_dim(), 3);
        assert_eq!(net.param_count(), 4 * 7 + 7 + 7 * 3 + 3);
    }

    #[test]
    #[should_panic(expected = "do not chain")]
    fn from_layers_rejects_mismatched_dims() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = DenseLayer::xavier(3, 4, Activation::Relu, &mut rng);
        let b = DenseLayer::xavier(5, 2, Activation::Identity, &mut rng);
        Mlp::from_layers(vec![a, b]);
    }

    #[test]
    fn trace_output_matches_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Mlp::new(&[3, 5, 2], Activation::Relu, Activation::Sigmoid, &mut rng);
        let x = [0.3, -0.8, 1.4];
        let trace = net.trace(&x);
        assert_eq!(trace.outs.last().unwrap(), &net.forward(&x));
    }

    #[test]
    fn params_flat_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut net = Mlp::new(&[2, 4, 3], Activation::Relu, Activation::Identity, &mut rng);
        let flat = net.params_flat();
        let mut doubled: Vec<f64> = flat.iter().map(|v| v * 2.0).collect();
        net.set_params_flat(&doubled);
        doubled.clear();
        assert_eq!(
            net.params_flat(),
            flat.iter().map(|v| v * 2.0).collect::<Vec<_>>()
        );
    }
}
