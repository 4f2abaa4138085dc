/// Elementwise activations plus softmax, which couples the whole vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
    Sigmoid,
    Softmax,
}

impl Activation {
    /// Applies the activation to a pre-activation vector.
    pub fn apply(self, pre: &[f64]) -> Vec<f64> {
        match self {
            Activation::Relu => pre.iter().map(|&x| x.max(0.0)).collect(),
            Activation::Identity => pre.to_vec(),
            Activation::Sigmoid => pre.iter().map(|&x| sigmoid(x)).collect(),
            Activation::Softmax => softmax(pre),
        }
    }

    /// Pulls a gradient back through the activation: given dL/dout, the
    /// cached pre-activations and outputs, returns dL/dpre.
    pub fn backprop(self, pre: &[f64], out: &[f64], upstream: &[f64]) -> Vec<f64> {
        debug_assert_eq!(pre.len(), upstream.len());
        match self {
            Activation::Relu => pre
                .iter()
                .zip(upstream)
                .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
                .collect(),
            Activation::Identity => upstream.to_vec(),
            Activation::Sigmoid => out
                .iter()
                .zip(upstream)
                .map(|(&y, &g)| g * y * (1.0 - y))
                .collect(),
            Activation::Softmax => {
                // J^T g with J = diag(y) - y y^T.
                let dot: f64 = out.iter().zip(upstream).map(|(&y, &g)| y * g).sum();
                out.iter().zip(upstream).map(|(&y, &g)| y * (g - dot)).collect()
            }
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn softmax(pre: &[f64]) -> Vec<f64> {
    let max = pre.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = pre.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_clamps_negatives() {
        assert_eq!(Activation::Relu.apply(&[-1.0, 0.0, 2.5]), vec![0.0, 0.0, 2.5]);
    }

    #[test]
    fn sigmoid_midpoint_and_symmetry() {
        let out = Activation::Sigmoid.apply(&[0.0, 3.0, -3.0]);
        assert_eq!(out[0], 0.5);
        assert!((out[1] + out[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn softmax_normalizes_and_orders() {
        let out = Activation::Softmax.apply(&[1.0, 2.0, 3.0]);
        let sum: f64 = out.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(out[0] < out[1] && out[1] < out[2]);
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let a = Activation::Softmax.apply(&[1.0, 2.0, 3.0]);
        let b = Activation::Softmax.apply(&[1001.0, 1002.0, 1003.0]);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_backprop_matches_jacobian() {
        let pre = [0.3, -1.2, 0.7];
        let out = Activation::Softmax.apply(&pre);
        let upstream = [0.5, -0.25, 1.0];
        let got = Activation::Softmax.backprop(&pre, &out, &upstream);
        for j in 0..3 {
            let mut expect = 0.0;
            for i in 0..3 {
                let jac = if i == j { out[i] * (1.0 - out[j]) } else { -out[i] * out[j] };
                expect += jac * upstream[i];
            }
            assert!((got[j] - expect).abs() < 1e-14);
        }
    }
}
