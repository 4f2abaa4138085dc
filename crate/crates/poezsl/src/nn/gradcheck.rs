use super::Mlp;

/// Central finite differences of `f` at `params`, one coordinate at a time.
pub fn finite_difference_gradient(
    f: &mut dyn FnMut(&[f64]) -> f64,
    params: &[f64],
    step: f64,
) -> Vec<f64> {
    let mut probe = params.to_vec();
    let mut grad = vec![0.0; params.len()];
    for i in 0..params.len() {
        let orig = probe[i];
        probe[i] = orig + step;
        let up = f(&probe);
        probe[i] = orig - step;
        let down = f(&probe);
        probe[i] = orig;
        grad[i] = (up - down) / (2.0 * step);
    }
    grad
}

/// Relative error with an absolute floor of 1, so near-zero pairs compare
/// absolutely instead of amplifying finite-difference noise.
pub fn relative_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1.0)
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub worst_index: usize,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_relative_error < self.tolerance
    }

    /// Worst [`relative_error`] between two gradient vectors.
    pub fn compare(analytic: &[f64], numeric: &[f64], tolerance: f64) -> GradCheckReport {
        assert_eq!(analytic.len(), numeric.len());
        let mut max = 0.0;
        let mut worst = 0;
        for (i, (&a, &n)) in analytic.iter().zip(numeric).enumerate() {
            let e = relative_error(a, n);
            if e > max {
                max = e;
                worst = i;
            }
        }
        GradCheckReport { max_relative_error: max, worst_index: worst, tolerance }
    }
}

/// Checks `net.backward` against central differences (step 1e-5) on every
/// parameter.
///
/// `loss_fn` maps the network output to the scalar loss and its gradient
/// at the output.
pub fn finite_diff_check(
    net: &Mlp,
    loss_fn: &dyn Fn(&[f64]) -> (f64, Vec<f64>),
    x: &[f64],
    tol: f64,
) -> GradCheckReport {
    let trace = net.trace(x);
    let (_, dout) = loss_fn(trace.outs.last().unwrap());
    let (bundle, _) = net.backward(&trace, &dout);
    let analytic = bundle.flat();

    let base = net.params_flat();
    let mut f = |flat: &[f64]| {
        let mut probe = net.clone();
        probe.set_params_flat(flat);
        loss_fn(&probe.forward(x)).0
    };
    let numeric = finite_difference_gradient(&mut f, &base, 1e-5);
    GradCheckReport::compare(&analytic, &numeric, tol)
}
