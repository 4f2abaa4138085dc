//! Diagonal-Gaussian experts and precision-weighted product-of-experts
//! fusion.
//!
//! Each modality encoder emits an expert `N(μ_i, diag(σ_i²))` as a mean and
//! log-variance pair. The product of experts is again diagonal Gaussian
//! with precision `T = Σ T_i` and mean `(Σ μ_i T_i) / T`, where
//! `T_i = exp(-log_var_i)`; the standard-normal prior joins the product as
//! one more expert with `T = 1, μ = 0`.
//!
//! Per-dimension sums are evaluated in a canonical (sorted) order, so
//! fusion is exactly permutation-invariant, bit for bit.

/// A diagonal Gaussian over the latent space.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianExpert {
    pub mean: Vec<f64>,
    pub log_var: Vec<f64>,
}

impl GaussianExpert {
    pub fn new(mean: Vec<f64>, log_var: Vec<f64>) -> GaussianExpert {
        assert_eq!(mean.len(), log_var.len(), "mean and log_var must have the same length");
        GaussianExpert { mean, log_var }
    }

    /// The prior expert `N(0, I)`.
    pub fn standard(dim: usize) -> GaussianExpert {
        GaussianExpert { mean: vec![0.0; dim], log_var: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Per-dimension precision `exp(-log_var)`.
    pub fn precision(&self, d: usize) -> f64 {
        (-self.log_var[d]).exp()
    }

    pub fn variance(&self, d: usize) -> f64 {
        self.log_var[d].exp()
    }
}

/// A reparameterized draw `z = μ + noise ⊙ σ` along with the noise used.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSample {
    pub z: Vec<f64>,
    pub noise: Vec<f64>,
}

/// Sums `values` smallest-to-largest (by total order), making the result
/// independent of the caller's ordering.
fn canonical_sum(values: &mut Vec<f64>) -> f64 {
    values.sort_unstable_by(|a, b| a.total_cmp(b));
    values.iter().sum()
}

/// Precision-weighted product of the given experts, optionally including
/// the standard-normal prior as one more expert.
pub fn fuse_experts(experts: &[&GaussianExpert], include_prior: bool) -> GaussianExpert {
    assert!(!experts.is_empty(), "fuse_experts needs at least one expert");
    let dim = experts[0].dim();
    for e in experts {
        assert_eq!(e.dim(), dim, "experts must share a dimension");
    }

    let mut mean = vec![0.0; dim];
    let mut log_var = vec![0.0; dim];
    let mut precisions = Vec::with_capacity(experts.len() + 1);
    let mut weighted = Vec::with_capacity(experts.len() + 1);
    for d in 0..dim {
        precisions.clear();
        weighted.clear();
        for e in experts {
            let t = e.precision(d);
            precisions.push(t);
            weighted.push(e.mean[d] * t);
        }
        if include_prior {
            precisions.push(1.0);
            weighted.push(0.0);
        }
        let total = canonical_sum(&mut precisions);
        mean[d] = canonical_sum(&mut weighted) / total;
        log_var[d] = -total.ln();
    }
    GaussianExpert { mean, log_var }
}

/// Gradients of a scalar loss through [`fuse_experts`].
///
/// `g_mean`/`g_log_var` are dL/d(fused mean) and dL/d(fused log-variance);
/// returns per input expert (dL/dμ_i, dL/dlog_var_i). The prior contributes
/// no parameters.
pub fn fuse_backward(
    experts: &[&GaussianExpert],
    include_prior: bool,
    fused: &GaussianExpert,
    g_mean: &[f64],
    g_log_var: &[f64],
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let dim = fused.dim();
    assert_eq!(g_mean.len(), dim);
    assert_eq!(g_log_var.len(), dim);
    // exp(-log_var_f) reproduces the forward pass's total precision up to
    // the ln/exp round trip; that tiny perturbation is irrelevant for
    // gradients, which are only accurate to O(ε) anyway.
    let _ = include_prior;
    let mut out = Vec::with_capacity(experts.len());
    for e in experts {
        let mut gm = vec![0.0; dim];
        let mut gv = vec![0.0; dim];
        for d in 0..dim {
            let total = (-fused.log_var[d]).exp();
            let ratio = e.precision(d) / total;
            gm[d] = g_mean[d] * ratio;
            gv[d] = ratio * (g_log_var[d] - g_mean[d] * (e.mean[d] - fused.mean[d]));
        }
        out.push((gm, gv));
    }
    out
}

/// `z = μ + noise ⊙ exp(log_var / 2)`.
pub fn reparameterize(expert: &GaussianExpert, noise: &[f64]) -> LatentSample {
    assert_eq!(noise.len(), expert.dim(), "noise must match the expert dimension");
    let z = expert
        .mean
        .iter()
        .zip(&expert.log_var)
        .zip(noise)
        .map(|((m, lv), n)| m + n * (0.5 * lv).exp())
        .collect();
    LatentSample { z, noise: noise.to_vec() }
}

/// Gradients through [`reparameterize`]: dz/dμ = 1,
/// dz/dlog_var = 0.5 · noise ⊙ σ.
pub fn reparameterize_backward(
    expert: &GaussianExpert,
    noise: &[f64],
    g_z: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let g_mean = g_z.to_vec();
    let g_log_var = expert
        .log_var
        .iter()
        .zip(noise)
        .zip(g_z)
        .map(|((lv, n), g)| g * n * 0.5 * (0.5 * lv).exp())
        .collect();
    (g_mean, g_log_var)
}

/// `KL(q ‖ N(0, I)) = ½ Σ_d (μ² + σ² − 1 − log σ²)`; non-negative.
pub fn kl_to_standard_normal(q: &GaussianExpert) -> f64 {
    q.mean
        .iter()
        .zip(&q.log_var)
        .map(|(m, lv)| 0.5 * (m * m + lv.exp() - 1.0 - lv))
        .sum()
}

/// Gradients of `upstream · KL(q ‖ N(0, I))` with respect to μ and log σ².
pub fn kl_backward(q: &GaussianExpert, upstream: f64) -> (Vec<f64>, Vec<f64>) {
    let g_mean = q.mean.iter().map(|m| upstream * m).collect();
    let g_log_var = q.log_var.iter().map(|lv| upstream * 0.5 * (lv.exp() - 1.0)).collect();
    (g_mean, g_log_var)
}
