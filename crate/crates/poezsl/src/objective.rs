//! Loss terms and their gating.
//!
//! Paired samples minimize the joint negated ELBO plus one skip ELBO per
//! modality; unlabeled auxiliary samples minimize the image-only ELBO plus
//! a γ-weighted L1 loss on the generated pseudo-attribute. Every sample
//! also pays a binary cross-entropy term for the indicator head that
//! predicts whether it was paired. β (on all KL terms) and γ ramp linearly
//! over epochs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::poe::{kl_to_standard_normal, GaussianExpert};

/// Modality key used in loss maps for image features.
pub const IMAGE: &str = "image";
/// Modality key used in loss maps for class attributes.
pub const ATTRIBUTE: &str = "attribute";

/// Negative Gaussian log-likelihood with unit variance, constant dropped:
/// `½ ‖x − x̂‖²`.
pub fn reconstruction_nll(x: &[f64], x_hat: &[f64]) -> f64 {
    assert_eq!(x.len(), x_hat.len(), "reconstruction_nll: length mismatch");
    x.iter().zip(x_hat).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum()
}

/// d[reconstruction_nll]/dx̂ = x̂ − x.
pub fn reconstruction_nll_grad(x: &[f64], x_hat: &[f64]) -> Vec<f64> {
    x.iter().zip(x_hat).map(|(a, b)| b - a).collect()
}

/// L1 distance between generated and target pseudo-attributes.
pub fn aud_loss(predicted: &[f64], target: &[f64]) -> f64 {
    assert_eq!(predicted.len(), target.len(), "aud_loss: length mismatch");
    predicted.iter().zip(target).map(|(p, t)| (p - t).abs()).sum()
}

/// Subgradient of [`aud_loss`] in the prediction: sign(â − a), 0 at ties.
pub fn aud_loss_grad(predicted: &[f64], target: &[f64]) -> Vec<f64> {
    predicted
        .iter()
        .zip(target)
        .map(|(p, t)| {
            if p > t {
                1.0
            } else if p < t {
                -1.0
            } else {
                0.0
            }
        })
        .collect()
}

const ALPHA_CLAMP: f64 = 1e-7;

/// Binary cross-entropy for the pairedness head, with α̂ clamped to
/// `[1e-7, 1 − 1e-7]` so saturated predictions stay finite.
pub fn indicator_loss(alpha_hat: f64, indicator: bool) -> f64 {
    let p = alpha_hat.clamp(ALPHA_CLAMP, 1.0 - ALPHA_CLAMP);
    if indicator {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// d[indicator_loss]/dα̂; zero where the clamp is active.
pub fn indicator_loss_grad(alpha_hat: f64, indicator: bool) -> f64 {
    if alpha_hat < ALPHA_CLAMP || alpha_hat > 1.0 - ALPHA_CLAMP {
        return 0.0;
    }
    if indicator {
        -1.0 / alpha_hat
    } else {
        1.0 / (1.0 - alpha_hat)
    }
}

/// Joint negated ELBO: summed reconstruction over the present modalities
/// plus β times the KL of the fused posterior.
pub fn elbo_joint(pairs: &[(&[f64], &[f64])], fused: &GaussianExpert, beta: f64) -> f64 {
    assert!(!pairs.is_empty(), "elbo_joint: empty modality set");
    let recon: f64 = pairs.iter().map(|(x, xh)| reconstruction_nll(x, xh)).sum();
    recon + beta * kl_to_standard_normal(fused)
}

/// Skip negated ELBO for one modality reconstructed from its own latent.
pub fn elbo_skip(x: &[f64], x_hat: &[f64], posterior: &GaussianExpert, beta: f64) -> f64 {
    reconstruction_nll(x, x_hat) + beta * kl_to_standard_normal(posterior)
}

/// Which ramp a schedule drives; β weights KL terms, γ weights the
/// pseudo-attribute loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Beta,
    Gamma,
}

/// Linear per-epoch ramp: `value = rate × clamp(epoch − start, 0, end − start)`.
///
/// The value is computed as a single multiplication of the rate by the
/// clamped epoch count, so the published endpoint values (0.2975 for β,
/// 0.23 for γ) are reproduced exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealingSchedule {
    pub kind: ScheduleKind,
    pub rate: f64,
    pub start_epoch: u32,
    pub end_epoch: u32,
}

impl AnnealingSchedule {
    /// β ramp: 0.0035 per epoch from epoch 0, frozen after epoch 85.
    pub fn beta() -> AnnealingSchedule {
        AnnealingSchedule { kind: ScheduleKind::Beta, rate: 0.0035, start_epoch: 0, end_epoch: 85 }
    }

    /// γ ramp: 0.005 per epoch between epochs 10 and 56.
    pub fn gamma() -> AnnealingSchedule {
        AnnealingSchedule { kind: ScheduleKind::Gamma, rate: 0.005, start_epoch: 10, end_epoch: 56 }
    }

    /// Schedule value at a (0-based) epoch.
    pub fn value(&self, epoch: u32) -> f64 {
        assert!(self.end_epoch >= self.start_epoch, "schedule ends before it starts");
        let count = epoch
            .saturating_sub(self.start_epoch)
            .min(self.end_epoch - self.start_epoch);
        self.rate * count as f64
    }

    /// Rescales the rate so the frozen end value becomes `end_value`.
    pub fn with_end_value(mut self, end_value: f64) -> AnnealingSchedule {
        let span = (self.end_epoch - self.start_epoch).max(1);
        self.rate = end_value / span as f64;
        self
    }
}

/// Ungated loss terms from one sample's forward pass.
///
/// `recon`/`kl_joint` describe the joint path (for unlabeled samples, the
/// image-only path); skip maps are filled only for paired samples; `l_aud`
/// is present only when the sample carries a pseudo-attribute target.
#[derive(Debug, Clone, Default)]
pub struct SampleTerms {
    pub paired: bool,
    pub recon: BTreeMap<String, f64>,
    pub kl_joint: f64,
    pub recon_skip: BTreeMap<String, f64>,
    pub kl_skip: BTreeMap<String, f64>,
    pub l_aud: Option<f64>,
    pub indicator: f64,
}

/// Per-sample (or batch-mean) loss decomposition.
///
/// `total` always equals [`LossReport::weighted_sum`] exactly; the
/// constructor computes it that way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub recon_per_modality: BTreeMap<String, f64>,
    pub recon_skip_per_modality: BTreeMap<String, f64>,
    pub kl_joint: f64,
    pub kl_skip_per_modality: BTreeMap<String, f64>,
    pub l_aud: f64,
    pub indicator_loss: f64,
    pub total: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl LossReport {
    /// The documented decomposition:
    /// `Σ recon + Σ recon_skip + β (kl_joint + Σ kl_skip) + γ l_aud + indicator`.
    pub fn weighted_sum(&self) -> f64 {
        let recon: f64 = self.recon_per_modality.values().sum();
        let recon_skip: f64 = self.recon_skip_per_modality.values().sum();
        let kl_skip: f64 = self.kl_skip_per_modality.values().sum();
        recon + recon_skip
            + self.beta * (self.kl_joint + kl_skip)
            + self.gamma * self.l_aud
            + self.indicator_loss
    }

    pub fn all_finite(&self) -> bool {
        self.recon_per_modality
            .values()
            .chain(self.recon_skip_per_modality.values())
            .chain(self.kl_skip_per_modality.values())
            .chain([&self.kl_joint, &self.l_aud, &self.indicator_loss, &self.total])
            .all(|v| v.is_finite())
    }
}

/// Gates one sample's terms into a [`LossReport`].
///
/// Paired samples must not carry a pseudo-attribute loss; unlabeled
/// samples must not carry skip terms. γ never touches paired samples.
pub fn total_loss(terms: &SampleTerms, beta: f64, gamma: f64) -> LossReport {
    if terms.paired {
        assert!(terms.l_aud.is_none(), "paired sample with a pseudo-attribute loss");
    } else {
        assert!(
            terms.recon_skip.is_empty() && terms.kl_skip.is_empty(),
            "unlabeled sample with skip terms"
        );
    }
    let mut report = LossReport {
        recon_per_modality: terms.recon.clone(),
        recon_skip_per_modality: terms.recon_skip.clone(),
        kl_joint: terms.kl_joint,
        kl_skip_per_modality: terms.kl_skip.clone(),
        l_aud: terms.l_aud.unwrap_or(0.0),
        indicator_loss: terms.indicator,
        total: 0.0,
        beta,
        gamma,
    };
    report.total = report.weighted_sum();
    report
}

/// Averages reports (e.g. over a batch or an epoch). All inputs must share
/// β and γ; the mean's `total` is recomputed from the averaged fields so
/// the decomposition invariant survives averaging.
pub fn mean_of(reports: &[LossReport]) -> LossReport {
    assert!(!reports.is_empty(), "mean_of: no reports");
    let beta = reports[0].beta;
    let gamma = reports[0].gamma;
    assert!(
        reports.iter().all(|r| r.beta == beta && r.gamma == gamma),
        "mean_of: mixed schedule values"
    );
    let n = reports.len() as f64;
    let mut mean = LossReport {
        recon_per_modality: BTreeMap::new(),
        recon_skip_per_modality: BTreeMap::new(),
        kl_joint: reports.iter().map(|r| r.kl_joint).sum::<f64>() / n,
        kl_skip_per_modality: BTreeMap::new(),
        l_aud: reports.iter().map(|r| r.l_aud).sum::<f64>() / n,
        indicator_loss: reports.iter().map(|r| r.indicator_loss).sum::<f64>() / n,
        total: 0.0,
        beta,
        gamma,
    };
    for r in reports {
        for (k, v) in &r.recon_per_modality {
            *mean.recon_per_modality.entry(k.clone()).or_insert(0.0) += v;
        }
        for (k, v) in &r.recon_skip_per_modality {
            *mean.recon_skip_per_modality.entry(k.clone()).or_insert(0.0) += v;
        }
        for (k, v) in &r.kl_skip_per_modality {
            *mean.kl_skip_per_modality.entry(k.clone()).or_insert(0.0) += v;
        }
    }
    for v in mean
        .recon_per_modality
        .values_mut()
        .chain(mean.recon_skip_per_modality.values_mut())
        .chain(mean.kl_skip_per_modality.values_mut())
    {
        *v /= n;
    }
    mean.total = mean.weighted_sum();
    mean
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn recon_nll_basics() {
        assert_eq!(reconstruction_nll(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(reconstruction_nll(&[1.0, 0.0], &[0.0, 0.0]), 0.5);
    }

    #[test]
    fn recon_nll_matches_naive_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..16).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let xh: Vec<f64> = (0..16).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mut expect = 0.0;
        for i in 0..16 {
            let d = x[i] - xh[i];
            expect += 0.5 * d * d;
        }
        assert!((reconstruction_nll(&x, &xh) - expect).abs() < 1e-14);
    }

    #[test]
    fn aud_loss_basics() {
        assert_eq!(aud_loss(&[0.4, -0.1], &[0.4, -0.1]), 0.0);
        assert_eq!(aud_loss(&[1.0, -1.0], &[0.0, 0.0]), 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let expect: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        assert_eq!(aud_loss(&a, &b), expect);
    }

    #[test]
    fn indicator_loss_closed_form() {
        assert!((indicator_loss(0.5, true) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((indicator_loss(0.5, false) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(indicator_loss(1.0 - 1e-12, true) < 1e-6);
        assert!((indicator_loss(0.9, false) - 2.302585092994046).abs() < 1e-12);
    }

    #[test]
    fn indicator_loss_stays_finite_when_saturated() {
        assert!(indicator_loss(0.0, true).is_finite());
        assert!(indicator_loss(1.0, false).is_finite());
        assert!((indicator_loss(0.0, true) - -(1e-7f64.ln())).abs() < 1e-9);
        assert_eq!(indicator_loss_grad(0.0, true), 0.0);
    }

    #[test]
    fn elbo_joint_vanishes_at_perfect_fit() {
        let fused = crate::poe::GaussianExpert::standard(3);
        let x = [0.5, 0.1];
        let a = [1.0];
        let loss = elbo_joint(&[(&x, &x), (&a, &a)], &fused, 0.3);
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn elbo_joint_beta_zero_is_pure_reconstruction() {
        let fused = crate::poe::GaussianExpert::new(vec![1.0], vec![0.5]);
        let x = [0.5];
        let xh = [0.2];
        let a = [1.0, 2.0];
        let ah = [0.9, 2.2];
        let loss = elbo_joint(&[(&x, &xh), (&a, &ah)], &fused, 0.0);
        let expect = reconstruction_nll(&x, &xh) + reconstruction_nll(&a, &ah);
        assert_eq!(loss, expect);
    }

    #[test]
    fn elbo_joint_matches_termwise_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let fused = crate::poe::GaussianExpert::new(
            (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        );
        let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let xh: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let beta = 0.17;
        let loss = elbo_joint(&[(&x, &xh)], &fused, beta);
        let expect = reconstruction_nll(&x, &xh) + beta * kl_to_standard_normal(&fused);
        assert!((loss - expect).abs() < 1e-15);
    }

    #[test]
    fn elbo_skip_is_single_modality_elbo_joint() {
        let post = crate::poe::GaussianExpert::new(vec![0.4, -0.6], vec![0.2, 0.1]);
        let x = [1.0, 2.0, 3.0];
        let xh = [0.8, 2.1, 2.9];
        let beta = 0.25;
        assert_eq!(elbo_skip(&x, &xh, &post, beta), elbo_joint(&[(&x, &xh)], &post, beta));
    }

    #[test]
    fn beta_schedule_hits_published_values_exactly() {
        let beta = AnnealingSchedule::beta();
        assert_eq!(beta.value(0), 0.0);
        assert_eq!(beta.value(85), 0.2975);
        assert_eq!(beta.value(86), beta.value(85));
        assert_eq!(beta.value(500), 0.2975);
    }

    #[test]
    fn gamma_schedule_hits_published_values_exactly() {
        let gamma = AnnealingSchedule::gamma();
        assert_eq!(gamma.value(9), 0.0);
        assert_eq!(gamma.value(10), 0.0);
        assert_eq!(gamma.value(33), 0.115);
        assert_eq!(gamma.value(56), 0.23);
        assert_eq!(gamma.value(57), gamma.value(56));
    }

    #[test]
    fn schedule_end_value_override() {
        let gamma = AnnealingSchedule::gamma().with_end_value(1.15);
        assert!((gamma.value(56) - 1.15).abs() < 1e-12);
        assert_eq!(gamma.value(9), 0.0);
    }

    proptest! {
        #[test]
        fn schedules_are_non_decreasing(epoch in 0u32..200) {
            for sched in [AnnealingSchedule::beta(), AnnealingSchedule::gamma()] {
                prop_assert!(sched.value(epoch + 1) >= sched.value(epoch));
            }
        }

        #[test]
        fn total_decomposes_exactly(
            recon_img in 0.0f64..50.0,
            recon_attr in 0.0f64..50.0,
            kl_joint in 0.0f64..20.0,
            kl_img in 0.0f64..20.0,
            indicator in 0.0f64..5.0,
            beta in 0.0f64..0.3,
            gamma in 0.0f64..0.25,
            paired in proptest::bool::ANY,
        ) {
            let mut terms = SampleTerms { paired, indicator, kl_joint, ..Default::default() };
            terms.recon.insert(IMAGE.into(), recon_img);
            if paired {
                terms.recon.insert(ATTRIBUTE.into(), recon_attr);
                terms.recon_skip.insert(IMAGE.into(), recon_img * 0.5);
                terms.kl_skip.insert(IMAGE.into(), kl_img);
            } else {
                terms.l_aud = Some(recon_attr);
            }
            let report = total_loss(&terms, beta, gamma);
            prop_assert!((report.total - report.weighted_sum()).abs() < 1e-10);
            prop_assert_eq!(report.total, report.weighted_sum());
        }
    }

    #[test]
    fn paired_total_is_independent_of_gamma() {
        let mut terms = SampleTerms { paired: true, indicator: 0.7, kl_joint: 1.2, ..Default::default() };
        terms.recon.insert(IMAGE.into(), 3.0);
        terms.recon.insert(ATTRIBUTE.into(), 1.0);
        let a = total_loss(&terms, 0.1, 0.0);
        let b = total_loss(&terms, 0.1, 0.23);
        assert_eq!(a.total, b.total);
    }

    #[test]
    fn aud_total_with_gamma_zero_drops_the_pseudo_term() {
        let mut terms = SampleTerms { paired: false, indicator: 0.6931, kl_joint: 0.8, ..Default::default() };
        terms.recon.insert(IMAGE.into(), 2.0);
        terms.l_aud = Some(5.0);
        let report = total_loss(&terms, 0.2, 0.0);
        assert_eq!(report.total, 2.0 + 0.2 * 0.8 + 0.6931);
    }

    #[test]
    fn gamma_sensitivity_equals_l_aud() {
        let mut terms = SampleTerms { paired: false, indicator: 0.1, kl_joint: 0.4, ..Default::default() };
        terms.recon.insert(IMAGE.into(), 1.0);
        terms.l_aud = Some(3.7);
        let a = total_loss(&terms, 0.1, 0.10);
        let b = total_loss(&terms, 0.1, 0.15);
        let slope = (b.total - a.total) / 0.05;
        assert!((slope - 3.7).abs() < 1e-10);
    }

    #[test]
    #[should_panic(expected = "paired sample with a pseudo-attribute loss")]
    fn paired_sample_rejects_aud_terms() {
        let mut terms = SampleTerms { paired: true, ..Default::default() };
        terms.recon.insert(IMAGE.into(), 1.0);
        terms.l_aud = Some(1.0);
        total_loss(&terms, 0.1, 0.1);
    }

    #[test]
    fn batch_mean_matches_mean_of_totals() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let reports: Vec<LossReport> = (0..4)
            .map(|i| {
                let paired = i % 2 == 0;
                let mut terms = SampleTerms {
                    paired,
                    indicator: rng.gen_range(0.0..2.0),
                    kl_joint: rng.gen_range(0.0..3.0),
                    ..Default::default()
                };
                terms.recon.insert(IMAGE.into(), rng.gen_range(0.0..10.0));
                if paired {
                    terms.recon.insert(ATTRIBUTE.into(), rng.gen_range(0.0..10.0));
                    terms.recon_skip.insert(IMAGE.into(), rng.gen_range(0.0..10.0));
                    terms.recon_skip.insert(ATTRIBUTE.into(), rng.gen_range(0.0..10.0));
                    terms.kl_skip.insert(IMAGE.into(), rng.gen_range(0.0..2.0));
                    terms.kl_skip.insert(ATTRIBUTE.into(), rng.gen_range(0.0..2.0));
                } else {
                    terms.l_aud = Some(rng.gen_range(0.0..4.0));
                }
                total_loss(&terms, 0.15, 0.1)
            })
            .collect();
        let mean = mean_of(&reports);
        let expect: f64 = reports.iter().map(|r| r.total).sum::<f64>() / 4.0;
        assert!((mean.total - expect).abs() < 1e-12);
        assert_eq!(mean.total, mean.weighted_sum());
    }
}
