//! The trainable architecture: two modality VAEs sharing a latent space,
//! joined by product-of-experts fusion, plus the pseudo-attribute decoder
//! and the pairedness indicator head.
//!
//! The image encoder and decoder are single parameter objects shared by
//! the paired path and the auxiliary-unlabeled path; skip reconstructions
//! reuse the same modality decoders as the joint path.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::nn::{Activation, Mlp};
use crate::poe::GaussianExpert;

mod backward;
mod checkpoint;
mod forward;
mod train;

pub use backward::{backward, ModelGradients};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use forward::{forward, forward_aud, forward_paired, AudNoise, ForwardTrace, PairedNoise, PathOptions, SampleNoise};
pub use train::{init_thread_pool, train, train_epoch, ModelOptimizer, TrainSettings};

/// How the modality posteriors combine into a joint latent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FusionMode {
    /// Precision-weighted product of experts, prior included.
    Poe,
    /// Elementwise product of the per-modality latent samples.
    LatentProduct,
}

/// Dimensions for one modality's encoder/decoder pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalityConfig {
    pub name: String,
    pub feature_dim: usize,
    pub encoder_hidden: usize,
    pub decoder_hidden: usize,
}

impl ModalityConfig {
    pub fn new(name: &str, feature_dim: usize) -> ModalityConfig {
        ModalityConfig { name: name.into(), feature_dim, encoder_hidden: 1400, decoder_hidden: 550 }
    }
}

/// Full architecture description. Defaults: 1400/550 encoder/decoder
/// hidden units, 200 for the pseudo-attribute decoder, 64 for the
/// indicator head, latent dimension 128, POE fusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub image: ModalityConfig,
    pub attribute: ModalityConfig,
    pub latent_dim: usize,
    pub pseudo_decoder_hidden: usize,
    pub indicator_hidden: usize,
    pub fusion: FusionMode,
}

impl ModelConfig {
    pub fn new(feature_dim: usize, attr_dim: usize) -> ModelConfig {
        ModelConfig {
            image: ModalityConfig::new(crate::objective::IMAGE, feature_dim),
            attribute: ModalityConfig::new(crate::objective::ATTRIBUTE, attr_dim),
            latent_dim: 128,
            pseudo_decoder_hidden: 200,
            indicator_hidden: 64,
            fusion: FusionMode::Poe,
        }
    }
}

/// Which encoder to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modality {
    Image,
    Attribute,
}

/// Every learnable weight in the model.
///
/// There is exactly one image encoder/decoder parameter set; paired and
/// auxiliary-unlabeled samples alias it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub image_encoder: Mlp,
    pub image_decoder: Mlp,
    pub attribute_encoder: Mlp,
    pub attribute_decoder: Mlp,
    pub pseudo_decoder: Mlp,
    pub indicator_head: Mlp,
    pub latent_dim: usize,
    pub fusion: FusionMode,
}

impl ModelParams {
    /// Xavier-initializes all six networks from one rng, in a fixed order.
    pub fn init(config: &ModelConfig, rng: &mut impl Rng) -> ModelParams {
        let l = config.latent_dim;
        assert!(l > 0, "latent_dim must be positive");
        let image_encoder = Mlp::new(
            &[config.image.feature_dim, config.image.encoder_hidden, 2 * l],
            Activation::Relu,
            Activation::Identity,
            rng,
        );
        let image_decoder = Mlp::new(
            &[l, config.image.decoder_hidden, config.image.feature_dim],
            Activation::Relu,
            Activation::Identity,
            rng,
        );
        let attribute_encoder = Mlp::new(
            &[config.attribute.feature_dim, config.attribute.encoder_hidden, 2 * l],
            Activation::Relu,
            Activation::Identity,
            rng,
        );
        let attribute_decoder = Mlp::new(
            &[l, config.attribute.decoder_hidden, config.attribute.feature_dim],
            Activation::Relu,
            Activation::Identity,
            rng,
        );
        let pseudo_decoder = Mlp::new(
            &[l, config.pseudo_decoder_hidden, config.attribute.feature_dim],
            Activation::Relu,
            Activation::Identity,
            rng,
        );
        let indicator_head = Mlp::new(
            &[l, config.indicator_hidden, 1],
            Activation::Relu,
            Activation::Sigmoid,
            rng,
        );
        ModelParams {
            image_encoder,
            image_decoder,
            attribute_encoder,
            attribute_decoder,
            pseudo_decoder,
            indicator_head,
            latent_dim: l,
            fusion: config.fusion,
        }
    }

    /// Stable (name, network) listing used by checkpoints and the
    /// optimizer.
    pub fn nets(&self) -> [(&'static str, &Mlp); 6] {
        [
            ("image_encoder", &self.image_encoder),
            ("image_decoder", &self.image_decoder),
            ("attribute_encoder", &self.attribute_encoder),
            ("attribute_decoder", &self.attribute_decoder),
            ("pseudo_decoder", &self.pseudo_decoder),
            ("indicator_head", &self.indicator_head),
        ]
    }

    pub fn nets_mut(&mut self) -> [(&'static str, &mut Mlp); 6] {
        [
            ("image_encoder", &mut self.image_encoder),
            ("image_decoder", &mut self.image_decoder),
            ("attribute_encoder", &mut self.attribute_encoder),
            ("attribute_decoder", &mut self.attribute_decoder),
            ("pseudo_decoder", &mut self.pseudo_decoder),
            ("indicator_head", &mut self.indicator_head),
        ]
    }

    pub fn all_finite(&self) -> bool {
        self.nets().iter().all(|(_, n)| n.all_finite())
    }
}

/// Runs a modality encoder and splits its output into an expert:
/// first half mean, second half log-variance.
pub fn encode(params: &ModelParams, modality: Modality, feature: &[f64]) -> GaussianExpert {
    let net = match modality {
        Modality::Image => &params.image_encoder,
        Modality::Attribute => &params.attribute_encoder,
    };
    let out = net.forward(feature);
    split_expert(&out, params.latent_dim)
}

pub(crate) fn split_expert(encoder_out: &[f64], latent_dim: usize) -> GaussianExpert {
    assert_eq!(encoder_out.len(), 2 * latent_dim, "encoder output must be 2×latent_dim");
    GaussianExpert::new(encoder_out[..latent_dim].to_vec(), encoder_out[latent_dim..].to_vec())
}

#[cfg(test)]
pub(crate) fn toy_config(feature_dim: usize, attr_dim: usize, latent_dim: usize) -> ModelConfig {
    let mut config = ModelConfig::new(feature_dim, attr_dim);
    config.latent_dim = latent_dim;
    config.image.encoder_hidden = 5;
    config.image.decoder_hidden = 4;
    config.attribute.encoder_hidden = 5;
    config.attribute.decoder_hidden = 4;
    config.pseudo_decoder_hidden = 4;
    config.indicator_hidden = 3;
    config
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn encode_splits_mean_and_log_var() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let params = ModelParams::init(&toy_config(3, 2, 2), &mut rng);
        let x = [0.4, -0.2, 0.8];
        let expert = encode(&params, Modality::Image, &x);
        let raw = params.image_encoder.forward(&x);
        assert_eq!(expert.mean, raw[..2].to_vec());
        assert_eq!(expert.log_var, raw[2..].to_vec());
    }

    #[test]
    fn zeroed_final_encoder_layer_gives_standard_expert() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut params = ModelParams::init(&toy_config(3, 2, 2), &mut rng);
        let mut flat = params.image_encoder.params_flat();
        let last = params.image_encoder.layers().last().unwrap();
        let tail = last.param_count();
        let n = flat.len();
        flat[n - tail..].iter_mut().for_each(|v| *v = 0.0);
        params.image_encoder.set_params_flat(&flat);
        let expert = encode(&params, Modality::Image, &[1.0, 2.0, 3.0]);
        assert_eq!(expert, GaussianExpert::standard(2));
    }

    #[test]
    fn encode_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let params = ModelParams::init(&toy_config(3, 2, 2), &mut rng);
        let a = encode(&params, Modality::Attribute, &[0.5, -0.5]);
        let b = encode(&params, Modality::Attribute, &[0.5, -0.5]);
        assert_eq!(a, b);
    }

    #[test]
    fn init_is_seed_deterministic() {
        let config = toy_config(4, 3, 2);
        let a = ModelParams::init(&config, &mut ChaCha8Rng::seed_from_u64(9));
        let b = ModelParams::init(&config, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn default_dims_follow_the_reference_architecture() {
        let config = ModelConfig::new(2048, 312);
        assert_eq!(config.latent_dim, 128);
        assert_eq!(config.image.encoder_hidden, 1400);
        assert_eq!(config.image.decoder_hidden, 550);
        assert_eq!(config.pseudo_decoder_hidden, 200);
        assert_eq!(config.indicator_hidden, 64);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let params = ModelParams::init(&config, &mut rng);
        assert_eq!(params.image_encoder.out_dim(), 256);
        assert_eq!(params.indicator_head.out_dim(), 1);
        assert_eq!(params.pseudo_decoder.out_dim(), 312);
    }
}
