//! Dense feed-forward networks with hand-derived gradients.
//!
//! Everything is plain `f64` on the heap: a [`DenseLayer`] is a row-major
//! weight matrix plus bias and activation, an [`Mlp`] is a chain of layers,
//! and [`AdamState`] applies bias-corrected Adam updates. Backward passes
//! are exact analytic gradients, verified against the central-difference
//! checker in [`gradcheck`].

mod activation;
mod adam;
mod gradcheck;
mod layer;
mod mlp;

pub use activation::Activation;
pub use adam::AdamState;
pub use gradcheck::{finite_diff_check, finite_difference_gradient, GradCheckReport};
pub use layer::{DenseLayer, LayerGradient};
pub use mlp::{GradientBundle, Mlp, MlpTrace};
