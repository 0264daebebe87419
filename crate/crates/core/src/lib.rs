//! Interactive shadow removal: scribble-driven detection, penumbra
//! unwrapping, multi-scale relighting and color correction, plus the
//! evaluation metrics and parameter learner around them.
//!
//! Image routines are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common choices.

pub mod colorcorrect;
pub mod detect;
pub mod error;
pub mod eval;
pub mod imgcore;
pub mod paramlearn;
pub mod params;
pub mod penumbra;
pub mod pipeline;
pub mod relight;
pub mod scalar;
pub mod synth;

pub use error::{Result, UmbraError};
pub use params::ParamVector;
pub use pipeline::{remove_shadow, Removal, RemovalOptions};
pub use scalar::Scalar;

pub type Image = imgcore::RasterImage<f64>;
pub type ImageF32 = imgcore::RasterImage<f32>;
pub type Scales = imgcore::ScaleField<f64>;
