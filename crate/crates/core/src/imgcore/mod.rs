//! Image containers, color conversion, filters, gradients, harmonic
//! inpainting and 1-D resampling.

mod color;
mod filter;
mod gradient;
mod inpaint;
pub mod io;
mod mask;
mod raster;
mod resample;

pub(crate) use color::luma;
pub use color::{
    color_convert, linear_from_log, log_intensity, rgb_to_ycbcr, ycbcr_to_rgb, ColorSpace, LOG_EPS,
};
pub use filter::{gaussian_kernel, odd_size, spatial_filter, FilterKind};
pub use gradient::gradient_field;
pub use inpaint::{inpaint_field, MIN_SCALE, RESIDUAL_TOLERANCE};
pub use mask::ShadowMask;
pub use raster::{RasterImage, ScaleField, VectorField};
pub use resample::{interp_at, resample_column};
