//! Scale estimation from an aligned strip, scattering back to the image,
//! densification and inverse scaling.

mod pyramid;
mod scatter;

pub use pyramid::{
    average_columns, build_pyramid, choose_layer, column_roughness, column_scales, select_scales,
    ScalePyramid, ScaleSelection, LAYER_EXPONENTS, MIN_PYRAMID_COLUMNS,
};
pub use scatter::{
    densify, densify_and_remove, remove_shadow, scatter_scales, unalign_column, SparseScales,
};
