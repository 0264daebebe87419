//! Boundary-perpendicular sampling, outlier rejection, strip assembly and
//! per-column alignment.

mod align;
mod boundary;
mod cluster;
mod outliers;
mod sampling;
mod strip;

pub use align::{
    align_strip, alignment_error, gamma, gamma_inverse, gamma_inverse_source, gamma_source,
    reference_profile, relative_column, solve_alignment, ALIGN_TOLERANCE,
};
pub use boundary::{extract_boundary, BoundaryPoint, MIN_PERIMETER};
pub use cluster::{dbscan, mean_shift};
pub use outliers::{
    filter_features, filter_outliers, to_spherical, OutlierReport, ScaleFeature, DBSCAN_MIN_PTS,
    SUBGROUP_KEEP_FRACTION,
};
pub use sampling::{grow_sampling_line, GrowthLimits, SamplingLine, MIN_PROFILE_LEN};
pub use strip::{build_strip, PenumbraStrip};
