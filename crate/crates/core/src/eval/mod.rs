//! Ground-truth gating, error ratios and per-attribute reports over a
//! directory-per-case dataset.

mod dataset;
mod metrics;
mod report;

pub use dataset::{
    load_dataset, Dataset, DatasetCase, Labels, SkippedCase, ATTRIBUTES, LABELS_FILE, MASK_FILE,
    SHADOW_FILE, STROKES_FILE, TRUTH_FILE,
};
pub use metrics::{
    derive_shadow_mask, error_ratio, gray_ratio, gt_accepted, gt_quality, Scope, ScoreRecord,
    DEFAULT_GT_THRESHOLD, GRAY_EPS, SHADOW_RATIO,
};
pub use report::{
    attribute_report, in_cell, in_other, AttributeReport, CaseScore, ReportRow, CSV_HEADER, STRONG,
};

use crate::error::Result;
use crate::imgcore::{RasterImage, ShadowMask};

/// Scores `result` for one case on both scopes. The shadow scope is left
/// out when `mask` is empty.
pub fn score_case(
    case: &DatasetCase,
    shadow: &RasterImage<f64>,
    truth: &RasterImage<f64>,
    result: &RasterImage<f64>,
    mask: &ShadowMask,
) -> Result<CaseScore> {
    let all = error_ratio(truth, shadow, result, mask, Scope::All)?;
    let shadow_scope = if mask.is_empty() {
        None
    } else {
        Some(error_ratio(truth, shadow, result, mask, Scope::Shadow)?)
    };
    Ok(CaseScore {
        id: case.id.clone(),
        labels: case.labels,
        all,
        shadow: shadow_scope,
    })
}
