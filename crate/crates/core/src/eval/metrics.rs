use serde::Serialize;

use crate::error::{Result, UmbraError};
use crate::imgcore::{luma, RasterImage, ShadowMask};
use crate::scalar::Scalar;

/// Guard on the ground-truth gray level in ratio images.
pub const GRAY_EPS: f64 = 1e-6;

/// Ground-truth pairs scoring above this are dropped from evaluation.
pub const DEFAULT_GT_THRESHOLD: f64 = 0.05;

/// Gray ratio below which a pixel counts as shadowed when a case ships no
/// mask of its own.
pub const SHADOW_RATIO: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    All,
    Shadow,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScoreRecord {
    pub scope: Scope,
    /// RMSE of the shadow image against ground truth.
    pub e_o: f64,
    /// RMSE of the result against ground truth.
    pub e_n: f64,
    pub e_r: f64,
}

fn check_pair<T: Scalar>(a: &RasterImage<T>, b: &RasterImage<T>) -> Result<()> {
    if !a.same_shape(b) {
        return Err(UmbraError::InvalidPair(format!(
            "{}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )));
    }
    if a.channels() != 3 {
        return Err(UmbraError::InvalidPair(format!(
            "expected RGB, got {} channels",
            a.channels()
        )));
    }
    Ok(())
}

/// Per-pixel gray ratio `gray(shadow) / max(gray(truth), GRAY_EPS)`.
pub fn gray_ratio<T: Scalar>(shadow: &RasterImage<T>, truth: &RasterImage<T>) -> Result<Vec<f64>> {
    check_pair(shadow, truth)?;
    Ok((0..shadow.pixel_count())
        .map(|i| luma(shadow.pixel(i)) / luma(truth.pixel(i)).max(GRAY_EPS))
        .collect())
}

/// Ground-truth quality: mean absolute difference plus standard deviation
/// of the difference, over all channel samples of pixels where the shadow
/// image is at least as bright as the ground truth. Returns infinity when
/// there are no such pixels.
pub fn gt_quality<T: Scalar>(shadow: &RasterImage<T>, truth: &RasterImage<T>) -> Result<f64> {
    let ratio = gray_ratio(shadow, truth)?;
    let mut diffs = Vec::new();
    for (i, r) in ratio.iter().enumerate() {
        if *r >= 1.0 {
            for (s, g) in shadow.pixel(i).iter().zip(truth.pixel(i)) {
                diffs.push(s.as_f64() - g.as_f64());
            }
        }
    }
    if diffs.is_empty() {
        return Ok(f64::INFINITY);
    }
    let n = diffs.len() as f64;
    let mean_abs = diffs.iter().map(|d| d.abs()).sum::<f64>() / n;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
    Ok(mean_abs + var.sqrt())
}

/// Whether a pair with quality `q_d` survives the rejection rule.
pub fn gt_accepted(q_d: f64, threshold: f64) -> bool {
    q_d <= threshold
}

/// Pixels whose gray ratio against the ground truth is below `SHADOW_RATIO`.
pub fn derive_shadow_mask<T: Scalar>(
    shadow: &RasterImage<T>,
    truth: &RasterImage<T>,
) -> Result<ShadowMask> {
    let ratio = gray_ratio(shadow, truth)?;
    Ok(ShadowMask::from_vec(
        shadow.width(),
        shadow.height(),
        ratio.iter().map(|r| *r < SHADOW_RATIO).collect(),
    ))
}

fn pooled_rmse<T: Scalar>(
    a: &RasterImage<T>,
    b: &RasterImage<T>,
    mask: Option<&ShadowMask>,
) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for i in 0..a.pixel_count() {
        if let Some(m) = mask {
            if !m.data()[i] {
                continue;
            }
        }
        for (x, y) in a.pixel(i).iter().zip(b.pixel(i)) {
            let d = x.as_f64() - y.as_f64();
            sum += d * d;
        }
        n += a.channels();
    }
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

/// Error ratio of a removal result: RMSE(result, truth) / RMSE(shadow,
/// truth), pooled over channels, over all pixels or over `mask`.
pub fn error_ratio<T: Scalar>(
    truth: &RasterImage<T>,
    shadow: &RasterImage<T>,
    result: &RasterImage<T>,
    mask: &ShadowMask,
    scope: Scope,
) -> Result<ScoreRecord> {
    check_pair(truth, shadow)?;
    check_pair(truth, result)?;
    let mask = match scope {
        Scope::All => None,
        Scope::Shadow => {
            if mask.width() != truth.width() || mask.height() != truth.height() {
                return Err(UmbraError::InvalidPair(
                    "mask dimensions differ from the images".into(),
                ));
            }
            if mask.is_empty() {
                return Err(UmbraError::InvalidInput(
                    "shadow-pixel scope needs a non-empty mask".into(),
                ));
            }
            Some(mask)
        }
    };
    let e_o = pooled_rmse(shadow, truth, mask);
    if e_o == 0.0 {
        return Err(UmbraError::ShadowFree);
    }
    let e_n = pooled_rmse(result, truth, mask);
    Ok(ScoreRecord {
        scope,
        e_o,
        e_n,
        e_r: e_n / e_o,
    })
}
