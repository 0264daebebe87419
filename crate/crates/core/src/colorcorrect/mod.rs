//! Multi-scale variance alignment between the relit shadow and the lit
//! surroundings, followed by scale-weighted blending.

use crate::error::{Result, UmbraError};
use crate::imgcore::{spatial_filter, FilterKind, RasterImage, ScaleField, ShadowMask};
use crate::scalar::Scalar;

pub const DEFAULT_BAND: usize = 8;

/// Number of bilateral scales, coarse to fine.
pub const SCALES: u32 = 3;

pub const RATIO_MIN: f64 = 0.25;
pub const RATIO_MAX: f64 = 4.0;

/// MAD denominators below this leave the channel's ratio at one.
pub const MAD_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct CorrectionRegions {
    /// Lit reference pixels just outside the shadow.
    pub lit: ShadowMask,
    /// Umbra pixels inside the shadow, past the penumbra.
    pub umbra: ShadowMask,
    pub shadow: ShadowMask,
}

impl CorrectionRegions {
    pub fn is_usable(&self) -> bool {
        !self.lit.is_empty() && !self.umbra.is_empty() && !self.shadow.is_empty()
    }
}

/// Rings of width `band` on both sides of the mask boundary, each starting
/// `offset` pixels away from it: a lit ring outside and an umbra ring inside.
pub fn derive_regions(mask: &ShadowMask, band: usize, offset: usize) -> Result<CorrectionRegions> {
    if mask.is_empty() {
        return Err(UmbraError::NoShadow("shadow mask is empty".into()));
    }
    let lit = if band == 0 {
        ShadowMask::new(mask.width(), mask.height())
    } else {
        mask.dilate(offset + band).minus(&mask.dilate(offset))
    };
    let inner = mask.erode(offset);
    let umbra = if band == 0 {
        ShadowMask::new(mask.width(), mask.height())
    } else {
        inner.minus(&inner.erode(band))
    };
    Ok(CorrectionRegions {
        lit,
        umbra,
        shadow: mask.clone(),
    })
}

/// Median absolute deviation from the median. Even counts average the two
/// middle values.
pub fn median_abs_deviation(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let med = median(values.to_vec());
    median(values.iter().map(|v| (v - med).abs()).collect())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Clamped ratio of lit to umbra spread.
pub fn spread_ratio(lit_mad: f64, umbra_mad: f64) -> f64 {
    if umbra_mad < MAD_FLOOR {
        return 1.0;
    }
    (lit_mad / umbra_mad).clamp(RATIO_MIN, RATIO_MAX)
}

#[derive(Clone, Debug)]
pub struct Correction<T> {
    pub image: RasterImage<T>,
    /// `ratios[s][c]` applied at scale `s` (coarse first) to channel `c`.
    pub ratios: Vec<[f64; 3]>,
    /// True when the regions were unusable and the input came back as is.
    pub skipped: bool,
}

pub fn correct_colors<T: Scalar>(
    relit: &RasterImage<T>,
    regions: &CorrectionRegions,
    range_sigma: f64,
) -> Result<Correction<T>> {
    if !regions.is_usable() {
        return Ok(Correction {
            image: relit.clone(),
            ratios: Vec::new(),
            skipped: true,
        });
    }
    let beta = relit.width().max(relit.height()) as f64;
    let mut current = relit.clone();
    let mut ratios = Vec::new();
    for s in 1..=SCALES {
        let low = spatial_filter(
            &current,
            FilterKind::Bilateral {
                sigma_space: beta / f64::from(1u32 << (s + 1)),
                sigma_range: range_sigma,
            },
        )?;
        let high =
            |x: usize, y: usize, c: usize| relit.get(x, y, c).as_f64() - low.get(x, y, c).as_f64();
        let mut scale_ratios = [1.0; 3];
        for (c, ratio) in scale_ratios.iter_mut().enumerate() {
            let lit: Vec<f64> = regions.lit.iter_set().map(|(x, y)| high(x, y, c)).collect();
            let umbra: Vec<f64> = regions
                .umbra
                .iter_set()
                .map(|(x, y)| high(x, y, c))
                .collect();
            *ratio = spread_ratio(median_abs_deviation(&lit), median_abs_deviation(&umbra));
        }
        let mut next = relit.clone();
        for (x, y) in regions.shadow.iter_set() {
            for c in 0..3 {
                let v = low.get(x, y, c).as_f64() + scale_ratios[c] * high(x, y, c);
                next.set(x, y, c, T::of(v.clamp(0.0, 1.0)));
            }
        }
        current = next;
        ratios.push(scale_ratios);
    }
    Ok(Correction {
        image: current,
        ratios,
        skipped: false,
    })
}

/// Per-channel blending weights: each 8-connected region of scales below one
/// is min-max normalized so that its darkest scale maps to 0 and a lit
/// scale to 1.
pub fn blend_weights<T: Scalar>(scales: &ScaleField<T>) -> RasterImage<f64> {
    let (w, h) = (scales.width(), scales.height());
    let mut out = RasterImage::filled(w, h, 3, 1.0);
    for c in 0..3 {
        let shaded = ShadowMask::from_fn(w, h, |x, y| scales.get(x, y, c) < T::one());
        let (labels, count) = shaded.components();
        let mut lows = vec![f64::INFINITY; count + 1];
        for (i, &l) in labels.iter().enumerate() {
            if l > 0 {
                let v = scales.get(i % w, i / w, c).as_f64();
                lows[l as usize] = lows[l as usize].min(v);
            }
        }
        for (i, &l) in labels.iter().enumerate() {
            if l == 0 {
                continue;
            }
            let lo = lows[l as usize];
            let span = 1.0 - lo;
            let v = scales.get(i % w, i / w, c).as_f64();
            let t = if span > 1e-12 { (v - lo) / span } else { 1.0 };
            out.set(i % w, i / w, c, t);
        }
    }
    out
}

/// Mixes the relit and corrected images with weights `weights` (1 keeps the
/// relit value).
pub fn blend_with<T: Scalar>(
    relit: &RasterImage<T>,
    corrected: &RasterImage<T>,
    weights: &RasterImage<f64>,
) -> Result<RasterImage<T>> {
    if !relit.same_shape(corrected)
        || relit.width() != weights.width()
        || relit.height() != weights.height()
    {
        return Err(UmbraError::InvalidInput(
            "blend inputs differ in size".into(),
        ));
    }
    let mut out = relit.clone();
    for y in 0..relit.height() {
        for x in 0..relit.width() {
            for c in 0..3 {
                let a = weights.get(x, y, c);
                if a == 1.0 {
                    continue;
                }
                let v =
                    relit.get(x, y, c).as_f64() * a + corrected.get(x, y, c).as_f64() * (1.0 - a);
                out.set(x, y, c, T::of(v.clamp(0.0, 1.0)));
            }
        }
    }
    Ok(out)
}

pub fn blend_result<T: Scalar>(
    relit: &RasterImage<T>,
    corrected: &RasterImage<T>,
    scales: &ScaleField<T>,
) -> Result<RasterImage<T>> {
    blend_with(relit, corrected, &blend_weights(scales))
}
