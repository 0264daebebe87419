//! Fusion image: the convex combination of YCbCr channels that best
//! separates stroke-marked shadow and lit pixels, then median filtered.

use crate::detect::strokes::{StrokePixels, StrokeSet};
use crate::error::{Result, UmbraError};
use crate::imgcore::{
    color_convert, odd_size, spatial_filter, ColorSpace, FilterKind, RasterImage,
};
use crate::scalar::Scalar;

/// Denominator guard for the fusion objective.
pub const FUSION_EPS: f64 = 1e-6;

/// Simplex grid resolution for the coarse search.
pub const GRID_STEPS: usize = 100;

#[derive(Clone, Debug)]
pub struct FusionResult<T> {
    /// Median-filtered single-channel fusion image.
    pub image: RasterImage<T>,
    /// Fusing factors for (Y, Cb, Cr); non-negative, summing to one.
    pub factors: [f64; 3],
    /// Objective value at `factors`.
    pub objective: f64,
}

/// First and second moments of the stroke pixels' YCbCr values, enough to
/// evaluate the objective for any factors in constant time.
#[derive(Clone, Debug)]
pub struct FusionStats {
    shadow: Moments,
    lit: Moments,
    union: Moments,
}

#[derive(Clone, Debug)]
struct Moments {
    mean: [f64; 3],
    cov: [[f64; 3]; 3],
}

impl Moments {
    fn from_rows(rows: &[[f64; 3]]) -> Self {
        let n = rows.len() as f64;
        let mut mean = [0.0; 3];
        for r in rows {
            for c in 0..3 {
                mean[c] += r[c] / n;
            }
        }
        let mut cov = [[0.0; 3]; 3];
        for r in rows {
            for i in 0..3 {
                for j in 0..3 {
                    cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]) / n;
                }
            }
        }
        Self { mean, cov }
    }

    fn mean_of(&self, a: [f64; 3]) -> f64 {
        (0..3).map(|i| a[i] * self.mean[i]).sum()
    }

    fn std_of(&self, a: [f64; 3]) -> f64 {
        let mut var = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                var += a[i] * a[j] * self.cov[i][j];
            }
        }
        var.max(0.0).sqrt()
    }
}

impl FusionStats {
    pub fn new<T: Scalar>(ycbcr: &RasterImage<T>, pixels: &StrokePixels) -> Self {
        let row = |i: usize| {
            let p = ycbcr.pixel(i);
            [p[0].as_f64(), p[1].as_f64(), p[2].as_f64()]
        };
        let shadow: Vec<[f64; 3]> = pixels.shadow.iter().map(|&i| row(i)).collect();
        let lit: Vec<[f64; 3]> = pixels.lit.iter().map(|&i| row(i)).collect();
        let union: Vec<[f64; 3]> = shadow.iter().chain(&lit).copied().collect();
        Self {
            shadow: Moments::from_rows(&shadow),
            lit: Moments::from_rows(&lit),
            union: Moments::from_rows(&union),
        }
    }

    /// Objective for factors `a`; `None` when the fused stroke values have
    /// no spread at all (the candidate carries no information).
    pub fn objective(&self, a: [f64; 3]) -> Option<f64> {
        let spread = self.union.std_of(a);
        if spread < FUSION_EPS {
            return None;
        }
        let contrast = self.shadow.mean_of(a) / self.lit.mean_of(a).max(FUSION_EPS);
        let compactness = (self.shadow.std_of(a) + self.lit.std_of(a)) / spread;
        Some(contrast + compactness)
    }

    /// Dense simplex grid search followed by a shrinking pattern search
    /// along the simplex edge directions.
    pub fn optimize(&self) -> Result<([f64; 3], f64)> {
        let mut best: Option<([f64; 3], f64)> = None;
        for a in simplex_grid(GRID_STEPS) {
            if let Some(e) = self.objective(a) {
                if best.is_none_or(|(_, b)| e < b) {
                    best = Some((a, e));
                }
            }
        }
        let (mut a, mut e) = best.ok_or(UmbraError::DegenerateFusion)?;
        let mut step = 0.5 / GRID_STEPS as f64;
        while step > 1e-7 {
            let mut improved = false;
            for i in 0..3 {
                for j in 0..3 {
                    if i == j || a[j] <= 0.0 {
                        continue;
                    }
                    let s = step.min(a[j]);
                    let mut cand = a;
                    cand[i] += s;
                    cand[j] -= s;
                    if let Some(ce) = self.objective(cand) {
                        if ce < e {
                            a = cand;
                            e = ce;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        let sum: f64 = a.iter().sum();
        let a = [a[0] / sum, a[1] / sum, a[2] / sum];
        match self.objective(a) {
            Some(final_e) if final_e <= e => Ok((a, final_e)),
            _ => Ok((a, e)),
        }
    }
}

/// All factor vectors on the simplex with coordinates in multiples of
/// `1/steps`.
pub fn simplex_grid(steps: usize) -> impl Iterator<Item = [f64; 3]> {
    (0..=steps).flat_map(move |i| {
        (0..=steps - i).map(move |j| {
            let k = steps - i - j;
            [
                i as f64 / steps as f64,
                j as f64 / steps as f64,
                k as f64 / steps as f64,
            ]
        })
    })
}

pub fn build_fusion_image<T: Scalar>(
    img: &RasterImage<T>,
    strokes: &StrokeSet,
    median_window: usize,
) -> Result<FusionResult<T>> {
    let pixels = strokes.rasterize(img.width(), img.height())?;
    build_fusion_from_pixels(img, &pixels, median_window)
}

pub(crate) fn build_fusion_from_pixels<T: Scalar>(
    img: &RasterImage<T>,
    pixels: &StrokePixels,
    median_window: usize,
) -> Result<FusionResult<T>> {
    let ycbcr = color_convert(img, ColorSpace::YCbCr)?;
    let stats = FusionStats::new(&ycbcr, pixels);
    let (factors, objective) = stats.optimize()?;
    let weights = factors.map(T::of);
    let fused: Vec<T> = (0..ycbcr.pixel_count())
        .map(|i| {
            let p = ycbcr.pixel(i);
            weights[0] * p[0] + weights[1] * p[1] + weights[2] * p[2]
        })
        .collect();
    let fused = RasterImage::from_vec(img.width(), img.height(), 1, fused)?;
    let image = spatial_filter(
        &fused,
        FilterKind::Median {
            size: odd_size(median_window.max(1)),
        },
    )?;
    Ok(FusionResult {
        image,
        factors,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::strokes::{Stroke, StrokeLabel};
    use crate::imgcore::ycbcr_to_rgb;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// RGB image whose luma is 0.2 on the left half and 0.8 on the right,
    /// with independent chroma noise.
    fn luma_split(seed: u64) -> RasterImage<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, h) = (40, 20);
        let mut data = Vec::new();
        for _ in 0..h {
            for x in 0..w {
                let y = if x < w / 2 { 0.2 } else { 0.8 };
                let cb = 0.5 + 0.08 * (rng.random::<f64>() - 0.5);
                let cr = 0.5 + 0.08 * (rng.random::<f64>() - 0.5);
                data.extend(ycbcr_to_rgb([y, cb, cr]).map(|v| v.clamp(0.0, 1.0)));
            }
        }
        RasterImage::from_vec(w, h, 3, data).unwrap()
    }

    fn strokes() -> StrokeSet {
        StrokeSet::new(vec![
            Stroke::new(StrokeLabel::Shadow, 3.0, vec![[4.0, 4.0], [14.0, 15.0]]),
            Stroke::new(StrokeLabel::Lit, 3.0, vec![[26.0, 4.0], [35.0, 15.0]]),
        ])
    }

    /// Direct evaluation over the fused stroke pixel values.
    fn direct_objective(img: &RasterImage<f64>, px: &StrokePixels, a: [f64; 3]) -> Option<f64> {
        let ycc = color_convert(img, ColorSpace::YCbCr).unwrap();
        let fuse = |i: usize| (0..3).map(|c| a[c] * ycc.pixel(i)[c]).sum::<f64>();
        let stats = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let s = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
            (m, s)
        };
        let s: Vec<f64> = px.shadow.iter().map(|&i| fuse(i)).collect();
        let l: Vec<f64> = px.lit.iter().map(|&i| fuse(i)).collect();
        let u: Vec<f64> = s.iter().chain(&l).copied().collect();
        let ((ms, ss), (ml, sl), (_, su)) = (stats(&s), stats(&l), stats(&u));
        if su < FUSION_EPS {
            return None;
        }
        Some(ms / ml.max(FUSION_EPS) + (ss + sl) / su)
    }

    #[test]
    fn luma_dominates_when_it_separates_strokes() {
        let img = luma_split(1);
        let fusion = build_fusion_image(&img, &strokes(), 3).unwrap();
        let a = fusion.factors;
        assert!(a[0] > a[1] && a[0] > a[2], "factors {a:?}");
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(a.iter().all(|&v| v >= 0.0));
        let px = strokes().rasterize(40, 20).unwrap();
        let uniform = direct_objective(&img, &px, [1.0 / 3.0; 3]).unwrap();
        assert!(fusion.objective <= uniform);
    }

    #[test]
    fn moment_objective_matches_direct_formula() {
        let img = luma_split(2);
        let px = strokes().rasterize(40, 20).unwrap();
        let stats = FusionStats::new(&color_convert(&img, ColorSpace::YCbCr).unwrap(), &px);
        for a in [[1.0, 0.0, 0.0], [0.2, 0.5, 0.3], [1.0 / 3.0; 3]] {
            let fast = stats.objective(a).unwrap();
            let slow = direct_objective(&img, &px, a).unwrap();
            assert!((fast - slow).abs() < 1e-9, "{a:?}: {fast} vs {slow}");
        }
    }

    #[test]
    fn returned_factors_beat_every_grid_candidate() {
        for seed in 0..3 {
            let img = luma_split(seed + 10);
            let px = strokes().rasterize(40, 20).unwrap();
            let fusion = build_fusion_image(&img, &strokes(), 3).unwrap();
            let returned = direct_objective(&img, &px, fusion.factors).unwrap();
            for a in simplex_grid(GRID_STEPS) {
                if let Some(e) = direct_objective(&img, &px, a) {
                    assert!(returned <= e + 1e-12, "grid {a:?} gives {e} < {returned}");
                }
            }
        }
    }

    #[test]
    fn black_shadow_zeroes_contrast_term() {
        // Shadow strokes on pure black: Y = 0 there, so the contrast term
        // vanishes for luma-only fusion.
        let img = RasterImage::from_fn(20, 10, 3, |x, y, _| {
            if x < 10 {
                0.0
            } else {
                0.6 + 0.01 * (y % 3) as f64
            }
        });
        let strokes = StrokeSet::new(vec![
            Stroke::new(StrokeLabel::Shadow, 2.0, vec![[4.0, 5.0]]),
            Stroke::new(StrokeLabel::Lit, 2.0, vec![[15.0, 5.0]]),
        ]);
        let px = strokes.rasterize(20, 10).unwrap();
        let stats = FusionStats::new(&color_convert(&img, ColorSpace::YCbCr).unwrap(), &px);
        let e = stats.objective([1.0, 0.0, 0.0]).unwrap();
        let compact = direct_objective(&img, &px, [1.0, 0.0, 0.0]).unwrap();
        assert!((e - compact).abs() < 1e-12);
        let ycc = color_convert(&img, ColorSpace::YCbCr).unwrap();
        assert!(px.shadow.iter().all(|&i| ycc.pixel(i)[0] == 0.0));
        let fusion = build_fusion_image(&img, &strokes, 3).unwrap();
        assert!(fusion.objective <= e);
    }

    #[test]
    fn flat_strokes_are_degenerate() {
        let img = RasterImage::filled(10, 10, 3, 0.5);
        let strokes = StrokeSet::new(vec![
            Stroke::new(StrokeLabel::Shadow, 1.0, vec![[2.0, 2.0]]),
            Stroke::new(StrokeLabel::Lit, 1.0, vec![[7.0, 7.0]]),
        ]);
        assert!(matches!(
            build_fusion_image(&img, &strokes, 3),
            Err(UmbraError::DegenerateFusion)
        ));
    }
}
