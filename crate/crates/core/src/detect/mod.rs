//! Scribble-driven shadow detection and fusion-image construction.

mod fusion;
mod knn;
mod strokes;

pub use fusion::{
    build_fusion_image, simplex_grid, FusionResult, FusionStats, FUSION_EPS, GRID_STEPS,
};
pub use knn::{KnnClassifier, KnnVote, K_NEIGHBORS};
pub use strokes::{Stroke, StrokeLabel, StrokePixels, StrokeSet};

pub(crate) use fusion::build_fusion_from_pixels;

pub use crate::imgcore::ShadowMask;

use crate::error::{Result, UmbraError};
use crate::imgcore::{
    color_convert, odd_size, spatial_filter, ColorSpace, FilterKind, RasterImage,
};
use crate::scalar::Scalar;

/// Shadow components smaller than this fraction of the image are dropped.
pub const MIN_COMPONENT_FRACTION: f64 = 0.0005;

#[derive(Clone, Debug)]
pub struct Detection<T> {
    /// Raw KNN shadow posterior in `[0, 1]`.
    pub posterior: RasterImage<T>,
    /// Posterior after Gaussian smoothing.
    pub smoothed: RasterImage<T>,
    pub mask: ShadowMask,
}

/// Log-RGB features for the classifier.
pub fn knn_features<T: Scalar>(img: &RasterImage<T>) -> Result<RasterImage<T>> {
    color_convert(img, ColorSpace::LogRgb)
}

/// Runs the classifier, smooths the posterior with a Gaussian of size
/// `kernel_size` (rounded up to odd) and `σ = ⌈kernel_size / 2⌉`, and keeps
/// pixels whose smoothed posterior is strictly above one half.
pub fn detect<T: Scalar>(
    img: &RasterImage<T>,
    strokes: &StrokeSet,
    kernel_size: usize,
) -> Result<Detection<T>> {
    let pixels = strokes.rasterize(img.width(), img.height())?;
    detect_from_pixels(img, &pixels, kernel_size)
}

pub(crate) fn detect_from_pixels<T: Scalar>(
    img: &RasterImage<T>,
    pixels: &StrokePixels,
    kernel_size: usize,
) -> Result<Detection<T>> {
    if kernel_size == 0 {
        return Err(UmbraError::InvalidParameter(
            "detection kernel size must be >= 1".into(),
        ));
    }
    let features = knn_features(img)?;
    let classifier = KnnClassifier::train(&features, pixels);
    let posterior = classifier.posterior_image(&features);
    let sigma = (kernel_size as f64 / 2.0).ceil();
    let smoothed = spatial_filter(
        &posterior,
        FilterKind::Gaussian {
            size: odd_size(kernel_size),
            sigma,
        },
    )?;
    let half = T::of(0.5);
    let raw = ShadowMask::from_vec(
        img.width(),
        img.height(),
        smoothed.data().iter().map(|&p| p > half).collect(),
    );
    let min_pixels = (MIN_COMPONENT_FRACTION * img.pixel_count() as f64).ceil() as usize;
    let mask = raw.remove_small_components(min_pixels.max(1));
    Ok(Detection {
        posterior,
        smoothed,
        mask,
    })
}

pub fn detect_mask<T: Scalar>(
    img: &RasterImage<T>,
    strokes: &StrokeSet,
    kernel_size: usize,
) -> Result<ShadowMask> {
    let detection = detect(img, strokes, kernel_size)?;
    if detection.mask.is_empty() {
        return Err(UmbraError::NoShadow(
            "detection produced an empty mask".into(),
        ));
    }
    Ok(detection.mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_tone(w: usize, h: usize) -> RasterImage<f64> {
        RasterImage::from_fn(w, h, 3, |x, _, _| if x < w / 2 { 0.2 } else { 0.8 })
    }

    fn pair(shadow: [f64; 2], lit: [f64; 2], r: f64) -> StrokeSet {
        StrokeSet::new(vec![
            Stroke::new(StrokeLabel::Shadow, r, vec![shadow]),
            Stroke::new(StrokeLabel::Lit, r, vec![lit]),
        ])
    }

    /// Exhaustive KNN: rank every training pixel by (distance, raster index).
    fn brute_posterior(img: &RasterImage<f64>, px: &StrokePixels) -> Vec<f64> {
        let feats = knn_features(img).unwrap();
        let train: Vec<(usize, bool)> = px
            .shadow
            .iter()
            .map(|&i| (i, true))
            .chain(px.lit.iter().map(|&i| (i, false)))
            .collect();
        (0..img.pixel_count())
            .map(|q| {
                let mut ranked: Vec<(f64, usize, bool)> = train
                    .iter()
                    .map(|&(i, s)| {
                        let d: f64 = (0..3)
                            .map(|c| (feats.pixel(q)[c] - feats.pixel(i)[c]).powi(2))
                            .sum();
                        (d, i, s)
                    })
                    .collect();
                ranked.sort_by(|a, b| a.partial_cmp(b).unwrap());
                ranked.iter().take(3).filter(|r| r.2).count() as f64 / 3.0
            })
            .collect()
    }

    #[test]
    fn unanimous_neighbours_classify_shadow() {
        let img = two_tone(20, 10);
        let px = pair([3.0, 5.0], [15.0, 5.0], 2.0)
            .rasterize(20, 10)
            .unwrap();
        let feats = knn_features(&img).unwrap();
        let knn = KnnClassifier::train(&feats, &px);
        let p = feats.pixel(3 * 20 + 4);
        let vote = knn.classify([p[0], p[1], p[2]]);
        assert_eq!(
            vote,
            KnnVote {
                posterior: 1.0,
                shadow: true
            }
        );
    }

    #[test]
    fn two_tone_mask_is_dark_half() {
        let img = two_tone(40, 24);
        let strokes = pair([6.0, 12.0], [30.0, 10.0], 3.0);
        let det = detect(&img, &strokes, 14).unwrap();
        let px = strokes.rasterize(40, 24).unwrap();
        assert_eq!(det.posterior.data(), brute_posterior(&img, &px).as_slice());
        for y in 0..24 {
            for x in 0..40 {
                assert_eq!(det.mask.get(x, y), x < 20, "pixel ({x},{y})");
            }
        }
    }

    #[test]
    fn uniform_image_ties_follow_raster_order() {
        let img = RasterImage::filled(16, 16, 3, 0.5);
        // Lit stroke comes first in raster order, so it wins every tie.
        let strokes = pair([12.0, 12.0], [3.0, 3.0], 2.0);
        let px = strokes.rasterize(16, 16).unwrap();
        let det = detect(&img, &strokes, 3).unwrap();
        let oracle = brute_posterior(&img, &px);
        assert_eq!(det.posterior.data(), oracle.as_slice());
        assert!(oracle.iter().all(|&p| p == 0.0));
        assert!(det.mask.is_empty());
        assert!(matches!(
            detect_mask(&img, &strokes, 3),
            Err(UmbraError::NoShadow(_))
        ));
    }

    #[test]
    fn knn_matches_brute_force_on_noisy_fixture() {
        let img = RasterImage::from_fn(32, 32, 3, |x, y, c| {
            let base = if (x as f64 - 12.0).hypot(y as f64 - 14.0) < 9.0 {
                0.25
            } else {
                0.7
            };
            let n = (((x * 73 + y * 151 + c * 37) % 101) as f64 / 100.0 - 0.5) * 0.2;
            ((base + n) * 255.0).round() / 255.0
        });
        let strokes = StrokeSet::new(vec![
            Stroke::new(StrokeLabel::Shadow, 2.0, vec![[9.0, 12.0], [15.0, 16.0]]),
            Stroke::new(StrokeLabel::Lit, 2.0, vec![[26.0, 3.0], [28.0, 28.0]]),
            Stroke::new(StrokeLabel::Lit, 1.0, vec![[3.0, 29.0]]),
        ]);
        let px = strokes.rasterize(32, 32).unwrap();
        let det = detect(&img, &strokes, 5).unwrap();
        assert_eq!(det.posterior.data(), brute_posterior(&img, &px).as_slice());
    }

    #[test]
    fn stroke_order_does_not_matter() {
        let img = two_tone(30, 20);
        let a = StrokeSet::new(vec![
            Stroke::new(StrokeLabel::Shadow, 2.0, vec![[3.0, 3.0], [8.0, 15.0]]),
            Stroke::new(StrokeLabel::Lit, 2.0, vec![[25.0, 4.0]]),
        ]);
        let b = StrokeSet::new(vec![
            Stroke::new(StrokeLabel::Lit, 2.0, vec![[25.0, 4.0]]),
            Stroke::new(StrokeLabel::Shadow, 2.0, vec![[8.0, 15.0], [3.0, 3.0]]),
        ]);
        assert_eq!(
            detect_mask(&img, &a, 7).unwrap(),
            detect_mask(&img, &b, 7).unwrap()
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn posterior_is_a_probability_and_placement_is_irrelevant(
            sx in 2.0..17.0f64, sy in 2.0..21.0f64, lx in 23.0..37.0f64, ly in 2.0..21.0f64
        ) {
            let img = two_tone(40, 24);
            let det = detect(&img, &pair([sx, sy], [lx, ly], 2.0), 14).unwrap();
            prop_assert!(det.smoothed.data().iter().all(|&p| (0.0..=1.0).contains(&p)));
            prop_assert!(det.posterior.data().iter().all(|&p| (0.0..=1.0).contains(&p)));
            for y in 0..24 {
                for x in 0..40 {
                    prop_assert_eq!(det.mask.get(x, y), x < 20);
                }
            }
        }
    }
}
