//! End-to-end removal: detection, unwrapping, relighting and color
//! correction.

use crate::colorcorrect::{blend_result, correct_colors, derive_regions, Correction, DEFAULT_BAND};
use crate::detect::{
    build_fusion_from_pixels, detect_from_pixels, Detection, FusionResult, StrokeSet,
};
use crate::error::{Result, UmbraError};
use crate::imgcore::{gradient_field, RasterImage, ScaleField, VectorField};
use crate::params::ParamVector;
use crate::penumbra::{
    align_strip, build_strip, extract_boundary, filter_outliers, grow_sampling_line, BoundaryPoint,
    GrowthLimits, OutlierReport, PenumbraStrip, SamplingLine,
};
use crate::relight::{
    build_pyramid, densify_and_remove, scatter_scales, select_scales, ScaleSelection, SparseScales,
};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug)]
pub struct RemovalOptions {
    pub color_correct: bool,
    /// Contour pixels between consecutive sampling lines.
    pub spacing: usize,
    /// Width of the lit and umbra rings used for color statistics.
    pub band: usize,
    pub limits: GrowthLimits,
}

impl Default for RemovalOptions {
    fn default() -> Self {
        Self {
            color_correct: true,
            spacing: 2,
            band: DEFAULT_BAND,
            limits: GrowthLimits::default(),
        }
    }
}

/// Per-component intermediates.
#[derive(Clone, Debug)]
pub struct ComponentTrace<T> {
    pub component: u32,
    /// Oriented lines that entered outlier filtering.
    pub lines: Vec<SamplingLine<T>>,
    pub outliers: OutlierReport,
    pub strip: PenumbraStrip<T>,
    pub aligned: PenumbraStrip<T>,
    pub selection: ScaleSelection,
}

#[derive(Clone, Debug)]
pub struct Removal<T> {
    pub detection: Detection<T>,
    pub fusion: FusionResult<T>,
    pub boundary: Vec<BoundaryPoint>,
    pub components: Vec<ComponentTrace<T>>,
    pub sparse: SparseScales<T>,
    pub dense: ScaleField<T>,
    /// Image divided by the dense scales.
    pub relit: RasterImage<T>,
    pub correction: Option<Correction<T>>,
    pub result: RasterImage<T>,
}

impl<T: Scalar> Removal<T> {
    /// Component strips side by side, padded to the tallest with black.
    pub fn strip_image(&self, aligned: bool) -> RasterImage<T> {
        let strips: Vec<RasterImage<T>> = self
            .components
            .iter()
            .map(|c| {
                if aligned {
                    c.aligned.to_image()
                } else {
                    c.strip.to_image()
                }
            })
            .collect();
        concat_columns(&strips)
    }

    /// Fusion image stretched to `[0, 1]`.
    /// Scattered scales with unknown pixels at zero.
    pub fn sparse_image(&self) -> RasterImage<T> {
        let field = self.sparse.field.as_image();
        RasterImage::from_fn(field.width(), field.height(), 3, |x, y, c| {
            if self.sparse.known.get(x, y) {
                field.get(x, y, c)
            } else {
                T::zero()
            }
        })
    }

    pub fn fusion_image(&self) -> RasterImage<T> {
        let data = self.fusion.image.data();
        let lo = data.iter().copied().fold(T::infinity(), T::min);
        let hi = data.iter().copied().fold(T::neg_infinity(), T::max);
        let span = hi - lo;
        if span > T::zero() {
            self.fusion.image.map(|v| (v - lo) / span)
        } else {
            self.fusion.image.map(|_| T::zero())
        }
    }
}

fn concat_columns<T: Scalar>(parts: &[RasterImage<T>]) -> RasterImage<T> {
    let width: usize = parts.iter().map(|p| p.width()).sum::<usize>().max(1);
    let height = parts.iter().map(|p| p.height()).max().unwrap_or(1);
    let mut out = RasterImage::new(width, height, 3);
    let mut x0 = 0;
    for p in parts {
        for y in 0..p.height() {
            for x in 0..p.width() {
                for c in 0..3 {
                    out.set(x0 + x, y, c, p.get(x, y, c));
                }
            }
        }
        x0 += p.width();
    }
    out
}

/// Runs the whole pipeline on `img` (linear RGB in `[0, 1]`).
pub fn remove_shadow<T: Scalar>(
    img: &RasterImage<T>,
    strokes: &StrokeSet,
    params: &ParamVector,
    options: &RemovalOptions,
) -> Result<Removal<T>> {
    params.validate()?;
    if img.channels() != 3 {
        return Err(UmbraError::InvalidInput(format!(
            "expected an RGB image, got {} channels",
            img.channels()
        )));
    }
    let pixels = strokes.rasterize(img.width(), img.height())?;
    let detection = detect_from_pixels(img, &pixels, params.h1)?;
    if detection.mask.is_empty() {
        return Err(UmbraError::NoShadow(
            "detection produced an empty mask".into(),
        ));
    }
    let fusion = build_fusion_from_pixels(img, &pixels, params.h2)?;
    let gradient = gradient_field(&fusion.image)?;
    let boundary = extract_boundary(&detection.mask, options.spacing)?;

    let (w, h) = (img.width(), img.height());
    let mut sparse = SparseScales::new(w, h);
    let mut components = Vec::new();
    let mut half_lengths = Vec::new();
    let mut last_error = None;
    let mut start = 0;
    while start < boundary.len() {
        let label = boundary[start].component;
        let end = boundary[start..]
            .iter()
            .position(|b| b.component != label)
            .map_or(boundary.len(), |k| start + k);
        match unwrap_component(&boundary[start..end], &gradient, img, params, options) {
            Ok((trace, kept)) => {
                scatter_scales(&mut sparse, &trace.selection.scales, &trace.aligned, &kept)?;
                half_lengths.extend(kept.iter().map(|l| l.half_length()));
                components.push(trace);
            }
            Err(e @ (UmbraError::NoValidSamples(_) | UmbraError::DegenerateSample { .. })) => {
                last_error = Some(e)
            }
            Err(e) => return Err(e),
        }
        start = end;
    }
    if components.is_empty() {
        return Err(last_error.unwrap_or(UmbraError::NoScales));
    }
    // The dense field spans the typical line extent past the mask; the
    // umbra ring for color correction clears the longest one.
    half_lengths.sort_by(f64::total_cmp);
    let typical = half_lengths[half_lengths.len() / 2].ceil() as usize + 1;
    let reach = half_lengths[half_lengths.len() - 1].ceil() as usize + 1;
    let (dense, relit) = densify_and_remove(img, &sparse, &detection.mask, typical)?;

    let (correction, result) = if options.color_correct {
        let regions = derive_regions(&detection.mask, options.band, reach)?;
        let correction = correct_colors(&relit, &regions, params.h6)?;
        let result = if correction.skipped {
            relit.clone()
        } else {
            blend_result(&relit, &correction.image, &dense)?
        };
        (Some(correction), result)
    } else {
        (None, relit.clone())
    };

    Ok(Removal {
        detection,
        fusion,
        boundary,
        components,
        sparse,
        dense,
        relit,
        correction,
        result,
    })
}

/// Grows, orients and filters the lines of one component, then builds and
/// aligns its strip and selects scales. Returns the trace and the kept
/// lines in strip order.
fn unwrap_component<T: Scalar>(
    points: &[BoundaryPoint],
    gradient: &VectorField<T>,
    img: &RasterImage<T>,
    params: &ParamVector,
    options: &RemovalOptions,
) -> Result<(ComponentTrace<T>, Vec<SamplingLine<T>>)> {
    let component = points[0].component;
    let mut grown = Vec::new();
    for b in points {
        let p = [b.x as f64, b.y as f64];
        match grow_sampling_line(p, gradient, img, params.h5, options.limits) {
            Ok(line) => {
                let along = line.direction[0] * b.normal[0] + line.direction[1] * b.normal[1];
                grown.push((line, along));
            }
            Err(UmbraError::DegenerateSample { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    // Lines must run from shadow to lit. The fusion image is usually darker
    // in shadow, but not always, so the majority orientation decides.
    let sign: f64 = grown.iter().map(|(_, a)| a.signum()).sum();
    let lines: Vec<SamplingLine<T>> = grown
        .into_iter()
        .filter(|(_, a)| a * sign > 0.0)
        .map(|(l, _)| if sign < 0.0 { reverse_line(l) } else { l })
        .collect();
    let outliers = filter_outliers(&lines, params.h3, params.h4)?;
    let kept: Vec<SamplingLine<T>> = outliers.kept.iter().map(|&i| lines[i].clone()).collect();
    let strip = build_strip(&kept)?;
    let aligned = align_strip(&strip);
    let selection = select_scales(&build_pyramid(&aligned));
    Ok((
        ComponentTrace {
            component,
            lines,
            outliers,
            strip,
            aligned,
            selection,
        },
        kept,
    ))
}

fn reverse_line<T: Scalar>(mut line: SamplingLine<T>) -> SamplingLine<T> {
    std::mem::swap(&mut line.start, &mut line.end);
    line.direction = [-line.direction[0], -line.direction[1]];
    line.profile.reverse();
    line
}
