use crate::error::{Result, UmbraError};
use crate::imgcore::{
    inpaint_field, interp_at, resample_column, RasterImage, ScaleField, ShadowMask,
};
use crate::penumbra::{gamma_inverse, PenumbraStrip, SamplingLine};
use crate::scalar::Scalar;

/// Scales known at scattered pixels.
#[derive(Clone, Debug)]
pub struct SparseScales<T> {
    pub field: ScaleField<T>,
    pub known: ShadowMask,
}

impl<T: Scalar> SparseScales<T> {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            field: ScaleField::ones(width, height),
            known: ShadowMask::new(width, height),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.known.is_empty()
    }
}

/// Maps a column of aligned scales back to its sampling line's own
/// registration and length.
pub fn unalign_column(
    scales: &[[f64; 3]],
    a_s: f64,
    a_k: f64,
    length: usize,
) -> Result<Vec<[f64; 3]>> {
    let mut planes = Vec::with_capacity(3);
    for ch in 0..3 {
        let values: Vec<f64> = scales.iter().map(|p| p[ch]).collect();
        let restored = gamma_inverse(&values, a_s, a_k);
        planes.push(resample_column(&restored, length)?);
    }
    Ok((0..length)
        .map(|r| [planes[0][r], planes[1][r], planes[2][r]])
        .collect())
}

/// Writes each column's scales to the pixels along its source line: every
/// pixel nearest to a unit step receives the column interpolated at the
/// pixel center's projection onto the line. Pixels hit more than once hold
/// the mean of all writes. `lines` is the list the strip was built from.
pub fn scatter_scales<T: Scalar>(
    sparse: &mut SparseScales<T>,
    scales: &[Vec<[f64; 3]>],
    strip: &PenumbraStrip<T>,
    lines: &[SamplingLine<T>],
) -> Result<()> {
    let (w, h) = (sparse.field.width(), sparse.field.height());
    let mut hits = vec![0u32; w * h];
    for (i, k) in sparse.known.data().iter().enumerate() {
        if *k {
            hits[i] = 1;
        }
    }
    for (c, column) in scales.iter().enumerate() {
        let line = &lines[strip.sources[c]];
        let restored = unalign_column(column, strip.stretch[c], strip.shift[c], line.len())?;
        let planes: Vec<Vec<f64>> = (0..3)
            .map(|ch| restored.iter().map(|p| p[ch]).collect())
            .collect();
        for k in 0..restored.len() {
            let p = line.position(k as f64);
            let (x, y) = (p[0].round(), p[1].round());
            if x < 0.0 || y < 0.0 || x >= w as f64 || y >= h as f64 {
                continue;
            }
            // Read the column at the pixel center's own projection onto the
            // line rather than at the sample that landed on it.
            let t =
                (x - line.start[0]) * line.direction[0] + (y - line.start[1]) * line.direction[1];
            let (x, y) = (x as usize, y as usize);
            let i = y * w + x;
            hits[i] += 1;
            let n = hits[i] as f64;
            for (ch, plane) in planes.iter().enumerate() {
                let v = interp_at(plane, t);
                let old = if n > 1.0 {
                    sparse.field.get(x, y, ch).as_f64()
                } else {
                    0.0
                };
                sparse.field.set(x, y, ch, T::of(old + (v - old) / n));
            }
            sparse.known.set(x, y, true);
        }
    }
    Ok(())
}

/// Fills the scale field inside `region` by harmonic interpolation of the
/// scattered scales, holding everything outside `region` at exactly one.
pub fn densify<T: Scalar>(sparse: &SparseScales<T>, region: &ShadowMask) -> Result<ScaleField<T>> {
    if sparse.is_empty() {
        return Err(UmbraError::NoScales);
    }
    let (w, h) = (sparse.field.width(), sparse.field.height());
    let mut field = sparse.field.clone();
    let mut known = sparse.known.clone();
    for y in 0..h {
        for x in 0..w {
            if !region.get(x, y) && !sparse.known.get(x, y) {
                known.set(x, y, true);
                for ch in 0..3 {
                    field.set(x, y, ch, T::one());
                }
            }
        }
    }
    inpaint_field(&field, &known)
}

/// Divides the image by the scale field per channel and clamps to `[0, 1]`.
/// Pixels with scale exactly one keep their input values.
pub fn remove_shadow<T: Scalar>(img: &RasterImage<T>, scales: &ScaleField<T>) -> RasterImage<T> {
    let mut out = img.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            for ch in 0..3 {
                let s = scales.get(x, y, ch);
                if s != T::one() {
                    let v = img.get(x, y, ch) / s;
                    out.set(x, y, ch, num_traits::clamp(v, T::zero(), T::one()));
                }
            }
        }
    }
    out
}

/// Dense field over the shadow mask grown by `reach` pixels, then the
/// relit image. Scattered samples beyond the grown mask stay as written;
/// every other pixel outside it keeps scale one.
pub fn densify_and_remove<T: Scalar>(
    img: &RasterImage<T>,
    sparse: &SparseScales<T>,
    mask: &ShadowMask,
    reach: usize,
) -> Result<(ScaleField<T>, RasterImage<T>)> {
    let region = mask.dilate(reach);
    let dense = densify(sparse, &region)?;
    let relit = remove_shadow(img, &dense);
    Ok((dense, relit))
}
