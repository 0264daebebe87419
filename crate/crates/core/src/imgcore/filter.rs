//! Spatial filters with edge replication at the image border.
//!
//! Weighted filters accumulate deviations from a per-pixel reference value,
//! so constant images come back bit-identical.

use crate::error::{Result, UmbraError};
use crate::imgcore::RasterImage;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FilterKind {
    /// Square Gaussian kernel; even sizes are rounded up to the next odd size.
    Gaussian { size: usize, sigma: f64 },
    /// Square median window; even sizes are rounded up to the next odd size.
    Median { size: usize },
    /// Box mean over `width` columns and `height` rows.
    Average { width: usize, height: usize },
    /// Edge-preserving filter with spatial and range standard deviations.
    Bilateral { sigma_space: f64, sigma_range: f64 },
}

/// Rounds a kernel size up to the nearest odd number.
pub fn odd_size(n: usize) -> usize {
    if n % 2 == 0 {
        n + 1
    } else {
        n
    }
}

pub fn spatial_filter<T: Scalar>(img: &RasterImage<T>, kind: FilterKind) -> Result<RasterImage<T>> {
    match kind {
        FilterKind::Gaussian { size, sigma } => {
            if size == 0 || !(sigma > 0.0) {
                return Err(UmbraError::InvalidParameter(format!(
                    "gaussian needs size >= 1 and sigma > 0, got size {size}, sigma {sigma}"
                )));
            }
            let kernel = gaussian_kernel(odd_size(size), sigma);
            let half = kernel.len() / 2;
            let offsets: Vec<isize> = (0..kernel.len())
                .map(|i| i as isize - half as isize)
                .collect();
            let weights: Vec<T> = kernel.iter().map(|&k| T::of(k)).collect();
            let tmp = convolve_1d(img, &offsets, &weights, true);
            Ok(convolve_1d(&tmp, &offsets, &weights, false))
        }
        FilterKind::Median { size } => {
            if size == 0 {
                return Err(UmbraError::InvalidParameter(
                    "median size must be >= 1".into(),
                ));
            }
            Ok(median(img, odd_size(size)))
        }
        FilterKind::Average { width, height } => {
            if width == 0 || height == 0 {
                return Err(UmbraError::InvalidParameter(format!(
                    "average kernel must be at least 1x1, got {width}x{height}"
                )));
            }
            let tmp = box_1d(img, width, true);
            Ok(box_1d(&tmp, height, false))
        }
        FilterKind::Bilateral {
            sigma_space,
            sigma_range,
        } => {
            if !(sigma_space > 0.0) || !(sigma_range > 0.0) {
                return Err(UmbraError::InvalidParameter(format!(
                    "bilateral needs positive sigmas, got {sigma_space}, {sigma_range}"
                )));
            }
            if sigma_space <= 4.0 {
                Ok(bilateral_direct(img, sigma_space, sigma_range))
            } else {
                Ok(bilateral_grid(img, sigma_space, sigma_range))
            }
        }
    }
}

/// Normalized 1-D Gaussian taps of odd length `size`.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let half = (size / 2) as f64;
    let raw: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - half;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|k| k / sum).collect()
}

/// Offsets covering `n` taps; even windows extend one further to the right.
fn box_offsets(n: usize) -> Vec<isize> {
    let lo = -((n / 2) as isize);
    (0..n as isize).map(|i| lo + i).collect()
}

fn convolve_1d<T: Scalar>(
    img: &RasterImage<T>,
    offsets: &[isize],
    weights: &[T],
    horizontal: bool,
) -> RasterImage<T> {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let norm: T = weights.iter().copied().sum();
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let center = img.get(x, y, c);
                let mut acc = T::zero();
                for (&o, &k) in offsets.iter().zip(weights) {
                    let v = if horizontal {
                        img.get_clamped(x as isize + o, y as isize, c)
                    } else {
                        img.get_clamped(x as isize, y as isize + o, c)
                    };
                    acc += k * (v - center);
                }
                out.set(x, y, c, center + acc / norm);
            }
        }
    }
    out
}

fn box_1d<T: Scalar>(img: &RasterImage<T>, n: usize, horizontal: bool) -> RasterImage<T> {
    if n == 1 {
        return img.clone();
    }
    let offsets = box_offsets(n);
    let weights = vec![T::one(); n];
    convolve_1d(img, &offsets, &weights, horizontal)
}

fn median<T: Scalar>(img: &RasterImage<T>, size: usize) -> RasterImage<T> {
    if size == 1 {
        return img.clone();
    }
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let half = (size / 2) as isize;
    let mut out = img.clone();
    let mut window = Vec::with_capacity(size * size);
    for c in 0..ch {
        for y in 0..h as isize {
            for x in 0..w as isize {
                window.clear();
                for dy in -half..=half {
                    for dx in -half..=half {
                        window.push(img.get_clamped(x + dx, y + dy, c));
                    }
                }
                let mid = window.len() / 2;
                let (_, m, _) =
                    window.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
                out.set(x as usize, y as usize, c, *m);
            }
        }
    }
    out
}

fn bilateral_direct<T: Scalar>(img: &RasterImage<T>, sigma_s: f64, sigma_r: f64) -> RasterImage<T> {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let radius = (2.0 * sigma_s).ceil() as isize;
    let inv_s = 1.0 / (2.0 * sigma_s * sigma_s);
    let inv_r = 1.0 / (2.0 * sigma_r * sigma_r);
    let mut out = img.clone();
    for y in 0..h as isize {
        for x in 0..w as isize {
            for c in 0..ch {
                let center = img.get(x as usize, y as usize, c).as_f64();
                let (mut num, mut den) = (0.0, 0.0);
                for dy in -radius..=radius {
                    for dx in -radius..=radius {
                        let dev = img.get_clamped(x + dx, y + dy, c).as_f64() - center;
                        let d2 = (dx * dx + dy * dy) as f64;
                        let wgt = (-d2 * inv_s - dev * dev * inv_r).exp();
                        num += wgt * dev;
                        den += wgt;
                    }
                }
                out.set(x as usize, y as usize, c, T::of(center + num / den));
            }
        }
    }
    out
}

/// Bilateral grid approximation: splat into a downsampled (x, y, value)
/// volume, blur it, and slice with trilinear interpolation.
fn bilateral_grid<T: Scalar>(img: &RasterImage<T>, sigma_s: f64, sigma_r: f64) -> RasterImage<T> {
    const PAD: usize = 2;
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let mut out = img.clone();
    for c in 0..ch {
        let reference = img.get(0, 0, c).as_f64();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..w * h {
            let v = img.pixel(i)[c].as_f64();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let gx = ((w - 1) as f64 / sigma_s).floor() as usize + 1 + 2 * PAD;
        let gy = ((h - 1) as f64 / sigma_s).floor() as usize + 1 + 2 * PAD;
        let gz = ((hi - lo) / sigma_r).floor() as usize + 1 + 2 * PAD;
        let cell = |x: usize, y: usize, z: usize| (z * gy + y) * gx + x;
        let mut num = vec![0.0f64; gx * gy * gz];
        let mut den = vec![0.0f64; gx * gy * gz];
        for y in 0..h {
            for x in 0..w {
                let v = img.get(x, y, c).as_f64();
                let ix = (x as f64 / sigma_s).round() as usize + PAD;
                let iy = (y as f64 / sigma_s).round() as usize + PAD;
                let iz = ((v - lo) / sigma_r).round() as usize + PAD;
                let k = cell(ix, iy, iz);
                num[k] += v - reference;
                den[k] += 1.0;
            }
        }
        for axis in 0..3 {
            blur_axis(&mut num, [gx, gy, gz], axis);
            blur_axis(&mut den, [gx, gy, gz], axis);
        }
        for y in 0..h {
            for x in 0..w {
                let v = img.get(x, y, c).as_f64();
                let pos = [
                    x as f64 / sigma_s + PAD as f64,
                    y as f64 / sigma_s + PAD as f64,
                    (v - lo) / sigma_r + PAD as f64,
                ];
                let n = trilinear(&num, [gx, gy, gz], pos);
                let d = trilinear(&den, [gx, gy, gz], pos);
                let filtered = if d > 1e-12 { reference + n / d } else { v };
                out.set(x, y, c, T::of(filtered));
            }
        }
    }
    out
}

fn blur_axis(grid: &mut [f64], dims: [usize; 3], axis: usize) {
    const TAPS: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
    let [gx, gy, gz] = dims;
    let stride = [1, gx, gx * gy][axis];
    let len = dims[axis];
    let src = grid.to_vec();
    for z in 0..gz {
        for y in 0..gy {
            for x in 0..gx {
                let coord = [x, y, z][axis] as isize;
                let base = (z * gy + y) * gx + x;
                let mut acc = 0.0;
                for (t, &k) in TAPS.iter().enumerate() {
                    let j = coord + t as isize - 2;
                    if j >= 0 && (j as usize) < len {
                        acc += k * src[(base as isize + (j - coord) * stride as isize) as usize];
                    }
                }
                grid[base] = acc;
            }
        }
    }
}

fn trilinear(grid: &[f64], dims: [usize; 3], pos: [f64; 3]) -> f64 {
    let [gx, gy, _] = dims;
    let mut i0 = [0usize; 3];
    let mut f = [0.0f64; 3];
    for a in 0..3 {
        let p = pos[a].clamp(0.0, (dims[a] - 1) as f64);
        i0[a] = (p.floor() as usize).min(dims[a] - 2);
        f[a] = p - i0[a] as f64;
    }
    let mut acc = 0.0;
    for corner in 0..8 {
        let mut wgt = 1.0;
        let mut idx = [0usize; 3];
        for a in 0..3 {
            let bit = (corner >> a) & 1;
            idx[a] = i0[a] + bit;
            wgt *= if bit == 1 { f[a] } else { 1.0 - f[a] };
        }
        acc += wgt * grid[(idx[2] * gy + idx[1]) * gx + idx[0]];
    }
    acc
}
