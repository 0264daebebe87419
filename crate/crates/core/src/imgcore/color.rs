use crate::error::{Result, UmbraError};
use crate::imgcore::RasterImage;
use crate::scalar::Scalar;

/// Offset added before taking logarithms so black pixels stay finite.
pub const LOG_EPS: f64 = 1.0 / 255.0;

/// BT.601 luma weights.
const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColorSpace {
    /// BT.601 full-range YCbCr with chroma offset to 0.5.
    YCbCr,
    /// BT.601 luma, one channel.
    Grayscale,
    /// `ln(x + ε)` affinely mapped back onto `[0, 1]`.
    LogRgb,
}

pub fn color_convert<T: Scalar>(
    img: &RasterImage<T>,
    target: ColorSpace,
) -> Result<RasterImage<T>> {
    match target {
        ColorSpace::Grayscale if img.channels() == 1 => Ok(img.clone()),
        _ if img.channels() != 3 => Err(UmbraError::InvalidInput(format!(
            "{target:?} conversion needs 3 channels, got {}",
            img.channels()
        ))),
        ColorSpace::YCbCr => Ok(per_pixel(img, 3, |p| {
            let [y, cb, cr] = rgb_to_ycbcr([p[0].as_f64(), p[1].as_f64(), p[2].as_f64()]);
            [T::of(y), T::of(cb), T::of(cr)]
        })),
        ColorSpace::Grayscale => Ok(per_pixel(img, 1, |p| [T::of(luma(p))])),
        ColorSpace::LogRgb => {
            let lo = LOG_EPS.ln();
            let span = (1.0 + LOG_EPS).ln() - lo;
            Ok(img.map(|v| T::of(((v.as_f64() + LOG_EPS).ln() - lo) / span)))
        }
    }
}

fn per_pixel<T: Scalar, const N: usize>(
    img: &RasterImage<T>,
    out_channels: usize,
    f: impl Fn(&[T]) -> [T; N],
) -> RasterImage<T> {
    let mut data = Vec::with_capacity(img.pixel_count() * out_channels);
    for i in 0..img.pixel_count() {
        data.extend_from_slice(&f(img.pixel(i)));
    }
    RasterImage::from_vec(img.width(), img.height(), out_channels, data)
        .expect("per-pixel conversion preserves shape")
}

#[inline]
pub(crate) fn luma<T: Scalar>(p: &[T]) -> f64 {
    LUMA[0] * p[0].as_f64() + LUMA[1] * p[1].as_f64() + LUMA[2] * p[2].as_f64()
}

pub fn rgb_to_ycbcr(rgb: [f64; 3]) -> [f64; 3] {
    let [r, g, b] = rgb;
    [
        LUMA[0] * r + LUMA[1] * g + LUMA[2] * b,
        0.5 - 0.168_736 * r - 0.331_264 * g + 0.5 * b,
        0.5 + 0.5 * r - 0.418_688 * g - 0.081_312 * b,
    ]
}

/// Inverse of [`rgb_to_ycbcr`].
pub fn ycbcr_to_rgb(ycc: [f64; 3]) -> [f64; 3] {
    let [y, cb, cr] = ycc;
    let (cb, cr) = (cb - 0.5, cr - 0.5);
    [
        y + 1.402 * cr,
        y - 0.344_136 * cb - 0.714_136 * cr,
        y + 1.772 * cb,
    ]
}

/// Natural-log intensity used along penumbra profiles.
#[inline]
pub fn log_intensity<T: Scalar>(x: T) -> T {
    (x + T::of(LOG_EPS)).ln()
}

/// Inverse of [`log_intensity`].
#[inline]
pub fn linear_from_log<T: Scalar>(v: T) -> T {
    v.exp() - T::of(LOG_EPS)
}
