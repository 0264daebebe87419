//! 8-bit PNG/JPEG loading and PNG encoding.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb};

use crate::error::Result;
use crate::imgcore::{RasterImage, ScaleField, ShadowMask};
use crate::scalar::Scalar;

/// Decodes PNG or JPEG bytes into a 3-channel image in `[0, 1]`.
pub fn decode_image<T: Scalar>(bytes: &[u8]) -> Result<RasterImage<T>> {
    let dynamic = image::load_from_memory(bytes)?;
    Ok(from_dynamic(dynamic))
}

pub fn load_image<T: Scalar>(path: impl AsRef<Path>) -> Result<RasterImage<T>> {
    let bytes = std::fs::read(path)?;
    decode_image(&bytes)
}

fn from_dynamic<T: Scalar>(dynamic: DynamicImage) -> RasterImage<T> {
    let rgb = dynamic.to_rgb8();
    let (w, h) = rgb.dimensions();
    let data = rgb
        .into_raw()
        .into_iter()
        .map(|v| T::of(v as f64 / 255.0))
        .collect();
    RasterImage::from_vec(w as usize, h as usize, 3, data)
        .expect("decoded buffer matches dimensions")
}

/// Round-half-up quantization to 8 bits.
#[inline]
pub fn to_u8<T: Scalar>(v: T) -> u8 {
    (v.as_f64() * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Encodes a 1- or 3-channel image as 8-bit PNG. Other channel counts keep
/// the first channel only.
pub fn encode_png<T: Scalar>(img: &RasterImage<T>) -> Result<Vec<u8>> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let bytes: Vec<u8> = img.data().iter().map(|&v| to_u8(v)).collect();
    let dynamic = match img.channels() {
        3 => DynamicImage::ImageRgb8(
            ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, bytes).expect("rgb buffer"),
        ),
        1 => DynamicImage::ImageLuma8(
            ImageBuffer::<Luma<u8>, _>::from_raw(w, h, bytes).expect("gray buffer"),
        ),
        _ => return encode_png(&img.channel(0)),
    };
    let mut out = Vec::new();
    dynamic.write_to(&mut Cursor::new(&mut out), ImageFormat::Png)?;
    Ok(out)
}

pub fn save_png<T: Scalar>(img: &RasterImage<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_png(img)?)?;
    Ok(())
}

/// Shadow mask as 8-bit grayscale PNG, 255 = shadow.
pub fn encode_mask_png(mask: &ShadowMask) -> Result<Vec<u8>> {
    let img = RasterImage::<f64>::from_vec(
        mask.width(),
        mask.height(),
        1,
        mask.data()
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect(),
    )?;
    encode_png(&img)
}

/// Reads a mask PNG; any non-zero luma counts as shadow.
pub fn decode_mask_png(bytes: &[u8]) -> Result<ShadowMask> {
    let gray = image::load_from_memory(bytes)?.to_luma8();
    let (w, h) = gray.dimensions();
    Ok(ShadowMask::from_vec(
        w as usize,
        h as usize,
        gray.into_raw().into_iter().map(|v| v > 0).collect(),
    ))
}

/// Scale field as 16-bit RGB PNG, sample = round(scale × 65535).
pub fn encode_scale_png16<T: Scalar>(field: &ScaleField<T>) -> Result<Vec<u8>> {
    let img = field.as_image();
    let data: Vec<u16> = img
        .data()
        .iter()
        .map(|v| (v.as_f64() * 65535.0 + 0.5).floor().clamp(0.0, 65535.0) as u16)
        .collect();
    let buf = ImageBuffer::<Rgb<u16>, _>::from_raw(img.width() as u32, img.height() as u32, data)
        .expect("rgb16 buffer");
    let mut out = Vec::new();
    DynamicImage::ImageRgb16(buf).write_to(&mut Cursor::new(&mut out), ImageFormat::Png)?;
    Ok(out)
}

/// Inverse of [`encode_scale_png16`].
pub fn decode_scale_png16<T: Scalar>(bytes: &[u8]) -> Result<ScaleField<T>> {
    let rgb = image::load_from_memory(bytes)?.to_rgb16();
    let (w, h) = rgb.dimensions();
    let data = rgb
        .into_raw()
        .into_iter()
        .map(|v| T::of(v as f64 / 65535.0))
        .collect();
    ScaleField::from_image(RasterImage::from_vec(w as usize, h as usize, 3, data)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantization_rounds_half_up() {
        assert_eq!(to_u8(0.0f64), 0);
        assert_eq!(to_u8(1.0f64), 255);
        assert_eq!(to_u8(0.5f64), 128);
        assert_eq!(to_u8(2.0f64), 255);
        assert_eq!(to_u8(-1.0f64), 0);
    }

    #[test]
    fn eight_bit_images_survive_encode_decode() {
        let img = RasterImage::from_fn(7, 5, 3, |x, y, c| {
            ((x * 37 + y * 11 + c * 5) % 256) as f64 / 255.0
        });
        let back: RasterImage<f64> = decode_image(&encode_png(&img).unwrap()).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn gray_png_decodes_to_rgb() {
        let img = RasterImage::from_fn(3, 2, 1, |x, _, _| x as f64 / 2.0);
        let back: RasterImage<f32> = decode_image(&encode_png(&img).unwrap()).unwrap();
        assert_eq!(back.channels(), 3);
        assert_eq!(back.get(2, 1, 1), 1.0);
    }

    #[test]
    fn mask_png_round_trip() {
        let mask = ShadowMask::from_fn(9, 4, |x, y| x > y);
        assert_eq!(
            decode_mask_png(&encode_mask_png(&mask).unwrap()).unwrap(),
            mask
        );
    }

    #[test]
    fn scale_png16_precision() {
        let field = ScaleField::from_image(RasterImage::from_fn(4, 3, 3, |x, y, c| {
            0.3 + 0.1 * x as f64 + 0.05 * y as f64 + 0.01 * c as f64
        }))
        .unwrap();
        let back: ScaleField<f64> =
            decode_scale_png16(&encode_scale_png16(&field).unwrap()).unwrap();
        for (a, b) in back.as_image().data().iter().zip(field.as_image().data()) {
            assert!((a - b).abs() <= 0.5 / 65535.0 + 1e-12);
        }
    }
}
