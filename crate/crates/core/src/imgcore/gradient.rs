use crate::error::{Result, UmbraError};
use crate::imgcore::{RasterImage, VectorField};
use crate::scalar::Scalar;

/// Image gradient: central differences inside, one-sided at the borders.
pub fn gradient_field<T: Scalar>(img: &RasterImage<T>) -> Result<VectorField<T>> {
    if img.channels() != 1 {
        return Err(UmbraError::InvalidInput(format!(
            "gradient needs a single-channel image, got {} channels",
            img.channels()
        )));
    }
    let (w, h) = (img.width(), img.height());
    let half = T::of(0.5);
    let diff = |a: T, b: T, central: bool| if central { (a - b) * half } else { a - b };
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let dx = if w < 2 {
                T::zero()
            } else if x == 0 {
                diff(img.get(1, y, 0), img.get(0, y, 0), false)
            } else if x == w - 1 {
                diff(img.get(x, y, 0), img.get(x - 1, y, 0), false)
            } else {
                diff(img.get(x + 1, y, 0), img.get(x - 1, y, 0), true)
            };
            let dy = if h < 2 {
                T::zero()
            } else if y == 0 {
                diff(img.get(x, 1, 0), img.get(x, 0, 0), false)
            } else if y == h - 1 {
                diff(img.get(x, y, 0), img.get(x, y - 1, 0), false)
            } else {
                diff(img.get(x, y + 1, 0), img.get(x, y - 1, 0), true)
            };
            data.push([dx, dy]);
        }
    }
    Ok(VectorField::new(w, h, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_image_has_zero_gradient() {
        let img = RasterImage::filled(6, 4, 1, 0.7f64);
        let g = gradient_field(&img).unwrap();
        assert!(g.data().iter().all(|v| v[0] == 0.0 && v[1] == 0.0));
    }

    #[test]
    fn horizontal_ramp() {
        let w = 9;
        let img = RasterImage::from_fn(w, 5, 1, |x, _, _| x as f64 / (w - 1) as f64);
        let g = gradient_field(&img).unwrap();
        for y in 1..4 {
            for x in 1..w - 1 {
                let [dx, dy] = g.get(x, y);
                assert!((dx - 1.0 / 8.0).abs() < 1e-12);
                assert_eq!(dy, 0.0);
            }
        }
    }

    #[test]
    fn blurred_step_peaks_at_center() {
        // Logistic edge centered at x = 15.5; finite differences of the
        // analytic profile give the reference.
        let f = |x: f64| 1.0 / (1.0 + (-(x - 15.5) / 2.0).exp());
        let img = RasterImage::from_fn(32, 3, 1, |x, _, _| f(x as f64));
        let g = gradient_field(&img).unwrap();
        let row: Vec<f64> = (0..32).map(|x| g.get(x, 1)[0]).collect();
        let peak = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!(peak == 15 || peak == 16);
        for x in 1..31 {
            let fd = (f(x as f64 + 1.0) - f(x as f64 - 1.0)) / 2.0;
            assert!((row[x] - fd).abs() < 1e-12);
        }
    }

    #[test]
    fn multichannel_is_rejected() {
        let img = RasterImage::<f64>::new(3, 3, 3);
        assert!(gradient_field(&img).is_err());
    }

    proptest! {
        #[test]
        fn affine_images_have_constant_interior_gradient(
            a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64
        ) {
            let img = RasterImage::from_fn(7, 6, 1, |x, y, _| a * x as f64 + b * y as f64 + c);
            let g = gradient_field(&img).unwrap();
            for y in 1..5 {
                for x in 1..6 {
                    let [dx, dy] = g.get(x, y);
                    prop_assert!((dx - a).abs() < 1e-10 && (dy - b).abs() < 1e-10);
                }
            }
        }
    }
}
