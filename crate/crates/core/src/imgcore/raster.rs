use crate::error::{Result, UmbraError};
use crate::scalar::Scalar;

/// Row-major, channel-interleaved floating-point image with samples in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RasterImage<T> {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<T>,
}

impl<T: Scalar> RasterImage<T> {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Self::filled(width, height, channels, T::zero())
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: T) -> Self {
        Self {
            width,
            height,
            channels,
            data: vec![value; width * height * channels],
        }
    }

    pub fn from_vec(width: usize, height: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        if channels == 0 || width == 0 || height == 0 {
            return Err(UmbraError::InvalidInput(format!(
                "image dimensions must be positive, got {width}x{height}x{channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(UmbraError::InvalidInput(format!(
                "data length {} does not match {width}x{height}x{channels}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(UmbraError::InvalidInput(format!("non-finite sample {bad}")));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Builds an image by evaluating `f(x, y, c)` at every sample.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> T,
    ) -> Self {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self {
            width,
            height,
            channels,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> T {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: T) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    /// Sample with edge replication for out-of-range coordinates.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize, c: usize) -> T {
        let xi = x.clamp(0, self.width as isize - 1) as usize;
        let yi = y.clamp(0, self.height as isize - 1) as usize;
        self.get(xi, yi, c)
    }

    /// All channels of pixel `i` in raster order.
    #[inline]
    pub fn pixel(&self, i: usize) -> &[T] {
        &self.data[i * self.channels..(i + 1) * self.channels]
    }

    /// Bilinear sample at a continuous position; positions outside the image
    /// are clamped to the border.
    pub fn bilinear(&self, x: f64, y: f64, c: usize) -> T {
        let xf = x.clamp(0.0, (self.width - 1) as f64);
        let yf = y.clamp(0.0, (self.height - 1) as f64);
        let x0 = xf.floor() as usize;
        let y0 = yf.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = T::of(xf - x0 as f64);
        let fy = T::of(yf - y0 as f64);
        let one = T::one();
        let top = self.get(x0, y0, c) * (one - fx) + self.get(x1, y0, c) * fx;
        let bottom = self.get(x0, y1, c) * (one - fx) + self.get(x1, y1, c) * fx;
        top * (one - fy) + bottom * fy
    }

    /// Copies one channel out as a single-channel image.
    pub fn channel(&self, c: usize) -> RasterImage<T> {
        let data = self
            .data
            .chunks_exact(self.channels)
            .map(|px| px[c])
            .collect();
        RasterImage {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }

    /// Interleaves single-channel planes of identical size.
    pub fn from_channels(planes: &[RasterImage<T>]) -> Result<Self> {
        let first = planes
            .first()
            .ok_or_else(|| UmbraError::InvalidInput("no channel planes".into()))?;
        let (w, h) = (first.width, first.height);
        if planes
            .iter()
            .any(|p| p.width != w || p.height != h || p.channels != 1)
        {
            return Err(UmbraError::InvalidInput(
                "channel planes must be single-channel with equal dimensions".into(),
            ));
        }
        let n = planes.len();
        let mut data = Vec::with_capacity(w * h * n);
        for i in 0..w * h {
            for p in planes {
                data.push(p.data[i]);
            }
        }
        Ok(RasterImage {
            width: w,
            height: h,
            channels: n,
            data,
        })
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> RasterImage<T> {
        RasterImage {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn clamp01(mut self) -> Self {
        for v in &mut self.data {
            *v = v.max(T::zero()).min(T::one());
        }
        self
    }

    pub fn same_shape(&self, other: &RasterImage<T>) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// Converts the sample type.
    pub fn cast<U: Scalar>(&self) -> RasterImage<U> {
        RasterImage {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|v| U::of(v.as_f64())).collect(),
        }
    }
}

/// Per-pixel 2-vector field `(dx, dy)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField<T> {
    width: usize,
    height: usize,
    data: Vec<[T; 2]>,
}

impl<T: Scalar> VectorField<T> {
    pub fn new(width: usize, height: usize, data: Vec<[T; 2]>) -> Self {
        assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [T; 2] {
        self.data[y * self.width + x]
    }

    pub fn data(&self) -> &[[T; 2]] {
        &self.data
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= 0.0 && y >= 0.0 && x <= (self.width - 1) as f64 && y <= (self.height - 1) as f64
    }

    /// Bilinear lookup; the caller keeps `(x, y)` inside the field.
    pub fn bilinear(&self, x: f64, y: f64) -> [T; 2] {
        let xf = x.clamp(0.0, (self.width - 1) as f64);
        let yf = y.clamp(0.0, (self.height - 1) as f64);
        let x0 = xf.floor() as usize;
        let y0 = yf.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = T::of(xf - x0 as f64);
        let fy = T::of(yf - y0 as f64);
        let one = T::one();
        let mut out = [T::zero(); 2];
        for (k, o) in out.iter_mut().enumerate() {
            let top = self.get(x0, y0)[k] * (one - fx) + self.get(x1, y0)[k] * fx;
            let bottom = self.get(x0, y1)[k] * (one - fx) + self.get(x1, y1)[k] * fx;
            *o = top * (one - fy) + bottom * fy;
        }
        out
    }
}

/// Three-channel multiplicative shadow scale, `1` meaning fully lit.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleField<T> {
    image: RasterImage<T>,
}

impl<T: Scalar> ScaleField<T> {
    /// A field of ones (no shadow).
    pub fn ones(width: usize, height: usize) -> Self {
        Self {
            image: RasterImage::filled(width, height, 3, T::one()),
        }
    }

    pub fn from_image(image: RasterImage<T>) -> Result<Self> {
        if image.channels() != 3 {
            return Err(UmbraError::InvalidInput(format!(
                "scale field needs 3 channels, got {}",
                image.channels()
            )));
        }
        Ok(Self { image })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.image.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.image.height()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> T {
        self.image.get(x, y, c)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: T) {
        self.image.set(x, y, c, v)
    }

    pub fn as_image(&self) -> &RasterImage<T> {
        &self.image
    }

    pub fn into_image(self) -> RasterImage<T> {
        self.image
    }
}
