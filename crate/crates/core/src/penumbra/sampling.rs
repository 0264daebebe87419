use crate::error::{Result, UmbraError};
use crate::imgcore::{log_intensity, RasterImage, VectorField};
use crate::scalar::Scalar;

/// Minimum profile length of a usable sampling line.
pub const MIN_PROFILE_LEN: usize = 4;

/// Segment across the shadow boundary, from the shadow side (`start`) to the
/// lit side (`end`), with its log-RGB profile at unit steps.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingLine<T> {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub boundary: [f64; 2],
    /// Unit direction from `start` to `end`.
    pub direction: [f64; 2],
    /// Natural-log RGB samples at `start + k · direction`.
    pub profile: Vec<[T; 3]>,
}

impl<T: Scalar> SamplingLine<T> {
    pub fn len(&self) -> usize {
        self.profile.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profile.is_empty()
    }

    /// Pixel position of profile sample `k`.
    pub fn position(&self, k: f64) -> [f64; 2] {
        [
            self.start[0] + k * self.direction[0],
            self.start[1] + k * self.direction[1],
        ]
    }

    /// Half the line length in pixels.
    pub fn half_length(&self) -> f64 {
        (self.len() - 1) as f64 / 2.0
    }
}

/// Limits on line growth.
#[derive(Clone, Copy, Debug)]
pub struct GrowthLimits {
    /// Steps per side before growth is cut off regardless of gradients.
    pub max_half_steps: usize,
}

impl Default for GrowthLimits {
    fn default() -> Self {
        Self { max_half_steps: 48 }
    }
}

/// Grows a line symmetrically from `boundary` along the normalized fusion
/// gradient until each end's projected gradient has dropped below
/// `L / ratio` at least once (with `L` the gradient magnitude at the
/// boundary point) or a further step would leave the image.
pub fn grow_sampling_line<T: Scalar>(
    boundary: [f64; 2],
    gradient: &VectorField<T>,
    image: &RasterImage<T>,
    ratio: f64,
    limits: GrowthLimits,
) -> Result<SamplingLine<T>> {
    let g = gradient.bilinear(boundary[0], boundary[1]);
    let g = [g[0].as_f64(), g[1].as_f64()];
    let strength = g[0].hypot(g[1]);
    if !(strength > 1e-12) {
        return Err(UmbraError::DegenerateSample {
            x: boundary[0],
            y: boundary[1],
        });
    }
    let dv = [g[0] / strength, g[1] / strength];
    let project = |p: [f64; 2]| {
        let v = gradient.bilinear(p[0], p[1]);
        v[0].as_f64() * dv[0] + v[1].as_f64() * dv[1]
    };
    let mut ps = boundary;
    let mut pe = boundary;
    let mut steps = 0usize;
    // Once an end's gradient has decayed it counts as decayed for good, so a
    // texture edge met further out cannot prolong growth.
    let (mut done_s, mut done_e) = (false, false);
    loop {
        done_s = done_s || ratio * project(ps) < strength;
        done_e = done_e || ratio * project(pe) < strength;
        let ns = [ps[0] - dv[0], ps[1] - dv[1]];
        let ne = [pe[0] + dv[0], pe[1] + dv[1]];
        if !gradient.contains(ns[0], ns[1]) || !gradient.contains(ne[0], ne[1]) {
            break;
        }
        ps = ns;
        pe = ne;
        steps += 1;
        if (done_s && done_e) || steps >= limits.max_half_steps {
            break;
        }
    }
    let n = 2 * steps + 1;
    if n < MIN_PROFILE_LEN {
        return Err(UmbraError::DegenerateSample {
            x: boundary[0],
            y: boundary[1],
        });
    }
    let profile = (0..n)
        .map(|k| {
            let p = [ps[0] + k as f64 * dv[0], ps[1] + k as f64 * dv[1]];
            [0, 1, 2].map(|c| log_intensity(image.bilinear(p[0], p[1], c)))
        })
        .collect();
    Ok(SamplingLine {
        start: ps,
        end: pe,
        boundary,
        direction: dv,
        profile,
    })
}
