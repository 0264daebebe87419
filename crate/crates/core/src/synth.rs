//! Deterministic synthetic scenes with a known shadow: textured clean
//! image, radial scale field and scribbles that land on each side.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::detect::{Stroke, StrokeLabel, StrokeSet};
use crate::imgcore::{RasterImage, ScaleField, ShadowMask};

#[derive(Clone, Copy, Debug)]
pub struct SceneConfig {
    pub size: usize,
    /// Checker cell edge in pixels.
    pub cell: usize,
    /// Umbra scale per channel.
    pub minima: [f64; 3],
    /// Distance from the center to the middle of the penumbra.
    pub radius: f64,
    /// Width of the penumbra transition.
    pub penumbra: f64,
    /// Multiplier on the checker colors' distance from their mean.
    pub contrast: f64,
    /// Amplitude of the value noise added to the checkerboard.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            size: 512,
            cell: 32,
            minima: [0.4; 3],
            radius: 120.0,
            penumbra: 12.0,
            contrast: 0.3,
            noise: 0.04,
            seed: 7,
        }
    }
}

impl SceneConfig {
    pub fn colored() -> Self {
        Self {
            minima: [0.4, 0.5, 0.6],
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct Scene {
    pub clean: RasterImage<f64>,
    pub scales: ScaleField<f64>,
    pub shadowed: RasterImage<f64>,
    pub strokes: StrokeSet,
}

/// Rounds to the nearest 8-bit level so that images survive a PNG round
/// trip unchanged.
pub fn quantize(v: f64) -> f64 {
    (v.clamp(0.0, 1.0) * 255.0).round() / 255.0
}

/// Smooth multi-octave value noise in roughly `[-1, 1]`.
pub struct ValueNoise {
    grids: Vec<(usize, Vec<f64>)>,
}

impl ValueNoise {
    pub fn new(seed: u64, size: usize, cells: &[usize]) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grids = cells
            .iter()
            .map(|&cell| {
                let n = size / cell + 2;
                (
                    cell,
                    (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect(),
                )
            })
            .collect();
        Self { grids }
    }

    pub fn at(&self, x: f64, y: f64) -> f64 {
        let mut sum = 0.0;
        let mut amp = 1.0;
        let mut total = 0.0;
        for (cell, grid) in &self.grids {
            let n = (grid.len() as f64).sqrt() as usize;
            let (gx, gy) = (x / *cell as f64, y / *cell as f64);
            let (ix, iy) = (gx.floor() as usize, gy.floor() as usize);
            let (fx, fy) = (fade(gx - ix as f64), fade(gy - iy as f64));
            let g = |i: usize, j: usize| grid[j.min(n - 1) * n + i.min(n - 1)];
            let top = g(ix, iy) + (g(ix + 1, iy) - g(ix, iy)) * fx;
            let bottom = g(ix, iy + 1) + (g(ix + 1, iy + 1) - g(ix, iy + 1)) * fx;
            sum += amp * (top + (bottom - top) * fy);
            total += amp;
            amp *= 0.5;
        }
        sum / total
    }
}

fn fade(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Cubic step from 0 at `t <= 0` to 1 at `t >= 1`.
pub fn smoothstep(t: f64) -> f64 {
    fade(t.clamp(0.0, 1.0))
}

/// Checkerboard with a few tinted cells and low-amplitude value noise.
pub fn clean_texture(config: &SceneConfig) -> RasterImage<f64> {
    let noise = ValueNoise::new(config.seed, config.size, &[16, 8]);
    let light = [0.78, 0.74, 0.70];
    let dark = [0.46, 0.48, 0.50];
    let tint = [0.70, 0.52, 0.36];
    RasterImage::from_fn(config.size, config.size, 3, |x, y, c| {
        let (cx, cy) = (x / config.cell, y / config.cell);
        let base = if (cx + cy) % 2 == 0 {
            light[c]
        } else if (cx * 3 + cy * 5) % 7 == 0 {
            tint[c]
        } else {
            dark[c]
        };
        let mid = (light[c] + dark[c]) / 2.0;
        quantize(mid + config.contrast * (base - mid) + config.noise * noise.at(x as f64, y as f64))
    })
}

/// Scale `minima` inside, rising smoothly to 1 across the penumbra.
pub fn radial_scales(config: &SceneConfig) -> ScaleField<f64> {
    let c = (config.size - 1) as f64 / 2.0;
    let inner = config.radius - config.penumbra / 2.0;
    let mut field = ScaleField::ones(config.size, config.size);
    for y in 0..config.size {
        for x in 0..config.size {
            let r = (x as f64 - c).hypot(y as f64 - c);
            let t = smoothstep((r - inner) / config.penumbra);
            if t < 1.0 {
                for ch in 0..3 {
                    let m = config.minima[ch];
                    field.set(x, y, ch, m + (1.0 - m) * t);
                }
            }
        }
    }
    field
}

/// Shadow scribble across the umbra and lit scribbles along two edges,
/// each covering several checker cells.
pub fn oracle_strokes(config: &SceneConfig) -> StrokeSet {
    let s = config.size as f64;
    let c = (config.size - 1) as f64 / 2.0;
    let reach = (config.radius - config.penumbra) * 0.6;
    let margin = s * 0.08;
    StrokeSet::new(vec![
        Stroke::new(
            StrokeLabel::Shadow,
            3.0,
            vec![[c - reach, c - 5.0], [c + reach, c + 5.0]],
        ),
        Stroke::new(
            StrokeLabel::Lit,
            3.0,
            vec![[margin, margin], [s - margin, margin + 10.0]],
        ),
        Stroke::new(
            StrokeLabel::Lit,
            3.0,
            vec![[margin, s - margin], [s - margin, s - margin - 10.0]],
        ),
    ])
}

pub fn scene(config: &SceneConfig) -> Scene {
    let clean = clean_texture(config);
    let scales = radial_scales(config);
    let mut shadowed = clean.clone();
    for y in 0..config.size {
        for x in 0..config.size {
            for ch in 0..3 {
                shadowed.set(
                    x,
                    y,
                    ch,
                    quantize(clean.get(x, y, ch) * scales.get(x, y, ch)),
                );
            }
        }
    }
    Scene {
        clean,
        scales,
        shadowed,
        strokes: oracle_strokes(config),
    }
}

/// Pixels fully lit in every channel and more than `margin` pixels
/// (Chebyshev) from any shadowed pixel.
pub fn lit_area(scales: &ScaleField<f64>, margin: usize) -> ShadowMask {
    let (w, h) = (scales.width(), scales.height());
    let shadow = ShadowMask::from_fn(w, h, |x, y| (0..3).any(|c| scales.get(x, y, c) < 1.0));
    shadow.dilate(margin).invert()
}

/// Left half at 0.2, right half at 0.8 in every channel.
pub fn two_tone(width: usize, height: usize) -> RasterImage<f64> {
    RasterImage::from_fn(
        width,
        height,
        3,
        |x, _, _| if x < width / 2 { 0.2 } else { 0.8 },
    )
}

/// One shadow and one lit scribble at random positions, each kept entirely
/// inside its half of a [`two_tone`] image.
pub fn two_tone_strokes(width: usize, height: usize, seed: u64) -> StrokeSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = 2.0;
    let half = (width / 2) as f64;
    let mut scribble = |label, x0: f64, x1: f64| {
        let points = (0..3)
            .map(|_| {
                [
                    rng.random_range(x0 + radius..x1 - radius - 1.0),
                    rng.random_range(radius..height as f64 - radius - 1.0),
                ]
            })
            .collect();
        Stroke::new(label, radius, points)
    };
    let shadow = scribble(StrokeLabel::Shadow, 0.0, half);
    let lit = scribble(StrokeLabel::Lit, half, width as f64);
    StrokeSet::new(vec![shadow, lit])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scene_is_deterministic_and_quantized() {
        let cfg = SceneConfig {
            size: 128,
            radius: 30.0,
            ..SceneConfig::default()
        };
        let a = scene(&cfg);
        let b = scene(&cfg);
        assert_eq!(a.shadowed, b.shadowed);
        for &v in a.shadowed.data() {
            assert_eq!(quantize(v), v);
        }
    }

    #[test]
    fn scale_profile() {
        let cfg = SceneConfig {
            size: 128,
            radius: 30.0,
            ..SceneConfig::colored()
        };
        let s = radial_scales(&cfg);
        let c = 63;
        assert_eq!(
            [s.get(c, c, 0), s.get(c, c, 1), s.get(c, c, 2)],
            [0.4, 0.5, 0.6]
        );
        assert_eq!(s.get(c + 40, c, 0), 1.0);
        let mut prev = 0.0;
        for x in c..128 {
            let v = s.get(x, c, 0);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn strokes_fit_the_scene() {
        let cfg = SceneConfig::default();
        let sc = scene(&cfg);
        let px = sc.strokes.rasterize(cfg.size, cfg.size).unwrap();
        assert!(px
            .shadow
            .iter()
            .all(|&i| sc.scales.get(i % cfg.size, i / cfg.size, 0) == 0.4));
        assert!(px
            .lit
            .iter()
            .all(|&i| sc.scales.get(i % cfg.size, i / cfg.size, 0) == 1.0));
    }
}
