use serde::{Deserialize, Serialize};

use crate::error::{Result, UmbraError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrokeLabel {
    Shadow,
    Lit,
}

/// One user scribble: a polyline of pixel coordinates swept by a disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stroke {
    pub label: StrokeLabel,
    pub radius: f64,
    pub points: Vec<[f64; 2]>,
}

impl Stroke {
    pub fn new(label: StrokeLabel, radius: f64, points: Vec<[f64; 2]>) -> Self {
        Self {
            label,
            radius,
            points,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StrokeSet {
    pub strokes: Vec<Stroke>,
}

/// Rasterized stroke pixels as sorted raster indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrokePixels {
    pub shadow: Vec<usize>,
    pub lit: Vec<usize>,
}

impl StrokeSet {
    pub fn new(strokes: Vec<Stroke>) -> Self {
        Self { strokes }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("stroke sets always serialize")
    }

    /// Appends another set's strokes (additive refinement).
    pub fn extend(&mut self, other: StrokeSet) {
        self.strokes.extend(other.strokes);
    }

    pub fn has_label(&self, label: StrokeLabel) -> bool {
        self.strokes
            .iter()
            .any(|s| s.label == label && !s.points.is_empty())
    }

    /// Checks geometry only: radii and point bounds.
    pub fn validate_geometry(&self, width: usize, height: usize) -> Result<()> {
        for (k, stroke) in self.strokes.iter().enumerate() {
            if !(stroke.radius >= 1.0) {
                return Err(UmbraError::InvalidInput(format!(
                    "stroke {k} has radius {} (< 1)",
                    stroke.radius
                )));
            }
            for p in &stroke.points {
                let inside = p[0].is_finite()
                    && p[1].is_finite()
                    && p[0] >= 0.0
                    && p[1] >= 0.0
                    && p[0] <= (width - 1) as f64
                    && p[1] <= (height - 1) as f64;
                if !inside {
                    return Err(UmbraError::InvalidInput(format!(
                        "stroke {k} point ({}, {}) lies outside the {width}x{height} image",
                        p[0], p[1]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Validates and rasterizes; both labels must be present and the two
    /// pixel sets must be disjoint.
    pub fn rasterize(&self, width: usize, height: usize) -> Result<StrokePixels> {
        self.validate_geometry(width, height)?;
        for label in [StrokeLabel::Shadow, StrokeLabel::Lit] {
            if !self.has_label(label) {
                return Err(UmbraError::InsufficientStrokes(format!(
                    "at least one {label:?} stroke is required"
                )));
            }
        }
        let mut shadow = vec![false; width * height];
        let mut lit = vec![false; width * height];
        for stroke in &self.strokes {
            let target = match stroke.label {
                StrokeLabel::Shadow => &mut shadow,
                StrokeLabel::Lit => &mut lit,
            };
            paint_stroke(stroke, width, height, target);
        }
        let conflicts: Vec<(u32, u32)> = (0..width * height)
            .filter(|&i| shadow[i] && lit[i])
            .map(|i| ((i % width) as u32, (i / width) as u32))
            .collect();
        if !conflicts.is_empty() {
            return Err(UmbraError::ConflictingStrokes { pixels: conflicts });
        }
        let collect = |v: &[bool]| {
            v.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| i)
                .collect()
        };
        Ok(StrokePixels {
            shadow: collect(&shadow),
            lit: collect(&lit),
        })
    }
}

/// Marks every pixel whose center lies within `radius` of the polyline.
fn paint_stroke(stroke: &Stroke, width: usize, height: usize, target: &mut [bool]) {
    let r = stroke.radius;
    let pts = &stroke.points;
    let segments: Vec<([f64; 2], [f64; 2])> = match pts.len() {
        0 => return,
        1 => vec![(pts[0], pts[0])],
        _ => pts.windows(2).map(|w| (w[0], w[1])).collect(),
    };
    for (a, b) in segments {
        let x0 = (a[0].min(b[0]) - r).floor().max(0.0) as usize;
        let y0 = (a[1].min(b[1]) - r).floor().max(0.0) as usize;
        let x1 = ((a[0].max(b[0]) + r).ceil() as usize).min(width - 1);
        let y1 = ((a[1].max(b[1]) + r).ceil() as usize).min(height - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                if segment_distance([x as f64, y as f64], a, b) <= r {
                    target[y * width + x] = true;
                }
            }
        }
    }
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let d = [ap[0] - t * ab[0], ap[1] - t * ab[1]];
    (d[0] * d[0] + d[1] * d[1]).sqrt()
}
