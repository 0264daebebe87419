//! Exact K-nearest-neighbour shadow/lit classifier over log-RGB features.
//!
//! Neighbours are ranked by `(squared distance, raster index of the training
//! pixel)`, which makes equal-distance ties deterministic: the training pixel
//! that comes first in raster order wins.

use std::collections::HashMap;

use crate::detect::strokes::StrokePixels;
use crate::imgcore::RasterImage;
use crate::scalar::Scalar;

pub const K_NEIGHBORS: usize = 3;

#[derive(Clone, Copy, Debug)]
struct Sample {
    feature: [f64; 3],
    shadow: bool,
    order: usize,
}

/// Training set sorted along the first feature axis for pruned exact search.
#[derive(Clone, Debug)]
pub struct KnnClassifier {
    samples: Vec<Sample>,
    k: usize,
}

/// Result of one query: shadow fraction among the neighbours and the
/// majority label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KnnVote {
    pub posterior: f64,
    pub shadow: bool,
}

impl KnnClassifier {
    /// `features` must have 3 channels; training pixels come from `pixels`.
    pub fn train<T: Scalar>(features: &RasterImage<T>, pixels: &StrokePixels) -> Self {
        let feature = |i: usize| {
            let p = features.pixel(i);
            [p[0].as_f64(), p[1].as_f64(), p[2].as_f64()]
        };
        let mut samples: Vec<Sample> = pixels
            .shadow
            .iter()
            .map(|&i| Sample {
                feature: feature(i),
                shadow: true,
                order: i,
            })
            .chain(pixels.lit.iter().map(|&i| Sample {
                feature: feature(i),
                shadow: false,
                order: i,
            }))
            .collect();
        samples.sort_by(|a, b| {
            a.feature[0]
                .partial_cmp(&b.feature[0])
                .unwrap()
                .then(a.order.cmp(&b.order))
        });
        let k = K_NEIGHBORS.min(samples.len());
        Self { samples, k }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn classify(&self, q: [f64; 3]) -> KnnVote {
        // Best k so far, kept sorted by (distance, order).
        let mut best: Vec<(f64, usize, bool)> = Vec::with_capacity(self.k + 1);
        let consider = |s: &Sample, best: &mut Vec<(f64, usize, bool)>| {
            let d = dist2(q, s.feature);
            let key = (d, s.order);
            if best.len() == self.k {
                let worst = best[self.k - 1];
                if (key.0, key.1) >= (worst.0, worst.1) {
                    return;
                }
                best.pop();
            }
            let pos = best
                .iter()
                .position(|&(bd, bo, _)| (key.0, key.1) < (bd, bo))
                .unwrap_or(best.len());
            best.insert(pos, (d, s.order, s.shadow));
        };
        let start = self.samples.partition_point(|s| s.feature[0] < q[0]);
        let (mut lo, mut hi) = (start, start);
        loop {
            let bound = if best.len() == self.k {
                best[self.k - 1].0
            } else {
                f64::INFINITY
            };
            let left = (lo > 0).then(|| {
                let d = q[0] - self.samples[lo - 1].feature[0];
                d * d
            });
            let right = (hi < self.samples.len()).then(|| {
                let d = self.samples[hi].feature[0] - q[0];
                d * d
            });
            // Equal axis distance can still tie on full distance, so keep
            // scanning while the axis gap does not exceed the bound.
            let take_left = match (left, right) {
                (Some(l), Some(r)) if l.min(r) <= bound => l <= r,
                (Some(l), None) if l <= bound => true,
                (None, Some(r)) if r <= bound => false,
                _ => break,
            };
            if take_left {
                lo -= 1;
                consider(&self.samples[lo], &mut best);
            } else {
                consider(&self.samples[hi], &mut best);
                hi += 1;
            }
        }
        let shadow_votes = best.iter().filter(|b| b.2).count();
        let posterior = shadow_votes as f64 / self.k as f64;
        let shadow = if 2 * shadow_votes == self.k {
            // Even split (only possible when fewer than 3 samples exist):
            // the single nearest neighbour decides.
            best[0].2
        } else {
            2 * shadow_votes > self.k
        };
        KnnVote { posterior, shadow }
    }

    /// Per-pixel shadow posterior; identical feature vectors are classified
    /// once.
    pub fn posterior_image<T: Scalar>(&self, features: &RasterImage<T>) -> RasterImage<T> {
        let mut cache: HashMap<[u64; 3], f64> = HashMap::new();
        let data = (0..features.pixel_count())
            .map(|i| {
                let p = features.pixel(i);
                let key = [p[0].key_bits(), p[1].key_bits(), p[2].key_bits()];
                let post = *cache.entry(key).or_insert_with(|| {
                    self.classify([p[0].as_f64(), p[1].as_f64(), p[2].as_f64()])
                        .posterior
                });
                T::of(post)
            })
            .collect();
        RasterImage::from_vec(features.width(), features.height(), 1, data)
            .expect("posterior matches feature dimensions")
    }
}

#[inline]
fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}
