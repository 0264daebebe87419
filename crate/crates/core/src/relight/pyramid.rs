use crate::imgcore::{linear_from_log, MIN_SCALE};
use crate::penumbra::PenumbraStrip;
use crate::scalar::Scalar;

/// Averaging kernel widths are `2^n` for these exponents.
pub const LAYER_EXPONENTS: [u32; 5] = [2, 3, 4, 5, 6];

/// Below this many columns the averaging kernels cannot differ much; the
/// pyramid is still built but flagged.
pub const MIN_PYRAMID_COLUMNS: usize = 4;

/// Per-column scale estimates at several horizontal smoothing widths.
#[derive(Clone, Debug)]
pub struct ScalePyramid {
    /// `layers[n][c][r]`: horizontally averaged log-RGB strip.
    pub layers: Vec<Vec<Vec<[f64; 3]>>>,
    /// `scales[n][c][r]`: linear intensity relative to the lit end of the column.
    pub scales: Vec<Vec<Vec<[f64; 3]>>>,
    /// `roughness[c][n]`.
    pub roughness: Vec<Vec<f64>>,
    /// Set when the strip was too narrow for the layers to differ.
    pub narrow: bool,
}

/// Chosen layer per column and its clamped scales.
#[derive(Clone, Debug)]
pub struct ScaleSelection {
    pub threshold: f64,
    pub layer: Vec<usize>,
    /// `scales[c][r]`, clamped to `[MIN_SCALE, 1]`.
    pub scales: Vec<Vec<[f64; 3]>>,
}

/// Moving average across columns with a window of `width`, replicating the
/// edge columns. Even windows cover offsets `-width/2 ..= width-1-width/2`.
pub fn average_columns(columns: &[Vec<[f64; 3]>], width: usize) -> Vec<Vec<[f64; 3]>> {
    let m = columns.len();
    if m == 0 {
        return Vec::new();
    }
    let rows = columns[0].len();
    let lo = -((width / 2) as isize);
    let hi = (width - 1 - width / 2) as isize;
    (0..m as isize)
        .map(|c| {
            (0..rows)
                .map(|r| {
                    // Offsets from the center sample keep constant rows exact.
                    let center = columns[c as usize][r];
                    let mut acc = [0.0; 3];
                    for d in lo..=hi {
                        let src = (c + d).clamp(0, m as isize - 1) as usize;
                        for ch in 0..3 {
                            acc[ch] += columns[src][r][ch] - center[ch];
                        }
                    }
                    [0, 1, 2].map(|ch| center[ch] + acc[ch] / width as f64)
                })
                .collect()
        })
        .collect()
}

/// Sum over channels of squared second differences along a column.
pub fn column_roughness(column: &[[f64; 3]]) -> f64 {
    let mut sum = 0.0;
    for r in 1..column.len().saturating_sub(1) {
        for ch in 0..3 {
            let d2 = column[r - 1][ch] - 2.0 * column[r][ch] + column[r + 1][ch];
            sum += d2 * d2;
        }
    }
    sum
}

/// Linear intensities of a log-RGB column divided by those of its last row.
pub fn column_scales(column: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let last = column[column.len() - 1];
    let lit = [0, 1, 2].map(|ch| linear_from_log(last[ch]).max(1e-6));
    column
        .iter()
        .map(|p| [0, 1, 2].map(|ch| linear_from_log(p[ch]).max(0.0) / lit[ch]))
        .collect()
}

pub fn build_pyramid<T: Scalar>(strip: &PenumbraStrip<T>) -> ScalePyramid {
    let base: Vec<Vec<[f64; 3]>> = strip
        .columns
        .iter()
        .map(|col| col.iter().map(|p| p.map(|v| v.as_f64())).collect())
        .collect();
    let layers: Vec<_> = LAYER_EXPONENTS
        .iter()
        .map(|&n| average_columns(&base, 1 << n))
        .collect();
    let scales: Vec<Vec<Vec<[f64; 3]>>> = layers
        .iter()
        .map(|layer| layer.iter().map(|col| column_scales(col)).collect())
        .collect();
    let roughness = (0..base.len())
        .map(|c| {
            scales
                .iter()
                .map(|layer| column_roughness(&layer[c]))
                .collect()
        })
        .collect();
    ScalePyramid {
        layers,
        scales,
        roughness,
        narrow: base.len() < MIN_PYRAMID_COLUMNS,
    }
}

/// Layer choice for one column: the lowest roughness strictly above
/// `threshold`, or the first (most local) layer when none exceeds it.
pub fn choose_layer(roughness: &[f64], threshold: f64) -> usize {
    let mut best: Option<usize> = None;
    for (n, &e) in roughness.iter().enumerate() {
        if e > threshold && best.is_none_or(|b| e < roughness[b]) {
            best = Some(n);
        }
    }
    best.unwrap_or(0)
}

pub fn select_scales(pyramid: &ScalePyramid) -> ScaleSelection {
    let count: usize = pyramid.roughness.iter().map(|r| r.len()).sum();
    let threshold = if count == 0 {
        0.0
    } else {
        pyramid.roughness.iter().flatten().sum::<f64>() / count as f64
    };
    let layer: Vec<usize> = pyramid
        .roughness
        .iter()
        .map(|r| choose_layer(r, threshold))
        .collect();
    let scales = layer
        .iter()
        .enumerate()
        .map(|(c, &n)| {
            pyramid.scales[n][c]
                .iter()
                .map(|p| p.map(|v| v.clamp(MIN_SCALE, 1.0)))
                .collect()
        })
        .collect();
    ScaleSelection {
        threshold,
        layer,
        scales,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgcore::log_intensity;
    use crate::penumbra::PenumbraStrip;

    fn strip_of(columns: Vec<Vec<[f64; 3]>>) -> PenumbraStrip<f64> {
        let m = columns.len();
        PenumbraStrip {
            rows: columns[0].len(),
            columns,
            sources: (0..m).collect(),
            source_lengths: vec![0; m],
            stretch: vec![0.0; m],
            shift: vec![0.0; m],
        }
    }

    fn ramp_column(lo: f64) -> Vec<[f64; 3]> {
        (0..9)
            .map(|r| [log_intensity(lo + (1.0 - lo) * r as f64 / 8.0); 3])
            .collect()
    }

    #[test]
    fn identical_columns_give_identical_layers() {
        let strip = strip_of(vec![ramp_column(0.4); 10]);
        let p = build_pyramid(&strip);
        for n in 0..5 {
            assert_eq!(p.layers[n], strip.columns);
            assert_eq!(p.scales[n], p.scales[0]);
        }
        assert!(!p.narrow);
    }

    #[test]
    fn lit_end_scale_is_one() {
        let cols: Vec<_> = (0..12)
            .map(|i| ramp_column(0.1 + 0.05 * i as f64))
            .collect();
        let p = build_pyramid(&strip_of(cols));
        for layer in &p.scales {
            for col in layer {
                assert_eq!(col[8], [1.0; 3]);
            }
        }
    }

    #[test]
    fn moving_average_matches_naive_oracle() {
        let cols: Vec<Vec<[f64; 3]>> = (0..32).map(|c| vec![[(c % 2) as f64; 3]; 3]).collect();
        let avg = average_columns(&cols, 4);
        for c in 0..32i64 {
            let mut s = 0.0;
            for d in -2..=1 {
                s += ((c + d).clamp(0, 31) % 2) as f64;
            }
            assert!((avg[c as usize][1][0] - s / 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn roughness_cases() {
        assert_eq!(column_roughness(&[[0.7; 3]; 6]), 0.0);
        let ramp: Vec<[f64; 3]> = (0..8).map(|r| [r as f64 * 0.5; 3]).collect();
        assert_eq!(column_roughness(&ramp), 0.0);
        let sq: Vec<[f64; 3]> = (0..8).map(|r| [(r * r) as f64, 0.0, 0.0]).collect();
        // Six interior rows, second difference 2 each.
        assert_eq!(column_roughness(&sq), 6.0 * 4.0);
    }

    #[test]
    fn layer_rule() {
        assert_eq!(choose_layer(&[9.0, 5.0, 3.0, 2.0, 1.0], 4.0), 1);
        assert_eq!(choose_layer(&[2.0; 5], 2.0), 0);
        assert_eq!(choose_layer(&[0.0; 5], 0.0), 0);
    }

    #[test]
    fn selection_is_lowest_above_threshold() {
        let cols: Vec<Vec<[f64; 3]>> = (0..40)
            .map(|c| {
                (0..11)
                    .map(|r| {
                        let noise = if (c * 7 + r * 3) % 5 == 0 { 0.2 } else { 0.0 };
                        [log_intensity(0.4 + 0.05 * r as f64 + noise); 3]
                    })
                    .collect()
            })
            .collect();
        let p = build_pyramid(&strip_of(cols));
        let sel = select_scales(&p);
        for (c, &n) in sel.layer.iter().enumerate() {
            let e = &p.roughness[c];
            if e.iter().any(|&v| v > sel.threshold) {
                assert!(e[n] > sel.threshold);
                assert!(e.iter().all(|&v| v <= sel.threshold || v >= e[n]));
            } else {
                assert_eq!(n, 0);
            }
            assert!(sel.scales[c]
                .iter()
                .flatten()
                .all(|&v| (MIN_SCALE..=1.0).contains(&v)));
        }
    }

    #[test]
    fn log_scale_round_trip() {
        let lit = 0.8;
        let col: Vec<[f64; 3]> = [0.2, 0.5, lit]
            .iter()
            .map(|&v| [log_intensity(v); 3])
            .collect();
        let s = column_scales(&col);
        for (k, &v) in [0.2, 0.5, lit].iter().enumerate() {
            assert!((s[k][0] * lit - v).abs() < 1e-5);
        }
    }
}
