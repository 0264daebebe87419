use crate::imgcore::interp_at;
use crate::penumbra::PenumbraStrip;
use crate::scalar::Scalar;

/// Alignment stops once a sweep improves the error by less than this.
pub const ALIGN_TOLERANCE: f64 = 1e-8;

const GOLDEN_ITERS: usize = 40;

/// Source position sampled by output row `r` under stretch shift `a_s` and
/// center shift `a_k` for a column of `n` rows.
#[inline]
pub fn gamma_source(r: f64, n: usize, a_s: f64, a_k: f64) -> f64 {
    let c = (n - 1) as f64 / 2.0;
    c + (r - c - a_k) * c / (c + a_s)
}

/// Inverse of [`gamma_source`]: the output row that samples source row `u`.
#[inline]
pub fn gamma_inverse_source(u: f64, n: usize, a_s: f64, a_k: f64) -> f64 {
    let c = (n - 1) as f64 / 2.0;
    c + a_k + (u - c) * (c + a_s) / c
}

/// Shifts the column center down by `a_k` rows and stretches it about the
/// center by `a_s` rows per half, with linear interpolation and edge
/// extension.
pub fn gamma<T: Scalar>(values: &[T], a_s: f64, a_k: f64) -> Vec<T> {
    let n = values.len();
    if a_s == 0.0 && a_k == 0.0 {
        return values.to_vec();
    }
    (0..n)
        .map(|r| interp_at(values, gamma_source(r as f64, n, a_s, a_k)))
        .collect()
}

/// Undoes [`gamma`] on the interior rows.
pub fn gamma_inverse<T: Scalar>(values: &[T], a_s: f64, a_k: f64) -> Vec<T> {
    let n = values.len();
    if a_s == 0.0 && a_k == 0.0 {
        return values.to_vec();
    }
    (0..n)
        .map(|u| interp_at(values, gamma_inverse_source(u as f64, n, a_s, a_k)))
        .collect()
}

pub fn alignment_error(column: &[f64], reference: &[f64], a_s: f64, a_k: f64) -> f64 {
    let warped = gamma(column, a_s, a_k);
    warped
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / column.len() as f64
}

/// Finds `(a_s, a_k)` minimizing [`alignment_error`] within
/// `[-n/4, n/4]²`: an integer grid seeds alternating golden-section searches
/// over a unit bracket around the current estimate.
pub fn solve_alignment(column: &[f64], reference: &[f64]) -> (f64, f64, f64) {
    let n = column.len();
    let bound = (n as f64 / 4.0).floor();
    // Stretching by -c would collapse the column to a point.
    let c = (n - 1) as f64 / 2.0;
    let s_lo = (-bound).max(-c + 0.5);
    let err = |s: f64, k: f64| alignment_error(column, reference, s, k);

    let (mut s, mut k) = (0.0, 0.0);
    let mut best = err(0.0, 0.0);
    let ib = bound as i64;
    for ik in -ib..=ib {
        for is in -ib..=ib {
            let (ss, kk) = (is as f64, ik as f64);
            if ss < s_lo {
                continue;
            }
            let e = err(ss, kk);
            if e < best {
                best = e;
                s = ss;
                k = kk;
            }
        }
    }
    loop {
        let before = best;
        let (nk, ek) = golden(|v| err(s, v), k - 1.0, k + 1.0, -bound, bound);
        if ek < best {
            k = nk;
            best = ek;
        }
        let (ns, es) = golden(|v| err(v, k), s - 1.0, s + 1.0, s_lo, bound);
        if es < best {
            s = ns;
            best = es;
        }
        if before - best < ALIGN_TOLERANCE {
            break;
        }
    }
    (s, k, best)
}

fn golden(f: impl Fn(f64) -> f64, lo: f64, hi: f64, min: f64, max: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.max(min), hi.min(max));
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_ITERS {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Channel-averaged column `c` minus its lit-end value, so that columns on
/// different materials differ only in their illumination change.
pub fn relative_column<T: Scalar>(strip: &PenumbraStrip<T>, c: usize) -> Vec<f64> {
    let mut col = strip.gray_column(c);
    let lit = col[col.len() - 1];
    for v in col.iter_mut() {
        *v -= lit;
    }
    col
}

/// Per-row mean of the relative columns.
pub fn reference_profile<T: Scalar>(strip: &PenumbraStrip<T>) -> Vec<f64> {
    let mut sum = vec![0.0; strip.rows];
    for c in 0..strip.width() {
        for (s, v) in sum.iter_mut().zip(relative_column(strip, c)) {
            *s += v;
        }
    }
    sum.iter().map(|s| s / strip.width() as f64).collect()
}

/// Aligns every column's illumination change to the strip's mean change.
/// Strips with fewer than two columns come back unchanged.
pub fn align_strip<T: Scalar>(strip: &PenumbraStrip<T>) -> PenumbraStrip<T> {
    let mut out = strip.clone();
    if strip.width() < 2 {
        return out;
    }
    let reference = reference_profile(strip);
    for c in 0..strip.width() {
        let (a_s, a_k, _) = solve_alignment(&relative_column(strip, c), &reference);
        out.stretch[c] = a_s;
        out.shift[c] = a_k;
        let mut planes = Vec::with_capacity(3);
        for ch in 0..3 {
            let values: Vec<T> = strip.columns[c].iter().map(|p| p[ch]).collect();
            planes.push(gamma(&values, a_s, a_k));
        }
        out.columns[c] = (0..strip.rows)
            .map(|r| [planes[0][r], planes[1][r], planes[2][r]])
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sigmoid(n: usize, center: f64, width: f64) -> Vec<f64> {
        (0..n)
            .map(|r| -1.0 + 1.0 / (1.0 + (-(r as f64 - center) / width).exp()))
            .collect()
    }

    fn grid_oracle(column: &[f64], reference: &[f64]) -> (f64, f64) {
        let n = column.len();
        let bound = n as f64 / 4.0;
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let steps = (bound / 0.05) as i64;
        for i in -steps..=steps {
            for j in -steps..=steps {
                let (s, k) = (i as f64 * 0.05, j as f64 * 0.05);
                let e = alignment_error(column, reference, s, k);
                if e < best.0 {
                    best = (e, s, k);
                }
            }
        }
        (best.1, best.2)
    }

    #[test]
    fn identity_map_is_exact() {
        let col = sigmoid(21, 10.0, 2.0);
        assert_eq!(gamma(&col, 0.0, 0.0), col);
    }

    #[test]
    fn integer_shift_moves_content_down() {
        let col: Vec<f64> = (0..9).map(|r| r as f64).collect();
        let shifted = gamma(&col, 0.0, 2.0);
        assert_eq!(shifted, vec![0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn stretch_about_center() {
        // n = 9, c = 4; stretching by 4 halves the slope.
        let col: Vec<f64> = (0..9).map(|r| r as f64).collect();
        let out = gamma(&col, 4.0, 0.0);
        for (r, v) in out.iter().enumerate() {
            assert!((v - (4.0 + (r as f64 - 4.0) / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_columns_stay_put() {
        let n = 33;
        let col = sigmoid(n, 16.0, 3.0);
        let (s, k, e) = solve_alignment(&col, &col);
        assert_eq!((s, k, e), (0.0, 0.0, 0.0));
    }

    #[test]
    fn recovers_shift() {
        let n = 41;
        let reference = sigmoid(n, 20.0, 3.0);
        let shifted = gamma(&reference, 0.0, 3.0);
        let (s, k, _) = solve_alignment(&shifted, &reference);
        let (os, ok) = grid_oracle(&shifted, &reference);
        assert!((k + 3.0).abs() < 0.5, "k = {k}");
        assert!((k - ok).abs() < 0.1 && (s - os).abs() < 0.1);
    }

    #[test]
    fn recovers_stretch() {
        let n = 41;
        let c = 20.0;
        let reference = sigmoid(n, c, 3.0);
        // Stretch by 1.25 about the center; undoing it takes a_s = c(1/1.25 - 1).
        let stretched = gamma(&reference, 0.25 * c, 0.0);
        let (s, k, _) = solve_alignment(&stretched, &reference);
        let want = c * (1.0 / 1.25 - 1.0);
        let (os, _) = grid_oracle(&stretched, &reference);
        assert!((s - want).abs() < 0.5, "s = {s}, want {want}");
        assert!((s - os).abs() < 0.1);
        assert!(k.abs() < 0.5);
    }

    #[test]
    fn aligned_strip_matches_reference_columns() {
        use crate::penumbra::PenumbraStrip;
        let n = 33;
        let base = sigmoid(n, 16.0, 2.5);
        let mut columns: Vec<Vec<[f64; 3]>> = (0..8)
            .map(|_| base.iter().map(|&v| [v; 3]).collect())
            .collect();
        columns.push(gamma(&base, 0.0, 2.0).iter().map(|&v| [v; 3]).collect());
        let m = columns.len();
        let strip = PenumbraStrip {
            rows: n,
            columns,
            sources: (0..m).collect(),
            source_lengths: vec![n; m],
            stretch: vec![0.0; m],
            shift: vec![0.0; m],
        };
        let reference = reference_profile(&strip);
        let aligned = align_strip(&strip);
        for c in 0..m {
            let before = alignment_error(&relative_column(&strip, c), &reference, 0.0, 0.0);
            let after = alignment_error(&relative_column(&aligned, c), &reference, 0.0, 0.0);
            assert!(after <= before + 1e-15);
        }
        assert!(aligned.shift[8] < -1.0);
    }

    proptest! {
        #[test]
        fn inverse_round_trip_coordinates(r in 0.0f64..40.0, s in -10.0f64..10.0, k in -10.0f64..10.0) {
            let n = 41;
            let u = gamma_source(r, n, s, k);
            prop_assert!((gamma_inverse_source(u, n, s, k) - r).abs() < 1e-9);
        }

        #[test]
        fn inverse_round_trip_values(s in -5.0f64..5.0, k in -5.0f64..5.0, a in -2.0f64..2.0, b in -1.0f64..1.0) {
            let n = 41;
            let col: Vec<f64> = (0..n).map(|r| a * r as f64 + b).collect();
            let back = gamma_inverse(&gamma(&col, s, k), s, k);
            // Rows whose forward image stays inside the column are recovered.
            for u in 0..n {
                let q = gamma_inverse_source(u as f64, n, s, k);
                let src = gamma_source(q.floor(), n, s, k).min(gamma_source(q.ceil(), n, s, k));
                let src_hi = gamma_source(q.floor(), n, s, k).max(gamma_source(q.ceil(), n, s, k));
                if q >= 0.0 && q <= (n - 1) as f64 && src >= 0.0 && src_hi <= (n - 1) as f64 {
                    prop_assert!((back[u] - col[u]).abs() < 1e-6);
                }
            }
        }

        #[test]
        fn alignment_never_worsens(shift in -4.0f64..4.0, width in 1.0f64..5.0) {
            let n = 33;
            let reference = sigmoid(n, 16.0, 2.0);
            let col = sigmoid(n, 16.0 + shift, width);
            let (_, _, e) = solve_alignment(&col, &reference);
            prop_assert!(e <= alignment_error(&col, &reference, 0.0, 0.0));
        }
    }
}
