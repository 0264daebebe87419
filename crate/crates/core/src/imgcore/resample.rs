use crate::error::{Result, UmbraError};
use crate::scalar::Scalar;

/// Linear interpolation of `values` at continuous index `pos`, clamped to the
/// ends of the sequence.
#[inline]
pub fn interp_at<T: Scalar>(values: &[T], pos: f64) -> T {
    let last = values.len() - 1;
    if pos <= 0.0 {
        return values[0];
    }
    if pos >= last as f64 {
        return values[last];
    }
    let i = pos.floor() as usize;
    let f = T::of(pos - i as f64);
    values[i] + (values[i + 1] - values[i]) * f
}

/// Resamples a 1-D sequence to `target_len` samples at uniform parameter
/// spacing; both endpoints are preserved exactly.
pub fn resample_column<T: Scalar>(values: &[T], target_len: usize) -> Result<Vec<T>> {
    if values.len() < 2 || target_len < 2 {
        return Err(UmbraError::InvalidInput(format!(
            "resampling needs lengths >= 2, got {} -> {target_len}",
            values.len()
        )));
    }
    if values.len() == target_len {
        return Ok(values.to_vec());
    }
    let step = (values.len() - 1) as f64 / (target_len - 1) as f64;
    let mut out: Vec<T> = (0..target_len)
        .map(|i| interp_at(values, i as f64 * step))
        .collect();
    out[0] = values[0];
    out[target_len - 1] = values[values.len() - 1];
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn midpoint() {
        assert_eq!(
            resample_column(&[0.0, 1.0], 3).unwrap(),
            vec![0.0, 0.5, 1.0]
        );
    }

    #[test]
    fn upsample_linear_sequence() {
        let out = resample_column(&[0.0, 2.0, 4.0, 6.0], 7).unwrap();
        assert_eq!(out, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn short_inputs_are_rejected() {
        assert!(resample_column(&[1.0f64], 4).is_err());
        assert!(resample_column(&[1.0f64, 2.0], 1).is_err());
    }

    proptest! {
        #[test]
        fn same_length_is_identity(v in prop::collection::vec(-5.0..5.0f64, 2..20)) {
            prop_assert_eq!(resample_column(&v, v.len()).unwrap(), v);
        }

        #[test]
        fn monotone_inputs_stay_monotone(
            mut v in prop::collection::vec(0.0..1.0f64, 2..20),
            m in 2usize..50,
        ) {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let out = resample_column(&v, m).unwrap();
            prop_assert_eq!(out[0], v[0]);
            prop_assert_eq!(out[m - 1], v[v.len() - 1]);
            prop_assert!(out.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
