use crate::error::{Result, UmbraError};
use crate::imgcore::{linear_from_log, resample_column, RasterImage};
use crate::penumbra::SamplingLine;
use crate::scalar::Scalar;

/// Length-normalized log-RGB profiles stacked as columns, shadow end at row 0.
#[derive(Clone, Debug, PartialEq)]
pub struct PenumbraStrip<T> {
    pub rows: usize,
    /// One entry per column, each `rows` long.
    pub columns: Vec<Vec<[T; 3]>>,
    /// Index of each column's sampling line in the list it was built from.
    pub sources: Vec<usize>,
    /// Original profile length of each column.
    pub source_lengths: Vec<usize>,
    /// Stretch shift per column (zero until aligned).
    pub stretch: Vec<f64>,
    /// Center shift per column (zero until aligned).
    pub shift: Vec<f64>,
}

impl<T: Scalar> PenumbraStrip<T> {
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    /// Channel-averaged column.
    pub fn gray_column(&self, c: usize) -> Vec<f64> {
        self.columns[c]
            .iter()
            .map(|p| (p[0].as_f64() + p[1].as_f64() + p[2].as_f64()) / 3.0)
            .collect()
    }

    pub fn row_mean(&self, r: usize) -> f64 {
        let sum: f64 = self
            .columns
            .iter()
            .map(|col| (col[r][0].as_f64() + col[r][1].as_f64() + col[r][2].as_f64()) / 3.0)
            .sum();
        sum / self.width() as f64
    }

    /// Rows × columns RGB image with log intensities mapped back to linear.
    pub fn to_image(&self) -> RasterImage<T> {
        let mut img = RasterImage::new(self.width().max(1), self.rows, 3);
        for (x, col) in self.columns.iter().enumerate() {
            for (y, p) in col.iter().enumerate() {
                for c in 0..3 {
                    let v = linear_from_log(p[c]);
                    img.set(x, y, c, num_traits::clamp(v, T::zero(), T::one()));
                }
            }
        }
        img
    }
}

/// Stacks `lines` (in order) into a strip of `max length` rows.
pub fn build_strip<T: Scalar>(lines: &[SamplingLine<T>]) -> Result<PenumbraStrip<T>> {
    let rows = lines.iter().map(|l| l.len()).max().ok_or_else(|| {
        UmbraError::NoValidSamples("no sampling lines to build a strip from".into())
    })?;
    let mut columns = Vec::with_capacity(lines.len());
    for line in lines {
        let mut planes = Vec::with_capacity(3);
        for c in 0..3 {
            let values: Vec<T> = line.profile.iter().map(|p| p[c]).collect();
            planes.push(resample_column(&values, rows)?);
        }
        columns.push(
            (0..rows)
                .map(|r| [planes[0][r], planes[1][r], planes[2][r]])
                .collect(),
        );
    }
    Ok(PenumbraStrip {
        rows,
        columns,
        sources: (0..lines.len()).collect(),
        source_lengths: lines.iter().map(|l| l.len()).collect(),
        stretch: vec![0.0; lines.len()],
        shift: vec![0.0; lines.len()],
    })
}
