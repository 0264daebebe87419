use std::fmt::Write as _;

use serde::Serialize;

use super::dataset::{Labels, ATTRIBUTES};
use super::metrics::ScoreRecord;

/// Scores of one evaluated case.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseScore {
    pub id: String,
    pub labels: Option<Labels>,
    pub all: ScoreRecord,
    /// Missing when the case has no shadow pixels to score.
    pub shadow: Option<ScoreRecord>,
}

pub const STRONG: u8 = 3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub attribute: String,
    pub degree: Option<u8>,
    pub n_cases: usize,
    pub mean_er_all: Option<f64>,
    pub std_er_all: Option<f64>,
    pub mean_er_shadow: Option<f64>,
    pub std_er_shadow: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttributeReport {
    pub rows: Vec<ReportRow>,
}

pub const CSV_HEADER: &str =
    "attribute,degree,n_cases,mean_Er_all,std_Er_all,mean_Er_shadow,std_Er_shadow";

/// Whether a labeled case belongs to the cell of attribute `a` at `degree`:
/// it has that degree and no other attribute is strong.
pub fn in_cell(labels: &Labels, a: usize, degree: u8) -> bool {
    let d = labels.degrees();
    d[a] == degree && d.iter().enumerate().all(|(i, &v)| i == a || v != STRONG)
}

/// Labeled cases without any strong attribute.
pub fn in_other(labels: &Labels) -> bool {
    labels.degrees().iter().all(|&v| v != STRONG)
}

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (Some(mean), Some(var.sqrt()))
}

fn row(attribute: &str, degree: Option<u8>, cases: &[&CaseScore]) -> ReportRow {
    let all: Vec<f64> = cases.iter().map(|c| c.all.e_r).collect();
    let shadow: Vec<f64> = cases
        .iter()
        .filter_map(|c| c.shadow.map(|s| s.e_r))
        .collect();
    let (mean_er_all, std_er_all) = mean_std(&all);
    let (mean_er_shadow, std_er_shadow) = mean_std(&shadow);
    ReportRow {
        attribute: attribute.to_string(),
        degree,
        n_cases: cases.len(),
        mean_er_all,
        std_er_all,
        mean_er_shadow,
        std_er_shadow,
    }
}

/// Attribute-by-degree table of error ratios. Unlabeled cases only count
/// toward the final "Mean" row.
pub fn attribute_report(scores: &[CaseScore]) -> AttributeReport {
    let mut sorted: Vec<&CaseScore> = scores.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut rows = Vec::new();
    for (a, name) in ATTRIBUTES.iter().enumerate() {
        for degree in 1..=3 {
            let cell: Vec<&CaseScore> = sorted
                .iter()
                .copied()
                .filter(|c| c.labels.as_ref().is_some_and(|l| in_cell(l, a, degree)))
                .collect();
            rows.push(row(name, Some(degree), &cell));
        }
    }
    let other: Vec<&CaseScore> = sorted
        .iter()
        .copied()
        .filter(|c| c.labels.as_ref().is_some_and(in_other))
        .collect();
    rows.push(row("Other", None, &other));
    rows.push(row("Mean", None, &sorted));
    AttributeReport { rows }
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_else(|| "n/a".into())
}

impl AttributeReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let degree = r.degree.map(|d| d.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.attribute,
                degree,
                r.n_cases,
                cell(r.mean_er_all),
                cell(r.std_er_all),
                cell(r.mean_er_shadow),
                cell(r.std_er_shadow)
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<13} {:>6} {:>7} {:>21} {:>21}\n",
            "attribute", "degree", "cases", "Er all (mean/std)", "Er shadow (mean/std)"
        );
        for r in &self.rows {
            let degree = r
                .degree
                .map(|d| d.to_string())
                .unwrap_or_else(|| "-".into());
            let pair = |m: Option<f64>, s: Option<f64>| match (m, s) {
                (Some(m), Some(s)) => format!("{m:.4} / {s:.4}"),
                _ => "n/a".into(),
            };
            let _ = writeln!(
                out,
                "{:<13} {:>6} {:>7} {:>21} {:>21}",
                r.attribute,
                degree,
                r.n_cases,
                pair(r.mean_er_all, r.std_er_all),
                pair(r.mean_er_shadow, r.std_er_shadow)
            );
        }
        out
    }
}
