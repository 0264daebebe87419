use crate::detect::StrokeSet;
use crate::error::{Result, UmbraError};
use crate::eval::{error_ratio, DatasetCase, Scope};
use crate::imgcore::{RasterImage, ShadowMask};
use crate::params::ParamVector;
use crate::pipeline::{remove_shadow, RemovalOptions};

use super::ga::{genetic_search, GaConfig, LearnOutcome};

/// A dataset case held in memory for repeated evaluation.
#[derive(Clone, Debug)]
pub struct PreparedCase {
    pub id: String,
    pub shadow: RasterImage<f64>,
    pub truth: RasterImage<f64>,
    pub strokes: Option<StrokeSet>,
}

impl PreparedCase {
    pub fn load(case: &DatasetCase) -> Result<Self> {
        let (shadow, truth) = case.load_images()?;
        Ok(Self {
            id: case.id.clone(),
            shadow,
            truth,
            strokes: case.load_strokes()?,
        })
    }
}

/// Anything that turns a case and a parameter vector into a result image.
pub trait RemovalPipeline: Sync {
    fn run(
        &self,
        params: &ParamVector,
        case: &PreparedCase,
        strokes: &StrokeSet,
    ) -> Result<RasterImage<f64>>;
}

/// The full removal pipeline.
#[derive(Clone, Debug, Default)]
pub struct FullPipeline {
    pub options: RemovalOptions,
}

impl RemovalPipeline for FullPipeline {
    fn run(
        &self,
        params: &ParamVector,
        case: &PreparedCase,
        strokes: &StrokeSet,
    ) -> Result<RasterImage<f64>> {
        Ok(remove_shadow(&case.shadow, strokes, params, &self.options)?.result)
    }
}

/// Returns the ground truth.
pub struct PerfectPipeline;

impl RemovalPipeline for PerfectPipeline {
    fn run(&self, _: &ParamVector, case: &PreparedCase, _: &StrokeSet) -> Result<RasterImage<f64>> {
        Ok(case.truth.clone())
    }
}

/// Returns the shadow image untouched.
pub struct IdentityPipeline;

impl RemovalPipeline for IdentityPipeline {
    fn run(&self, _: &ParamVector, case: &PreparedCase, _: &StrokeSet) -> Result<RasterImage<f64>> {
        Ok(case.shadow.clone())
    }
}

/// Weighted sum of error measurements; each measurement is the mean
/// all-pixel error ratio over a subset of cases (indices into the case
/// list).
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveSpec {
    pub measurements: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
}

impl ObjectiveSpec {
    /// One measurement over the first `n` cases with weight 1.
    pub fn all_cases(n: usize) -> Self {
        Self {
            measurements: vec![(0..n).collect()],
            weights: vec![1.0],
        }
    }

    pub fn validate(&self, n_cases: usize) -> Result<()> {
        if self.measurements.is_empty() {
            return Err(UmbraError::InvalidInput(
                "objective needs at least one measurement".into(),
            ));
        }
        if self.weights.len() != self.measurements.len() {
            return Err(UmbraError::InvalidInput(format!(
                "{} weights for {} measurements",
                self.weights.len(),
                self.measurements.len()
            )));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(UmbraError::InvalidInput(
                "weights must be non-negative".into(),
            ));
        }
        if self.measurements.iter().flatten().any(|&i| i >= n_cases) {
            return Err(UmbraError::InvalidInput(
                "measurement refers to a missing case".into(),
            ));
        }
        Ok(())
    }

    /// Combines measurement values with the weights.
    pub fn combine(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(e, w)| e * w).sum()
    }
}

/// Runs `pipeline` on every case with strokes and returns the weighted sum
/// of mean all-pixel error ratios. Cases without strokes do not count; a
/// measurement left with no cases is an error.
pub fn evaluate_objective(
    params: &ParamVector,
    cases: &[PreparedCase],
    objective: &ObjectiveSpec,
    pipeline: &dyn RemovalPipeline,
) -> Result<f64> {
    params.validate()?;
    objective.validate(cases.len())?;
    let mut ratios: Vec<Option<f64>> = vec![None; cases.len()];
    let mut values = Vec::with_capacity(objective.measurements.len());
    for subset in &objective.measurements {
        let mut sum = 0.0;
        let mut n = 0usize;
        for &i in subset {
            let case = &cases[i];
            let Some(strokes) = &case.strokes else {
                continue;
            };
            let e_r = match ratios[i] {
                Some(v) => v,
                None => {
                    let result = pipeline.run(params, case, strokes)?;
                    let mask = ShadowMask::new(case.truth.width(), case.truth.height());
                    let v = error_ratio(&case.truth, &case.shadow, &result, &mask, Scope::All)?.e_r;
                    ratios[i] = Some(v);
                    v
                }
            };
            sum += e_r;
            n += 1;
        }
        if n == 0 {
            return Err(UmbraError::InvalidInput(
                "a measurement has no cases with strokes".into(),
            ));
        }
        values.push(sum / n as f64);
    }
    Ok(objective.combine(&values))
}

/// Learns parameters on `cases`. A vector under which any case fails scores
/// infinity. The shipped defaults are always part of the initial
/// population.
pub fn learn_params(
    cases: &[PreparedCase],
    objective: &ObjectiveSpec,
    pipeline: &dyn RemovalPipeline,
    config: &GaConfig,
) -> Result<LearnOutcome> {
    objective.validate(cases.len())?;
    if !cases.iter().any(|c| c.strokes.is_some()) {
        return Err(UmbraError::InsufficientStrokes(
            "no case has a strokes file".into(),
        ));
    }
    let mut config = config.clone();
    if !config.seeded.contains(&ParamVector::default()) {
        config.seeded.insert(0, ParamVector::default());
    }
    genetic_search(
        |p| evaluate_objective(p, cases, objective, pipeline).unwrap_or(f64::INFINITY),
        &config,
    )
}
