use std::sync::Mutex;

use umbra_core::detect::{Stroke, StrokeLabel, StrokeSet};
use umbra_core::imgcore::RasterImage;
use umbra_core::paramlearn::{
    evaluate_objective, genetic_search, learn_params, max_range_fraction, planted_objective,
    GaConfig, IdentityPipeline, ObjectiveSpec, PerfectPipeline, PreparedCase, RemovalPipeline,
};
use umbra_core::{ParamVector, Result, UmbraError};

fn planted() -> ParamVector {
    ParamVector {
        h1: 21,
        h2: 7,
        h3: 0.62,
        h4: 0.31,
        h5: 4.2,
        h6: 0.77,
    }
}

#[test]
fn recovers_a_planted_optimum() {
    for seed in [1, 2, 3] {
        let target = planted();
        let config = GaConfig {
            generations: 50,
            seed,
            ..GaConfig::default()
        };
        let out = genetic_search(planted_objective(&target), &config).unwrap();
        assert!(out.trace.len() <= 50);
        let miss = max_range_fraction(&out.best, &target);
        assert!(miss < 0.05, "seed {seed}: {:?} misses by {miss}", out.best);
    }
}

#[test]
fn elitism_keeps_the_best_and_search_is_reproducible() {
    let objective = planted_objective(&planted());
    let seen = Mutex::new(Vec::new());
    let fitness = |p: &ParamVector| {
        seen.lock().unwrap().push(*p);
        objective(p)
    };
    let config = GaConfig {
        generations: 12,
        seed: 9,
        ..GaConfig::default()
    };
    let a = genetic_search(&fitness, &config).unwrap();
    assert!(a.trace.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(a.evaluations, 20 * 12 - 2 * 11);
    for p in seen.lock().unwrap().iter() {
        assert!(p.in_bounds(), "{p:?}");
        p.validate().unwrap();
    }
    let b = genetic_search(&objective, &config).unwrap();
    assert_eq!(a.best, b.best);
    assert_eq!(a.trace, b.trace);
}

#[test]
fn single_generation_returns_the_best_seeded_member() {
    let target = planted();
    let objective = planted_objective(&target);
    let config = GaConfig {
        generations: 1,
        seeded: vec![ParamVector::default(), target],
        ..GaConfig::default()
    };
    let out = genetic_search(&objective, &config).unwrap();
    assert_eq!(out.best, target);
    assert_eq!(out.best_fitness, 0.0);

    let config = GaConfig {
        generations: 1,
        seeded: vec![ParamVector::default()],
        ..GaConfig::default()
    };
    let shipped = planted_objective(&ParamVector::default());
    let out = genetic_search(&shipped, &config).unwrap();
    assert_eq!(out.best, ParamVector::default());
}

#[test]
fn zero_budget_is_rejected() {
    let config = GaConfig {
        generations: 0,
        ..GaConfig::default()
    };
    assert!(genetic_search(|_| 0.0, &config).is_err());
}

fn case(id: &str, strokes: bool) -> PreparedCase {
    let truth = RasterImage::from_fn(6, 6, 3, |x, y, c| 0.3 + 0.05 * ((x + y + c) % 5) as f64);
    let shadow = RasterImage::from_fn(6, 6, 3, |x, y, c| {
        truth.get(x, y, c) * if x < 3 { 0.5 } else { 1.0 }
    });
    PreparedCase {
        id: id.into(),
        shadow,
        truth,
        strokes: strokes.then(|| {
            StrokeSet::new(vec![
                Stroke::new(StrokeLabel::Shadow, 1.0, vec![[1.0, 1.0]]),
                Stroke::new(StrokeLabel::Lit, 1.0, vec![[4.0, 4.0]]),
            ])
        }),
    }
}

/// Moves the shadow image a fixed fraction of the way back toward the
/// ground truth, so the all-pixel error ratio is exactly `1 - fraction`.
struct PartialPipeline(f64);

impl RemovalPipeline for PartialPipeline {
    fn run(&self, _: &ParamVector, case: &PreparedCase, _: &StrokeSet) -> Result<RasterImage<f64>> {
        let mut out = case.shadow.clone();
        for (o, t) in out.data_mut().iter_mut().zip(case.truth.data()) {
            *o += self.0 * (t - *o);
        }
        Ok(out)
    }
}

struct PerCase;

impl RemovalPipeline for PerCase {
    fn run(&self, p: &ParamVector, case: &PreparedCase, s: &StrokeSet) -> Result<RasterImage<f64>> {
        let fraction = if case.id == "a" { 0.7 } else { 0.5 };
        PartialPipeline(fraction).run(p, case, s)
    }
}

struct Failing;

impl RemovalPipeline for Failing {
    fn run(&self, _: &ParamVector, _: &PreparedCase, _: &StrokeSet) -> Result<RasterImage<f64>> {
        Err(UmbraError::NoShadow("stub".into()))
    }
}

#[test]
fn stub_pipelines_give_exact_objectives() {
    let cases = vec![case("a", true), case("b", true), case("c", false)];
    let p = ParamVector::default();
    let one = ObjectiveSpec::all_cases(3);
    assert_eq!(
        evaluate_objective(&p, &cases, &one, &PerfectPipeline).unwrap(),
        0.0
    );
    assert_eq!(
        evaluate_objective(&p, &cases, &one, &IdentityPipeline).unwrap(),
        1.0
    );

    let weighted = ObjectiveSpec {
        measurements: vec![vec![0, 2], vec![1]],
        weights: vec![2.0, 0.5],
    };
    assert_eq!(
        evaluate_objective(&p, &cases, &weighted, &IdentityPipeline).unwrap(),
        2.5
    );

    let two = ObjectiveSpec {
        measurements: vec![vec![0], vec![1]],
        weights: vec![1.0, 1.0],
    };
    let e = evaluate_objective(&p, &cases, &two, &PerCase).unwrap();
    assert!((e - 0.8).abs() < 1e-12, "{e}");

    let strokeless = ObjectiveSpec {
        measurements: vec![vec![2]],
        weights: vec![1.0],
    };
    assert!(evaluate_objective(&p, &cases, &strokeless, &PerfectPipeline).is_err());
}

#[test]
fn failing_pipeline_scores_infinity() {
    let cases = vec![case("a", true)];
    let config = GaConfig {
        generations: 2,
        ..GaConfig::default()
    };
    let out = learn_params(&cases, &ObjectiveSpec::all_cases(1), &Failing, &config).unwrap();
    assert_eq!(out.best_fitness, f64::INFINITY);
    let none = vec![case("c", false)];
    assert!(learn_params(
        &none,
        &ObjectiveSpec::all_cases(1),
        &PerfectPipeline,
        &config
    )
    .is_err());
}
