//! Batch front end: removal, dataset evaluation, ground-truth gating and
//! parameter learning.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use umbra_core::detect::StrokeSet;
use umbra_core::eval::{
    attribute_report, gt_accepted, gt_quality, load_dataset, score_case, CaseScore,
    DEFAULT_GT_THRESHOLD,
};
use umbra_core::imgcore::io::load_image;
use umbra_core::paramlearn::{
    genetic_search, learn_params, max_range_fraction, planted_objective, FullPipeline, GaConfig,
    ObjectiveSpec, PreparedCase,
};
use umbra_core::{remove_shadow, ParamVector, RemovalOptions, UmbraError};

use crate::artifacts::{intermediate_path, Artifact};

#[derive(Debug, Parser)]
#[command(name = "umbra", version, about = "Scribble-driven shadow removal")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Remove the shadow marked by a stroke file from one image.
    Remove(RemoveArgs),
    /// Score results against ground truth and write a per-attribute report.
    Eval(EvalArgs),
    /// Measure ground-truth quality and flag pairs above the threshold.
    GtCheck(GtCheckArgs),
    /// Learn pipeline parameters with the genetic optimizer.
    Learn(LearnArgs),
    /// Run the HTTP session service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct PipelineFlags {
    /// Parameter vector JSON; defaults to the shipped vector.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Skip the color-correction stage.
    #[arg(long)]
    pub no_color_correct: bool,
}

impl PipelineFlags {
    pub fn params(&self) -> anyhow::Result<ParamVector> {
        match &self.params {
            Some(p) => ParamVector::load(p)
                .with_context(|| format!("reading parameters from {}", p.display())),
            None => Ok(ParamVector::default()),
        }
    }

    pub fn options(&self) -> RemovalOptions {
        RemovalOptions {
            color_correct: !self.no_color_correct,
            ..RemovalOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct RemoveArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub strokes: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
    /// Also write mask, fusion, strips and scale fields next to the output.
    #[arg(long)]
    pub dump_intermediates: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Report CSV path; per-case scores go to `<stem>.cases.csv` beside it.
    #[arg(long)]
    pub report: PathBuf,
    /// Directory holding one `<case id>.png` result per case.
    #[arg(
        long,
        conflicts_with = "run_pipeline",
        required_unless_present = "run_pipeline"
    )]
    pub results: Option<PathBuf>,
    /// Run the removal pipeline on each case's strokes instead.
    #[arg(long)]
    pub run_pipeline: bool,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
}

#[derive(Debug, Args)]
pub struct GtCheckArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = DEFAULT_GT_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long, required_unless_present = "selftest")]
    pub dataset: Option<PathBuf>,
    /// Output JSON for the learned vector.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of generations.
    #[arg(long, default_value_t = 50)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Training cases drawn at random from those with strokes.
    #[arg(long, default_value_t = 5)]
    pub cases: usize,
    /// Optimize a synthetic objective with a planted optimum instead of the
    /// pipeline.
    #[arg(long)]
    pub selftest: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "UMBRA_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "UMBRA_MAX_SESSIONS", default_value_t = crate::service::DEFAULT_MAX_SESSIONS)]
    pub max_sessions: usize,
    #[arg(long, env = "UMBRA_PARAMS_PATH")]
    pub params: Option<PathBuf>,
}

/// 1 for file and codec failures, 2 for everything else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<UmbraError>() {
            return if e.is_io() { 1 } else { 2 };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 1;
        }
    }
    2
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Remove(a) => cmd_remove(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::GtCheck(a) => cmd_gtcheck(&a),
        Command::Learn(a) => cmd_learn(&a),
        Command::Serve(a) => crate::service::serve_blocking(&a),
    }
}

fn read_strokes(path: &Path) -> anyhow::Result<StrokeSet> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    StrokeSet::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn cmd_remove(a: &RemoveArgs) -> anyhow::Result<()> {
    let params = a.pipeline.params()?;
    let image =
        load_image::<f64>(&a.image).with_context(|| format!("loading {}", a.image.display()))?;
    let strokes = read_strokes(&a.strokes)?;
    let removal = remove_shadow(&image, &strokes, &params, &a.pipeline.options())?;
    write(&a.out, &Artifact::Result.encode(&removal)?)?;
    if a.dump_intermediates {
        for artifact in Artifact::INTERMEDIATES {
            write(
                &intermediate_path(&a.out, artifact),
                &artifact.encode(&removal)?,
            )?;
        }
    }
    println!(
        "{}: {} shadow pixels, {} component(s)",
        a.out.display(),
        removal.detection.mask.count(),
        removal.components.len()
    );
    Ok(())
}

fn write(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn cmd_eval(a: &EvalArgs) -> anyhow::Result<()> {
    let dataset = load_dataset(&a.dataset)?;
    for s in &dataset.skipped {
        eprintln!("skipped {}: {}", s.id, s.reason);
    }
    let params = a.pipeline.params()?;
    let options = a.pipeline.options();
    let outcomes: Vec<Result<CaseScore, (String, anyhow::Error)>> = dataset
        .cases
        .par_iter()
        .map(|case| {
            let score = || -> anyhow::Result<CaseScore> {
                let (shadow, truth) = case.load_images()?;
                let result = if a.run_pipeline {
                    let strokes = case
                        .load_strokes()?
                        .ok_or_else(|| anyhow!("no strokes.json"))?;
                    remove_shadow(&shadow, &strokes, &params, &options)?.result
                } else {
                    let dir = a
                        .results
                        .as_ref()
                        .expect("clap requires --results without --run-pipeline");
                    load_image(dir.join(format!("{}.png", case.id)))?
                };
                let mask = case.shadow_mask(&shadow, &truth)?;
                Ok(score_case(case, &shadow, &truth, &result, &mask)?)
            };
            score().map_err(|e| (case.id.clone(), e))
        })
        .collect();

    let mut scores = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(s) => scores.push(s),
            Err((id, e)) => eprintln!("case {id} not scored: {e:#}"),
        }
    }
    if scores.is_empty() {
        bail!(UmbraError::EmptyDataset("no case could be scored".into()));
    }
    let report = attribute_report(&scores);
    write(&a.report, report.to_csv().as_bytes())?;
    let stem = a
        .report
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    write(
        &a.report.with_file_name(format!("{stem}.cases.csv")),
        case_csv(&scores).as_bytes(),
    )?;
    print!("{}", report.to_table());
    Ok(())
}

fn case_csv(scores: &[CaseScore]) -> String {
    let mut out = String::from("id,Eo_all,En_all,Er_all,Eo_shadow,En_shadow,Er_shadow\n");
    for s in scores {
        let shadow = match &s.shadow {
            Some(r) => format!("{:.6},{:.6},{:.6}", r.e_o, r.e_n, r.e_r),
            None => "n/a,n/a,n/a".into(),
        };
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{}\n",
            s.id, s.all.e_o, s.all.e_n, s.all.e_r, shadow
        ));
    }
    out
}

pub fn cmd_gtcheck(a: &GtCheckArgs) -> anyhow::Result<()> {
    let dataset = load_dataset(&a.dataset)?;
    for s in &dataset.skipped {
        eprintln!("skipped {}: {}", s.id, s.reason);
    }
    let mut finite = Vec::new();
    let mut rejected = 0;
    for case in &dataset.cases {
        let (shadow, truth) = case.load_images()?;
        let q = gt_quality(&shadow, &truth)?;
        let accepted = gt_accepted(q, a.threshold);
        if !accepted {
            rejected += 1;
        }
        if q.is_finite() {
            finite.push(q);
        }
        println!(
            "{}\t{:.6}\t{}",
            case.id,
            q,
            if accepted { "accepted" } else { "rejected" }
        );
    }
    let mean = if finite.is_empty() {
        f64::NAN
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    println!(
        "mean Q_d {:.6} over {} case(s); {} rejected at threshold {}",
        mean,
        dataset.cases.len(),
        rejected,
        a.threshold
    );
    Ok(())
}

/// Largest per-parameter miss, as a fraction of its range, that the selftest
/// accepts.
pub const SELFTEST_TOLERANCE: f64 = 0.05;

/// Optimum planted by `learn --selftest`.
pub fn selftest_target() -> ParamVector {
    ParamVector {
        h1: 21,
        h2: 7,
        h3: 0.62,
        h4: 0.31,
        h5: 4.2,
        h6: 0.77,
    }
}

pub fn cmd_learn(a: &LearnArgs) -> anyhow::Result<()> {
    if a.budget == 0 {
        bail!(UmbraError::InvalidParameter(
            "invalid budget: at least one generation is required".into()
        ));
    }
    let config = GaConfig {
        generations: a.budget,
        seed: a.seed,
        ..GaConfig::default()
    };
    let outcome = if a.selftest {
        let target = selftest_target();
        let outcome = genetic_search(planted_objective(&target), &config)?;
        let miss = max_range_fraction(&outcome.best, &target);
        println!("planted {}", target.to_json());
        println!(
            "recovered {} (largest miss {:.2}% of range)",
            outcome.best.to_json(),
            miss * 100.0
        );
        if miss >= SELFTEST_TOLERANCE {
            bail!(
                "selftest missed the planted optimum by {:.2}% of a parameter range",
                miss * 100.0
            );
        }
        outcome
    } else {
        let dir = a
            .dataset
            .as_ref()
            .expect("clap requires --dataset without --selftest");
        let dataset = load_dataset(dir)?;
        let with_strokes: Vec<_> = dataset
            .cases
            .iter()
            .filter(|c| c.strokes.is_some())
            .collect();
        if with_strokes.is_empty() {
            bail!(UmbraError::InsufficientStrokes(
                "no case in the dataset has strokes.json".into()
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let mut chosen: Vec<_> = with_strokes
            .choose_multiple(&mut rng, a.cases.max(1))
            .copied()
            .collect();
        chosen.sort_by(|x, y| x.id.cmp(&y.id));
        let cases = chosen
            .iter()
            .map(|c| PreparedCase::load(c))
            .collect::<Result<Vec<_>, _>>()?;
        println!(
            "training on {}",
            cases
                .iter()
                .map(|c| c.id.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        );
        learn_params(
            &cases,
            &ObjectiveSpec::all_cases(cases.len()),
            &FullPipeline::default(),
            &config,
        )?
    };
    for (g, f) in outcome.trace.iter().enumerate() {
        println!("generation {g}: best {f:.6}");
    }
    if let Some(out) = &a.out {
        write(out, format!("{}\n", outcome.best.to_json()).as_bytes())?;
    }
    println!("{}", outcome.best.to_json());
    Ok(())
}
