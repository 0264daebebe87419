use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Result, UmbraError};
use crate::params::{
    ParamVector, H1_BOUNDS, H2_BOUNDS, H3_BOUNDS, H4_BOUNDS, H5_BOUNDS, H6_BOUNDS,
};

#[derive(Clone, Debug)]
pub struct GaConfig {
    pub population: usize,
    pub tournament: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Standard deviation of real-gene mutation as a fraction of the range.
    pub mutation_scale: f64,
    pub elitism: usize,
    /// Generations evaluated, counting the initial population.
    pub generations: usize,
    pub seed: u64,
    /// Individuals placed in the initial population before random fill.
    pub seeded: Vec<ParamVector>,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 20,
            tournament: 3,
            crossover_rate: 0.8,
            mutation_rate: 0.15,
            mutation_scale: 0.1,
            elitism: 2,
            generations: 50,
            seed: 0,
            seeded: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LearnOutcome {
    pub best: ParamVector,
    pub best_fitness: f64,
    /// Best-ever fitness after each generation.
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

type Genome = [f64; 6];

const INTEGER_GENES: usize = 2;

fn bounds() -> [(f64, f64); 6] {
    [
        (H1_BOUNDS.0 as f64, H1_BOUNDS.1 as f64),
        (H2_BOUNDS.0 as f64, H2_BOUNDS.1 as f64),
        H3_BOUNDS,
        H4_BOUNDS,
        H5_BOUNDS,
        H6_BOUNDS,
    ]
}

fn encode(p: &ParamVector) -> Genome {
    let b = bounds();
    let g = [p.h1 as f64, p.h2 as f64, p.h3, p.h4, p.h5, p.h6];
    std::array::from_fn(|i| g[i].clamp(b[i].0, b[i].1))
}

fn decode(g: &Genome) -> ParamVector {
    ParamVector {
        h1: g[0].round() as usize,
        h2: g[1].round() as usize,
        h3: g[2],
        h4: g[3],
        h5: g[4],
        h6: g[5],
    }
}

fn random_gene(rng: &mut ChaCha8Rng, i: usize) -> f64 {
    let (lo, hi) = bounds()[i];
    if i < INTEGER_GENES {
        rng.random_range(lo as usize..=hi as usize) as f64
    } else {
        rng.random_range(lo..=hi)
    }
}

fn tournament(rng: &mut ChaCha8Rng, fitness: &[f64], size: usize) -> usize {
    let mut best = rng.random_range(0..fitness.len());
    for _ in 1..size {
        let c = rng.random_range(0..fitness.len());
        if fitness[c] < fitness[best] {
            best = c;
        }
    }
    best
}

fn mutate(rng: &mut ChaCha8Rng, g: &mut Genome, config: &GaConfig) {
    let b = bounds();
    for i in 0..6 {
        if rng.random::<f64>() >= config.mutation_rate {
            continue;
        }
        if i < INTEGER_GENES {
            g[i] = random_gene(rng, i);
        } else {
            let sd = config.mutation_scale * (b[i].1 - b[i].0);
            let step = Normal::new(0.0, sd)
                .expect("positive deviation")
                .sample(rng);
            g[i] = (g[i] + step).clamp(b[i].0, b[i].1);
        }
    }
}

fn record(pop: &[Genome], scores: &[f64], best: &mut (Genome, f64), trace: &mut Vec<f64>) {
    for (g, &s) in pop.iter().zip(scores) {
        if s < best.1 {
            *best = (*g, s);
        }
    }
    trace.push(best.1);
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Mixed-integer genetic minimization of `fitness` over the parameter
/// bounds. Evaluations within a generation run in parallel; the result is
/// reproducible for a fixed seed because every random draw happens on the
/// calling thread.
pub fn genetic_search<F>(fitness: F, config: &GaConfig) -> Result<LearnOutcome>
where
    F: Fn(&ParamVector) -> f64 + Sync,
{
    if config.generations == 0 {
        return Err(UmbraError::InvalidParameter(
            "budget must be at least one generation".into(),
        ));
    }
    if config.population < 2 || config.tournament == 0 || config.elitism > config.population {
        return Err(UmbraError::InvalidParameter(format!(
            "population {} / tournament {} / elitism {} is not a usable GA shape",
            config.population, config.tournament, config.elitism
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut population: Vec<Genome> = config
        .seeded
        .iter()
        .take(config.population)
        .map(encode)
        .collect();
    while population.len() < config.population {
        population.push(std::array::from_fn(|i| random_gene(&mut rng, i)));
    }
    let evaluate = |pop: &[Genome]| -> Vec<f64> {
        pop.par_iter()
            .map(|g| sanitize(fitness(&decode(g))))
            .collect()
    };

    let mut scores = evaluate(&population);
    let mut evaluations = population.len();
    let mut best = (population[0], scores[0]);
    let mut trace = Vec::with_capacity(config.generations);
    record(&population, &scores, &mut best, &mut trace);

    for _ in 1..config.generations {
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
        let mut next: Vec<Genome> = order[..config.elitism]
            .iter()
            .map(|&i| population[i])
            .collect();
        let mut next_scores: Vec<f64> =
            order[..config.elitism].iter().map(|&i| scores[i]).collect();
        let mut children = Vec::new();
        while next.len() + children.len() < config.population {
            let a = population[tournament(&mut rng, &scores, config.tournament)];
            let b = population[tournament(&mut rng, &scores, config.tournament)];
            let (mut c1, mut c2) = (a, b);
            if rng.random::<f64>() < config.crossover_rate {
                for i in 0..6 {
                    if rng.random::<bool>() {
                        std::mem::swap(&mut c1[i], &mut c2[i]);
                    }
                }
            }
            mutate(&mut rng, &mut c1, config);
            mutate(&mut rng, &mut c2, config);
            children.push(c1);
            if next.len() + children.len() < config.population {
                children.push(c2);
            }
        }
        next_scores.extend(evaluate(&children));
        evaluations += children.len();
        next.extend(children);
        population = next;
        scores = next_scores;
        record(&population, &scores, &mut best, &mut trace);
    }

    Ok(LearnOutcome {
        best: decode(&best.0),
        best_fitness: best.1,
        trace,
        evaluations,
    })
}

/// Normalized squared distance to a planted optimum; the learner's
/// self-test objective.
pub fn planted_objective(target: &ParamVector) -> impl Fn(&ParamVector) -> f64 + Sync {
    let t = encode(target);
    move |p: &ParamVector| {
        let g = encode(p);
        bounds()
            .iter()
            .enumerate()
            .map(|(i, (lo, hi))| ((g[i] - t[i]) / (hi - lo)).powi(2))
            .sum()
    }
}

/// Largest per-gene distance between two vectors as a fraction of each
/// gene's range.
pub fn max_range_fraction(a: &ParamVector, b: &ParamVector) -> f64 {
    let (ga, gb) = (encode(a), encode(b));
    bounds()
        .iter()
        .enumerate()
        .map(|(i, (lo, hi))| (ga[i] - gb[i]).abs() / (hi - lo))
        .fold(0.0, f64::max)
}
