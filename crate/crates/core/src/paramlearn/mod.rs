//! Mixed-integer genetic learning of the six pipeline parameters against
//! summed error measurements.

mod ga;
mod objective;

pub use ga::{genetic_search, max_range_fraction, planted_objective, GaConfig, LearnOutcome};
pub use objective::{
    evaluate_objective, learn_params, FullPipeline, IdentityPipeline, ObjectiveSpec,
    PerfectPipeline, PreparedCase, RemovalPipeline,
};
