//! Experiment plumbing: datasets, offline trajectory files, OLR pair
//! sampling, the training loop and evaluation metrics.
//!
//! All randomness descends from `ExperimentConfig::seed` through
//! [`derive_seed`], so a config file fully determines a run.

mod config;
mod data;
mod metrics;
mod pairs;
mod train;
mod trajectories;

use crate::codec::CodecError;
use crate::dfs::{InvarianceError, OrderError};
use crate::graph::GraphError;
use crate::recurrent::ModelError;

pub use config::{ExperimentConfig, GraphKind, LrSchedule, OlrMode, OptimizerKind, PairSource, Task, VocabChoice, CONFIG_KEYS};
pub use data::{build_datasets, dataset_from_graphs, build_tree_lm_dataset, build_wiener_dataset, generate_graphs, Dataset, Example};
pub use metrics::{
    evaluate_generation, evaluate_regression, generation_metrics, parse_metrics, regression_metrics, write_metrics,
    GenerationMetrics, RegressionMetrics,
};
pub use pairs::{sample_olr_pair, sample_record_pair, sample_subgraph_pair, PairInput};
pub use train::{train, train_with_log, EpochStats, StopReason, TrainLog};
pub use trajectories::{
    designated_ordering, filter_records, precompute_trajectories, read_trajectory_file, write_trajectory_file,
    FilterSummary, PrecomputeSummary, TrajectoryRecord,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("infeasible request: {0}")]
    Infeasible(String),
    #[error("trajectory file line {line}: {message}")]
    TrajectoryFile { line: usize, message: String },
    #[error("record {0} has fewer than two trajectories")]
    NotEnoughTrajectories(String),
    #[error("no OLR pair found after {0} attempts")]
    RetriesExhausted(usize),
    #[error("evaluation set is empty")]
    EmptyEvaluationSet,
    #[error("K = {k} exceeds sample count {samples}")]
    KTooLarge { k: usize, samples: usize },
    #[error("training diverged at epoch {epoch}: {detail}")]
    Diverged { epoch: usize, detail: String },
    #[error("metrics line {line}: {message}")]
    Metrics { line: usize, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Invariance(#[from] InvarianceError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Child seed for `tag` under `master`: splitmix64 of the master seed xored
/// with the splitmix64 of the tag's FNV-1a hash. Stable across platforms.
pub fn derive_seed(master: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01B3);
    }
    splitmix64(master ^ splitmix64(h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        assert_eq!(derive_seed(7, "data"), derive_seed(7, "data"));
        assert_ne!(derive_seed(7, "data"), derive_seed(7, "model"));
        assert_ne!(derive_seed(7, "data"), derive_seed(8, "data"));
        // pinned so that seed derivation never changes silently
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }
}
