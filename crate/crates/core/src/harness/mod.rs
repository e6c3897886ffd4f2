//! Experiment harness: corpus, configuration, runners and reports.
mod config;
mod corpus;
mod experiments;
mod report;

pub use config::{
    Config, CorpusConfig, ExponentTriple, GridConfig, LocalMeansConfig, PeetreConfig, ScalesConfig, Thresholds,
};
pub use corpus::{gaussian, modulated, Corpus, CorpusEntry, EntrySummary, MAX_BOUNDARY_MASS, RANDOM_ENTRIES};
pub use experiments::{
    experiment_names, independence_pairs, run_experiment, run_ratio_on, LEMMAS, RATIO_EXPERIMENTS, STABILITY_TOLERANCE,
};
pub use report::{emit_report, Hypotheses, KernelSet, LemmaReport, LemmaRow, RatioEntry, RatioReport, Report};
