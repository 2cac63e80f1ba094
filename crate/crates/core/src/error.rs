use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("labels must be non-empty")]
    EmptyLabel,

    #[error("{kind} id {id} does not resolve (vocabulary size {size})")]
    UnknownId {
        kind: &'static str,
        id: u32,
        size: usize,
    },

    #[error("unknown {kind} label `{label}` (vocabulary is frozen)")]
    UnknownLabel { kind: &'static str, label: String },

    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("split ratios must be non-negative and sum to 1, got ({0}, {1}, {2})")]
    InvalidRatios(f64, f64, f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("the train split is empty")]
    EmptyTrainSplit,

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("no {0} entity-predicate pairs to guide prediction")]
    EmptyPairTable(&'static str),

    #[error(
        "sampler starved: {batches} consecutive proposal batches produced no new prediction \
         ({collected} of {requested} collected)"
    )]
    Starvation {
        batches: usize,
        collected: usize,
        requested: usize,
    },

    #[error("score {0} is not finite")]
    NonFiniteScore(f64),

    #[error("pair precision is undefined for an empty pair set")]
    NoPairs,

    #[error("R/C ratio is undefined: no row is annotated as correct")]
    NoCorrectRows,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
