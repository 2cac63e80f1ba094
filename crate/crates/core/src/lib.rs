//! Query-guided knowledge graph completion.
//!
//! The crate is `no_std` (it needs `alloc`) and holds every algorithmic piece
//! of the pipeline:
//!
//! - [`kg`]: interned vocabularies, triplet storage, train/dev/test splits.
//! - [`ingest`]: line parsers for N-Triples and TSV, sanitization rules,
//!   seeded splitting and entity/predicate metadata tables.
//! - [`sparql`]: a small SPARQL parser, entity–predicate pair extraction
//!   and query-log aggregation.
//! - [`rotate`]: the RotatE embedding model, its loss, analytic gradients,
//!   SGD training and a text checkpoint format.
//! - [`predict`]: rejection-sampling prediction (unguided and query-guided)
//!   and the top-k frequent query baseline.
//! - [`guidance`]: metadata compatibility and embedding-score binning.
//! - [`eval`]: hit triplets, pair precision, group precision and annotation
//!   sampling.
//! - [`synth`]: a seeded generator of typed synthetic benchmarks.
//!
//! File IO and the command-line interface live in the `querykgc` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod eval;
pub mod exec;
pub mod guidance;
pub mod ingest;
pub mod kg;
pub mod predict;
pub mod rotate;
pub mod seed;
pub mod sparql;
pub mod synth;

pub use error::{Error, Result};
pub use kg::{
    EntityPredicatePair, KnowledgeGraph, Orientation, Split, SplitScope, Triplet, VocabId,
    Vocabulary,
};

pub(crate) type FxHashMap<K, V> = hashbrown::HashMap<K, V, rustc_hash::FxBuildHasher>;
pub(crate) type FxHashSet<K> = hashbrown::HashSet<K, rustc_hash::FxBuildHasher>;
