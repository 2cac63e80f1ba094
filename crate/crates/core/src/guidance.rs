//! Post-hoc guidance over predicted entity–predicate pairs: compatibility
//! with entity-type/predicate-constraint metadata (KM) and binning by the
//! best embedding score (ES).

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ingest::MetadataTable;
use crate::kg::{EntityPredicatePair, KnowledgeGraph, Orientation};
use crate::predict::Prediction;

pub const ES_BINS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KmReason {
    DomainMatch,
    DomainMismatch,
    MissingEntityType,
    MissingPredicateConstraint,
    /// Neither the entity types nor the predicate constraint are known.
    MissingBoth,
}

impl KmReason {
    pub fn as_str(self) -> &'static str {
        match self {
            KmReason::DomainMatch => "DomainMatch",
            KmReason::DomainMismatch => "DomainMismatch",
            KmReason::MissingEntityType => "MissingEntityType",
            KmReason::MissingPredicateConstraint => "MissingPredicateConstraint",
            KmReason::MissingBoth => "MissingBoth",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KmVerdict {
    pub pair: EntityPredicatePair,
    pub compatible: bool,
    pub reason: KmReason,
}

/// A subject-known pair is compatible iff the entity has a type in the
/// predicate's domain; object-known pairs check the range. Type labels are
/// matched literally, and missing metadata makes a pair incompatible.
pub fn km_classify(
    pair: &EntityPredicatePair,
    metadata: &MetadataTable,
    kg: &KnowledgeGraph,
) -> Result<KmVerdict> {
    kg.entities().check(pair.entity)?;
    kg.predicates().check(pair.predicate)?;
    let types = metadata.entity_types.get(&pair.entity);
    let constraint = match pair.orientation {
        Orientation::SubjectKnown => metadata.predicate_domains.get(&pair.predicate),
        Orientation::ObjectKnown => metadata.predicate_ranges.get(&pair.predicate),
    };
    let reason = match (types, constraint) {
        (None, None) => KmReason::MissingBoth,
        (None, Some(_)) => KmReason::MissingEntityType,
        (Some(_), None) => KmReason::MissingPredicateConstraint,
        (Some(types), Some(allowed)) => {
            if types.iter().any(|t| allowed.contains(t)) {
                KmReason::DomainMatch
            } else {
                KmReason::DomainMismatch
            }
        }
    };
    Ok(KmVerdict {
        pair: *pair,
        compatible: reason == KmReason::DomainMatch,
        reason,
    })
}

pub fn km_classify_all<'a>(
    pairs: impl IntoIterator<Item = &'a EntityPredicatePair>,
    metadata: &MetadataTable,
    kg: &KnowledgeGraph,
) -> Result<Vec<KmVerdict>> {
    pairs
        .into_iter()
        .map(|p| km_classify(p, metadata, kg))
        .collect()
}

/// `entity<TAB>predicate<TAB>compatible<TAB>reason`.
pub fn km_to_tsv(verdicts: &[KmVerdict], kg: &KnowledgeGraph) -> Result<String> {
    let mut out = String::new();
    for v in verdicts {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            kg.entities().label(v.pair.entity)?,
            kg.predicates().label(v.pair.predicate)?,
            v.compatible,
            v.reason.as_str()
        );
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EsEntry {
    pub pair: EntityPredicatePair,
    pub max_score: f64,
    pub bin: usize,
}

/// Pairs sorted by descending best score, cut into contiguous groups of
/// near-equal size. Bin 0 holds the highest scores.
#[derive(Clone, Debug, PartialEq)]
pub struct EsBinning {
    pub entries: Vec<EsEntry>,
    pub num_bins: usize,
}

impl EsBinning {
    /// Fewer pairs than requested bins means singleton bins.
    pub fn is_degenerate(&self) -> bool {
        self.num_bins < ES_BINS
    }

    pub fn bin_sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0; self.num_bins];
        for e in &self.entries {
            sizes[e.bin] += 1;
        }
        sizes
    }

    /// `entity<TAB>predicate<TAB>max_score<TAB>bin`.
    pub fn to_tsv(&self, kg: &KnowledgeGraph) -> Result<String> {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{}\t{}\t{:.12}\t{}",
                kg.entities().label(e.pair.entity)?,
                kg.predicates().label(e.pair.predicate)?,
                e.max_score,
                e.bin
            );
        }
        Ok(out)
    }
}

/// Bin sizes for `n` items over `bins` groups, remainder on leading groups.
pub fn equal_count_sizes(n: usize, bins: usize) -> Vec<usize> {
    let base = n / bins;
    let rem = n % bins;
    (0..bins).map(|i| base + usize::from(i < rem)).collect()
}

pub fn es_bin(predictions: &[Prediction], orientation: Orientation) -> Result<EsBinning> {
    es_bin_with(predictions, orientation, ES_BINS)
}

pub fn es_bin_with(
    predictions: &[Prediction],
    orientation: Orientation,
    bins: usize,
) -> Result<EsBinning> {
    if predictions.is_empty() {
        return Err(Error::InvalidArgument("no predictions to bin".into()));
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("bin count must be positive".into()));
    }
    let mut best: BTreeMap<EntityPredicatePair, f64> = BTreeMap::new();
    for p in predictions {
        let pair = p.triplet.pair(orientation);
        best.entry(pair)
            .and_modify(|s| *s = s.max(p.score))
            .or_insert(p.score);
    }
    let mut ranked: Vec<(EntityPredicatePair, f64)> = best.into_iter().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let num_bins = bins.min(ranked.len());
    let sizes = equal_count_sizes(ranked.len(), num_bins);
    let mut entries = Vec::with_capacity(ranked.len());
    let mut iter = ranked.into_iter();
    for (bin, size) in sizes.into_iter().enumerate() {
        for (pair, max_score) in iter.by_ref().take(size) {
            entries.push(EsEntry {
                pair,
                max_score,
                bin,
            });
        }
    }
    Ok(EsBinning { entries, num_bins })
}
