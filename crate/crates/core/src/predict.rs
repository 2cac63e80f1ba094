//! Triplet prediction from a trained model.
//!
//! Unguided prediction (RS) proposes `(h, r, t)` with `r` drawn from the
//! train-split predicate marginal and `h`, `t` uniform, then accepts with
//! probability `e^{s − γ}`; since `s ≤ γ` this samples triplets in
//! proportion to `e^{s}`. Query-guided prediction (QG) keeps the entity and
//! predicate of a mined pair and only proposes the missing entity, shrinking
//! the candidate space from `|E|²·|P|` to `|E|` per pair.
//!
//! Proposals are generated in fixed-size blocks, each from its own seeded
//! stream, and consumed strictly in block order by a single collector. The
//! output for a given seed is therefore independent of how many blocks the
//! executor evaluates concurrently.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::kg::{EntityPredicatePair, KnowledgeGraph, Orientation, SplitScope, Triplet, VocabId};
use crate::rotate::{RotatEModel, Rotations};
use crate::seed::{self, Purpose};
use crate::sparql::QueryPairTable;
use crate::FxHashSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Rs,
    Qg,
    TopK,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rs => "RS",
            Method::Qg => "QG",
            Method::TopK => "TopK",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "RS" | "rs" => Some(Method::Rs),
            "QG" | "qg" => Some(Method::Qg),
            "TopK" | "topk" => Some(Method::TopK),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub triplet: Triplet,
    pub score: f64,
    pub method: Method,
    /// Present exactly for guided methods.
    pub guiding_pair: Option<EntityPredicatePair>,
}

/// `e^{min(s, γ) − γ}`.
pub fn accept_probability(score: f64, gamma: f64) -> Result<f64> {
    if !score.is_finite() {
        return Err(Error::NonFiniteScore(score));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    Ok(libm::exp(score.min(gamma) - gamma))
}

/// Predicate frequencies of the train split, normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct PredicateMarginal {
    predicates: Vec<VocabId>,
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
}

impl PredicateMarginal {
    pub fn from_kg(kg: &KnowledgeGraph) -> Result<Self> {
        let mut counts = alloc::vec![0u64; kg.num_predicates()];
        for t in kg.iter_scope(SplitScope::TRAIN) {
            counts[t.predicate.index()] += 1;
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyTrainSplit);
        }
        let mut predicates = Vec::new();
        let mut probabilities = Vec::new();
        for (i, &c) in counts.iter().enumerate() {
            if c > 0 {
                predicates.push(VocabId(i as u32));
                probabilities.push(c as f64 / total as f64);
            }
        }
        let mut cumulative = Vec::with_capacity(probabilities.len());
        let mut running = 0u64;
        for &p in &predicates {
            running += counts[p.index()];
            cumulative.push(running as f64 / total as f64);
        }
        Ok(Self {
            predicates,
            probabilities,
            cumulative,
        })
    }

    pub fn support(&self) -> &[VocabId] {
        &self.predicates
    }

    pub fn probability(&self, predicate: VocabId) -> f64 {
        self.predicates
            .iter()
            .position(|&p| p == predicate)
            .map_or(0.0, |i| self.probabilities[i])
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> VocabId {
        let u: f64 = rng.gen();
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.predicates[i.min(self.predicates.len() - 1)]
    }
}

/// Where candidate triplets come from.
pub trait ProposalSource: Sync {
    /// Number of distinct candidate triplets the source can propose.
    fn space_size(&self) -> u128;

    fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> (Triplet, Option<EntityPredicatePair>);
}

/// Marginal predicate, uniform head and tail.
#[derive(Clone, Debug)]
pub struct UnguidedProposals {
    pub marginal: PredicateMarginal,
    pub num_entities: usize,
}

impl ProposalSource for UnguidedProposals {
    fn space_size(&self) -> u128 {
        let e = self.num_entities as u128;
        e * e * self.marginal.support().len() as u128
    }

    fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> (Triplet, Option<EntityPredicatePair>) {
        let r = self.marginal.sample(rng);
        let n = self.num_entities as u32;
        let h = VocabId(rng.gen_range(0..n));
        let t = VocabId(rng.gen_range(0..n));
        (Triplet::new(h, r, t), None)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PairWeighting {
    /// Every unique pair is equally likely.
    #[default]
    Uniform,
    /// Pairs are drawn in proportion to their query frequency.
    Frequency,
}

impl PairWeighting {
    pub fn as_str(self) -> &'static str {
        match self {
            PairWeighting::Uniform => "uniform",
            PairWeighting::Frequency => "frequency",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uniform" => Some(PairWeighting::Uniform),
            "frequency" => Some(PairWeighting::Frequency),
            _ => None,
        }
    }
}

/// A guiding pair, then the open entity slot uniform over the vocabulary.
#[derive(Clone, Debug)]
pub struct GuidedProposals {
    pairs: Vec<EntityPredicatePair>,
    cumulative: Option<Vec<f64>>,
    num_entities: usize,
}

impl GuidedProposals {
    pub fn new(
        table: &QueryPairTable,
        orientation: Orientation,
        weighting: PairWeighting,
        num_entities: usize,
    ) -> Result<Self> {
        let pairs = table.pairs(orientation);
        if pairs.is_empty() {
            return Err(Error::EmptyPairTable(orientation.as_str()));
        }
        let cumulative = match weighting {
            PairWeighting::Uniform => None,
            PairWeighting::Frequency => {
                let total = table.total_frequency(orientation) as f64;
                let mut running = 0u64;
                Some(
                    pairs
                        .iter()
                        .map(|p| {
                            running += table.frequency(p);
                            running as f64 / total
                        })
                        .collect(),
                )
            }
        };
        Ok(Self {
            pairs,
            cumulative,
            num_entities,
        })
    }

    pub fn pairs(&self) -> &[EntityPredicatePair] {
        &self.pairs
    }

    /// Candidate space opened by a single guiding pair.
    pub fn space_per_pair(&self) -> u128 {
        self.num_entities as u128
    }
}

impl ProposalSource for GuidedProposals {
    fn space_size(&self) -> u128 {
        self.pairs.len() as u128 * self.space_per_pair()
    }

    fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> (Triplet, Option<EntityPredicatePair>) {
        let pair = match &self.cumulative {
            None => self.pairs[rng.gen_range(0..self.pairs.len())],
            Some(cum) => {
                let u: f64 = rng.gen();
                self.pairs[cum.partition_point(|&c| c <= u).min(self.pairs.len() - 1)]
            }
        };
        let open = VocabId(rng.gen_range(0..self.num_entities as u32));
        (pair.complete(open), Some(pair))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplerConfig {
    /// Proposals per block.
    pub block_size: usize,
    /// Abort after this many consecutive blocks that add no new prediction.
    pub starvation_blocks: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            block_size: 4096,
            starvation_blocks: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Accepted {
    pub triplet: Triplet,
    pub score: f64,
    pub pair: Option<EntityPredicatePair>,
}

/// Accepted proposals of one block, in proposal order.
pub fn sample_block<P: ProposalSource>(
    model: &RotatEModel,
    rotations: &Rotations,
    source: &P,
    seed: u64,
    block: u64,
    block_size: usize,
) -> Vec<Accepted> {
    let mut rng = seed::block_rng(seed, Purpose::Proposals, block);
    let mut out = Vec::new();
    for _ in 0..block_size {
        let (triplet, pair) = source.propose(&mut rng);
        let u: f64 = rng.gen();
        let score = model.score_with(rotations, &triplet);
        // Scores of a finite model are finite and never exceed γ.
        let p = libm::exp(score.min(model.gamma()) - model.gamma());
        if u < p {
            out.push(Accepted {
                triplet,
                score,
                pair,
            });
        }
    }
    out
}

/// Drives blocks through `exec` and feeds them, in block order, to `consume`
/// until it returns `true`. `consume` returns whether collection is done and
/// reports progress through `made_progress`.
fn drive<P, E, F>(
    model: &RotatEModel,
    source: &P,
    seed: u64,
    config: &SamplerConfig,
    exec: &E,
    requested: usize,
    mut consume: F,
) -> Result<()>
where
    P: ProposalSource,
    E: Executor,
    F: FnMut(Vec<Accepted>) -> (bool, bool, usize),
{
    let width = exec.width().max(1);
    let rotations = model.rotations();
    let mut next_block = 0usize;
    let mut stalled = 0usize;
    loop {
        let blocks = exec.map_range(next_block..next_block + width, |b| {
            sample_block(model, &rotations, source, seed, b as u64, config.block_size)
        });
        next_block += width;
        for accepted in blocks {
            let (done, progressed, collected) = consume(accepted);
            if done {
                return Ok(());
            }
            if progressed {
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= config.starvation_blocks {
                    return Err(Error::Starvation {
                        batches: stalled,
                        collected,
                        requested,
                    });
                }
            }
        }
    }
}

/// Raw accepted samples (duplicates and known triplets included), in block
/// order, until `count` are collected.
pub fn sample_accepted<P: ProposalSource, E: Executor>(
    model: &RotatEModel,
    source: &P,
    count: usize,
    seed: u64,
    config: &SamplerConfig,
    exec: &E,
) -> Result<Vec<Accepted>> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    drive(model, source, seed, config, exec, count, |block| {
        let before = out.len();
        for a in block {
            out.push(a);
            if out.len() == count {
                return (true, true, count);
            }
        }
        (false, out.len() > before, out.len())
    })?;
    Ok(out)
}

/// Collects `n` distinct accepted triplets outside train ∪ dev.
#[allow(clippy::too_many_arguments)]
pub fn collect_predictions<P: ProposalSource, E: Executor>(
    model: &RotatEModel,
    kg: &KnowledgeGraph,
    source: &P,
    n: usize,
    method: Method,
    seed: u64,
    config: &SamplerConfig,
    exec: &E,
) -> Result<Vec<Prediction>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "number of predictions must be at least 1".into(),
        ));
    }
    if config.block_size == 0 || config.starvation_blocks == 0 {
        return Err(Error::InvalidArgument(
            "sampler block size and starvation limit must be positive".into(),
        ));
    }
    if (n as u128) > source.space_size() {
        return Err(Error::InvalidArgument(format!(
            "{n} predictions requested but only {} candidate triplets exist",
            source.space_size()
        )));
    }
    model.check_vocab(kg)?;
    let mut seen: FxHashSet<Triplet> = FxHashSet::default();
    let mut out = Vec::with_capacity(n);
    drive(model, source, seed, config, exec, n, |block| {
        let before = out.len();
        for a in block {
            if kg.contains(&a.triplet, SplitScope::TRAIN_DEV) || !seen.insert(a.triplet) {
                continue;
            }
            out.push(Prediction {
                triplet: a.triplet,
                score: a.score,
                method,
                guiding_pair: a.pair,
            });
            if out.len() == n {
                return (true, true, n);
            }
        }
        (false, out.len() > before, out.len())
    })?;
    Ok(out)
}

/// Unguided rejection-sampling prediction.
pub fn predict_rs<E: Executor>(
    model: &RotatEModel,
    kg: &KnowledgeGraph,
    n: usize,
    seed: u64,
    config: &SamplerConfig,
    exec: &E,
) -> Result<Vec<Prediction>> {
    let source = UnguidedProposals {
        marginal: PredicateMarginal::from_kg(kg)?,
        num_entities: kg.num_entities(),
    };
    collect_predictions(model, kg, &source, n, Method::Rs, seed, config, exec)
}

/// Query-guided rejection-sampling prediction.
#[allow(clippy::too_many_arguments)]
pub fn predict_qg<E: Executor>(
    model: &RotatEModel,
    kg: &KnowledgeGraph,
    table: &QueryPairTable,
    n: usize,
    seed: u64,
    orientation: Orientation,
    weighting: PairWeighting,
    config: &SamplerConfig,
    exec: &E,
) -> Result<Vec<Prediction>> {
    let source = GuidedProposals::new(table, orientation, weighting, kg.num_entities())?;
    collect_predictions(model, kg, &source, n, Method::Qg, seed, config, exec)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TopKOutcome {
    pub predictions: Vec<Prediction>,
    /// Pairs actually used (fewer than `k` when the table is smaller).
    pub pairs_used: usize,
    pub truncated: bool,
    pub collisions: usize,
}

/// For each of the `k` most frequent pairs, the `m` best-scoring completions
/// by exhaustive scoring; completions already in train ∪ dev are dropped.
pub fn predict_topk(
    model: &RotatEModel,
    kg: &KnowledgeGraph,
    table: &QueryPairTable,
    k: usize,
    m: usize,
    orientation: Orientation,
) -> Result<TopKOutcome> {
    if k == 0 || m == 0 {
        return Err(Error::InvalidArgument("k and m must be at least 1".into()));
    }
    model.check_vocab(kg)?;
    let available = table.pairs(orientation).len();
    if available == 0 {
        return Err(Error::EmptyPairTable(orientation.as_str()));
    }
    let top = table.top_k(k, orientation);
    let rotations = model.rotations();
    let mut predictions = Vec::with_capacity(top.len() * m);
    let mut collisions = 0;
    for (pair, _) in &top {
        let mut scored: Vec<(f64, VocabId)> = kg
            .entities()
            .ids()
            .map(|e| (model.score_with(&rotations, &pair.complete(e)), e))
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(score, e) in scored.iter().take(m) {
            let triplet = pair.complete(e);
            if kg.contains(&triplet, SplitScope::TRAIN_DEV) {
                collisions += 1;
                continue;
            }
            predictions.push(Prediction {
                triplet,
                score,
                method: Method::TopK,
                guiding_pair: Some(*pair),
            });
        }
    }
    Ok(TopKOutcome {
        predictions,
        pairs_used: top.len(),
        truncated: k > available,
        collisions,
    })
}

/// Predictions per guiding pair.
pub fn per_pair_counts(predictions: &[Prediction]) -> BTreeMap<EntityPredicatePair, usize> {
    let mut counts = BTreeMap::new();
    for p in predictions {
        if let Some(pair) = p.guiding_pair {
            *counts.entry(pair).or_default() += 1;
        }
    }
    counts
}

/// `head<TAB>predicate<TAB>tail<TAB>score<TAB>method<TAB>pair_entity<TAB>pair_predicate`.
pub fn predictions_to_tsv(predictions: &[Prediction], kg: &KnowledgeGraph) -> Result<String> {
    let mut out = String::new();
    for p in predictions {
        let t = &p.triplet;
        let _ = write!(
            out,
            "{}\t{}\t{}\t{:.12}\t{}\t",
            kg.entities().label(t.head)?,
            kg.predicates().label(t.predicate)?,
            kg.entities().label(t.tail)?,
            p.score,
            p.method.as_str()
        );
        if let Some(pair) = p.guiding_pair {
            let _ = write!(
                out,
                "{}\t{}",
                kg.entities().label(pair.entity)?,
                kg.predicates().label(pair.predicate)?
            );
        } else {
            out.push('\t');
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn predictions_from_tsv(text: &str, kg: &KnowledgeGraph) -> Result<Vec<Prediction>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: &str| Error::Malformed {
            line: i + 1,
            reason: reason.to_string(),
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 7 {
            return Err(bad("expected 7 tab-separated fields"));
        }
        let triplet = Triplet::new(
            kg.entities().lookup(f[0])?,
            kg.predicates().lookup(f[1])?,
            kg.entities().lookup(f[2])?,
        );
        let score: f64 = f[3].parse().map_err(|_| bad("bad score"))?;
        let method = Method::parse(f[4]).ok_or_else(|| bad("unknown method"))?;
        let guiding_pair = match (f[5].is_empty(), f[6].is_empty()) {
            (true, true) => None,
            (false, false) => {
                let entity = kg.entities().lookup(f[5])?;
                let predicate = kg.predicates().lookup(f[6])?;
                let orientation = if entity == triplet.head {
                    Orientation::SubjectKnown
                } else {
                    Orientation::ObjectKnown
                };
                Some(EntityPredicatePair::new(entity, predicate, orientation))
            }
            _ => return Err(bad("guiding pair must have both fields or neither")),
        };
        if guiding_pair.is_some() == (method == Method::Rs) {
            return Err(bad(
                "guiding pair must be present exactly for guided methods",
            ));
        }
        out.push(Prediction {
            triplet,
            score,
            method,
            guiding_pair,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::kg::Vocabulary;
    use crate::rotate::Norm;
    use alloc::vec;

    #[test]
    fn acceptance_closed_forms() {
        assert_eq!(accept_probability(12.0, 12.0).unwrap(), 1.0);
        let p = accept_probability(12.0 - libm::log(4.0), 12.0).unwrap();
        assert!((p - 0.25).abs() < 1e-15);
        let p = accept_probability(12.0 - 50.0, 12.0).unwrap();
        assert!(p > 0.0 && (p - libm::exp(-50.0)).abs() < 1e-30);
        assert_eq!(accept_probability(13.0, 12.0).unwrap(), 1.0);
        assert!(matches!(
            accept_probability(f64::NAN, 12.0),
            Err(Error::NonFiniteScore(_))
        ));
        assert!(accept_probability(f64::INFINITY, 12.0).is_err());
    }

    fn toy() -> KnowledgeGraph {
        let e = Vocabulary::from_labels("entity", ["a", "b", "c", "d"]).unwrap();
        let p = Vocabulary::from_labels("predicate", ["p", "q"]).unwrap();
        let t = |h: u32, r: u32, o: u32| Triplet::new(VocabId(h), VocabId(r), VocabId(o));
        KnowledgeGraph::from_splits(
            e,
            p,
            vec![t(0, 0, 1), t(1, 0, 2), t(2, 0, 3), t(3, 1, 0)],
            vec![t(0, 1, 2)],
            vec![t(1, 1, 3)],
        )
        .unwrap()
    }

    #[test]
    fn marginal_from_train_only() {
        let kg = toy();
        let m = PredicateMarginal::from_kg(&kg).unwrap();
        assert_eq!(m.support(), [VocabId(0), VocabId(1)]);
        assert!((m.probability(VocabId(0)) - 0.75).abs() < 1e-15);
        assert!((m.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rs_outputs_are_novel_distinct_and_deterministic() {
        let kg = toy();
        let model = RotatEModel::init(4, 2, 3, 3.0, Norm::L1, 1);
        let cfg = SamplerConfig {
            block_size: 64,
            starvation_blocks: 100,
        };
        let a = predict_rs(&model, &kg, 10, 5, &cfg, &Sequential).unwrap();
        assert_eq!(a.len(), 10);
        let set: FxHashSet<_> = a.iter().map(|p| p.triplet).collect();
        assert_eq!(set.len(), 10);
        assert!(a
            .iter()
            .all(|p| !kg.contains(&p.triplet, SplitScope::TRAIN_DEV)
                && p.score <= model.gamma()
                && p.guiding_pair.is_none()));
        let b = predict_rs(&model, &kg, 10, 5, &cfg, &Sequential).unwrap();
        assert_eq!(a, b);
        let one = predict_rs(&model, &kg, 1, 9, &cfg, &Sequential).unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn qg_stays_on_the_guiding_pair() {
        let kg = toy();
        let model = RotatEModel::init(4, 2, 3, 3.0, Norm::L1, 1);
        let pair = EntityPredicatePair::new(VocabId(1), VocabId(1), Orientation::SubjectKnown);
        let table = QueryPairTable::from_counts([(pair, 4)]);
        let cfg = SamplerConfig {
            block_size: 32,
            starvation_blocks: 200,
        };
        let out = predict_qg(
            &model,
            &kg,
            &table,
            3,
            1,
            Orientation::SubjectKnown,
            PairWeighting::Uniform,
            &cfg,
            &Sequential,
        )
        .unwrap();
        assert_eq!(out.len(), 3);
        let tails: FxHashSet<_> = out.iter().map(|p| p.triplet.tail).collect();
        assert_eq!(tails.len(), 3);
        for p in &out {
            assert_eq!(p.triplet.head, VocabId(1));
            assert_eq!(p.triplet.predicate, VocabId(1));
            assert_eq!(p.guiding_pair, Some(pair));
        }
        let empty = QueryPairTable::default();
        assert!(matches!(
            predict_qg(
                &model,
                &kg,
                &empty,
                1,
                1,
                Orientation::SubjectKnown,
                PairWeighting::Uniform,
                &cfg,
                &Sequential
            ),
            Err(Error::EmptyPairTable(_))
        ));
    }

    #[test]
    fn starvation_is_reported() {
        let kg = toy();
        let model = RotatEModel::init(4, 2, 3, 3.0, Norm::L1, 1);
        let pair = EntityPredicatePair::new(VocabId(0), VocabId(1), Orientation::SubjectKnown);
        let table = QueryPairTable::from_counts([(pair, 1)]);
        let cfg = SamplerConfig {
            block_size: 16,
            starvation_blocks: 50,
        };
        // (a, q, c) is a dev triplet, so only 3 of the 4 completions are admissible.
        let err = predict_qg(
            &model,
            &kg,
            &table,
            4,
            1,
            Orientation::SubjectKnown,
            PairWeighting::Uniform,
            &cfg,
            &Sequential,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::Starvation {
                collected: 3,
                requested: 4,
                ..
            }
        ));
    }

    #[test]
    fn topk_ordering_and_tiebreak() {
        let kg = toy();
        let model = RotatEModel::init(4, 2, 3, 3.0, Norm::L1, 2);
        let pa = EntityPredicatePair::new(VocabId(3), VocabId(1), Orientation::SubjectKnown);
        let pb = EntityPredicatePair::new(VocabId(2), VocabId(0), Orientation::SubjectKnown);
        let pc = EntityPredicatePair::new(VocabId(1), VocabId(1), Orientation::SubjectKnown);
        let table = QueryPairTable::from_counts([(pa, 5), (pb, 2), (pc, 2)]);
        let top = table.top_k(2, Orientation::SubjectKnown);
        assert_eq!(top, [(pa, 5), (pb, 2)]);

        let out = predict_topk(&model, &kg, &table, 2, 1, Orientation::SubjectKnown).unwrap();
        assert_eq!(out.pairs_used, 2);
        assert_eq!(out.predictions.len() + out.collisions, 2);
        let best = kg
            .entities()
            .ids()
            .max_by(|a, b| {
                model
                    .triplet_score(&pb.complete(*a))
                    .total_cmp(&model.triplet_score(&pb.complete(*b)))
                    .then(b.cmp(a))
            })
            .unwrap();
        if !kg.contains(&pb.complete(best), SplitScope::TRAIN_DEV) {
            assert!(out
                .predictions
                .iter()
                .any(|p| p.triplet == pb.complete(best)));
        }

        let all = predict_topk(&model, &kg, &table, 10, 4, Orientation::SubjectKnown).unwrap();
        assert!(all.truncated);
        assert_eq!(all.pairs_used, 3);
        assert_eq!(all.predictions.len() + all.collisions, 12);
    }

    #[test]
    fn tsv_round_trip() {
        let kg = toy();
        let preds = vec![
            Prediction {
                triplet: Triplet::new(VocabId(0), VocabId(0), VocabId(3)),
                score: 1.5,
                method: Method::Rs,
                guiding_pair: None,
            },
            Prediction {
                triplet: Triplet::new(VocabId(3), VocabId(0), VocabId(1)),
                score: -0.25,
                method: Method::Qg,
                guiding_pair: Some(EntityPredicatePair::new(
                    VocabId(1),
                    VocabId(0),
                    Orientation::ObjectKnown,
                )),
            },
        ];
        let text = predictions_to_tsv(&preds, &kg).unwrap();
        assert!(text.starts_with("a\tp\td\t1.500000000000\tRS\t\t\n"));
        assert_eq!(predictions_from_tsv(&text, &kg).unwrap(), preds);
        assert!(predictions_from_tsv("a\tp\td\t1\tRS\tb\t\n", &kg).is_err());
    }
}
