//! Automatic evaluation against the test split and helpers for the manual
//! annotation round.
//!
//! Pair precision matches the orientation each pair carries: a
//! subject-known pair `(e, p)` counts as a hit iff some test triplet
//! `(e, p, ·)` exists.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kg::{EntityPredicatePair, KnowledgeGraph, Orientation, Split, SplitScope};
use crate::predict::Prediction;
use crate::seed::{self, Purpose};
use crate::FxHashSet;

/// Number of distinct predicted triplets that are test triplets.
pub fn hit_triplets(predictions: &[Prediction], kg: &KnowledgeGraph) -> usize {
    let distinct: FxHashSet<_> = predictions.iter().map(|p| p.triplet).collect();
    distinct
        .iter()
        .filter(|t| kg.split_of(t) == Some(Split::Test))
        .count()
}

pub fn pairs_from_predictions(
    predictions: &[Prediction],
    orientation: Orientation,
) -> BTreeSet<EntityPredicatePair> {
    predictions
        .iter()
        .map(|p| p.triplet.pair(orientation))
        .collect()
}

/// Test-split pairs in both orientations, for O(1) hit checks.
#[derive(Clone, Debug)]
pub struct TestPairIndex {
    pairs: FxHashSet<EntityPredicatePair>,
}

impl TestPairIndex {
    pub fn new(kg: &KnowledgeGraph) -> Self {
        let mut pairs = FxHashSet::default();
        for t in kg.iter_scope(SplitScope::TEST) {
            pairs.insert(t.pair(Orientation::SubjectKnown));
            pairs.insert(t.pair(Orientation::ObjectKnown));
        }
        Self { pairs }
    }

    pub fn is_hit(&self, pair: &EntityPredicatePair) -> bool {
        self.pairs.contains(pair)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairPrecision {
    pub pairs: usize,
    pub hits: usize,
    pub precision: f64,
}

pub fn pair_precision<'a>(
    pairs: impl IntoIterator<Item = &'a EntityPredicatePair>,
    index: &TestPairIndex,
) -> Result<PairPrecision> {
    let mut n = 0;
    let mut hits = 0;
    for p in pairs {
        n += 1;
        hits += usize::from(index.is_hit(p));
    }
    if n == 0 {
        return Err(Error::NoPairs);
    }
    Ok(PairPrecision {
        pairs: n,
        hits,
        precision: hits as f64 / n as f64,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupPrecision {
    pub label: String,
    pub pairs: usize,
    pub hits: usize,
    /// `None` for an empty group.
    pub precision: Option<f64>,
}

impl GroupPrecision {
    pub fn precision_text(&self) -> String {
        match self.precision {
            Some(p) => format!("{p:.6}"),
            None => "n/a".to_string(),
        }
    }
}

/// Pair precision per group. `labels` fixes the reported groups and their
/// order; each assignment's group index points into it.
pub fn group_precision<'a>(
    labels: &[String],
    assignments: impl IntoIterator<Item = (usize, &'a EntityPredicatePair)>,
    index: &TestPairIndex,
) -> Result<Vec<GroupPrecision>> {
    let mut groups: Vec<GroupPrecision> = labels
        .iter()
        .map(|l| GroupPrecision {
            label: l.clone(),
            pairs: 0,
            hits: 0,
            precision: None,
        })
        .collect();
    for (g, pair) in assignments {
        let group = groups
            .get_mut(g)
            .ok_or_else(|| Error::InvalidArgument(format!("group index {g} has no label")))?;
        group.pairs += 1;
        group.hits += usize::from(index.is_hit(pair));
    }
    for g in &mut groups {
        if g.pairs > 0 {
            g.precision = Some(g.hits as f64 / g.pairs as f64);
        }
    }
    Ok(groups)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub method: String,
    pub predictions: usize,
    pub hit_triplets: usize,
    pub predicted_pair_count: usize,
    pub pair_hits: usize,
    pub pair_precision: f64,
    pub groups: Vec<(String, Vec<GroupPrecision>)>,
}

impl EvalReport {
    pub fn evaluate(
        method: &str,
        predictions: &[Prediction],
        kg: &KnowledgeGraph,
        orientation: Orientation,
    ) -> Result<Self> {
        let index = TestPairIndex::new(kg);
        let pairs = pairs_from_predictions(predictions, orientation);
        let pp = pair_precision(&pairs, &index)?;
        Ok(Self {
            method: method.to_string(),
            predictions: predictions.len(),
            hit_triplets: hit_triplets(predictions, kg),
            predicted_pair_count: pp.pairs,
            pair_hits: pp.hits,
            pair_precision: pp.precision,
            groups: Vec::new(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "method: {}", self.method);
        let _ = writeln!(out, "predictions: {}", self.predictions);
        let _ = writeln!(out, "hit triplets: {}", self.hit_triplets);
        let _ = writeln!(
            out,
            "pair precision: {:.6} ({} of {} pairs)",
            self.pair_precision, self.pair_hits, self.predicted_pair_count
        );
        for (name, groups) in &self.groups {
            let _ = writeln!(out, "{name}:");
            for g in groups {
                let _ = writeln!(
                    out,
                    "  {}: precision {} ({} of {} pairs)",
                    g.label,
                    g.precision_text(),
                    g.hits,
                    g.pairs
                );
            }
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric\tvalue\n");
        let _ = writeln!(out, "method\t{}", self.method);
        let _ = writeln!(out, "predictions\t{}", self.predictions);
        let _ = writeln!(out, "hit_triplets\t{}", self.hit_triplets);
        let _ = writeln!(out, "predicted_pairs\t{}", self.predicted_pair_count);
        let _ = writeln!(out, "pair_hits\t{}", self.pair_hits);
        let _ = writeln!(out, "pair_precision\t{:.6}", self.pair_precision);
        for (name, groups) in &self.groups {
            for g in groups {
                let _ = writeln!(out, "{name}.{}.pairs\t{}", g.label, g.pairs);
                let _ = writeln!(out, "{name}.{}.precision\t{}", g.label, g.precision_text());
            }
        }
        out
    }
}

/// Spearman rank correlation with average ranks for ties. `None` when
/// either side is constant or fewer than two points are given.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / libm::sqrt(vx * vy))
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

pub const ANNOTATION_SAMPLE: usize = 200;

/// Uniform sample of `n` pairs without replacement. The pair set is taken in
/// canonical order first, so the result depends only on (set, seed). When
/// fewer than `n` pairs exist, all of them are returned and the flag is set.
pub fn annotation_sample(
    pairs: &BTreeSet<EntityPredicatePair>,
    n: usize,
    seed: u64,
) -> (Vec<EntityPredicatePair>, bool) {
    let mut items: Vec<EntityPredicatePair> = pairs.iter().copied().collect();
    let short = items.len() < n;
    let take = n.min(items.len());
    let mut rng = seed::rng(seed, Purpose::Sample);
    for i in 0..take {
        let j = rng.gen_range(i..items.len());
        items.swap(i, j);
    }
    items.truncate(take);
    (items, short)
}

const ANNOTATION_GUIDE: &str = "\
# Annotation sheet for predicted entity-predicate pairs.
# correct: 1 if the entity can sensibly have the attribute or relation the
#   predicate names (an inanimate object has no birthplace), else 0.
# relevant: 1 if a typical user looking up this entity would find the
#   predicate's value useful for their purpose, else 0.
# Fill both columns for every row; R/C is computed over rows marked correct.
";

/// TSV sheet with empty `correct` and `relevant` columns.
pub fn annotation_sheet(
    sample: &[EntityPredicatePair],
    kg: &KnowledgeGraph,
    method: &str,
) -> Result<String> {
    let mut out = String::from(ANNOTATION_GUIDE);
    let _ = writeln!(out, "# method: {method}");
    out.push_str("entity\tpredicate\torientation\tcorrect\trelevant\n");
    for p in sample {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t\t",
            kg.entities().label(p.entity)?,
            kg.predicates().label(p.predicate)?,
            p.orientation
        );
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RcSummary {
    pub rows: usize,
    pub correct: usize,
    pub relevant_and_correct: usize,
    /// Rows marked relevant but not correct; excluded from the ratio.
    pub relevant_not_correct: Vec<usize>,
    pub ratio: f64,
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" => Some(true),
        "0" | "false" | "no" | "n" => Some(false),
        _ => None,
    }
}

/// Share of correct rows that are also relevant, from a filled sheet.
pub fn rc_ratio(text: &str) -> Result<RcSummary> {
    let mut summary = RcSummary {
        rows: 0,
        correct: 0,
        relevant_and_correct: 0,
        relevant_not_correct: Vec::new(),
        ratio: 0.0,
    };
    let mut header_seen = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !header_seen && fields.first() == Some(&"entity") {
            header_seen = true;
            continue;
        }
        let bad = |reason: &str| Error::Malformed {
            line: i + 1,
            reason: reason.to_string(),
        };
        if fields.len() != 5 {
            return Err(bad("expected 5 tab-separated fields"));
        }
        let correct = parse_flag(fields[3]).ok_or_else(|| bad("`correct` must be 0/1"))?;
        let relevant = parse_flag(fields[4]).ok_or_else(|| bad("`relevant` must be 0/1"))?;
        summary.rows += 1;
        match (correct, relevant) {
            (true, true) => {
                summary.correct += 1;
                summary.relevant_and_correct += 1;
            }
            (true, false) => summary.correct += 1,
            (false, true) => summary.relevant_not_correct.push(i + 1),
            (false, false) => {}
        }
    }
    if summary.correct == 0 {
        return Err(Error::NoCorrectRows);
    }
    summary.ratio = summary.relevant_and_correct as f64 / summary.correct as f64;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{Triplet, VocabId, Vocabulary};
    use crate::predict::Method;
    use alloc::vec;

    fn kg() -> KnowledgeGraph {
        let e = Vocabulary::from_labels("entity", ["a", "b", "c", "d"]).unwrap();
        let p = Vocabulary::from_labels("predicate", ["p", "q"]).unwrap();
        let t = |h: u32, r: u32, o: u32| Triplet::new(VocabId(h), VocabId(r), VocabId(o));
        KnowledgeGraph::from_splits(
            e,
            p,
            vec![t(0, 1, 1), t(3, 1, 3)],
            vec![t(1, 1, 0)],
            vec![t(0, 0, 2), t(2, 1, 3)],
        )
        .unwrap()
    }

    fn pred(h: u32, r: u32, t: u32) -> Prediction {
        Prediction {
            triplet: Triplet::new(VocabId(h), VocabId(r), VocabId(t)),
            score: 0.0,
            method: Method::Rs,
            guiding_pair: None,
        }
    }

    fn pair(e: u32, r: u32) -> EntityPredicatePair {
        EntityPredicatePair::new(VocabId(e), VocabId(r), Orientation::SubjectKnown)
    }

    #[test]
    fn hits() {
        let kg = kg();
        assert_eq!(hit_triplets(&[pred(0, 0, 2), pred(2, 1, 3)], &kg), 2);
        assert_eq!(hit_triplets(&[pred(1, 0, 2), pred(3, 0, 0)], &kg), 0);
        let mut shuffled = vec![pred(2, 1, 3), pred(1, 0, 2), pred(0, 0, 2)];
        let a = hit_triplets(&shuffled, &kg);
        shuffled.reverse();
        assert_eq!(a, hit_triplets(&shuffled, &kg));
    }

    #[test]
    fn precision_cases() {
        let kg = kg();
        let index = TestPairIndex::new(&kg);
        let pp = pair_precision(&[pair(0, 0), pair(1, 1)], &index).unwrap();
        assert_eq!(pp.precision, 0.5);
        let pp = pair_precision(&[pair(0, 0), pair(2, 1)], &index).unwrap();
        assert_eq!(pp.precision, 1.0);
        assert_eq!(pair_precision(&[], &index), Err(Error::NoPairs));
        // Orientation is respected: c is the object of (a, p, c).
        let obj = EntityPredicatePair::new(VocabId(2), VocabId(0), Orientation::ObjectKnown);
        assert!(index.is_hit(&obj));
        assert!(!index.is_hit(&pair(2, 0)));
    }

    #[test]
    fn groups_and_weighted_mean() {
        let kg = kg();
        let index = TestPairIndex::new(&kg);
        let pairs = [pair(0, 0), pair(1, 1), pair(2, 1), pair(3, 0)];
        let labels = vec!["x".to_string(), "y".to_string(), "empty".to_string()];
        let groups = group_precision(
            &labels,
            pairs.iter().enumerate().map(|(i, p)| (i % 2, p)),
            &index,
        )
        .unwrap();
        assert_eq!(groups[0].precision, Some(1.0));
        assert_eq!(groups[1].precision, Some(0.0));
        assert_eq!(groups[2].precision, None);
        assert_eq!(groups[2].precision_text(), "n/a");
        let global = pair_precision(&pairs, &index).unwrap().precision;
        let weighted: f64 = groups
            .iter()
            .filter_map(|g| g.precision.map(|p| p * g.pairs as f64))
            .sum::<f64>()
            / pairs.len() as f64;
        assert!((global - weighted).abs() < 1e-15);
        let one = group_precision(&labels[..1], pairs.iter().map(|p| (0, p)), &index).unwrap();
        assert_eq!(one[0].precision, Some(global));
    }

    #[test]
    fn spearman_basics() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[1.0, 5.0, 9.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0], &[1.0, 1.0]), None);
        let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 1.0, 2.0, 2.0]).unwrap();
        assert!((r - 0.894427190999916).abs() < 1e-12);
    }

    #[test]
    fn sampling() {
        let pairs: BTreeSet<_> = (0..1000).map(|i| pair(i, 0)).collect();
        let (a, short) = annotation_sample(&pairs, 200, 7);
        assert!(!short);
        assert_eq!(a.len(), 200);
        assert_eq!(a.iter().collect::<BTreeSet<_>>().len(), 200);
        assert_eq!(annotation_sample(&pairs, 200, 7).0, a);
        assert_ne!(annotation_sample(&pairs, 200, 8).0, a);
        let few: BTreeSet<_> = (0..5).map(|i| pair(i, 0)).collect();
        let (all, short) = annotation_sample(&few, 200, 1);
        assert!(short);
        assert_eq!(all.len(), 5);
    }

    #[test]
    fn rc_ratio_rows() {
        let mut sheet =
            String::from("# guide\nentity\tpredicate\torientation\tcorrect\trelevant\n");
        for i in 0..100 {
            let rel = if i < 94 { 1 } else { 0 };
            sheet.push_str(&format!("e{i}\tp\tSubjectKnown\t1\t{rel}\n"));
        }
        sheet.push_str("x\tp\tSubjectKnown\t0\t1\n");
        sheet.push_str("y\tp\tSubjectKnown\t0\t0\n");
        let s = rc_ratio(&sheet).unwrap();
        assert!((s.ratio - 0.94).abs() < 1e-15);
        assert_eq!(s.relevant_not_correct, [103]);
        assert_eq!(s.rows, 102);

        let all = "e\tp\tSubjectKnown\tyes\tyes\n";
        assert_eq!(rc_ratio(all).unwrap().ratio, 1.0);
        assert_eq!(
            rc_ratio("e\tp\tSubjectKnown\t0\t1\n"),
            Err(Error::NoCorrectRows)
        );
        assert!(rc_ratio("e\tp\tSubjectKnown\t\t\n").is_err());
    }
}
