//! Raw triplet ingestion, sanitization, splitting and metadata tables.
//!
//! Parsing works line by line on borrowed text so that callers can stream
//! large dumps from disk; the std crate owns the file handling.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::kg::{KnowledgeGraph, Split, Triplet, VocabId, Vocabulary};
use crate::seed::{self, Purpose};
use crate::sparql::QueryMentions;
use crate::FxHashSet;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ParseMode {
    /// Malformed lines are counted and skipped.
    #[default]
    Lenient,
    /// The first malformed line aborts the load.
    Strict,
}

/// Counters collected while loading a raw triplet file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub lines: usize,
    pub triplets: usize,
    pub duplicates: usize,
    pub literals_skipped: usize,
    pub blank_or_comment: usize,
    pub malformed: usize,
    /// First few malformed lines as `(line number, reason)`.
    pub malformed_samples: Vec<(usize, String)>,
}

const MALFORMED_SAMPLES: usize = 20;

impl LoadReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "lines={}", self.lines);
        let _ = writeln!(out, "triplets={}", self.triplets);
        let _ = writeln!(out, "duplicates={}", self.duplicates);
        let _ = writeln!(out, "literals_skipped={}", self.literals_skipped);
        let _ = writeln!(out, "blank_or_comment={}", self.blank_or_comment);
        let _ = writeln!(out, "malformed={}", self.malformed);
        for (line, reason) in &self.malformed_samples {
            let _ = writeln!(out, "malformed_line.{line}={reason}");
        }
        out
    }
}

/// Triplets over growable string vocabularies, before sanitization.
#[derive(Clone, Debug)]
pub struct RawGraph {
    pub entities: Vocabulary,
    pub predicates: Vocabulary,
    triplets: Vec<Triplet>,
    seen: FxHashSet<Triplet>,
}

impl Default for RawGraph {
    fn default() -> Self {
        Self {
            entities: Vocabulary::new("entity"),
            predicates: Vocabulary::new("predicate"),
            triplets: Vec::new(),
            seen: FxHashSet::default(),
        }
    }
}

impl RawGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_kg(kg: &KnowledgeGraph) -> Self {
        let mut raw = Self::new();
        for t in kg.triplets() {
            // Labels come from a valid graph, so interning cannot fail.
            let h = kg.entities().resolve(t.head).unwrap_or_default();
            let r = kg.predicates().resolve(t.predicate).unwrap_or_default();
            let o = kg.entities().resolve(t.tail).unwrap_or_default();
            let _ = raw.insert(h, r, o);
        }
        raw
    }

    pub fn triplets(&self) -> &[Triplet] {
        &self.triplets
    }

    pub fn len(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }

    /// Returns `false` if the triplet was already present.
    pub fn insert(&mut self, head: &str, predicate: &str, tail: &str) -> Result<bool> {
        let t = Triplet::new(
            self.entities.intern(head)?,
            self.predicates.intern(predicate)?,
            self.entities.intern(tail)?,
        );
        if self.seen.insert(t) {
            self.triplets.push(t);
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn record(
        &mut self,
        parsed: core::result::Result<Option<(&str, &str, &str)>, LineIssue>,
        line_no: usize,
        mode: ParseMode,
        report: &mut LoadReport,
    ) -> Result<()> {
        report.lines += 1;
        match parsed {
            Ok(Some((h, r, t))) => {
                if self.insert(h, r, t)? {
                    report.triplets += 1;
                } else {
                    report.duplicates += 1;
                }
                Ok(())
            }
            Ok(None) => {
                report.blank_or_comment += 1;
                Ok(())
            }
            Err(LineIssue::Literal) => {
                report.literals_skipped += 1;
                Ok(())
            }
            Err(LineIssue::Malformed(reason)) => {
                if mode == ParseMode::Strict {
                    return Err(Error::Malformed {
                        line: line_no,
                        reason,
                    });
                }
                report.malformed += 1;
                if report.malformed_samples.len() < MALFORMED_SAMPLES {
                    report.malformed_samples.push((line_no, reason));
                }
                Ok(())
            }
        }
    }

    /// Feeds one N-Triples line (1-based `line_no`).
    pub fn push_ntriples_line(
        &mut self,
        line_no: usize,
        line: &str,
        mode: ParseMode,
        report: &mut LoadReport,
    ) -> Result<()> {
        self.record(parse_ntriples_line(line), line_no, mode, report)
    }

    /// Feeds one `head<TAB>predicate<TAB>tail` line.
    pub fn push_tsv_line(
        &mut self,
        line_no: usize,
        line: &str,
        mode: ParseMode,
        report: &mut LoadReport,
    ) -> Result<()> {
        self.record(parse_tsv_line(line), line_no, mode, report)
    }

    pub fn parse_ntriples(text: &str, mode: ParseMode) -> Result<(Self, LoadReport)> {
        let mut raw = Self::new();
        let mut report = LoadReport::default();
        for (i, line) in text.lines().enumerate() {
            raw.push_ntriples_line(i + 1, line, mode, &mut report)?;
        }
        Ok((raw, report))
    }

    pub fn parse_tsv(text: &str, mode: ParseMode) -> Result<(Self, LoadReport)> {
        let mut raw = Self::new();
        let mut report = LoadReport::default();
        for (i, line) in text.lines().enumerate() {
            raw.push_tsv_line(i + 1, line, mode, &mut report)?;
        }
        Ok((raw, report))
    }
}

#[derive(Debug, PartialEq, Eq)]
enum LineIssue {
    Literal,
    Malformed(String),
}

fn malformed(reason: &str) -> LineIssue {
    LineIssue::Malformed(reason.to_string())
}

/// Splits `<iri>` off the front of `s`, returning the IRI body and the rest.
fn take_iri(s: &str) -> core::result::Result<(&str, &str), LineIssue> {
    let s = s.trim_start();
    let body = s
        .strip_prefix('<')
        .ok_or_else(|| malformed("expected `<iri>`"))?;
    let end = body
        .find('>')
        .ok_or_else(|| malformed("unterminated IRI"))?;
    let iri = &body[..end];
    if iri.is_empty() {
        return Err(malformed("empty IRI"));
    }
    if iri
        .chars()
        .any(|c| c.is_whitespace() || c == '<' || c == '"')
    {
        return Err(malformed("invalid character in IRI"));
    }
    Ok((iri, &body[end + 1..]))
}

/// Skips a quoted literal with optional `@lang` or `^^<datatype>` suffix.
fn skip_literal(s: &str) -> core::result::Result<&str, LineIssue> {
    let body = &s.trim_start()[1..];
    let mut escaped = false;
    let mut end = None;
    for (i, c) in body.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' => escaped = true,
            '"' => {
                end = Some(i);
                break;
            }
            _ => {}
        }
    }
    let end = end.ok_or_else(|| malformed("unterminated literal"))?;
    let mut rest = &body[end + 1..];
    if let Some(tag) = rest.strip_prefix('@') {
        let len = tag
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
            .unwrap_or(tag.len());
        rest = &tag[len..];
    } else if let Some(dt) = rest.strip_prefix("^^") {
        rest = take_iri(dt)?.1;
    }
    Ok(rest)
}

fn expect_terminator(rest: &str) -> core::result::Result<(), LineIssue> {
    let rest = rest.trim_start();
    let rest = rest
        .strip_prefix('.')
        .ok_or_else(|| malformed("missing terminating `.`"))?;
    let rest = rest.trim();
    if rest.is_empty() || rest.starts_with('#') {
        Ok(())
    } else {
        Err(malformed("trailing content after `.`"))
    }
}

fn parse_ntriples_line(line: &str) -> core::result::Result<Option<(&str, &str, &str)>, LineIssue> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    if trimmed.starts_with("_:") {
        return Err(malformed("blank nodes are not supported"));
    }
    let (subject, rest) = take_iri(trimmed)?;
    let (predicate, rest) = take_iri(rest)?;
    let rest_trim = rest.trim_start();
    if rest_trim.starts_with('"') {
        let after = skip_literal(rest_trim)?;
        expect_terminator(after)?;
        return Err(LineIssue::Literal);
    }
    if rest_trim.starts_with("_:") {
        return Err(malformed("blank nodes are not supported"));
    }
    let (object, rest) = take_iri(rest)?;
    expect_terminator(rest)?;
    Ok(Some((subject, predicate, object)))
}

fn parse_tsv_line(line: &str) -> core::result::Result<Option<(&str, &str, &str)>, LineIssue> {
    let line = line.trim_end_matches(['\r', '\n']);
    if line.trim().is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
    if fields.len() != 3 {
        return Err(LineIssue::Malformed(format!(
            "expected 3 tab-separated fields, found {}",
            fields.len()
        )));
    }
    if fields.iter().any(|f| f.is_empty()) {
        return Err(malformed("empty field"));
    }
    Ok(Some((fields[0], fields[1], fields[2])))
}

/// Entity-level sanitization rules. All rules look at the label's local
/// name, i.e. the part after the last `/` or `#`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SanitizeRules {
    /// Drop entities whose local name is all digits.
    pub drop_numeric: bool,
    /// Drop entities that are bare URLs (absolute IRI, empty local name).
    pub drop_url_only: bool,
    /// Drop entities whose local name starts with this prefix (ASCII
    /// case-insensitive). `None` disables the rule.
    pub list_prefix: Option<String>,
}

impl Default for SanitizeRules {
    fn default() -> Self {
        Self {
            drop_numeric: true,
            drop_url_only: true,
            list_prefix: Some("List_of".into()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntityRule {
    UrlOrNumber,
    List,
}

pub fn local_name(label: &str) -> &str {
    match label.rfind(['/', '#']) {
        Some(i) => &label[i + 1..],
        None => label,
    }
}

fn has_url_scheme(label: &str) -> bool {
    let Some(colon) = label.find(':') else {
        return false;
    };
    let scheme = &label[..colon];
    let mut chars = scheme.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
        && label.len() > colon + 1
}

impl SanitizeRules {
    pub fn violation(&self, label: &str) -> Option<EntityRule> {
        let local = local_name(label);
        if self.drop_numeric && !local.is_empty() && local.bytes().all(|b| b.is_ascii_digit()) {
            return Some(EntityRule::UrlOrNumber);
        }
        if self.drop_url_only && local.is_empty() && has_url_scheme(label) {
            return Some(EntityRule::UrlOrNumber);
        }
        if let Some(prefix) = &self.list_prefix {
            if local.len() >= prefix.len()
                && local.as_bytes()[..prefix.len()].eq_ignore_ascii_case(prefix.as_bytes())
            {
                return Some(EntityRule::List);
            }
        }
        None
    }
}

/// Per-rule removal counts. `input = removed_* + kept`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SanitizationReport {
    pub input: usize,
    pub removed_url_number: usize,
    pub removed_list: usize,
    pub removed_query_irrelevant: usize,
    pub kept: usize,
    pub entities: usize,
    pub predicates: usize,
}

impl SanitizationReport {
    pub fn removed(&self) -> usize {
        self.removed_url_number + self.removed_list + self.removed_query_irrelevant
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "input_triplets={}", self.input);
        let _ = writeln!(out, "removed_url_number={}", self.removed_url_number);
        let _ = writeln!(out, "removed_list={}", self.removed_list);
        let _ = writeln!(
            out,
            "removed_query_irrelevant={}",
            self.removed_query_irrelevant
        );
        let _ = writeln!(out, "kept_triplets={}", self.kept);
        let _ = writeln!(out, "entities={}", self.entities);
        let _ = writeln!(out, "predicates={}", self.predicates);
        out
    }
}

/// Applies the entity rules, then keeps a triplet iff its predicate or at
/// least one of its entities is mentioned by the query log.
///
/// A triplet touching entities that break several rules is counted under
/// the first rule that fires (head checked before tail). The result has
/// fresh vocabularies interned in order of first appearance.
pub fn sanitize(
    raw: &RawGraph,
    mentions: &QueryMentions,
    rules: &SanitizeRules,
) -> Result<(KnowledgeGraph, SanitizationReport)> {
    let mut report = SanitizationReport {
        input: raw.len(),
        ..Default::default()
    };
    let mut entities = Vocabulary::new("entity");
    let mut predicates = Vocabulary::new("predicate");
    let mut kept = Vec::new();
    for t in raw.triplets() {
        let h = raw.entities.label(t.head)?;
        let r = raw.predicates.label(t.predicate)?;
        let o = raw.entities.label(t.tail)?;
        match rules.violation(h).or_else(|| rules.violation(o)) {
            Some(EntityRule::UrlOrNumber) => {
                report.removed_url_number += 1;
                continue;
            }
            Some(EntityRule::List) => {
                report.removed_list += 1;
                continue;
            }
            None => {}
        }
        let relevant = mentions.predicates.contains(r)
            || mentions.entities.contains(h)
            || mentions.entities.contains(o);
        if !relevant {
            report.removed_query_irrelevant += 1;
            continue;
        }
        kept.push(Triplet::new(
            entities.intern(h)?,
            predicates.intern(r)?,
            entities.intern(o)?,
        ));
    }
    report.kept = kept.len();
    report.entities = entities.len();
    report.predicates = predicates.len();
    let kg = KnowledgeGraph::from_triplets(entities, predicates, kept)?;
    Ok((kg, report))
}

pub const DEFAULT_RATIOS: [f64; 3] = [0.70, 0.10, 0.20];

/// Target split sizes for `n` triplets.
///
/// Sizes are rounded to nearest; when `n >= 10`, every split with a
/// positive ratio receives at least one triplet.
pub fn split_sizes(n: usize, ratios: [f64; 3]) -> Result<[usize; 3]> {
    let sum: f64 = ratios.iter().sum();
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) || libm::fabs(sum - 1.0) > 1e-9 {
        return Err(Error::InvalidRatios(ratios[0], ratios[1], ratios[2]));
    }
    let round = |r: f64| libm::floor(r * n as f64 + 0.5) as usize;
    let train = round(ratios[0]).min(n);
    let dev = round(ratios[1]).min(n - train);
    let mut sizes = [train, dev, n - train - dev];
    if ratios[2] == 0.0 && sizes[2] > 0 {
        // Rounding leftovers go to the largest requested split.
        let largest = if ratios[0] >= ratios[1] { 0 } else { 1 };
        sizes[largest] += sizes[2];
        sizes[2] = 0;
    }
    if n >= 10 {
        for i in 0..3 {
            if ratios[i] > 0.0 && sizes[i] == 0 {
                let donor = (0..3).max_by_key(|&j| sizes[j]).unwrap_or(0);
                sizes[donor] -= 1;
                sizes[i] = 1;
            }
        }
    }
    Ok(sizes)
}

/// Uniform random train/dev/test partition, deterministic under `seed`.
pub fn split(kg: KnowledgeGraph, ratios: [f64; 3], seed: u64) -> Result<KnowledgeGraph> {
    let sizes = split_sizes(kg.len(), ratios)?;
    let mut order: Vec<usize> = (0..kg.len()).collect();
    order.shuffle(&mut seed::rng(seed, Purpose::Split));
    let mut labels = alloc::vec![Split::Train; kg.len()];
    for (rank, &i) in order.iter().enumerate() {
        labels[i] = if rank < sizes[0] {
            Split::Train
        } else if rank < sizes[0] + sizes[1] {
            Split::Dev
        } else {
            Split::Test
        };
    }
    kg.with_splits(labels)
}

/// Entity types and predicate domain/range constraints, keyed by id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MetadataTable {
    pub entity_types: BTreeMap<VocabId, BTreeSet<String>>,
    pub predicate_domains: BTreeMap<VocabId, BTreeSet<String>>,
    pub predicate_ranges: BTreeMap<VocabId, BTreeSet<String>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MetadataReport {
    pub entity_rows: usize,
    pub predicate_rows: usize,
    pub unknown_entities: usize,
    pub unknown_predicates: usize,
    pub malformed: usize,
    /// Human-readable warnings, capped.
    pub warnings: Vec<String>,
}

const METADATA_WARNINGS: usize = 50;

impl MetadataReport {
    fn warn(&mut self, message: String) {
        if self.warnings.len() < METADATA_WARNINGS {
            self.warnings.push(message);
        }
    }
}

fn type_labels<'a>(
    fields: impl Iterator<Item = &'a str> + 'a,
) -> impl Iterator<Item = String> + 'a {
    fields
        .flat_map(|f| f.split(','))
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
}

impl MetadataTable {
    /// Parses entity types (`entity<TAB>type[<TAB>type...]`, types may also be
    /// comma-separated) and predicate constraints (`predicate<TAB>domain<TAB>range`,
    /// each side a comma-separated list, possibly empty). Rows naming labels
    /// unknown to `kg` are skipped with a warning.
    pub fn parse(
        entity_types: &str,
        domain_range: &str,
        kg: &KnowledgeGraph,
    ) -> (MetadataTable, MetadataReport) {
        let mut table = MetadataTable::default();
        let mut report = MetadataReport::default();

        for (i, line) in entity_types.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let label = fields.next().unwrap_or_default().trim();
            let types: BTreeSet<String> = type_labels(fields).collect();
            if label.is_empty() || types.is_empty() {
                report.malformed += 1;
                report.warn(format!("entity types line {}: malformed", i + 1));
                continue;
            }
            report.entity_rows += 1;
            match kg.entities().get(label) {
                Some(id) => table.entity_types.entry(id).or_default().extend(types),
                None => {
                    report.unknown_entities += 1;
                    report.warn(format!(
                        "entity types line {}: unknown entity `{label}`",
                        i + 1
                    ));
                }
            }
        }

        for (i, line) in domain_range.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let label = fields[0].trim();
            if label.is_empty() || fields.len() > 3 {
                report.malformed += 1;
                report.warn(format!("domain/range line {}: malformed", i + 1));
                continue;
            }
            report.predicate_rows += 1;
            let Some(id) = kg.predicates().get(label) else {
                report.unknown_predicates += 1;
                report.warn(format!(
                    "domain/range line {}: unknown predicate `{label}`",
                    i + 1
                ));
                continue;
            };
            let domain: BTreeSet<String> =
                type_labels(fields.get(1).copied().into_iter()).collect();
            let range: BTreeSet<String> = type_labels(fields.get(2).copied().into_iter()).collect();
            if !domain.is_empty() {
                table
                    .predicate_domains
                    .entry(id)
                    .or_default()
                    .extend(domain);
            }
            if !range.is_empty() {
                table.predicate_ranges.entry(id).or_default().extend(range);
            }
        }
        (table, report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn mentions(entities: &[&str], predicates: &[&str]) -> QueryMentions {
        QueryMentions {
            entities: entities.iter().map(|s| s.to_string()).collect(),
            predicates: predicates.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn ntriples_basic_and_literal() {
        let text = "<a> <p> <b> .\n<a> <p> \"1867\" .\n<a> <q> \"x\"@en .\n\n# c\n<b> <p> \"5\"^^<http://www.w3.org/2001/XMLSchema#int> .\n";
        let (raw, report) = RawGraph::parse_ntriples(text, ParseMode::Lenient).unwrap();
        assert_eq!(raw.len(), 1);
        assert_eq!(report.literals_skipped, 3);
        assert_eq!(report.blank_or_comment, 2);
        assert_eq!(report.malformed, 0);
        assert_eq!(raw.entities.resolve(raw.triplets()[0].tail), Some("b"));
    }

    #[test]
    fn ntriples_empty_file() {
        let (raw, report) = RawGraph::parse_ntriples("", ParseMode::Strict).unwrap();
        assert!(raw.is_empty());
        assert_eq!(report, LoadReport::default());
    }

    #[test]
    fn ntriples_malformed_lenient_vs_strict() {
        let text = "<a> <p> <b>\n<a> <p> <c> .\n";
        let (raw, report) = RawGraph::parse_ntriples(text, ParseMode::Lenient).unwrap();
        assert_eq!(raw.len(), 1);
        assert_eq!(report.malformed, 1);
        assert_eq!(report.malformed_samples[0].0, 1);
        let err = RawGraph::parse_ntriples(text, ParseMode::Strict).unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 1, .. }));
        assert!(RawGraph::parse_ntriples("_:b <p> <c> .", ParseMode::Strict).is_err());
    }

    #[test]
    fn tsv_fields_and_duplicates() {
        let (raw, report) =
            RawGraph::parse_tsv("a\tp\tb\na\tp\tb\na\tp\n", ParseMode::Lenient).unwrap();
        assert_eq!(raw.len(), 1);
        assert_eq!(report.duplicates, 1);
        assert_eq!(report.malformed, 1);
        assert!(RawGraph::parse_tsv("a\tp\n", ParseMode::Strict).is_err());
    }

    #[test]
    fn entity_rules() {
        let rules = SanitizeRules::default();
        assert_eq!(rules.violation("12345"), Some(EntityRule::UrlOrNumber));
        assert_eq!(
            rules.violation("http://dbpedia.org/resource/1867"),
            Some(EntityRule::UrlOrNumber)
        );
        assert_eq!(
            rules.violation("http://example.com/"),
            Some(EntityRule::UrlOrNumber)
        );
        assert_eq!(
            rules.violation("http://dbpedia.org/resource/list_of_Arsenal_players"),
            Some(EntityRule::List)
        );
        assert_eq!(
            rules.violation("http://dbpedia.org/resource/Marie_Curie"),
            None
        );
        assert_eq!(rules.violation("Warsaw"), None);
        let off = SanitizeRules {
            drop_numeric: false,
            drop_url_only: false,
            list_prefix: None,
        };
        assert_eq!(off.violation("12345"), None);
    }

    #[test]
    fn sanitize_query_relevance() {
        let mut raw = RawGraph::new();
        raw.insert("MarieCurie", "birthplace", "Warsaw").unwrap();
        raw.insert("X", "unknown", "Y").unwrap();
        raw.insert("MarieCurie", "unknown", "Y").unwrap();
        raw.insert("12345", "birthplace", "Warsaw").unwrap();
        raw.insert("List_of_things", "birthplace", "Warsaw")
            .unwrap();
        let m = mentions(&["MarieCurie"], &["birthplace"]);
        let (kg, report) = sanitize(&raw, &m, &SanitizeRules::default()).unwrap();
        assert_eq!(report.kept, 2);
        assert_eq!(report.removed_url_number, 1);
        assert_eq!(report.removed_list, 1);
        assert_eq!(report.removed_query_irrelevant, 1);
        assert_eq!(report.removed() + report.kept, report.input);
        assert!(kg.entities().get("12345").is_none());
        assert!(kg.entities().get("X").is_none());
        assert!(kg.entities().get("MarieCurie").is_some());
    }

    #[test]
    fn sanitize_is_idempotent() {
        let mut raw = RawGraph::new();
        for (h, r, t) in [
            ("a", "p", "b"),
            ("b", "q", "c"),
            ("c", "q", "d"),
            ("7", "p", "a"),
            ("d", "z", "e"),
        ] {
            raw.insert(h, r, t).unwrap();
        }
        let m = mentions(&["c"], &["p"]);
        let rules = SanitizeRules::default();
        let (once, _) = sanitize(&raw, &m, &rules).unwrap();
        let (twice, report) = sanitize(&RawGraph::from_kg(&once), &m, &rules).unwrap();
        assert_eq!(report.removed(), 0);
        assert_eq!(once.triplets(), twice.triplets());
        assert_eq!(once.entities().labels(), twice.entities().labels());
    }

    fn chain_kg(n: usize) -> KnowledgeGraph {
        let mut raw = RawGraph::new();
        for i in 0..n {
            raw.insert(&format!("e{i}"), "p", &format!("e{}", i + 1))
                .unwrap();
        }
        let m = mentions(&[], &["p"]);
        sanitize(&raw, &m, &SanitizeRules::default()).unwrap().0
    }

    #[test]
    fn split_default_sizes_and_determinism() {
        let kg = split(chain_kg(100), DEFAULT_RATIOS, 42).unwrap();
        assert_eq!(kg.split_sizes(), [70, 10, 20]);
        let again = split(chain_kg(100), DEFAULT_RATIOS, 42).unwrap();
        assert_eq!(kg.splits(), again.splits());
        let other = split(chain_kg(100), DEFAULT_RATIOS, 43).unwrap();
        assert_ne!(kg.splits(), other.splits());
    }

    #[test]
    fn split_edge_ratios() {
        let kg = split(chain_kg(30), [1.0, 0.0, 0.0], 1).unwrap();
        assert_eq!(kg.split_sizes(), [30, 0, 0]);
        assert!(matches!(
            split(chain_kg(30), [0.5, 0.2, 0.2], 1),
            Err(Error::InvalidRatios(..))
        ));
        assert_eq!(split_sizes(10, DEFAULT_RATIOS).unwrap(), [7, 1, 2]);
        assert_eq!(split_sizes(10, [0.98, 0.01, 0.01]).unwrap(), [8, 1, 1]);
        assert_eq!(split_sizes(0, DEFAULT_RATIOS).unwrap(), [0, 0, 0]);
    }

    #[test]
    fn metadata_parsing() {
        let mut raw = RawGraph::new();
        raw.insert("MarieCurie", "largestCity", "Warsaw").unwrap();
        raw.insert("Germany", "largestCity", "Berlin").unwrap();
        let (kg, _) = sanitize(
            &raw,
            &mentions(&[], &["largestCity"]),
            &SanitizeRules::default(),
        )
        .unwrap();
        let (table, report) = MetadataTable::parse(
            "MarieCurie\tperson\nGermany\tcountry\nNobody\tperson\n",
            "largestCity\tplace\tcity\nbogus\tx\ty\n",
            &kg,
        );
        let mc = kg.entities().get("MarieCurie").unwrap();
        assert_eq!(
            table.entity_types[&mc].iter().collect::<Vec<_>>(),
            vec!["person"]
        );
        let lc = kg.predicates().get("largestCity").unwrap();
        assert!(table.predicate_domains[&lc].contains("place"));
        assert!(table.predicate_ranges[&lc].contains("city"));
        assert_eq!(report.unknown_entities, 1);
        assert_eq!(report.unknown_predicates, 1);
        assert_eq!(report.warnings.len(), 2);
    }
}
