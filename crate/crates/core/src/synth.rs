//! Seeded generator for typed synthetic benchmarks.
//!
//! Entities come in typed groups, each split into clusters. Every predicate
//! has a domain and a range type; a triplet's tail cluster is a fixed
//! function of the head cluster, and only a subset of domain entities carry
//! a given predicate. A small share of triplets ignores the type
//! constraints. The query log asks mostly about pairs that are held out in
//! the test split, so guided prediction has something to find.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::{self, ParseMode, RawGraph, SanitizeRules};
use crate::kg::{KnowledgeGraph, Orientation, SplitScope};
use crate::seed::{self, Purpose};
use crate::sparql::QueryMentions;

pub const ENTITY_NS: &str = "http://example.org/resource/";
pub const ONTOLOGY_NS: &str = "http://example.org/ontology/";

const TYPE_NAMES: [&str; 8] = [
    "Person",
    "Place",
    "Organisation",
    "Work",
    "Event",
    "Species",
    "Device",
    "Language",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub types: usize,
    pub entities_per_type: usize,
    pub clusters_per_type: usize,
    pub predicates: usize,
    pub triplets: usize,
    /// Share of domain entities that carry each predicate.
    pub active_heads: f64,
    /// Share of triplets drawn without regard to types.
    pub noise: f64,
    pub select_queries: usize,
    /// Share of SELECT queries asking about a test-split pair.
    pub test_pair_share: f64,
    pub distractor_queries: usize,
    /// Share of entities left without a type row.
    pub missing_types: f64,
    pub ratios: [f64; 3],
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            types: 5,
            entities_per_type: 100,
            clusters_per_type: 4,
            predicates: 10,
            triplets: 5000,
            active_heads: 0.3,
            noise: 0.0,
            select_queries: 800,
            test_pair_share: 0.8,
            distractor_queries: 40,
            missing_types: 0.02,
            ratios: ingest::DEFAULT_RATIOS,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.types == 0 || self.types > TYPE_NAMES.len() {
            return bad("synthetic type count must be between 1 and 8");
        }
        if self.entities_per_type < self.clusters_per_type || self.clusters_per_type == 0 {
            return bad("each type needs at least one entity per cluster");
        }
        if self.predicates == 0 || self.triplets < self.predicates {
            return bad("need at least one triplet per predicate");
        }
        for (name, v) in [
            ("active_heads", self.active_heads),
            ("noise", self.noise),
            ("test_pair_share", self.test_pair_share),
            ("missing_types", self.missing_types),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.active_heads == 0.0 {
            return bad("active_heads must be positive");
        }
        if self.select_queries < self.predicates {
            return bad("need at least one SELECT query per predicate");
        }
        let capacity = self.predicates * self.entities_per_type * self.entities_per_type;
        if self.triplets * 2 > capacity {
            return bad("too many triplets for the entity space");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthBenchmark {
    /// `head<TAB>predicate<TAB>tail`, one triplet per line.
    pub kg_tsv: String,
    /// Endpoint-style lines with a URL-encoded `query=` parameter.
    pub query_log: String,
    pub entity_types: String,
    pub domain_range: String,
    /// The processed graph the pipeline reproduces from these files with
    /// the same seed and ratios.
    pub kg: KnowledgeGraph,
}

#[derive(Clone, Copy, Debug)]
struct PredicateSpec {
    domain: usize,
    range: usize,
    shift: usize,
}

pub fn entity_label(ty: usize, index: usize) -> String {
    format!("{ENTITY_NS}{}{index}", TYPE_NAMES[ty])
}

pub fn predicate_label(index: usize) -> String {
    format!("{ONTOLOGY_NS}rel{index}")
}

pub fn type_name(ty: usize) -> &'static str {
    TYPE_NAMES[ty]
}

fn cluster_of(index: usize, cfg: &SynthConfig) -> usize {
    index * cfg.clusters_per_type / cfg.entities_per_type
}

fn cluster_members(cluster: usize, cfg: &SynthConfig) -> core::ops::Range<usize> {
    let start = (0..cfg.entities_per_type)
        .find(|&i| cluster_of(i, cfg) == cluster)
        .unwrap_or(0);
    let end = (start..cfg.entities_per_type)
        .find(|&i| cluster_of(i, cfg) != cluster)
        .unwrap_or(cfg.entities_per_type);
    start..end
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthBenchmark> {
    cfg.validate()?;
    let mut rng = seed::rng(cfg.seed, Purpose::Synth);

    let specs: Vec<PredicateSpec> = (0..cfg.predicates)
        .map(|j| {
            let domain = j % cfg.types;
            let range = (domain + 1 + j / cfg.types) % cfg.types;
            PredicateSpec {
                domain,
                range,
                shift: 1 + j % cfg.clusters_per_type.max(1),
            }
        })
        .collect();

    let mut kg_tsv = String::new();
    let mut seen = BTreeSet::new();
    let per_predicate = cfg.triplets / cfg.predicates;
    for (j, spec) in specs.iter().enumerate() {
        let quota = per_predicate + usize::from(j < cfg.triplets % cfg.predicates);
        let mut heads: Vec<usize> = (0..cfg.entities_per_type).collect();
        heads.shuffle(&mut rng);
        let n_active =
            (libm::round(cfg.entities_per_type as f64 * cfg.active_heads) as usize).max(1);
        heads.truncate(n_active);
        let min_cluster = cfg.entities_per_type / cfg.clusters_per_type;
        let typed = quota as f64 * (1.0 - cfg.noise);
        if typed > 0.9 * (n_active * min_cluster) as f64 {
            return Err(Error::InvalidConfig(format!(
                "{quota} triplets per predicate do not fit {n_active} active heads"
            )));
        }
        let mut made = 0;
        while made < quota {
            let triplet = if rng.gen_bool(cfg.noise) {
                let ht = rng.gen_range(0..cfg.types);
                let tt = rng.gen_range(0..cfg.types);
                (
                    (ht, rng.gen_range(0..cfg.entities_per_type)),
                    (tt, rng.gen_range(0..cfg.entities_per_type)),
                )
            } else {
                let h = *heads.choose(&mut rng).expect("at least one active head");
                let cluster = (cluster_of(h, cfg) + spec.shift) % cfg.clusters_per_type;
                let t = rng.gen_range(cluster_members(cluster, cfg));
                ((spec.domain, h), (spec.range, t))
            };
            if triplet.0 == triplet.1 || !seen.insert((triplet, j)) {
                continue;
            }
            let _ = writeln!(
                kg_tsv,
                "{}\t{}\t{}",
                entity_label(triplet.0 .0, triplet.0 .1),
                predicate_label(j),
                entity_label(triplet.1 .0, triplet.1 .1)
            );
            made += 1;
        }
    }

    // Reproduce the pipeline: every predicate is mentioned by the log, so
    // sanitization keeps all triplets.
    let (raw, _) = RawGraph::parse_tsv(&kg_tsv, ParseMode::Strict)?;
    let mentions = QueryMentions {
        entities: BTreeSet::new(),
        predicates: (0..cfg.predicates).map(predicate_label).collect(),
    };
    let (kg, _) = ingest::sanitize(&raw, &mentions, &SanitizeRules::default())?;
    let kg = ingest::split(kg, cfg.ratios, cfg.seed)?;

    let query_log = query_log(cfg, &kg, &mut rng)?;

    let mut entity_types = String::new();
    for (ty, name) in TYPE_NAMES.iter().enumerate().take(cfg.types) {
        for i in 0..cfg.entities_per_type {
            let label = entity_label(ty, i);
            if kg.entities().get(&label).is_none() || rng.gen_bool(cfg.missing_types) {
                continue;
            }
            let _ = writeln!(entity_types, "{label}\t{name}");
        }
    }
    let mut domain_range = String::new();
    for (j, spec) in specs.iter().enumerate() {
        let _ = writeln!(
            domain_range,
            "{}\t{}\t{}",
            predicate_label(j),
            TYPE_NAMES[spec.domain],
            TYPE_NAMES[spec.range]
        );
    }

    Ok(SynthBenchmark {
        kg_tsv,
        query_log,
        entity_types,
        domain_range,
        kg,
    })
}

fn select_query(rng: &mut ChaCha8Rng, entity: &str, predicate: &str) -> String {
    let local = predicate.strip_prefix(ONTOLOGY_NS).unwrap_or(predicate);
    match rng.gen_range(0..3) {
        0 => format!("SELECT ?v WHERE {{ <{entity}> <{predicate}> ?v }}"),
        1 => format!(
            "PREFIX ont: <{ONTOLOGY_NS}> SELECT DISTINCT ?v WHERE {{ <{entity}> ont:{local} ?v . }} LIMIT 10"
        ),
        _ => format!(
            "PREFIX ont: <{ONTOLOGY_NS}>\nSELECT * WHERE {{ OPTIONAL {{ <{entity}> ont:{local} ?v }} }}"
        ),
    }
}

fn query_log(cfg: &SynthConfig, kg: &KnowledgeGraph, rng: &mut ChaCha8Rng) -> Result<String> {
    let test: Vec<_> = kg
        .iter_scope(SplitScope::TEST)
        .map(|t| t.pair(Orientation::SubjectKnown))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if test.is_empty() {
        return Err(Error::InvalidConfig("synthetic test split is empty".into()));
    }
    let mut queries = Vec::new();
    for i in 0..cfg.select_queries {
        let (entity, predicate) = if i < cfg.predicates {
            // Guarantees every predicate is mentioned at least once.
            let e = kg.entities().labels().choose(rng).expect("entities");
            (e.clone(), predicate_label(i))
        } else if rng.gen_bool(cfg.test_pair_share) {
            let pair = test.choose(rng).expect("test pairs");
            (
                kg.entities().label(pair.entity)?.to_string(),
                kg.predicates().label(pair.predicate)?.to_string(),
            )
        } else {
            let e = kg.entities().labels().choose(rng).expect("entities");
            let p = kg.predicates().labels().choose(rng).expect("predicates");
            (e.clone(), p.clone())
        };
        queries.push(select_query(rng, &entity, &predicate));
    }
    for _ in 0..cfg.distractor_queries {
        let e = kg.entities().labels().choose(rng).expect("entities");
        let p = kg.predicates().labels().choose(rng).expect("predicates");
        let q = match rng.gen_range(0..3) {
            0 => format!("ASK {{ <{e}> <{p}> ?v }}"),
            1 => format!("DESCRIBE <{e}>"),
            _ => format!("CONSTRUCT {{ <{e}> <{p}> ?v }} WHERE {{ <{e}> <{p}> ?v }}"),
        };
        queries.push(q);
    }
    queries.shuffle(rng);
    let mut log = String::new();
    for q in queries {
        let _ = writeln!(log, "/sparql?query={}&format=json", url_encode(&q));
    }
    Ok(log)
}

/// Form-style encoding: unreserved bytes kept, space as `+`, rest `%XX`.
pub fn url_encode(text: &str) -> String {
    let mut out = String::with_capacity(text.len() * 3 / 2);
    for b in text.bytes() {
        match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' => {
                out.push(b as char)
            }
            b' ' => out.push('+'),
            _ => {
                let _ = write!(out, "%{b:02X}");
            }
        }
    }
    out
}
