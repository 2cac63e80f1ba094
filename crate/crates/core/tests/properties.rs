use std::collections::{BTreeMap, BTreeSet, HashMap};

use proptest::prelude::*;
use querykgc_core::eval::{self, TestPairIndex};
use querykgc_core::exec::{Executor, Sequential};
use querykgc_core::guidance::{self, KmReason};
use querykgc_core::ingest::{self, MetadataTable, RawGraph, SanitizeRules, DEFAULT_RATIOS};
use querykgc_core::predict::{self, Method, PairWeighting, Prediction, SamplerConfig};
use querykgc_core::rotate::{Norm, RotatEModel};
use querykgc_core::sparql::{LogMiner, QueryMentions, QueryPairTable, SparqlParser};
use querykgc_core::{
    EntityPredicatePair, KnowledgeGraph, Orientation, Split, SplitScope, Triplet, VocabId,
    Vocabulary,
};

/// Runs blocks sequentially but reports a wider look-ahead, as a parallel
/// executor would.
struct Wide(usize);

impl Executor for Wide {
    fn map_range<T, F>(&self, range: std::ops::Range<usize>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        range
            .rev()
            .map(&f)
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect()
    }

    fn width(&self) -> usize {
        self.0
    }
}

fn build_kg(entities: u32, predicates: u32, raw: &[(u32, u32, u32)]) -> Option<KnowledgeGraph> {
    let mut e = Vocabulary::new("entity");
    let mut p = Vocabulary::new("predicate");
    let mut ts = Vec::new();
    for &(h, r, t) in raw {
        let h = e.intern(&format!("e{}", h % entities)).ok()?;
        let r = p.intern(&format!("p{}", r % predicates)).ok()?;
        let t = e.intern(&format!("e{}", t % entities)).ok()?;
        ts.push(Triplet::new(h, r, t));
    }
    KnowledgeGraph::from_triplets(e, p, ts).ok()
}

fn arb_kg() -> impl Strategy<Value = KnowledgeGraph> {
    (
        3u32..12,
        1u32..4,
        prop::collection::vec((0u32..64, 0u32..8, 0u32..64), 1..80),
        any::<u64>(),
    )
        .prop_filter_map("empty graph", |(ne, np, raw, seed)| {
            let kg = build_kg(ne, np, &raw)?;
            ingest::split(kg, DEFAULT_RATIOS, seed).ok()
        })
}

fn arb_pair(kg: &KnowledgeGraph) -> impl Strategy<Value = EntityPredicatePair> {
    let ne = kg.num_entities() as u32;
    let np = kg.num_predicates() as u32;
    (0..ne, 0..np, any::<bool>()).prop_map(|(e, p, subject)| {
        let o = if subject {
            Orientation::SubjectKnown
        } else {
            Orientation::ObjectKnown
        };
        EntityPredicatePair::new(VocabId(e), VocabId(p), o)
    })
}

fn arb_predictions(kg: &KnowledgeGraph, max: usize) -> impl Strategy<Value = Vec<Prediction>> {
    let ne = kg.num_entities() as u32;
    let np = kg.num_predicates() as u32;
    prop::collection::vec((0..ne, 0..np, 0..ne, -10.0f64..2.0), 1..max).prop_map(|rows| {
        rows.into_iter()
            .map(|(h, r, t, score)| Prediction {
                triplet: Triplet::new(VocabId(h), VocabId(r), VocabId(t)),
                score,
                method: Method::Rs,
                guiding_pair: None,
            })
            .collect()
    })
}

fn small_model(kg: &KnowledgeGraph, seed: u64) -> RotatEModel {
    RotatEModel::init(
        kg.num_entities(),
        kg.num_predicates(),
        4,
        2.0,
        Norm::L1,
        seed,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interning_round_trips(labels in prop::collection::vec("[A-Za-z0-9_:/#]{1,10}", 1..40)) {
        let mut v = Vocabulary::new("entity");
        let ids: Vec<VocabId> = labels.iter().map(|l| v.intern(l).unwrap()).collect();
        let distinct: BTreeSet<&String> = labels.iter().collect();
        prop_assert_eq!(v.len(), distinct.len());
        for (l, id) in labels.iter().zip(&ids) {
            prop_assert_eq!(v.resolve(*id), Some(l.as_str()));
            prop_assert_eq!(v.get(l), Some(*id));
            prop_assert!(id.index() < v.len());
        }
        let back = Vocabulary::from_text("entity", &v.to_text()).unwrap();
        prop_assert_eq!(back.labels(), v.labels());
    }

    #[test]
    fn split_is_a_partition(kg in arb_kg()) {
        let [tr, dv, te] = kg.split_sizes();
        prop_assert_eq!(tr + dv + te, kg.len());
        prop_assert_eq!([tr, dv, te], ingest::split_sizes(kg.len(), DEFAULT_RATIOS).unwrap());
        if kg.len() >= 10 {
            prop_assert!(tr > 0 && dv > 0 && te > 0);
        }
        for (t, s) in kg.iter() {
            prop_assert_eq!(kg.split_of(&t), Some(s));
            let scopes = Split::ALL.iter().filter(|x| SplitScope::from(**x).includes(s)).count();
            prop_assert_eq!(scopes, 1);
        }
    }

    #[test]
    fn split_is_deterministic(kg in arb_kg(), seed in any::<u64>()) {
        let a = ingest::split(kg.clone(), DEFAULT_RATIOS, seed).unwrap();
        let b = ingest::split(kg, DEFAULT_RATIOS, seed).unwrap();
        prop_assert_eq!(a.splits(), b.splits());
    }

    #[test]
    fn pairs_are_bounded_by_triplets(kg in arb_kg()) {
        for scope in [SplitScope::TRAIN, SplitScope::TEST, SplitScope::ALL] {
            let n = kg.iter_scope(scope).count();
            for o in [Orientation::SubjectKnown, Orientation::ObjectKnown] {
                let pairs = kg.pairs_of(scope, o);
                prop_assert!(pairs.len() <= n);
                prop_assert!(pairs.len() <= kg.num_entities() * kg.num_predicates());
            }
        }
    }

    #[test]
    fn sanitize_keeps_only_relevant_and_is_idempotent(
        raw in prop::collection::vec((0usize..6, 0usize..3, 0usize..6), 1..40),
        mentioned_e in prop::collection::btree_set(0usize..6, 0..3),
        mentioned_p in prop::collection::btree_set(0usize..3, 0..2),
    ) {
        let names = ["Paris", "42", "List_of_rivers", "http://x.org/", "MarieCurie", "Berlin"];
        let ent = |i: usize| format!("http://example.org/{}", names[i]);
        let ent = |i: usize| if i == 3 { names[3].to_string() } else { ent(i) };
        let pred = |j: usize| format!("http://example.org/p{j}");
        let mut g = RawGraph::new();
        for &(h, r, t) in &raw {
            g.insert(&ent(h), &pred(r), &ent(t)).unwrap();
        }
        let mentions = QueryMentions {
            entities: mentioned_e.iter().map(|&i| ent(i)).collect(),
            predicates: mentioned_p.iter().map(|&j| pred(j)).collect(),
        };
        let rules = SanitizeRules::default();
        let Ok((kg, report)) = ingest::sanitize(&g, &mentions, &rules) else {
            // Every triplet was removed; the empty graph is rejected.
            return Ok(());
        };
        prop_assert_eq!(report.input, report.removed() + report.kept);
        for t in kg.triplets() {
            let h = kg.entities().label(t.head).unwrap();
            let r = kg.predicates().label(t.predicate).unwrap();
            let o = kg.entities().label(t.tail).unwrap();
            prop_assert!(rules.violation(h).is_none() && rules.violation(o).is_none());
            prop_assert!(
                mentions.predicates.contains(r)
                    || mentions.entities.contains(h)
                    || mentions.entities.contains(o)
            );
        }
        let (again, report2) = ingest::sanitize(&RawGraph::from_kg(&kg), &mentions, &rules).unwrap();
        prop_assert_eq!(report2.removed(), 0);
        prop_assert_eq!(again, kg);
    }

    #[test]
    fn rotation_preserves_modulus(
        h in prop::collection::vec(-2.0f64..2.0, 8),
        theta in prop::collection::vec(-7.0f64..7.0, 4),
    ) {
        // Entity 1 is the origin, so distances are plain norms.
        let mut e = h.clone();
        e.extend([0.0; 8]);
        let model = RotatEModel::from_parts(4, 1.0, Norm::L2, e, [theta, vec![0.0; 4]].concat()).unwrap();
        let rotated = model.distance(VocabId(0), VocabId(0), VocabId(1));
        let plain = model.distance(VocabId(0), VocabId(1), VocabId(1));
        prop_assert!((rotated - plain).abs() < 1e-12);
        let expected = h.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((plain - expected).abs() < 1e-12);
    }

    #[test]
    fn scores_never_exceed_gamma(kg in arb_kg(), seed in any::<u64>(), gamma in 0.5f64..20.0) {
        let model = RotatEModel::init(kg.num_entities(), kg.num_predicates(), 6, gamma, Norm::L1, seed);
        let rot = model.rotations();
        for t in kg.triplets() {
            let s = model.triplet_score(t);
            prop_assert!(s <= gamma);
            prop_assert_eq!(s.to_bits(), model.score_with(&rot, t).to_bits());
        }
    }

    #[test]
    fn accept_probability_is_a_probability(score in -1e6f64..1e6, gamma in 1e-3f64..50.0) {
        let p = predict::accept_probability(score, gamma).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        if score >= gamma {
            prop_assert_eq!(p, 1.0);
        }
        if score > -700.0 {
            prop_assert!(p > 0.0);
        }
    }

    #[test]
    fn es_bins_are_balanced_and_ordered(
        (_kg, preds) in arb_kg().prop_flat_map(|kg| { let p = arb_predictions(&kg, 200); (Just(kg), p) }),
        bins in 1usize..60,
    ) {
        let b = guidance::es_bin_with(&preds, Orientation::SubjectKnown, bins).unwrap();
        let sizes = b.bin_sizes();
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
        prop_assert!(*lo >= 1);
        let distinct = eval::pairs_from_predictions(&preds, Orientation::SubjectKnown);
        prop_assert_eq!(b.entries.len(), distinct.len());
        for w in b.entries.windows(2) {
            prop_assert!(w[0].bin <= w[1].bin);
            prop_assert!(w[0].max_score >= w[1].max_score);
        }
        let mut best: HashMap<EntityPredicatePair, f64> = HashMap::new();
        for p in &preds {
            let e = best.entry(p.triplet.pair(Orientation::SubjectKnown)).or_insert(f64::MIN);
            *e = e.max(p.score);
        }
        for e in &b.entries {
            prop_assert_eq!(best[&e.pair], e.max_score);
        }
    }

    #[test]
    fn km_partitions_every_pair(
        (kg, pairs) in arb_kg().prop_flat_map(|kg| {
            let p = prop::collection::vec(arb_pair(&kg), 1..40);
            (Just(kg), p)
        }),
        typed in prop::collection::vec(prop::option::of(0usize..3), 12),
        domains in prop::collection::vec(prop::option::of(0usize..3), 4),
    ) {
        let types = ["Person", "Place", "Work"];
        let mut meta = MetadataTable::default();
        for (e, ty) in typed.iter().enumerate().take(kg.num_entities()) {
            if let Some(t) = *ty {
                meta.entity_types.insert(VocabId(e as u32), BTreeSet::from([types[t].to_string()]));
            }
        }
        for (p, domain) in domains.iter().enumerate().take(kg.num_predicates()) {
            if let Some(d) = *domain {
                let set = BTreeSet::from([types[d].to_string()]);
                meta.predicate_domains.insert(VocabId(p as u32), set.clone());
                meta.predicate_ranges.insert(VocabId(p as u32), set);
            }
        }
        let verdicts = guidance::km_classify_all(&pairs, &meta, &kg).unwrap();
        prop_assert_eq!(verdicts.len(), pairs.len());
        for (v, p) in verdicts.iter().zip(&pairs) {
            prop_assert_eq!(&v.pair, p);
            prop_assert_eq!(v.compatible, v.reason == KmReason::DomainMatch);
        }
    }

    #[test]
    fn group_precision_averages_to_global(
        (kg, pairs) in arb_kg().prop_flat_map(|kg| {
            let p = prop::collection::btree_set(arb_pair(&kg), 1..40);
            (Just(kg), p)
        }),
        groups in prop::collection::vec(0usize..4, 40),
    ) {
        let index = TestPairIndex::new(&kg);
        let labels: Vec<String> = (0..4).map(|g| format!("g{g}")).collect();
        let assigned: Vec<(usize, &EntityPredicatePair)> =
            pairs.iter().enumerate().map(|(i, p)| (groups[i], p)).collect();
        let per = eval::group_precision(&labels, assigned, &index).unwrap();
        let global = eval::pair_precision(&pairs, &index).unwrap();
        let weighted: f64 = per
            .iter()
            .filter_map(|g| g.precision.map(|p| p * g.pairs as f64))
            .sum::<f64>()
            / pairs.len() as f64;
        prop_assert!((weighted - global.precision).abs() < 1e-12);
        prop_assert_eq!(per.iter().map(|g| g.pairs).sum::<usize>(), pairs.len());
    }

    #[test]
    fn hit_triplets_ignore_order(
        (kg, mut preds) in arb_kg().prop_flat_map(|kg| { let p = arb_predictions(&kg, 100); (Just(kg), p) }),
        seed in any::<u64>(),
    ) {
        let before = eval::hit_triplets(&preds, &kg);
        use rand::{seq::SliceRandom, SeedableRng};
        preds.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(eval::hit_triplets(&preds, &kg), before);
        let doubled: Vec<Prediction> = preds.iter().chain(&preds).cloned().collect();
        prop_assert_eq!(eval::hit_triplets(&doubled, &kg), before);
    }

    #[test]
    fn annotation_sample_ignores_input_order(
        (_kg, pairs) in arb_kg().prop_flat_map(|kg| {
            let p = prop::collection::vec(arb_pair(&kg), 1..60);
            (Just(kg), p)
        }),
        n in 1usize..30,
        seed in any::<u64>(),
    ) {
        let forward: BTreeSet<_> = pairs.iter().copied().collect();
        let backward: BTreeSet<_> = pairs.iter().rev().copied().collect();
        let (a, short) = eval::annotation_sample(&forward, n, seed);
        let (b, _) = eval::annotation_sample(&backward, n, seed);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.len(), n.min(forward.len()));
        prop_assert_eq!(short, forward.len() < n);
        prop_assert_eq!(a.iter().collect::<BTreeSet<_>>().len(), a.len());
    }

    #[test]
    fn per_form_counts_sum_to_queries(
        lines in prop::collection::vec(prop_oneof![
            Just("SELECT ?x WHERE { <http://a/b> <http://a/p> ?x }"),
            Just("ASK { ?s ?p ?o }"),
            Just("DESCRIBE <http://a/b>"),
            Just("CONSTRUCT { ?s ?p ?o } WHERE { ?s ?p ?o }"),
            Just("SELECT ?x WHERE { ?x <http://a/p> <http://a/c> . ?x <http://a/q> ?y }"),
            Just("this is not sparql"),
            Just(""),
        ], 0..40),
        cut in 0usize..40,
    ) {
        let mut all = LogMiner::new(SparqlParser::new());
        for l in &lines {
            all.add_line(l, false);
        }
        prop_assert_eq!(all.total_queries() + all.blank_lines, lines.len());
        let cut = cut.min(lines.len());
        let mut left = LogMiner::new(SparqlParser::new());
        let mut right = LogMiner::new(SparqlParser::new());
        lines[..cut].iter().for_each(|l| left.add_line(l, false));
        lines[cut..].iter().for_each(|l| right.add_line(l, false));
        left.merge(right);
        prop_assert_eq!(left.form_counts, all.form_counts);
        prop_assert_eq!(left.pairs, all.pairs);
        prop_assert_eq!(left.mentions, all.mentions);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn guided_predictions_respect_their_pairs(
        (kg, pairs) in arb_kg().prop_flat_map(|kg| {
            let p = prop::collection::vec(arb_pair(&kg), 1..8);
            (Just(kg), p)
        }),
        n in 1usize..6,
        seed in any::<u64>(),
        frequency in any::<bool>(),
    ) {
        let table = QueryPairTable::from_counts(pairs.iter().map(|p| (*p, 1 + p.entity.0 as u64)));
        let model = small_model(&kg, seed);
        let config = SamplerConfig { block_size: 64, starvation_blocks: 30 };
        let weighting = if frequency { PairWeighting::Frequency } else { PairWeighting::Uniform };
        let allowed: BTreeSet<_> = table.pairs(Orientation::SubjectKnown).into_iter().collect();
        let o = Orientation::SubjectKnown;
        let seq = predict::predict_qg(&model, &kg, &table, n, seed, o, weighting, &config, &Sequential);
        let wide = predict::predict_qg(&model, &kg, &table, n, seed, o, weighting, &config, &Wide(3));
        prop_assert_eq!(&seq, &wide);
        let Ok(preds) = seq else { return Ok(()); };
        prop_assert_eq!(preds.len(), n);
        let distinct: BTreeSet<Triplet> = preds.iter().map(|p| p.triplet).collect();
        prop_assert_eq!(distinct.len(), n);
        for p in &preds {
            let pair = p.guiding_pair.expect("guided predictions carry their pair");
            prop_assert!(allowed.contains(&pair));
            prop_assert_eq!(p.triplet.pair(Orientation::SubjectKnown), pair);
            prop_assert!(!kg.contains(&p.triplet, SplitScope::TRAIN_DEV));
            prop_assert!(p.score <= model.gamma());
        }
    }

    #[test]
    fn unguided_predictions_avoid_known_triplets(kg in arb_kg(), n in 1usize..6, seed in any::<u64>()) {
        let model = small_model(&kg, seed);
        let config = SamplerConfig { block_size: 64, starvation_blocks: 30 };
        let seq = predict::predict_rs(&model, &kg, n, seed, &config, &Sequential);
        let wide = predict::predict_rs(&model, &kg, n, seed, &config, &Wide(4));
        prop_assert_eq!(&seq, &wide);
        let Ok(preds) = seq else { return Ok(()); };
        let mut seen = BTreeMap::new();
        for p in &preds {
            prop_assert!(p.guiding_pair.is_none());
            prop_assert!(!kg.contains(&p.triplet, SplitScope::TRAIN_DEV));
            prop_assert!(seen.insert(p.triplet, ()).is_none());
        }
    }
}
