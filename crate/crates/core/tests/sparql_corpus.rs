use querykgc_core::sparql::{extract_pairs, parse_query, LabelPair, QueryForm};
use querykgc_core::Orientation;

struct Case {
    name: String,
    query: String,
    form: QueryForm,
    pairs: Vec<LabelPair>,
}

fn load() -> Vec<Case> {
    let text = include_str!("data/sparql_corpus.txt");
    let mut cases = Vec::new();
    for block in text.split("\n### ").skip(1) {
        let (name, rest) = block.split_once('\n').unwrap();
        let (query, gold) = rest.split_once("\n=== ").unwrap();
        let mut lines = gold.lines();
        let form = match lines.next().unwrap().trim() {
            "select" => QueryForm::Select,
            "ask" => QueryForm::Ask,
            "construct" => QueryForm::Construct,
            "describe" => QueryForm::Describe,
            _ => QueryForm::Other,
        };
        let pairs = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let f: Vec<&str> = l.split('\t').collect();
                LabelPair {
                    entity: f[0].into(),
                    predicate: f[1].into(),
                    orientation: Orientation::parse(f[2]).unwrap(),
                }
            })
            .collect();
        cases.push(Case {
            name: name.trim().into(),
            query: query.trim().into(),
            form,
            pairs,
        });
    }
    cases
}

#[test]
fn corpus_has_every_query_form() {
    let cases = load();
    assert_eq!(cases.len(), 25);
    for form in QueryForm::ALL {
        assert!(cases.iter().any(|c| c.form == form), "{form:?}");
    }
}

#[test]
fn extraction_matches_gold() {
    for case in load() {
        let q = parse_query(&case.query);
        assert_eq!(q.form, case.form, "{}", case.name);
        assert_eq!(extract_pairs(&q), case.pairs, "{}", case.name);
    }
}

#[test]
fn property_paths_are_rejected_not_guessed() {
    let case = load()
        .into_iter()
        .find(|c| c.name == "property-path")
        .unwrap();
    let q = parse_query(&case.query);
    assert!(!q.is_extractable());
    assert!(q.pattern_error.is_some());
}
