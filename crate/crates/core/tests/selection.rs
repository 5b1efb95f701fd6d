mod common;

use polarity::corpus::ClassId;
use polarity::selection::{
    count_contingency, rank_features, select_top_k, term_frequencies, Aggregation, Cells, Method, RankOptions,
};
use polarity::tokenizer::FeatureId;

const DOCS: [(&str, usize); 8] =
    [("a b c", 1), ("a a d", 1), ("a e", 1), ("b c f", 1), ("c d g", 0), ("d d e", 0), ("f g h", 0), ("e h", 0)];

#[test]
fn contingency_matches_brute_force_recount() {
    let set = common::prepare(&DOCS).training_set(None).unwrap();
    let counts = count_contingency(&set).unwrap();
    assert_eq!(counts.n(), 8);
    for f in set.space.ids() {
        let surface = set.space.feature(f).surface();
        for c in 0..2 {
            let mut cells = Cells { a: 0, b: 0, c: 0, d: 0 };
            for (text, label) in DOCS {
                let has = text.split(' ').any(|t| t == surface);
                match (has, label == c) {
                    (true, true) => cells.a += 1,
                    (true, false) => cells.b += 1,
                    (false, true) => cells.c += 1,
                    (false, false) => cells.d += 1,
                }
            }
            assert_eq!(counts.cells(f, ClassId(c)), cells, "{surface} class {c}");
        }
        let df = DOCS.iter().filter(|(t, _)| t.split(' ').any(|x| x == surface)).count() as u64;
        assert_eq!(counts.df(f), df);
    }
}

#[test]
fn term_frequencies_count_occurrences() {
    let set = common::prepare(&DOCS).training_set(None).unwrap();
    let tfs = term_frequencies(&set);
    let a = set.space.ids().find(|&f| set.space.feature(f).surface() == "a").unwrap();
    let d = set.space.ids().find(|&f| set.space.feature(f).surface() == "d").unwrap();
    assert_eq!(tfs.row(a), &[0, 4]);
    assert_eq!(tfs.row(d), &[3, 1]);
    assert_eq!(tfs.score_tfv(d), 2.0);
}

/// Twenty features over twelve documents with varied class skew.
fn toy20() -> Vec<(String, usize)> {
    (0..12)
        .map(|i| {
            let label = usize::from(i < 6);
            let toks: Vec<String> =
                (0..20).filter(|f| (f * 7 + i * (3 + label)) % (f % 4 + 2) == 0).map(|f| format!("f{f:02}")).collect();
            (if toks.is_empty() { "f00".into() } else { toks.join(" ") }, label)
        })
        .collect()
}

fn oracle_score(docs: &[(String, usize)], surface: &str, method: Method) -> f64 {
    let has: Vec<(bool, usize)> = docs.iter().map(|(t, l)| (t.split(' ').any(|x| x == surface), *l)).collect();
    let cells = |c: usize| {
        let a = has.iter().filter(|(h, l)| *h && *l == c).count() as f64;
        let b = has.iter().filter(|(h, l)| *h && *l != c).count() as f64;
        let cc = has.iter().filter(|(h, l)| !*h && *l == c).count() as f64;
        let d = has.iter().filter(|(h, l)| !*h && *l != c).count() as f64;
        (a, b, cc, d)
    };
    let per_class = |score: &dyn Fn((f64, f64, f64, f64)) -> f64| score(cells(0)).max(score(cells(1)));
    match method {
        Method::Df => has.iter().filter(|(h, _)| *h).count() as f64,
        Method::Mi => per_class(&|(a, b, c, d)| {
            let den = (a + b) * (a + c);
            if den == 0.0 {
                0.0
            } else {
                a * (a + b + c + d) / den
            }
        }),
        Method::Mmi => per_class(&|(a, b, c, d)| {
            let den = (a + c) * (b + d) * (a + b) * (c + d);
            if den == 0.0 {
                0.0
            } else {
                (a * d - c * b) / den
            }
        }),
        Method::Tfv => {
            let tf = |c: usize| {
                docs.iter()
                    .filter(|(_, l)| *l == c)
                    .map(|(t, _)| t.split(' ').filter(|x| *x == surface).count())
                    .sum::<usize>() as f64
            };
            let (t0, t1) = (tf(0), tf(1));
            let mean = (t0 + t1) / 2.0;
            (t0 - mean).powi(2) + (t1 - mean).powi(2)
        }
    }
}

#[test]
fn ranking_matches_independent_sort() {
    let docs = toy20();
    let refs: Vec<(&str, usize)> = docs.iter().map(|(t, l)| (t.as_str(), *l)).collect();
    let set = common::prepare(&refs).training_set(None).unwrap();
    assert_eq!(set.space.len(), 20);
    let counts = count_contingency(&set).unwrap();
    let tfs = term_frequencies(&set);
    for method in Method::ALL {
        let ranking = rank_features(&counts, &tfs, method, RankOptions::default()).unwrap();
        let mut expected: Vec<(f64, FeatureId)> =
            set.space.ids().map(|f| (oracle_score(&docs, set.space.feature(f).surface(), method), f)).collect();
        expected.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap().then(x.1.cmp(&y.1)));
        for (f, (score, _)) in expected.iter().map(|e| (e.1, e)) {
            assert!((ranking.score(f) - score).abs() < 1e-12, "{method} {f}");
        }
        let order: Vec<FeatureId> = expected.iter().map(|e| e.1).collect();
        assert_eq!(ranking.order, order, "{method}");

        let mut top5 = order[..5].to_vec();
        top5.sort();
        assert_eq!(select_top_k(&ranking, 5).unwrap(), top5);
    }
}

#[test]
fn mean_aggregation_of_binary_mmi_is_zero() {
    let set = common::prepare(&DOCS).training_set(None).unwrap();
    let counts = count_contingency(&set).unwrap();
    let opts = RankOptions { aggregation: Aggregation::Mean, ..Default::default() };
    let ranking = rank_features(&counts, &term_frequencies(&set), Method::Mmi, opts).unwrap();
    assert!(ranking.scores.iter().all(|s| s.abs() < 1e-15));
    // all tied, so the order falls back to ascending ids
    assert_eq!(ranking.order, set.space.ids().collect::<Vec<_>>());
}

#[test]
fn budget_bounds() {
    let set = common::prepare(&DOCS).training_set(None).unwrap();
    let ranking =
        rank_features(&count_contingency(&set).unwrap(), &term_frequencies(&set), Method::Df, RankOptions::default())
            .unwrap();
    assert!(select_top_k(&ranking, 0).is_err());
    assert!(select_top_k(&ranking, set.space.len() + 1).is_err());
    assert_eq!(select_top_k(&ranking, set.space.len()).unwrap().len(), set.space.len());
}
