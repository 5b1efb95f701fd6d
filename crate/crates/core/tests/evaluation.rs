mod common;

use polarity::corpus::{Corpus, Document, LoadMode};
use polarity::evaluation::{make_folds, run_cv, run_fold, EvalConfig};
use polarity::pipeline::Pipeline;
use polarity::selection::Method;
use polarity::synth::{generate, GeneratorSpec};
use polarity::tokenizer::Feature;

fn separable_prepared() -> polarity::pipeline::PreparedCorpus {
    let docs = common::separable(30);
    let refs: Vec<(&str, usize)> = docs.iter().map(|(t, l)| (t.as_str(), *l)).collect();
    common::prepare(&refs)
}

#[test]
fn separable_corpus_is_classified_perfectly() {
    let prepared = separable_prepared();
    for selector in [None, Some(Method::Df), Some(Method::Tfv), Some(Method::Mi), Some(Method::Mmi)] {
        // ten class-exclusive tokens exist, so k = 10 keeps every one of them
        let top_k = selector.map(|_| 10);
        let cfg = EvalConfig { selector, top_k, seed: 1, ..Default::default() };
        let report = run_cv(&prepared, &cfg).unwrap();
        assert_eq!(report.overall.macro_f, 1.0, "{selector:?}");
        assert!(report.classes.iter().all(|c| c.f_score == 1.0));
    }
}

#[test]
fn shuffled_labels_score_near_chance() {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let (corpus, _) = generate(&GeneratorSpec::default()).unwrap();
    let mut labels: Vec<_> = corpus.documents().iter().map(|d| d.label).collect();
    labels.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(17));
    let docs = corpus.documents().iter().zip(labels).map(|(d, label)| Document { label, ..d.clone() }).collect();
    let shuffled = Corpus::new(corpus.classes().clone(), docs, LoadMode::Train).unwrap();
    let prepared = Pipeline::with_defaults(common::PLAIN).prepare(&shuffled);
    let report = run_cv(&prepared, &EvalConfig { selector: None, seed: 5, ..Default::default() }).unwrap();
    for class in &report.classes {
        assert!((0.4..=0.6).contains(&class.f_score), "{}: F {}", class.class, class.f_score);
    }
}

#[test]
fn binary_outcomes_mirror_each_other() {
    let prepared = separable_prepared();
    let mut docs = prepared.clone();
    // flip a few labels so every cell is populated
    for d in docs.docs.iter_mut().step_by(7) {
        d.label = d.label.map(|l| polarity::ClassId(1 - l.index()));
    }
    let report = run_cv(&docs, &EvalConfig { selector: None, seed: 2, ..Default::default() }).unwrap();
    let (neg, pos) = (report.classes[0].outcome, report.classes[1].outcome);
    assert_eq!((neg.tp, neg.fp, neg.fn_, neg.tn), (pos.tn, pos.fn_, pos.fp, pos.tp));
    assert!(neg.fp > 0 && neg.fn_ > 0);
}

#[test]
fn labels_without_signal_score_near_chance() {
    let spec = GeneratorSpec { n_docs: 400, polarity_strength: 1.0, seed: 3, ..Default::default() };
    let (corpus, _) = generate(&spec).unwrap();
    let prepared = Pipeline::with_defaults(common::PLAIN).prepare(&corpus);
    let report = run_cv(&prepared, &EvalConfig { selector: None, seed: 5, ..Default::default() }).unwrap();
    let f = report.overall.macro_f;
    assert!((0.4..=0.6).contains(&f), "macro F {f}");
}

#[test]
fn held_out_documents_never_enter_the_feature_space() {
    let mut docs = common::separable(10);
    docs[3].0.push_str(" only_in_doc_three");
    let refs: Vec<(&str, usize)> = docs.iter().map(|(t, l)| (t.as_str(), *l)).collect();
    let corpus = common::corpus(&refs);
    let prepared = Pipeline::with_defaults(common::PLAIN).prepare(&corpus);
    let plan = make_folds(&corpus, 5, 9).unwrap();
    let cfg = EvalConfig { selector: Some(Method::Mmi), top_k: Some(4), seed: 9, ..Default::default() };
    let marker = Feature::unigram("only_in_doc_three");
    for fold in 0..5 {
        let run = run_fold(&prepared, &plan, fold, &cfg).unwrap();
        let in_space = run.space.get(&marker).is_some();
        assert_eq!(in_space, plan.fold_of(3) != fold, "fold {fold}");
        let tested: Vec<usize> = run.predictions.iter().map(|p| p.0).collect();
        assert_eq!(tested, plan.test_indices(fold));
    }
}

#[test]
fn report_echoes_config_and_is_deterministic() {
    let prepared = separable_prepared();
    let cfg = EvalConfig { selector: Some(Method::Df), top_k: Some(4), folds: 3, seed: 42, ..Default::default() };
    let a = run_cv(&prepared, &cfg).unwrap();
    let b = run_cv(&prepared, &cfg).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.config, cfg);
    assert_eq!(a.folds.len(), 3);
    let json = a.to_json().to_string();
    for needle in ["\"df\"", "42"] {
        assert!(json.contains(needle), "{needle} missing from {json}");
    }
    assert!(a.folds.iter().all(|f| f.selected == 4));
}

#[test]
fn budget_without_selector_is_rejected() {
    let prepared = separable_prepared();
    let cfg = EvalConfig { selector: None, top_k: Some(3), ..Default::default() };
    assert!(run_cv(&prepared, &cfg).is_err());
}
