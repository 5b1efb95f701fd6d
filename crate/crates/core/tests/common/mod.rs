#![allow(dead_code)]

use polarity::corpus::{ClassId, ClassSet, Corpus, Document, LoadMode, ZwnjPolicy};
use polarity::pipeline::{FeatureConfig, Pipeline, PreparedCorpus};

pub const PLAIN: FeatureConfig = FeatureConfig { zwnj: ZwnjPolicy::Join, stem: false, bigrams: false };

/// Binary corpus from `(text, label)` pairs, label 0 = negative, 1 = positive.
pub fn corpus(docs: &[(&str, usize)]) -> Corpus {
    let documents = docs
        .iter()
        .enumerate()
        .map(|(i, (text, label))| Document {
            id: format!("d{i}"),
            text: text.to_string(),
            label: Some(ClassId(*label)),
            group: None,
        })
        .collect();
    Corpus::new(ClassSet::binary(), documents, LoadMode::Train).unwrap()
}

pub fn prepare(docs: &[(&str, usize)]) -> PreparedCorpus {
    Pipeline::with_defaults(PLAIN).prepare(&corpus(docs))
}

/// Perfectly separable corpus: each class has its own vocabulary.
pub fn separable(n_per_class: usize) -> Vec<(String, usize)> {
    (0..2 * n_per_class)
        .map(|i| {
            let label = i % 2;
            let stem = if label == 1 { "good" } else { "bad" };
            let text = format!("{stem}{} {stem}{} shared", i % 5, (i / 2) % 3);
            (text, label)
        })
        .collect()
}
