//! Sentiment classification over short reviews.
//!
//! The pipeline runs text normalization ([`corpus`]), affix-stripping
//! stemming ([`stemmer`]), unigram/bigram featurization ([`tokenizer`]),
//! feature ranking by document frequency, term frequency variance, mutual
//! information or modified mutual information ([`selection`]), a multinomial
//! MAP Naive Bayes classifier ([`classifier`]) and stratified k-fold
//! evaluation ([`evaluation`]). [`synth`] generates seeded corpora with a
//! planted polarity signal for desk-scale experiments.
//!
//! Data-parallel loops (per-document featurization, per-feature scoring,
//! per-fold evaluation) run on rayon when the `parallel` feature is enabled
//! (the default) and sequentially otherwise. Results are identical either way.

pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod evaluation;
mod par;
pub mod pipeline;
pub mod selection;
pub mod stemmer;
pub mod synth;
pub mod tokenizer;

pub use classifier::{train, PriorMode, SmoothingSpace, TrainOptions, TrainedModel};
pub use corpus::{
    load_corpus, normalize_text, ClassId, ClassSet, Corpus, Document, Format, NormalizationDict, ZwnjPolicy,
};
pub use error::{Error, Result};
pub use evaluation::{aggregate, make_folds, metrics, run_cv, ClassOutcome, EvalConfig, EvalReport, FoldPlan};
pub use pipeline::{FeatureConfig, Pipeline, PreparedCorpus, TrainingSet};
pub use selection::{count_contingency, rank_features, select_top_k, term_frequencies, Aggregation, Method};
pub use stemmer::{AffixTable, Stemmer};
pub use tokenizer::{featurize, tokenize, Feature, FeatureId, FeatureSpace};
