//! Glue from raw corpora to encoded training sets.

use serde::{Deserialize, Serialize};

use crate::corpus::{ClassId, ClassSet, Corpus, NormalizationDict, Normalizer, ZwnjPolicy};
use crate::error::{Error, Result};
use crate::par;
use crate::stemmer::Stemmer;
use crate::tokenizer::{featurize, tokenize, Feature, FeatureId, FeatureSpace};

/// Text-to-feature settings. Phase 1 of the comparison is
/// `stem = false, bigrams = false`; phase 2 turns both on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub zwnj: ZwnjPolicy,
    pub stem: bool,
    pub bigrams: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { zwnj: ZwnjPolicy::Join, stem: true, bigrams: true }
    }
}

pub struct Pipeline {
    config: FeatureConfig,
    normalizer: Normalizer,
    stemmer: Option<Stemmer>,
}

impl Pipeline {
    pub fn new(config: FeatureConfig, dict: &NormalizationDict, stemmer: Stemmer) -> Self {
        Pipeline { config, normalizer: Normalizer::new(dict, config.zwnj), stemmer: config.stem.then_some(stemmer) }
    }

    /// Default dictionary and affix table.
    pub fn with_defaults(config: FeatureConfig) -> Self {
        Self::new(config, &NormalizationDict::default(), Stemmer::default())
    }

    pub fn config(&self) -> FeatureConfig {
        self.config
    }

    pub fn tokens(&self, raw: &str) -> Vec<String> {
        tokenize(&self.normalizer.normalize(raw))
    }

    pub fn features(&self, raw: &str) -> Vec<Feature> {
        featurize(&self.tokens(raw), self.config.bigrams, self.stemmer.as_ref())
    }

    /// Normalizes, tokenizes and featurizes every document.
    pub fn prepare(&self, corpus: &Corpus) -> PreparedCorpus {
        let docs = par::map(corpus.documents(), |d| PreparedDoc {
            id: d.id.clone(),
            label: d.label,
            group: d.group.clone(),
            features: self.features(&d.text),
        });
        PreparedCorpus { classes: corpus.classes().clone(), config: self.config, docs }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreparedDoc {
    pub id: String,
    pub label: Option<ClassId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub features: Vec<Feature>,
}

/// A featurized corpus. Feature spaces are built from subsets of it so that
/// held-out documents never contribute statistics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreparedCorpus {
    pub classes: ClassSet,
    pub config: FeatureConfig,
    pub docs: Vec<PreparedDoc>,
}

impl PreparedCorpus {
    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn labels(&self) -> Result<Vec<ClassId>> {
        self.docs
            .iter()
            .map(|d| d.label.ok_or_else(|| Error::Data(format!("document `{}` has no label", d.id))))
            .collect()
    }

    /// Feature space over the given documents (all of them when `None`).
    pub fn feature_space(&self, indices: Option<&[usize]>) -> Result<FeatureSpace> {
        if self.docs.is_empty() || indices.is_some_and(<[usize]>::is_empty) {
            return Err(Error::Empty("corpus".into()));
        }
        match indices {
            Some(idx) => FeatureSpace::build(idx.iter().map(|&i| self.docs[i].features.as_slice())),
            None => FeatureSpace::build(self.docs.iter().map(|d| d.features.as_slice())),
        }
    }

    /// Builds the feature space from the selected documents and encodes them
    /// against it.
    pub fn training_set(&self, indices: Option<&[usize]>) -> Result<TrainingSet> {
        let space = self.feature_space(indices)?;
        let all: Vec<usize>;
        let idx = match indices {
            Some(idx) => idx,
            None => {
                all = (0..self.docs.len()).collect();
                &all
            }
        };
        let docs = idx
            .iter()
            .map(|&i| {
                let d = &self.docs[i];
                let label = d.label.ok_or_else(|| Error::Data(format!("document `{}` has no label", d.id)))?;
                Ok(EncodedDoc { label, counts: space.encode(&d.features) })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TrainingSet { classes: self.classes.clone(), space, docs })
    }
}

/// A document as sorted `(feature, count)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedDoc {
    pub label: ClassId,
    pub counts: Vec<(FeatureId, u32)>,
}

/// Labeled documents encoded against the feature space built from them.
#[derive(Clone, Debug)]
pub struct TrainingSet {
    pub classes: ClassSet,
    pub space: FeatureSpace,
    pub docs: Vec<EncodedDoc>,
}

impl TrainingSet {
    pub fn class_sizes(&self) -> Vec<u64> {
        let mut sizes = vec![0u64; self.classes.len()];
        for d in &self.docs {
            sizes[d.label.index()] += 1;
        }
        sizes
    }
}
