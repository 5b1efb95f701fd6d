//! Seeded synthetic polarity corpora with a planted signal.
//!
//! Both classes draw tokens from a shared Zipf-shaped vocabulary. Half of the
//! planted polar features have their weight multiplied by
//! `polarity_strength` in the positive class, the other half in the negative
//! class. [`inflect`] rewrites an abstract corpus with Persian-looking stems,
//! random inflectional affixes and pseudo-space compounds.

use std::io::Write;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ClassId, ClassSet, Corpus, Document, LoadMode, ZWNJ};
use crate::error::{Error, Result};

/// Exponent of the rank-frequency law for the shared vocabulary.
const ZIPF_EXPONENT: f64 = 0.75;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n_docs: usize,
    /// Fraction of positive documents.
    pub class_balance: f64,
    pub vocab_size: usize,
    pub n_polar_features: usize,
    /// Likelihood ratio of a polar feature between its class and the other.
    pub polarity_strength: f64,
    /// Inclusive token-count range.
    pub doc_length: (usize, usize),
    pub seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            n_docs: 400,
            class_balance: 0.5,
            vocab_size: 500,
            n_polar_features: 40,
            polarity_strength: 8.0,
            doc_length: (20, 60),
            seed: 7,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_docs == 0 || self.vocab_size == 0 || self.doc_length.0 == 0 {
            return bad("document count, vocabulary size and document lengths must be positive".into());
        }
        if !(self.class_balance > 0.0 && self.class_balance < 1.0) {
            return bad(format!("class balance {} must lie in (0, 1)", self.class_balance));
        }
        if self.n_polar_features > self.vocab_size {
            return bad(format!("{} polar features exceed a vocabulary of {}", self.n_polar_features, self.vocab_size));
        }
        if !(self.polarity_strength >= 1.0 && self.polarity_strength.is_finite()) {
            return bad(format!("polarity strength {} must be at least 1", self.polarity_strength));
        }
        if self.doc_length.0 > self.doc_length.1 {
            return bad(format!("document length range {:?} is empty", self.doc_length));
        }
        Ok(())
    }
}

/// A planted feature and the class it signals.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlantedFeature {
    pub surface: String,
    pub class: ClassId,
}

pub fn vocab_token(i: usize) -> String {
    format!("w{i:04}")
}

pub fn generate(spec: &GeneratorSpec) -> Result<(Corpus, Vec<PlantedFeature>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let classes = ClassSet::binary();
    let (neg, pos) = (ClassId(0), ClassId(1));

    let base: Vec<f64> = (0..spec.vocab_size).map(|r| 1.0 / ((r + 1) as f64).powf(ZIPF_EXPONENT)).collect();
    let polar = index::sample(&mut rng, spec.vocab_size, spec.n_polar_features).into_vec();
    let half = spec.n_polar_features / 2;
    let mut weights = [base.clone(), base];
    let mut planted = Vec::with_capacity(polar.len());
    for (j, &w) in polar.iter().enumerate() {
        let class = if j < half { pos } else { neg };
        weights[class.index()][w] *= spec.polarity_strength;
        planted.push(PlantedFeature { surface: vocab_token(w), class });
    }
    planted.sort();
    let dists = [
        WeightedIndex::new(&weights[0]).map_err(|e| Error::Invariant(e.to_string()))?,
        WeightedIndex::new(&weights[1]).map_err(|e| Error::Invariant(e.to_string()))?,
    ];

    let n_pos = ((spec.n_docs as f64) * spec.class_balance).round() as usize;
    let mut labels: Vec<ClassId> = (0..spec.n_docs).map(|i| if i < n_pos { pos } else { neg }).collect();
    labels.shuffle(&mut rng);

    let documents = labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| {
            let len = rng.gen_range(spec.doc_length.0..=spec.doc_length.1);
            let tokens: Vec<String> = (0..len).map(|_| vocab_token(dists[label.index()].sample(&mut rng))).collect();
            Document { id: format!("syn-{i:05}"), text: tokens.join(" "), label: Some(label), group: None }
        })
        .collect();
    Ok((Corpus::new(classes, documents, LoadMode::Train)?, planted))
}

/// Surface rewriting applied by [`inflect`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inflection {
    /// Probability that a token occurrence carries an inflectional affix.
    pub affix_rate: f64,
    /// Fraction of vocabulary items that are two-part compounds, written with
    /// either a pseudo-space or a plain space.
    pub compound_rate: f64,
    pub seed: u64,
}

impl Default for Inflection {
    fn default() -> Self {
        Inflection { affix_rate: 0.5, compound_rate: 0.15, seed: 11 }
    }
}

// none of these letters is an affix of the shipped stemmer table
const STEM_LETTERS: [char; 16] = ['ب', 'پ', 'ج', 'چ', 'خ', 'ژ', 'س', 'ش', 'ف', 'ق', 'ک', 'گ', 'ل', 'ز', 'ط', 'غ'];
const SUFFIXES: [&str; 6] = ["ها", "\u{200C}ها", "ان", "ات", "های", "ی"];
const PREFIX: &str = "می\u{200C}";

/// A distinct Persian-looking stem of at least three letters for every index.
pub fn persian_stem(i: usize) -> String {
    let mut digits = Vec::new();
    let mut n = i;
    loop {
        digits.push(STEM_LETTERS[n % 16]);
        n /= 16;
        if n == 0 {
            break;
        }
    }
    while digits.len() < 3 {
        digits.push(STEM_LETTERS[0]);
    }
    digits.iter().rev().collect()
}

/// Rewrites `w####` tokens as Persian-looking words: every occurrence may
/// gain a random affix, and compound items are split by either a ZWNJ or a
/// space. Non-vocabulary tokens pass through.
pub fn inflect(corpus: &Corpus, spec: &Inflection) -> Result<Corpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let documents = corpus
        .documents()
        .iter()
        .map(|d| {
            let words: Vec<String> = d
                .text
                .split_whitespace()
                .map(|tok| {
                    let Some(i) = tok.strip_prefix('w').and_then(|n| n.parse::<usize>().ok()) else {
                        return tok.to_owned();
                    };
                    // compound membership is a property of the vocabulary item
                    let compound = (hash_unit(i) < spec.compound_rate).then(|| persian_stem(i * 7 + 4099));
                    let mut word = persian_stem(i);
                    if let Some(second) = compound {
                        word.push(if rng.gen_bool(0.5) { ZWNJ } else { ' ' });
                        word.push_str(&second);
                    }
                    if rng.gen_bool(spec.affix_rate) {
                        if rng.gen_bool(0.2) {
                            word.insert_str(0, PREFIX);
                        } else {
                            word.push_str(SUFFIXES[rng.gen_range(0..SUFFIXES.len())]);
                        }
                    }
                    word
                })
                .collect();
            Document { text: words.join(" "), ..d.clone() }
        })
        .collect();
    Corpus::new(corpus.classes().clone(), documents, LoadMode::Train)
}

/// Deterministic pseudo-uniform value in [0, 1) for a vocabulary index.
fn hash_unit(i: usize) -> f64 {
    let mut x = (i as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    (x >> 11) as f64 / (1u64 << 53) as f64
}

/// JSON-lines corpus in the loader's format.
pub fn write_jsonl<W: Write>(corpus: &Corpus, mut w: W) -> std::io::Result<()> {
    for d in corpus.documents() {
        let label = d.label.map(|l| corpus.classes().name(l));
        let line = serde_json::json!({ "id": d.id, "text": d.text, "label": label });
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// `surface<TAB>class` per planted feature.
pub fn write_ground_truth<W: Write>(planted: &[PlantedFeature], classes: &ClassSet, mut w: W) -> std::io::Result<()> {
    for p in planted {
        writeln!(w, "{}\t{}", p.surface, classes.name(p.class))?;
    }
    Ok(())
}
