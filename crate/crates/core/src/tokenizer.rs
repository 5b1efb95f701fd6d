//! Tokenization, unigram/bigram featurization and the feature space.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::ZWNJ;
use crate::error::{Error, Result};
use crate::stemmer::Stemmer;

/// Reserved codepoint (SYMBOL FOR UNIT SEPARATOR) joining the two halves of a
/// bigram surface. Tokens never contain it, so bigrams cannot collide with
/// unigrams.
pub const BIGRAM_JOINER: char = '\u{241F}';

/// Punctuation stripped from token edges.
pub fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '،' | '؛'
                | '؟'
                | '«'
                | '»'
                | '…'
                | '“'
                | '”'
                | '‘'
                | '’'
                | '٪'
                | '٫'
                | '٬'
                | '۔'
                | '–'
                | '—'
                | '¡'
                | '¿'
                | '·'
        )
}

fn is_edge_trim(c: char) -> bool {
    is_punct(c) || c == ZWNJ
}

/// Splits a whitespace-free token into leading punctuation, core and trailing
/// punctuation. A token made only of punctuation has an empty core.
pub(crate) fn split_edges(token: &str) -> (&str, &str, &str) {
    let start = token.find(|c: char| !is_edge_trim(c)).unwrap_or(token.len());
    let rest = &token[start..];
    let end = rest.char_indices().rev().find(|&(_, c)| !is_edge_trim(c)).map(|(i, c)| i + c.len_utf8()).unwrap_or(0);
    (&token[..start], &rest[..end], &rest[end..])
}

/// Splits normalized text on whitespace, strips punctuation (and stray ZWNJ)
/// from token edges and drops empty tokens. Interior punctuation and
/// interior ZWNJ are kept.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| c.is_whitespace() || c == BIGRAM_JOINER)
        .map(|t| split_edges(t).1)
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// A unigram or bigram feature.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Feature {
    surface: String,
    order: u8,
}

impl Feature {
    pub fn unigram(token: impl Into<String>) -> Self {
        let surface = token.into();
        debug_assert!(!surface.contains(BIGRAM_JOINER));
        Feature { surface, order: 1 }
    }

    pub fn bigram(first: &str, second: &str) -> Self {
        let mut surface = String::with_capacity(first.len() + second.len() + 3);
        surface.push_str(first);
        surface.push(BIGRAM_JOINER);
        surface.push_str(second);
        Feature { surface, order: 2 }
    }

    /// Rebuilds a feature from its serialized surface and order, checking
    /// the joiner invariant.
    pub fn from_parts(order: u8, surface: &str) -> Result<Self> {
        let joiners = surface.matches(BIGRAM_JOINER).count();
        match (order, joiners) {
            (1, 0) | (2, 1) if !surface.is_empty() => Ok(Feature { surface: surface.to_owned(), order }),
            _ => Err(Error::Data(format!("malformed order-{order} feature `{surface}`"))),
        }
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn order(&self) -> u8 {
        self.order
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order == 2 {
            let (a, b) = self.surface.split_once(BIGRAM_JOINER).unwrap_or((&self.surface, ""));
            write!(f, "{a} {b}")
        } else {
            f.write_str(&self.surface)
        }
    }
}

/// Emits every token (stemmed when a stemmer is given) as a unigram and, with
/// `use_bigrams`, every adjacent pair of those tokens as a bigram.
/// Multiplicity is preserved.
pub fn featurize(tokens: &[String], use_bigrams: bool, stemmer: Option<&Stemmer>) -> Vec<Feature> {
    let terms: Vec<String> = match stemmer {
        Some(s) => tokens.iter().map(|t| s.stem(t)).collect(),
        None => tokens.to_vec(),
    };
    let mut out: Vec<Feature> = terms.iter().map(|t| Feature::unigram(t.as_str())).collect();
    if use_bigrams {
        out.extend(terms.windows(2).map(|w| Feature::bigram(&w[0], &w[1])));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureId(pub u32);

impl FeatureId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// The set of distinct features with ids `0..len` in first-occurrence order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeatureSpace {
    features: Vec<Feature>,
    index: HashMap<Feature, FeatureId>,
}

impl FeatureSpace {
    /// Enumerates every distinct feature across `docs`, in order of first
    /// occurrence.
    pub fn build<'a, I>(docs: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [Feature]>,
    {
        let mut space = FeatureSpace::default();
        for doc in docs {
            for f in doc {
                space.insert(f);
            }
        }
        if space.is_empty() {
            return Err(Error::Empty("feature space".into()));
        }
        Ok(space)
    }

    fn insert(&mut self, f: &Feature) -> FeatureId {
        if let Some(&id) = self.index.get(f) {
            return id;
        }
        let id = FeatureId(self.features.len() as u32);
        self.features.push(f.clone());
        self.index.insert(f.clone(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn get(&self, f: &Feature) -> Option<FeatureId> {
        self.index.get(f).copied()
    }

    pub fn feature(&self, id: FeatureId) -> &Feature {
        &self.features[id.index()]
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn ids(&self) -> impl Iterator<Item = FeatureId> {
        (0..self.features.len() as u32).map(FeatureId)
    }

    /// Counts the in-space features of a document, sorted by id. Features
    /// outside the space are skipped.
    pub fn encode(&self, features: &[Feature]) -> Vec<(FeatureId, u32)> {
        let mut ids: Vec<FeatureId> = features.iter().filter_map(|f| self.get(f)).collect();
        ids.sort_unstable();
        let mut out: Vec<(FeatureId, u32)> = Vec::with_capacity(ids.len());
        for id in ids {
            match out.last_mut() {
                Some((last, n)) if *last == id => *n += 1,
                _ => out.push((id, 1)),
            }
        }
        out
    }

    /// One `id<TAB>order<TAB>surface` line per feature.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, f) in self.features.iter().enumerate() {
            writeln!(w, "{i}\t{}\t{}", f.order, f.surface)?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(r: R, source_name: &str) -> Result<Self> {
        let mut space = FeatureSpace::default();
        for (n, line) in r.lines().enumerate() {
            let line_no = n + 1;
            let line = line.map_err(|e| Error::io(source_name, e))?;
            if line.is_empty() {
                continue;
            }
            let parse_err =
                |message: String| Error::Parse { source_name: source_name.to_owned(), line: line_no, message };
            let mut cols = line.splitn(3, '\t');
            let (Some(id), Some(order), Some(surface)) = (cols.next(), cols.next(), cols.next()) else {
                return Err(parse_err("expected id, order and surface columns".into()));
            };
            let id: usize = id.parse().map_err(|_| parse_err(format!("bad feature id `{id}`")))?;
            let order: u8 = order.parse().map_err(|_| parse_err(format!("bad order `{order}`")))?;
            if id != space.len() {
                return Err(parse_err(format!("feature ids must be dense; expected {}, got {id}", space.len())));
            }
            let f = Feature::from_parts(order, surface).map_err(|e| parse_err(e.to_string()))?;
            if space.get(&f).is_some() {
                return Err(parse_err(format!("duplicate feature `{surface}`")));
            }
            space.insert(&f);
        }
        Ok(space)
    }

    /// SHA-256 of the serialized space, used to pair models with the space
    /// they were trained on.
    pub fn fingerprint(&self) -> String {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf).expect("writing to a Vec cannot fail");
        format!("{:x}", Sha256::digest(&buf))
    }
}
