//! Multinomial MAP Naive Bayes over a selected feature subset.
//!
//! Likelihoods are Laplace smoothed, `P(f|c) = (n_fc + 1) / (n_c + V)`, where
//! `n_fc` counts occurrences of `f` in class `c`, `n_c` sums those counts over
//! the selected features and `V` is the smoothing-space size. Priors are
//! either `(1 + |R_c|) / (|R| + V)` or the plain fraction `|R_c| / |R|`.
//! Everything is stored as natural logarithms.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{ClassId, ClassSet};
use crate::error::{Error, Result};
use crate::pipeline::{FeatureConfig, TrainingSet};
use crate::tokenizer::{Feature, FeatureId, FeatureSpace};

pub const MODEL_FORMAT: &str = "polarity-model v1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorMode {
    /// `(1 + |R_c|) / (|R| + V)`. Does not sum to one across classes.
    #[default]
    Paper,
    /// `|R_c| / |R|`.
    Standard,
}

impl FromStr for PriorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(PriorMode::Paper),
            "standard" => Ok(PriorMode::Standard),
            _ => Err(Error::Config(format!("unknown prior mode `{s}` (expected paper or standard)"))),
        }
    }
}

impl fmt::Display for PriorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PriorMode::Paper => "paper",
            PriorMode::Standard => "standard",
        })
    }
}

/// Which feature count is used as `V` in the smoothing denominators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothingSpace {
    /// The selected subset; likelihoods then sum to one.
    #[default]
    Selected,
    /// The whole pre-selection feature space.
    Full,
}

impl FromStr for SmoothingSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "selected" => Ok(SmoothingSpace::Selected),
            "full" => Ok(SmoothingSpace::Full),
            _ => Err(Error::Config(format!("unknown smoothing space `{s}` (expected selected or full)"))),
        }
    }
}

impl fmt::Display for SmoothingSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SmoothingSpace::Selected => "selected",
            SmoothingSpace::Full => "full",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrainOptions {
    pub prior: PriorMode,
    pub smoothing: SmoothingSpace,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    classes: ClassSet,
    options: TrainOptions,
    fspace_size: usize,
    smoothing_size: usize,
    log_prior: Vec<f64>,
    class_totals: Vec<u64>,
    /// Ascending feature ids.
    selected: Vec<FeatureId>,
    /// `log_likelihood[row * k + c]`, rows parallel to `selected`.
    log_likelihood: Vec<f64>,
    row_of: HashMap<FeatureId, usize>,
}

/// The argmax class and the per-class log scores.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub class: ClassId,
    pub scores: Vec<f64>,
}

pub fn train(set: &TrainingSet, selected: &[FeatureId], options: TrainOptions) -> Result<TrainedModel> {
    if set.docs.is_empty() {
        return Err(Error::Empty("training set".into()));
    }
    if selected.is_empty() {
        return Err(Error::Config("no features selected".into()));
    }
    let mut selected = selected.to_vec();
    selected.sort_unstable();
    selected.dedup();
    if let Some(bad) = selected.iter().find(|f| f.index() >= set.space.len()) {
        return Err(Error::Config(format!("selected feature {bad} is outside the feature space")));
    }

    let k = set.classes.len();
    let class_sizes = set.class_sizes();
    if options.prior == PriorMode::Standard {
        if let Some(c) = class_sizes.iter().position(|&n| n == 0) {
            return Err(Error::Data(format!("class `{}` has no training documents", set.classes.name(ClassId(c)))));
        }
    }

    let row_of: HashMap<FeatureId, usize> = selected.iter().enumerate().map(|(r, &f)| (f, r)).collect();
    let mut counts = vec![0u64; selected.len() * k];
    for doc in &set.docs {
        for &(f, n) in &doc.counts {
            if let Some(&row) = row_of.get(&f) {
                counts[row * k + doc.label.index()] += u64::from(n);
            }
        }
    }
    let mut class_totals = vec![0u64; k];
    for row in counts.chunks(k) {
        for (t, &n) in class_totals.iter_mut().zip(row) {
            *t += n;
        }
    }

    let fspace_size = set.space.len();
    let smoothing_size = match options.smoothing {
        SmoothingSpace::Selected => selected.len(),
        SmoothingSpace::Full => fspace_size,
    };
    let total_docs: u64 = class_sizes.iter().sum();
    let log_prior = class_sizes
        .iter()
        .map(|&r| match options.prior {
            PriorMode::Paper => ((1 + r) as f64 / (total_docs + smoothing_size as u64) as f64).ln(),
            PriorMode::Standard => (r as f64 / total_docs as f64).ln(),
        })
        .collect();
    let log_likelihood = counts
        .chunks(k)
        .flat_map(|row| {
            row.iter()
                .zip(&class_totals)
                .map(|(&n, &total)| ((n + 1) as f64 / (total + smoothing_size as u64) as f64).ln())
                .collect::<Vec<_>>()
        })
        .collect();

    Ok(TrainedModel {
        classes: set.classes.clone(),
        options,
        fspace_size,
        smoothing_size,
        log_prior,
        class_totals,
        selected,
        log_likelihood,
        row_of,
    })
}

impl TrainedModel {
    pub fn classes(&self) -> &ClassSet {
        &self.classes
    }

    pub fn options(&self) -> TrainOptions {
        self.options
    }

    pub fn selected(&self) -> &[FeatureId] {
        &self.selected
    }

    pub fn fspace_size(&self) -> usize {
        self.fspace_size
    }

    pub fn smoothing_size(&self) -> usize {
        self.smoothing_size
    }

    pub fn class_totals(&self) -> &[u64] {
        &self.class_totals
    }

    pub fn log_prior(&self, c: ClassId) -> f64 {
        self.log_prior[c.index()]
    }

    /// `None` for features that were not selected.
    pub fn log_likelihood(&self, f: FeatureId, c: ClassId) -> Option<f64> {
        let k = self.classes.len();
        self.row_of.get(&f).map(|&row| self.log_likelihood[row * k + c.index()])
    }

    /// Scores an encoded document. Unselected features are skipped.
    pub fn classify_counts(&self, counts: &[(FeatureId, u32)]) -> Prediction {
        let k = self.classes.len();
        let mut scores = self.log_prior.clone();
        for &(f, n) in counts {
            if let Some(&row) = self.row_of.get(&f) {
                for (s, ll) in scores.iter_mut().zip(&self.log_likelihood[row * k..(row + 1) * k]) {
                    *s += f64::from(n) * ll;
                }
            }
        }
        let mut best = 0;
        for (c, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = c;
            }
        }
        Prediction { class: ClassId(best), scores }
    }

    /// Scores a featurized document. Features unknown to `space` are skipped.
    pub fn classify(&self, space: &FeatureSpace, features: &[Feature]) -> Prediction {
        self.classify_counts(&space.encode(features))
    }

    /// Writes the versioned text format. Reals use 17 significant digits, so
    /// reading and re-writing reproduces the file byte for byte.
    pub fn write<W: Write>(&self, mut w: W, features: &FeatureConfig, space: &FeatureSpace) -> std::io::Result<()> {
        writeln!(w, "#{MODEL_FORMAT}")?;
        writeln!(w, "classes\t{}", self.classes.names().join("\t"))?;
        writeln!(w, "prior_mode\t{}", self.options.prior)?;
        writeln!(w, "smoothing_space\t{}", self.options.smoothing)?;
        writeln!(w, "zwnj\t{}", features.zwnj)?;
        writeln!(w, "stem\t{}", features.stem)?;
        writeln!(w, "bigrams\t{}", features.bigrams)?;
        writeln!(w, "fspace_size\t{}", self.fspace_size)?;
        writeln!(w, "fspace_sha256\t{}", space.fingerprint())?;
        writeln!(w, "smoothing_size\t{}", self.smoothing_size)?;
        writeln!(w, "selected\t{}", self.selected.len())?;
        for c in self.classes.ids() {
            writeln!(w, "prior\t{}\t{:.16e}", self.classes.name(c), self.log_prior[c.index()])?;
        }
        for c in self.classes.ids() {
            writeln!(w, "total\t{}\t{}", self.classes.name(c), self.class_totals[c.index()])?;
        }
        let k = self.classes.len();
        for (row, f) in self.selected.iter().enumerate() {
            for c in self.classes.ids() {
                writeln!(w, "{f}\t{}\t{:.16e}", self.classes.name(c), self.log_likelihood[row * k + c.index()])?;
            }
        }
        Ok(())
    }

    /// Reads a model and checks it against the feature space it will be used
    /// with. A different space is refused.
    pub fn read<R: BufRead>(r: R, source_name: &str, space: &FeatureSpace) -> Result<(Self, FeatureConfig)> {
        let parsed = ModelFile::parse(r, source_name)?;
        let fingerprint = space.fingerprint();
        if parsed.fspace_size != space.len() || parsed.fspace_sha256 != fingerprint {
            return Err(Error::Version(format!(
                "{source_name}: model was trained on feature space {} ({} features) but the supplied space is {} ({} features)",
                short(&parsed.fspace_sha256),
                parsed.fspace_size,
                short(&fingerprint),
                space.len()
            )));
        }
        Ok((parsed.model, parsed.features))
    }
}

fn short(hash: &str) -> &str {
    &hash[..hash.len().min(12)]
}

struct ModelFile {
    model: TrainedModel,
    features: FeatureConfig,
    fspace_size: usize,
    fspace_sha256: String,
}

impl ModelFile {
    fn parse<R: BufRead>(r: R, source_name: &str) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let err = |line: usize, message: String| Error::Parse { source_name: source_name.to_owned(), line, message };

        let mut header: HashMap<String, (usize, String)> = HashMap::new();
        let mut priors: Vec<(usize, String, String)> = Vec::new();
        let mut totals: Vec<(usize, String, String)> = Vec::new();
        let mut rows: Vec<(usize, String, String, String)> = Vec::new();

        match lines.next() {
            Some((_, Ok(first))) if first == format!("#{MODEL_FORMAT}") => {}
            Some((_, Ok(first))) => {
                return Err(Error::Version(format!(
                    "{source_name}: unsupported model format `{}` (this build reads `{MODEL_FORMAT}`)",
                    first.trim_start_matches('#')
                )))
            }
            Some((_, Err(e))) => return Err(Error::io(source_name, e)),
            None => return Err(Error::Empty(source_name.to_owned())),
        }
        for (n, line) in lines {
            let line_no = n + 1;
            let line = line.map_err(|e| Error::io(source_name, e))?;
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            match cols[0] {
                "prior" | "total" if cols.len() == 3 => {
                    let entry = (line_no, cols[1].to_owned(), cols[2].to_owned());
                    if cols[0] == "prior" {
                        priors.push(entry)
                    } else {
                        totals.push(entry)
                    }
                }
                key if key.parse::<u32>().is_ok() && cols.len() == 3 => {
                    rows.push((line_no, key.to_owned(), cols[1].to_owned(), cols[2].to_owned()))
                }
                key if key.starts_with(|c: char| c.is_ascii_lowercase())
                    && key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') =>
                {
                    header.insert(key.to_owned(), (line_no, cols[1..].join("\t")));
                }
                _ => return Err(err(line_no, "unrecognized line".into())),
            }
        }

        let get = |key: &str| header.get(key).ok_or_else(|| err(0, format!("missing header `{key}`")));
        let parse_field = |key: &str| -> Result<(usize, String)> { get(key).cloned() };
        let (_, classes) = parse_field("classes")?;
        let classes = ClassSet::new(classes.split('\t').map(str::to_owned)).map_err(|e| err(2, e.to_string()))?;
        let num = |key: &str| -> Result<usize> {
            let (l, v) = parse_field(key)?;
            v.parse().map_err(|_| err(l, format!("bad {key} `{v}`")))
        };
        let flag = |key: &str| -> Result<bool> {
            let (l, v) = parse_field(key)?;
            v.parse().map_err(|_| err(l, format!("bad {key} `{v}`")))
        };
        let typed = |key: &str| -> Result<String> { Ok(parse_field(key)?.1) };
        let options =
            TrainOptions { prior: typed("prior_mode")?.parse()?, smoothing: typed("smoothing_space")?.parse()? };
        let features = FeatureConfig { zwnj: typed("zwnj")?.parse()?, stem: flag("stem")?, bigrams: flag("bigrams")? };
        let fspace_size = num("fspace_size")?;
        let fspace_sha256 = typed("fspace_sha256")?;
        let smoothing_size = num("smoothing_size")?;
        let n_selected = num("selected")?;

        let k = classes.len();
        let class_of =
            |line: usize, name: &str| classes.id_of(name).ok_or_else(|| err(line, format!("unknown class `{name}`")));
        let real = |line: usize, v: &str| v.parse::<f64>().map_err(|_| err(line, format!("bad number `{v}`")));

        let mut log_prior = vec![f64::NAN; k];
        for (l, c, v) in &priors {
            log_prior[class_of(*l, c)?.index()] = real(*l, v)?;
        }
        let mut class_totals = vec![u64::MAX; k];
        for (l, c, v) in &totals {
            class_totals[class_of(*l, c)?.index()] = v.parse().map_err(|_| err(*l, format!("bad total `{v}`")))?;
        }
        if log_prior.iter().any(|p| p.is_nan()) || class_totals.contains(&u64::MAX) {
            return Err(err(0, "missing prior or total for some class".into()));
        }

        let mut selected = Vec::with_capacity(n_selected);
        let mut log_likelihood = vec![f64::NAN; n_selected * k];
        let mut row_of = HashMap::with_capacity(n_selected);
        for (l, f, c, v) in &rows {
            let f = FeatureId(f.parse().map_err(|_| err(*l, format!("bad feature id `{f}`")))?);
            if f.index() >= fspace_size {
                return Err(err(*l, format!("feature {f} outside a space of {fspace_size}")));
            }
            let row = *row_of.entry(f).or_insert_with(|| {
                selected.push(f);
                selected.len() - 1
            });
            if row >= n_selected {
                return Err(err(*l, format!("more than {n_selected} selected features")));
            }
            log_likelihood[row * k + class_of(*l, c)?.index()] = real(*l, v)?;
        }
        if selected.len() != n_selected || log_likelihood.iter().any(|x| x.is_nan()) {
            return Err(err(0, "likelihood table is incomplete".into()));
        }
        if selected.windows(2).any(|w| w[0] >= w[1]) {
            return Err(err(0, "feature rows must be in ascending id order".into()));
        }

        let model = TrainedModel {
            classes,
            options,
            fspace_size,
            smoothing_size,
            log_prior,
            class_totals,
            selected,
            log_likelihood,
            row_of,
        };
        Ok(ModelFile { model, features, fspace_size, fspace_sha256 })
    }
}
