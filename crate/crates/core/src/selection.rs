//! Feature scoring and top-k selection.
//!
//! Four measures are supported. Document frequency and term frequency
//! variance are class-free. Mutual information and modified mutual
//! information are computed per (feature, class) from the document-level
//! contingency cells
//!
//! ```text
//!             class c   not c
//!   has f        A        B
//!   lacks f      C        D        N = A + B + C + D
//! ```
//!
//! and aggregated over classes before ranking. Both use their ratio forms,
//! `MI = A·N / ((A+B)(A+C))` and
//! `MMI = (A·D − C·B) / ((A+C)(B+D)(A+B)(C+D))`. A zero denominator scores 0.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::ClassId;
use crate::error::{Error, Result};
use crate::par;
use crate::pipeline::TrainingSet;
use crate::tokenizer::{FeatureId, FeatureSpace};

/// One (feature, class) contingency table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cells {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl Cells {
    pub fn n(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    /// The table for the complementary class in a binary problem.
    pub fn swap_class(self) -> Cells {
        Cells { a: self.b, b: self.a, c: self.d, d: self.c }
    }
}

/// `A·N / ((A+B)(A+C))`; `None` when the denominator is zero.
pub fn mi(cells: Cells) -> Option<f64> {
    let Cells { a, b, c, .. } = cells;
    let den = (a + b) as f64 * (a + c) as f64;
    (den != 0.0).then(|| a as f64 * cells.n() as f64 / den)
}

/// `(A·D − C·B) / ((A+C)(B+D)(A+B)(C+D))`; `None` when any factor is zero.
pub fn mmi(cells: Cells) -> Option<f64> {
    let Cells { a, b, c, d } = cells;
    let num = a as i128 * d as i128 - c as i128 * b as i128;
    // grouped so that swapping the class multiplies the same pairs
    let den = ((a + c) as f64 * (b + d) as f64) * ((a + b) as f64 * (c + d) as f64);
    (den != 0.0).then(|| num as f64 / den)
}

/// `Σ_i (tf_i − mean)²` over the per-class totals, evaluated as
/// `(k·Σtf² − (Σtf)²) / k` in exact integer arithmetic.
pub fn tfv(tfs: &[u64]) -> f64 {
    let k = tfs.len() as i128;
    if k == 0 {
        return 0.0;
    }
    let sum: i128 = tfs.iter().map(|&t| t as i128).sum();
    let sum_sq: i128 = tfs.iter().map(|&t| t as i128 * t as i128).sum();
    (k * sum_sq - sum * sum) as f64 / k as f64
}

/// Document-level presence counts for every (feature, class).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContingencyCounts {
    n: u64,
    class_sizes: Vec<u64>,
    df: Vec<u64>,
    // present[f * k + c] = documents of class c containing f
    present: Vec<u64>,
}

impl ContingencyCounts {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn n_classes(&self) -> usize {
        self.class_sizes.len()
    }

    pub fn n_features(&self) -> usize {
        self.df.len()
    }

    pub fn class_sizes(&self) -> &[u64] {
        &self.class_sizes
    }

    pub fn cells(&self, f: FeatureId, c: ClassId) -> Cells {
        let k = self.n_classes();
        let a = self.present[f.index() * k + c.index()];
        let b = self.df[f.index()] - a;
        let c_cell = self.class_sizes[c.index()] - a;
        let d = self.n - a - b - c_cell;
        Cells { a, b, c: c_cell, d }
    }

    pub fn df(&self, f: FeatureId) -> u64 {
        self.df[f.index()]
    }

    pub fn score_df(&self, f: FeatureId) -> f64 {
        self.df(f) as f64
    }

    pub fn score_mi(&self, f: FeatureId, c: ClassId) -> f64 {
        mi(self.cells(f, c)).unwrap_or(0.0)
    }

    pub fn score_mmi(&self, f: FeatureId, c: ClassId) -> f64 {
        mmi(self.cells(f, c)).unwrap_or(0.0)
    }
}

pub fn count_contingency(set: &TrainingSet) -> Result<ContingencyCounts> {
    let n_features = set.space.len();
    if n_features == 0 {
        return Err(Error::Empty("feature space".into()));
    }
    let k = set.classes.len();
    let mut present = vec![0u64; n_features * k];
    let mut df = vec![0u64; n_features];
    for doc in &set.docs {
        for &(f, _) in &doc.counts {
            present[f.index() * k + doc.label.index()] += 1;
            df[f.index()] += 1;
        }
    }
    Ok(ContingencyCounts { n: set.docs.len() as u64, class_sizes: set.class_sizes(), df, present })
}

/// Occurrence totals of every feature in every class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassTermFrequencies {
    k: usize,
    tf: Vec<u64>,
}

impl ClassTermFrequencies {
    pub fn n_classes(&self) -> usize {
        self.k
    }

    pub fn n_features(&self) -> usize {
        self.tf.len() / self.k
    }

    pub fn tf(&self, f: FeatureId, c: ClassId) -> u64 {
        self.tf[f.index() * self.k + c.index()]
    }

    pub fn row(&self, f: FeatureId) -> &[u64] {
        &self.tf[f.index() * self.k..(f.index() + 1) * self.k]
    }

    pub fn score_tfv(&self, f: FeatureId) -> f64 {
        tfv(self.row(f))
    }
}

pub fn term_frequencies(set: &TrainingSet) -> ClassTermFrequencies {
    let k = set.classes.len();
    let mut tf = vec![0u64; set.space.len() * k];
    for doc in &set.docs {
        for &(f, n) in &doc.counts {
            tf[f.index() * k + doc.label.index()] += u64::from(n);
        }
    }
    ClassTermFrequencies { k, tf }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Df,
    Tfv,
    Mi,
    Mmi,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Mi, Method::Df, Method::Tfv, Method::Mmi];

    pub fn is_per_class(self) -> bool {
        matches!(self, Method::Mi | Method::Mmi)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "df" => Ok(Method::Df),
            "tfv" => Ok(Method::Tfv),
            "mi" => Ok(Method::Mi),
            "mmi" => Ok(Method::Mmi),
            _ => Err(Error::Config(format!("unknown selection method `{s}` (expected df, tfv, mi or mmi)"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Df => "df",
            Method::Tfv => "tfv",
            Method::Mi => "mi",
            Method::Mmi => "mmi",
        })
    }
}

/// How per-class MI/MMI scores become one score per feature.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Max,
    Mean,
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Aggregation::Max),
            "mean" => Ok(Aggregation::Mean),
            _ => Err(Error::Config(format!("unknown aggregation `{s}` (expected max or mean)"))),
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Max => "max",
            Aggregation::Mean => "mean",
        })
    }
}

/// Ranking direction for TFV. `Descending` keeps high-variance features.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Descending,
    Ascending,
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desc" | "descending" => Ok(Direction::Descending),
            "asc" | "ascending" => Ok(Direction::Ascending),
            _ => Err(Error::Config(format!("unknown direction `{s}` (expected desc or asc)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RankOptions {
    pub aggregation: Aggregation,
    pub tfv_direction: Direction,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRanking {
    pub method: Method,
    /// Score per feature id.
    pub scores: Vec<f64>,
    /// Best first; ties broken by ascending feature id.
    pub order: Vec<FeatureId>,
    /// Features for which some class had a zero MI/MMI denominator.
    pub degenerate: Vec<FeatureId>,
}

impl FeatureRanking {
    pub fn score(&self, f: FeatureId) -> f64 {
        self.scores[f.index()]
    }

    /// `rank<TAB>feature_id<TAB>surface<TAB>score`, score to 6 decimals.
    pub fn write_tsv<W: Write>(&self, space: &FeatureSpace, mut w: W) -> std::io::Result<()> {
        for (rank, &f) in self.order.iter().enumerate() {
            writeln!(w, "{}\t{}\t{}\t{:.6}", rank + 1, f, space.feature(f).surface(), self.score(f))?;
        }
        Ok(())
    }
}

fn aggregate_scores(per_class: impl Iterator<Item = f64>, agg: Aggregation) -> f64 {
    match agg {
        Aggregation::Max => per_class.fold(f64::NEG_INFINITY, f64::max),
        Aggregation::Mean => {
            let (sum, n) = per_class.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
            sum / n as f64
        }
    }
}

/// Scores every feature and sorts best first.
pub fn rank_features(
    counts: &ContingencyCounts,
    tfs: &ClassTermFrequencies,
    method: Method,
    opts: RankOptions,
) -> Result<FeatureRanking> {
    if counts.n_features() != tfs.n_features() || counts.n_classes() != tfs.n_classes() {
        return Err(Error::Invariant("contingency counts and term frequencies come from different splits".into()));
    }
    let k = counts.n_classes();
    let scored: Vec<(f64, bool)> = par::map_range(counts.n_features(), |i| {
        let f = FeatureId(i as u32);
        let classes = (0..k).map(ClassId);
        match method {
            Method::Df => (counts.score_df(f), false),
            Method::Tfv => (tfs.score_tfv(f), false),
            Method::Mi => {
                let raw: Vec<Option<f64>> = classes.map(|c| mi(counts.cells(f, c))).collect();
                let degenerate = raw.iter().any(Option::is_none);
                (aggregate_scores(raw.into_iter().map(|s| s.unwrap_or(0.0)), opts.aggregation), degenerate)
            }
            Method::Mmi => {
                let raw: Vec<Option<f64>> = classes.map(|c| mmi(counts.cells(f, c))).collect();
                let degenerate = raw.iter().any(Option::is_none);
                (aggregate_scores(raw.into_iter().map(|s| s.unwrap_or(0.0)), opts.aggregation), degenerate)
            }
        }
    });
    let scores: Vec<f64> = scored.iter().map(|&(s, _)| s).collect();
    if let Some(bad) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::Invariant(format!("non-finite {method} score for feature {bad}")));
    }
    let degenerate = scored.iter().enumerate().filter(|(_, &(_, d))| d).map(|(i, _)| FeatureId(i as u32)).collect();

    let ascending = method == Method::Tfv && opts.tfv_direction == Direction::Ascending;
    let mut order: Vec<FeatureId> = (0..scores.len() as u32).map(FeatureId).collect();
    order.sort_by(|x, y| {
        let (sx, sy) = (scores[x.index()], scores[y.index()]);
        let by_score = if ascending { sx.total_cmp(&sy) } else { sy.total_cmp(&sx) };
        by_score.then(x.cmp(y))
    });
    Ok(FeatureRanking { method, scores, order, degenerate })
}

/// The first `k` ids of the ranking, returned in ascending id order.
pub fn select_top_k(ranking: &FeatureRanking, k: usize) -> Result<Vec<FeatureId>> {
    let size = ranking.order.len();
    if k == 0 || k > size {
        return Err(Error::Config(format!("feature budget {k} out of range 1..={size}")));
    }
    let mut ids = ranking.order[..k].to_vec();
    ids.sort_unstable();
    Ok(ids)
}
