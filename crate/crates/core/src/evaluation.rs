//! Stratified k-fold cross-validation and precision/recall/F reporting.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::classifier::{train, TrainOptions, TrainedModel};
use crate::corpus::{ClassId, Corpus};
use crate::error::{Error, Result};
use crate::par;
use crate::pipeline::PreparedCorpus;
use crate::selection::{count_contingency, rank_features, select_top_k, term_frequencies, Method, RankOptions};
use crate::tokenizer::{FeatureId, FeatureSpace};

/// Fold index per document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    assignments: Vec<usize>,
}

impl FoldPlan {
    /// Shuffles each class with a seeded generator, then deals documents to
    /// folds round-robin. The deal continues across classes so that overall
    /// fold sizes also differ by at most one.
    pub fn stratified(labels: &[ClassId], n_classes: usize, k: usize, seed: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::Config(format!("need at least 2 folds, got {k}")));
        }
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
        for (i, l) in labels.iter().enumerate() {
            by_class
                .get_mut(l.index())
                .ok_or_else(|| Error::Data(format!("class index {} out of range", l.index())))?
                .push(i);
        }
        for (c, members) in by_class.iter().enumerate() {
            if members.len() < k {
                return Err(Error::Data(format!("class {c} has {} documents, fewer than {k} folds", members.len())));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut assignments = vec![usize::MAX; labels.len()];
        let mut next = 0;
        for members in &mut by_class {
            members.shuffle(&mut rng);
            for &doc in members.iter() {
                assignments[doc] = next;
                next = (next + 1) % k;
            }
        }
        Ok(FoldPlan { k, seed, assignments })
    }

    pub fn fold_of(&self, doc: usize) -> usize {
        self.assignments[doc]
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified folds over a fully labeled corpus. Document `i` of the corpus is
/// assigned to fold `plan.fold_of(i)`.
pub fn make_folds(corpus: &Corpus, k: usize, seed: u64) -> Result<FoldPlan> {
    let labels = corpus
        .documents()
        .iter()
        .map(|d| d.label.ok_or_else(|| Error::Data(format!("document `{}` has no label", d.id))))
        .collect::<Result<Vec<_>>>()?;
    FoldPlan::stratified(&labels, corpus.classes().len(), k, seed)
}

/// One-vs-rest confusion counts for a class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassOutcome {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ClassOutcome {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    fn add(&mut self, other: &ClassOutcome) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }

    /// Per-class outcomes from `(truth, predicted)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (ClassId, ClassId)> + Clone, n_classes: usize) -> Vec<Self> {
        (0..n_classes)
            .map(|c| {
                let c = ClassId(c);
                let mut o = ClassOutcome::default();
                for (truth, pred) in pairs.clone() {
                    match (truth == c, pred == c) {
                        (true, true) => o.tp += 1,
                        (false, true) => o.fp += 1,
                        (true, false) => o.fn_ += 1,
                        (false, false) => o.tn += 1,
                    }
                }
                o
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    /// Some ratio was 0/0 and was taken as 0.
    pub undefined: bool,
}

fn ratio(num: f64, den: f64) -> (f64, bool) {
    if den == 0.0 {
        (0.0, true)
    } else {
        (num / den, false)
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_score(precision: f64, recall: f64) -> f64 {
    ratio(2.0 * precision * recall, precision + recall).0
}

pub fn metrics(o: &ClassOutcome) -> Metrics {
    let (precision, u1) = ratio(o.tp as f64, (o.tp + o.fp) as f64);
    let (recall, u2) = ratio(o.tp as f64, (o.tp + o.fn_) as f64);
    let (f, u3) = ratio(2.0 * precision * recall, precision + recall);
    Metrics { precision, recall, f_score: f, undefined: u1 || u2 || u3 }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub macro_precision: f64,
    pub macro_recall: f64,
    /// Mean of the per-item F-scores.
    pub macro_f: f64,
    pub micro_precision: f64,
    pub micro_recall: f64,
    /// F of the micro-averaged precision and recall.
    pub micro_f: f64,
}

/// Macro averages are unweighted means of per-item metrics; micro averages
/// are metrics of the summed counts.
pub fn aggregate(outcomes: &[ClassOutcome]) -> Result<Averages> {
    if outcomes.is_empty() {
        return Err(Error::Empty("outcome list".into()));
    }
    let n = outcomes.len() as f64;
    let per: Vec<Metrics> = outcomes.iter().map(metrics).collect();
    let mut pooled = ClassOutcome::default();
    outcomes.iter().for_each(|o| pooled.add(o));
    let micro = metrics(&pooled);
    Ok(Averages {
        macro_precision: per.iter().map(|m| m.precision).sum::<f64>() / n,
        macro_recall: per.iter().map(|m| m.recall).sum::<f64>() / n,
        macro_f: per.iter().map(|m| m.f_score).sum::<f64>() / n,
        micro_precision: micro.precision,
        micro_recall: micro.recall,
        micro_f: micro.f_score,
    })
}

/// Everything that determines a cross-validation run besides the corpus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// `None` trains on the full feature space.
    pub selector: Option<Method>,
    pub rank: RankOptions,
    /// Feature budget; `None` keeps every feature.
    pub top_k: Option<usize>,
    pub train: TrainOptions,
    pub folds: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            selector: Some(Method::Mmi),
            rank: RankOptions::default(),
            top_k: None,
            train: TrainOptions::default(),
            folds: 5,
            seed: 0,
        }
    }
}

impl EvalConfig {
    pub fn selector_name(&self) -> String {
        self.selector.map_or_else(|| "none".to_owned(), |m| m.to_string())
    }
}

/// Per-fold artifacts, exposed for inspection.
pub struct FoldRun {
    pub fold: usize,
    pub space: FeatureSpace,
    pub selected: Vec<FeatureId>,
    pub model: TrainedModel,
    /// `(document index, truth, predicted)` for every held-out document.
    pub predictions: Vec<(usize, ClassId, ClassId)>,
}

/// Trains on every fold but `fold` and classifies the held-out documents.
pub fn run_fold(corpus: &PreparedCorpus, plan: &FoldPlan, fold: usize, cfg: &EvalConfig) -> Result<FoldRun> {
    let train_idx = plan.train_indices(fold);
    let test_idx = plan.test_indices(fold);
    let set = corpus.training_set(Some(&train_idx))?;
    let selected: Vec<FeatureId> = match (cfg.selector, cfg.top_k) {
        (Some(method), k) => {
            let counts = count_contingency(&set)?;
            let ranking = rank_features(&counts, &term_frequencies(&set), method, cfg.rank)?;
            select_top_k(&ranking, k.unwrap_or(set.space.len()))?
        }
        (None, Some(k)) if k != set.space.len() => {
            return Err(Error::Config(format!("a feature budget ({k}) needs a selector")))
        }
        (None, _) => set.space.ids().collect(),
    };
    let model = train(&set, &selected, cfg.train)?;
    let predictions = test_idx
        .iter()
        .map(|&i| {
            let doc = &corpus.docs[i];
            let truth = doc.label.ok_or_else(|| Error::Data(format!("document `{}` has no label", doc.id)))?;
            Ok((i, truth, model.classify(&set.space, &doc.features).class))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FoldRun { fold, space: set.space, selected, model, predictions })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassResult {
    pub class: String,
    pub outcome: ClassOutcome,
    pub metrics: Metrics,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_docs: usize,
    pub test_docs: usize,
    pub feature_space: usize,
    pub selected: usize,
    pub classes: Vec<ClassResult>,
}

/// Cross-fold summary for one class.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassSummary {
    pub class: String,
    /// Mean of per-fold precision.
    pub precision: f64,
    /// Mean of per-fold recall.
    pub recall: f64,
    /// Mean of per-fold F-scores.
    pub f_score: f64,
    /// F of the mean precision and mean recall.
    pub f_of_means: f64,
    /// Counts summed over folds.
    pub outcome: ClassOutcome,
}

/// Macro/micro averages across user-declared dataset groups, per class.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupAverages {
    pub class: String,
    pub groups: Vec<(String, ClassOutcome)>,
    pub averages: Averages,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub folds: Vec<FoldReport>,
    pub classes: Vec<ClassSummary>,
    /// Macro: mean over classes of the fold-averaged metrics. Micro: from
    /// counts pooled over classes and folds.
    pub overall: Averages,
    pub groups: Option<Vec<GroupAverages>>,
    /// Some metric hit 0/0 and was reported as 0.
    pub undefined_metrics: bool,
}

pub fn run_cv(corpus: &PreparedCorpus, cfg: &EvalConfig) -> Result<EvalReport> {
    let labels = corpus.labels()?;
    let k_classes = corpus.classes.len();
    let plan = FoldPlan::stratified(&labels, k_classes, cfg.folds, cfg.seed)?;
    check_partition(&plan, corpus.len())?;

    let runs = par::map_range(cfg.folds, |fold| {
        run_fold(corpus, &plan, fold, cfg).map_err(|e| Error::Fold { fold, source: Box::new(e) })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let names = corpus.classes.names();
    let mut undefined = false;
    let mut folds = Vec::with_capacity(runs.len());
    let mut per_fold: Vec<Vec<(ClassOutcome, Metrics)>> = Vec::with_capacity(runs.len());
    for run in &runs {
        let outcomes = ClassOutcome::from_pairs(run.predictions.iter().map(|&(_, t, p)| (t, p)), k_classes);
        let results: Vec<(ClassOutcome, Metrics)> = outcomes.iter().map(|o| (*o, metrics(o))).collect();
        undefined |= results.iter().any(|(_, m)| m.undefined);
        folds.push(FoldReport {
            fold: run.fold,
            train_docs: corpus.len() - run.predictions.len(),
            test_docs: run.predictions.len(),
            feature_space: run.space.len(),
            selected: run.selected.len(),
            classes: results
                .iter()
                .zip(names)
                .map(|((o, m), name)| ClassResult { class: name.clone(), outcome: *o, metrics: *m })
                .collect(),
        });
        per_fold.push(results);
    }

    let n_folds = per_fold.len() as f64;
    let classes: Vec<ClassSummary> = (0..k_classes)
        .map(|c| {
            let mean = |get: fn(&Metrics) -> f64| per_fold.iter().map(|r| get(&r[c].1)).sum::<f64>() / n_folds;
            let (precision, recall) = (mean(|m| m.precision), mean(|m| m.recall));
            let mut outcome = ClassOutcome::default();
            per_fold.iter().for_each(|r| outcome.add(&r[c].0));
            ClassSummary {
                class: names[c].clone(),
                precision,
                recall,
                f_score: mean(|m| m.f_score),
                f_of_means: f_score(precision, recall),
                outcome,
            }
        })
        .collect();

    let pooled: Vec<ClassOutcome> = classes.iter().map(|c| c.outcome).collect();
    let micro = aggregate(&pooled)?;
    let n_classes = classes.len() as f64;
    let overall = Averages {
        macro_precision: classes.iter().map(|c| c.precision).sum::<f64>() / n_classes,
        macro_recall: classes.iter().map(|c| c.recall).sum::<f64>() / n_classes,
        macro_f: classes.iter().map(|c| c.f_score).sum::<f64>() / n_classes,
        ..micro
    };

    let groups = group_averages(corpus, &runs)?;
    Ok(EvalReport { config: cfg.clone(), folds, classes, overall, groups, undefined_metrics: undefined })
}

fn group_averages(corpus: &PreparedCorpus, runs: &[FoldRun]) -> Result<Option<Vec<GroupAverages>>> {
    if corpus.docs.iter().all(|d| d.group.is_none()) {
        return Ok(None);
    }
    let k = corpus.classes.len();
    let mut by_group: BTreeMap<String, Vec<(ClassId, ClassId)>> = BTreeMap::new();
    for run in runs {
        for &(i, truth, pred) in &run.predictions {
            let g = corpus.docs[i].group.clone().unwrap_or_default();
            by_group.entry(g).or_default().push((truth, pred));
        }
    }
    let outcomes: Vec<(String, Vec<ClassOutcome>)> =
        by_group.into_iter().map(|(g, pairs)| (g, ClassOutcome::from_pairs(pairs.iter().copied(), k))).collect();
    (0..k)
        .map(|c| {
            let groups: Vec<(String, ClassOutcome)> = outcomes.iter().map(|(g, o)| (g.clone(), o[c])).collect();
            let list: Vec<ClassOutcome> = groups.iter().map(|(_, o)| *o).collect();
            Ok(GroupAverages { class: corpus.classes.names()[c].clone(), groups, averages: aggregate(&list)? })
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

fn check_partition(plan: &FoldPlan, n_docs: usize) -> Result<()> {
    if plan.assignments().len() != n_docs || plan.assignments().iter().any(|&f| f >= plan.k) {
        return Err(Error::Invariant("fold plan does not cover the corpus".into()));
    }
    let sizes = plan.fold_sizes();
    let (lo, hi) = (sizes.iter().min().copied().unwrap_or(0), sizes.iter().max().copied().unwrap_or(0));
    if hi - lo > 1 {
        return Err(Error::Invariant(format!("fold sizes {sizes:?} differ by more than one")));
    }
    Ok(())
}

fn r4(x: f64) -> Value {
    json!((x * 1e4).round() / 1e4)
}

fn averages_json(a: &Averages) -> Value {
    json!({
        "macro": { "precision": r4(a.macro_precision), "recall": r4(a.macro_recall), "f_score": r4(a.macro_f) },
        "micro": { "precision": r4(a.micro_precision), "recall": r4(a.micro_recall), "f_score": r4(a.micro_f) },
    })
}

fn outcome_json(o: &ClassOutcome) -> Value {
    json!({ "tp": o.tp, "fp": o.fp, "fn": o.fn_, "tn": o.tn })
}

impl EvalReport {
    /// Nested JSON keyed by fold, class and metric; reals rounded to 4
    /// decimals.
    pub fn to_json(&self) -> Value {
        let folds: serde_json::Map<String, Value> = self
            .folds
            .iter()
            .map(|f| {
                let classes: serde_json::Map<String, Value> = f
                    .classes
                    .iter()
                    .map(|c| {
                        (
                            c.class.clone(),
                            json!({
                                "counts": outcome_json(&c.outcome),
                                "precision": r4(c.metrics.precision),
                                "recall": r4(c.metrics.recall),
                                "f_score": r4(c.metrics.f_score),
                            }),
                        )
                    })
                    .collect();
                (
                    f.fold.to_string(),
                    json!({
                        "train_docs": f.train_docs,
                        "test_docs": f.test_docs,
                        "feature_space": f.feature_space,
                        "selected": f.selected,
                        "classes": classes,
                    }),
                )
            })
            .collect();
        let classes: serde_json::Map<String, Value> = self
            .classes
            .iter()
            .map(|c| {
                (
                    c.class.clone(),
                    json!({
                        "precision": r4(c.precision),
                        "recall": r4(c.recall),
                        "f_score": r4(c.f_score),
                        "f_of_mean_precision_recall": r4(c.f_of_means),
                        "counts": outcome_json(&c.outcome),
                    }),
                )
            })
            .collect();
        let mut out = json!({
            "config": {
                "selector": self.config.selector_name(),
                "aggregation": self.config.rank.aggregation,
                "tfv_direction": self.config.rank.tfv_direction,
                "top_k": self.config.top_k,
                "prior": self.config.train.prior,
                "smoothing_space": self.config.train.smoothing,
                "folds": self.config.folds,
                "seed": self.config.seed,
            },
            "folds": folds,
            "classes": classes,
            "overall": averages_json(&self.overall),
            "undefined_metrics_reported_as_zero": self.undefined_metrics,
        });
        if let Some(groups) = &self.groups {
            let g: serde_json::Map<String, Value> = groups
                .iter()
                .map(|ga| {
                    let per: serde_json::Map<String, Value> =
                        ga.groups.iter().map(|(name, o)| (name.clone(), outcome_json(o))).collect();
                    (ga.class.clone(), json!({ "groups": per, "averages": averages_json(&ga.averages) }))
                })
                .collect();
            out["datasets"] = Value::Object(g);
        }
        out
    }

    /// Aligned text table: Approach / Class / Precision / Recall / F-score,
    /// followed by the macro and micro rows.
    pub fn to_table(&self) -> String {
        let approach = self.config.selector_name().to_uppercase();
        let mut rows: Vec<[String; 6]> = vec![[
            "Approach".into(),
            "Class".into(),
            "Precision".into(),
            "Recall".into(),
            "F-score".into(),
            "F(avg P,R)".into(),
        ]];
        for (i, c) in self.classes.iter().enumerate() {
            rows.push([
                if i == 0 { approach.clone() } else { String::new() },
                c.class.clone(),
                format!("{:.4}", c.precision),
                format!("{:.4}", c.recall),
                format!("{:.4}", c.f_score),
                format!("{:.4}", c.f_of_means),
            ]);
        }
        let o = &self.overall;
        rows.push([
            String::new(),
            "macro".into(),
            format!("{:.4}", o.macro_precision),
            format!("{:.4}", o.macro_recall),
            format!("{:.4}", o.macro_f),
            String::new(),
        ]);
        rows.push([
            String::new(),
            "micro".into(),
            format!("{:.4}", o.micro_precision),
            format!("{:.4}", o.micro_recall),
            format!("{:.4}", o.micro_f),
            String::new(),
        ]);
        let widths: Vec<usize> = (0..6).map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for r in &rows {
            let mut line = String::new();
            for (j, cell) in r.iter().enumerate() {
                let pad = widths[j] - cell.chars().count();
                if j < 2 {
                    let _ = write!(line, "{cell}{}  ", " ".repeat(pad));
                } else {
                    let _ = write!(line, "{}{cell}  ", " ".repeat(pad));
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}
