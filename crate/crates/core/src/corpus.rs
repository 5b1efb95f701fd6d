//! Labeled review corpora: loading from JSON-lines or TSV, and Persian text
//! normalization (character variants, pseudo-space, colloquial forms).

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenizer::{is_punct, split_edges};

/// ZERO WIDTH NON-JOINER, the Persian pseudo-space.
pub const ZWNJ: char = '\u{200C}';

const CHAR_VARIANTS_TSV: &str = include_str!("../data/char_variants.tsv");
const COLLOQUIAL_TSV: &str = include_str!("../data/colloquial.tsv");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassId(pub usize);

impl ClassId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// The declared class labels, in declaration order. Declaration order is the
/// tie-break order for classification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSet {
    names: Vec<String>,
}

impl ClassSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(Error::Config(format!("need at least 2 classes, got {}", names.len())));
        }
        let mut seen = HashSet::new();
        for n in &names {
            if n.is_empty() || n.contains(['\t', '\n']) {
                return Err(Error::Config(format!("invalid class name {n:?}")));
            }
            if !seen.insert(n.as_str()) {
                return Err(Error::Config(format!("duplicate class `{n}`")));
            }
        }
        Ok(ClassSet { names })
    }

    /// `negative`, `positive`.
    pub fn binary() -> Self {
        ClassSet { names: vec!["negative".into(), "positive".into()] }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: ClassId) -> &str {
        &self.names[id.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id_of(&self, name: &str) -> Option<ClassId> {
        self.names.iter().position(|n| n == name).map(ClassId)
    }

    pub fn ids(&self) -> impl Iterator<Item = ClassId> {
        (0..self.names.len()).map(ClassId)
    }
}

impl Default for ClassSet {
    fn default() -> Self {
        Self::binary()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: Option<ClassId>,
    /// Optional dataset split (e.g. product brand) for macro/micro averaging
    /// across datasets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    classes: ClassSet,
    documents: Vec<Document>,
    class_counts: Vec<usize>,
}

impl Corpus {
    /// Validates ids, labels and text. In [`LoadMode::Train`] every document
    /// must carry a label and non-blank text.
    pub fn new(classes: ClassSet, documents: Vec<Document>, mode: LoadMode) -> Result<Self> {
        if documents.is_empty() {
            return Err(Error::Empty("corpus".into()));
        }
        let mut ids = HashSet::with_capacity(documents.len());
        let mut class_counts = vec![0; classes.len()];
        for d in &documents {
            if !ids.insert(d.id.as_str()) {
                return Err(Error::Data(format!("duplicate document id `{}`", d.id)));
            }
            match d.label {
                Some(l) if l.0 < classes.len() => class_counts[l.0] += 1,
                Some(l) => {
                    return Err(Error::Data(format!("document `{}` has class index {} out of range", d.id, l.0)))
                }
                None if mode == LoadMode::Train => {
                    return Err(Error::Data(format!("document `{}` has no label", d.id)))
                }
                None => {}
            }
            if mode == LoadMode::Train && d.text.trim().is_empty() {
                return Err(Error::Data(format!("document `{}` has empty text", d.id)));
            }
        }
        let corpus = Corpus { classes, documents, class_counts };
        if mode == LoadMode::Train && corpus.class_counts.iter().sum::<usize>() != corpus.total() {
            return Err(Error::Invariant("class counts do not sum to the corpus size".into()));
        }
        Ok(corpus)
    }

    pub fn classes(&self) -> &ClassSet {
        &self.classes
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    /// Number of labeled documents per class, indexed by [`ClassId`].
    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    pub fn class_count(&self, class: ClassId) -> usize {
        self.class_counts[class.0]
    }

    pub fn total(&self) -> usize {
        self.documents.len()
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.documents.iter().all(|d| d.label.is_some())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Tsv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(Format::Jsonl),
            "tsv" => Ok(Format::Tsv),
            _ => Err(Error::Config(format!("unknown format `{s}` (expected jsonl or tsv)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Jsonl => "jsonl",
            Format::Tsv => "tsv",
        })
    }
}

/// Train mode requires labels; predict mode accepts unlabeled records and
/// blank text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoadMode {
    Train,
    Predict,
}

#[derive(Deserialize)]
struct JsonRecord {
    #[serde(default)]
    id: Option<serde_json::Value>,
    text: String,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    group: Option<String>,
}

struct RawRecord {
    line: usize,
    id: String,
    text: String,
    label: Option<String>,
    group: Option<String>,
}

pub fn load_corpus(path: &Path, format: Format, classes: &ClassSet, mode: LoadMode) -> Result<Corpus> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, &path.display().to_string(), format, classes, mode)
}

/// Parses corpus text. `source_name` appears in error messages.
pub fn parse_corpus(
    text: &str,
    source_name: &str,
    format: Format,
    classes: &ClassSet,
    mode: LoadMode,
) -> Result<Corpus> {
    let parse_err = |line: usize, message: String| Error::Parse { source_name: source_name.to_owned(), line, message };
    let mut records = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec = match format {
            Format::Jsonl => {
                let r: JsonRecord = serde_json::from_str(line).map_err(|e| parse_err(line_no, e.to_string()))?;
                let id = match r.id {
                    None => line_no.to_string(),
                    Some(serde_json::Value::String(s)) => s,
                    Some(serde_json::Value::Number(n)) => n.to_string(),
                    Some(other) => {
                        return Err(parse_err(line_no, format!("id must be a string or number, got {other}")))
                    }
                };
                RawRecord { line: line_no, id, text: r.text, label: r.label, group: r.group }
            }
            Format::Tsv => {
                if n == 0 && line.starts_with("id\ttext") {
                    continue;
                }
                let cols: Vec<&str> = line.split('\t').collect();
                let (id, text, label, group) = match cols.as_slice() {
                    [id, text] => (*id, *text, None, None),
                    [id, text, label] => (*id, *text, Some(*label), None),
                    [id, text, label, group] => (*id, *text, Some(*label), Some(*group)),
                    _ => {
                        return Err(parse_err(
                            line_no,
                            format!("expected 3 tab-separated columns, found {}", cols.len()),
                        ))
                    }
                };
                RawRecord {
                    line: line_no,
                    id: id.to_owned(),
                    text: text.to_owned(),
                    label: label.filter(|l| !l.is_empty()).map(str::to_owned),
                    group: group.filter(|g| !g.is_empty()).map(str::to_owned),
                }
            }
        };
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::Empty(source_name.to_owned()));
    }

    let mut seen = HashSet::with_capacity(records.len());
    let mut documents = Vec::with_capacity(records.len());
    for r in records {
        if r.id.is_empty() {
            return Err(parse_err(r.line, "empty document id".into()));
        }
        if !seen.insert(r.id.clone()) {
            return Err(parse_err(r.line, format!("duplicate document id `{}`", r.id)));
        }
        let label = match r.label {
            Some(l) => Some(classes.id_of(&l).ok_or_else(|| Error::UnknownLabel {
                source_name: source_name.to_owned(),
                line: r.line,
                label: l.clone(),
                declared: classes.names().join(", "),
            })?),
            None if mode == LoadMode::Train => return Err(parse_err(r.line, "missing label".into())),
            None => None,
        };
        if mode == LoadMode::Train && r.text.trim().is_empty() {
            return Err(parse_err(r.line, "empty text".into()));
        }
        documents.push(Document { id: r.id, text: r.text, label, group: r.group });
    }
    Corpus::new(classes.clone(), documents, mode)
}

/// How the pseudo-space (ZWNJ) is treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZwnjPolicy {
    /// Keep ZWNJ as an intra-word joiner: compounds stay one token.
    #[default]
    Join,
    /// Replace ZWNJ with a space: compounds split into their parts.
    Space,
}

impl FromStr for ZwnjPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "join" => Ok(ZwnjPolicy::Join),
            "space" => Ok(ZwnjPolicy::Space),
            _ => Err(Error::Config(format!("unknown zwnj policy `{s}` (expected join or space)"))),
        }
    }
}

impl fmt::Display for ZwnjPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ZwnjPolicy::Join => "join",
            ZwnjPolicy::Space => "space",
        })
    }
}

fn char_variants() -> &'static HashMap<char, Option<char>> {
    static TABLE: OnceLock<HashMap<char, Option<char>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let parse_cp = |s: &str| {
            let hex = s.strip_prefix("U+").expect("codepoint must look like U+XXXX");
            char::from_u32(u32::from_str_radix(hex, 16).expect("hex codepoint")).expect("valid codepoint")
        };
        CHAR_VARIANTS_TSV
            .lines()
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                let mut cols = l.split('\t');
                let from = parse_cp(cols.next().unwrap());
                let to = match cols.next().expect("target column") {
                    "-" => None,
                    t => Some(parse_cp(t)),
                };
                (from, to)
            })
            .collect()
    })
}

fn unify_chars(s: &str) -> String {
    let table = char_variants();
    s.chars()
        .filter_map(|c| match table.get(&c) {
            Some(mapped) => *mapped,
            None => Some(c),
        })
        .collect()
}

fn is_word_char(c: char) -> bool {
    !(c.is_whitespace() || c == ZWNJ || is_punct(c))
}

/// Applies the ZWNJ policy. Under `join`, runs of ZWNJ collapse to one and a
/// ZWNJ survives only between two word characters.
fn apply_zwnj(s: &str, policy: ZwnjPolicy) -> String {
    match policy {
        ZwnjPolicy::Space => s.replace(ZWNJ, " "),
        ZwnjPolicy::Join => {
            let chars: Vec<char> = s.chars().collect();
            let mut out = String::with_capacity(s.len());
            let mut i = 0;
            while i < chars.len() {
                let c = chars[i];
                if c != ZWNJ {
                    out.push(c);
                    i += 1;
                    continue;
                }
                let mut j = i;
                while j < chars.len() && chars[j] == ZWNJ {
                    j += 1;
                }
                let before = i.checked_sub(1).map(|p| chars[p]);
                let after = chars.get(j).copied();
                if before.is_some_and(is_word_char) && after.is_some_and(is_word_char) {
                    out.push(ZWNJ);
                }
                i = j;
            }
            out
        }
    }
}

/// Character-level normalization: variant unification then the ZWNJ policy.
fn normalize_chars(s: &str, policy: ZwnjPolicy) -> String {
    apply_zwnj(&unify_chars(s), policy)
}

/// Colloquial → formal replacements, matched on whole tokens. Keys may span
/// several tokens (e.g. `فک کردن`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizationDict {
    entries: Vec<(String, String)>,
}

struct PreparedEntry {
    key: Vec<String>,
    value: Vec<String>,
}

impl NormalizationDict {
    /// Validates entries: no entry maps a key to itself, keys are unique,
    /// entries carry no punctuation, and no replacement can overlap a key
    /// (which would make normalization non-idempotent).
    pub fn new(entries: Vec<(String, String)>) -> Result<Self> {
        let dict = NormalizationDict { entries };
        for policy in [ZwnjPolicy::Join, ZwnjPolicy::Space] {
            let prepared = dict.prepare(policy);
            let mut keys = HashSet::new();
            for (e, (raw_k, raw_v)) in prepared.iter().zip(&dict.entries) {
                if e.key.is_empty() || e.value.is_empty() {
                    return Err(Error::Data(format!("empty normalization entry `{raw_k}` → `{raw_v}`")));
                }
                if e.key == e.value {
                    return Err(Error::Data(format!("normalization entry `{raw_k}` maps to itself")));
                }
                if e.key.iter().chain(&e.value).any(|t| split_edges(t).1 != t.as_str()) {
                    return Err(Error::Data(format!("normalization entry `{raw_k}` → `{raw_v}` contains punctuation")));
                }
                if !keys.insert(e.key.clone()) {
                    return Err(Error::Data(format!("duplicate normalization key `{raw_k}`")));
                }
            }
            for v in &prepared {
                for k in &prepared {
                    if overlaps(&v.value, &k.key) {
                        return Err(Error::Data(format!(
                            "replacement `{}` overlaps key `{}`; normalization would not be idempotent",
                            v.value.join(" "),
                            k.key.join(" ")
                        )));
                    }
                }
            }
        }
        Ok(dict)
    }

    pub fn empty() -> Self {
        NormalizationDict { entries: Vec::new() }
    }

    /// Two-column UTF-8 TSV, `colloquial<TAB>formal`; `#` starts a comment.
    pub fn from_tsv(text: &str, source_name: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('\t') else {
                return Err(Error::Parse {
                    source_name: source_name.to_owned(),
                    line: n + 1,
                    message: "expected two tab-separated columns".into(),
                });
            };
            entries.push((k.trim().to_owned(), v.trim().to_owned()));
        }
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(&text, &path.display().to_string())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    fn prepare(&self, policy: ZwnjPolicy) -> Vec<PreparedEntry> {
        let toks = |s: &str| normalize_chars(s, policy).split_whitespace().map(str::to_owned).collect::<Vec<_>>();
        self.entries.iter().map(|(k, v)| PreparedEntry { key: toks(k), value: toks(v) }).collect()
    }
}

impl Default for NormalizationDict {
    /// The six colloquial forms shipped in `data/colloquial.tsv`.
    fn default() -> Self {
        Self::from_tsv(COLLOQUIAL_TSV, "colloquial.tsv").expect("shipped colloquial dictionary is valid")
    }
}

/// True when `value` and `key` agree on every position of some non-empty
/// alignment, i.e. a key match could start, end or lie inside the value.
fn overlaps(value: &[String], key: &[String]) -> bool {
    let (m, n) = (value.len() as isize, key.len() as isize);
    (-(n - 1)..m).any(|offset| {
        let lo = offset.max(0);
        let hi = m.min(offset + n);
        lo < hi && (lo..hi).all(|i| value[i as usize] == key[(i - offset) as usize])
    })
}

/// Normalizes text for one ZWNJ policy with a prepared dictionary. Build once
/// and reuse across documents.
pub struct Normalizer {
    policy: ZwnjPolicy,
    by_first: HashMap<String, Vec<PreparedEntry>>,
}

impl Normalizer {
    pub fn new(dict: &NormalizationDict, policy: ZwnjPolicy) -> Self {
        let mut by_first: HashMap<String, Vec<PreparedEntry>> = HashMap::new();
        for e in dict.prepare(policy) {
            by_first.entry(e.key[0].clone()).or_default().push(e);
        }
        for list in by_first.values_mut() {
            list.sort_by_key(|e| std::cmp::Reverse(e.key.len()));
        }
        Normalizer { policy, by_first }
    }

    pub fn policy(&self) -> ZwnjPolicy {
        self.policy
    }

    pub fn normalize(&self, raw: &str) -> String {
        let text = normalize_chars(raw, self.policy);
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let parts: Vec<(&str, &str, &str)> = tokens.iter().map(|t| split_edges(t)).collect();

        let mut out: Vec<String> = Vec::with_capacity(tokens.len());
        let mut i = 0;
        while i < tokens.len() {
            let matched = self.by_first.get(parts[i].1).and_then(|cands| {
                cands.iter().find(|e| {
                    let len = e.key.len();
                    i + len <= tokens.len()
                        && (0..len).all(|j| {
                            let (lead, core, trail) = parts[i + j];
                            core == e.key[j] && (j == 0 || lead.is_empty()) && (j + 1 == len || trail.is_empty())
                        })
                })
            });
            match matched {
                Some(e) => {
                    let len = e.key.len();
                    let mut replaced = String::from(parts[i].0);
                    replaced.push_str(&e.value.join(" "));
                    replaced.push_str(parts[i + len - 1].2);
                    out.push(replaced);
                    i += len;
                }
                None => {
                    out.push(tokens[i].to_owned());
                    i += 1;
                }
            }
        }
        out.join(" ")
    }
}

/// Unifies Arabic character variants to their Persian forms, applies the ZWNJ
/// policy, replaces colloquial forms found in `dict` and collapses whitespace
/// to single spaces.
pub fn normalize_text(raw: &str, dict: &NormalizationDict, policy: ZwnjPolicy) -> String {
    Normalizer::new(dict, policy).normalize(raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::tokenize;
    use proptest::prelude::*;

    fn jsonl(lines: &[&str]) -> String {
        lines.join("\n")
    }

    #[test]
    fn loads_balanced_jsonl() {
        let text = jsonl(&[
            r#"{"id":"a","text":"خوب","label":"positive"}"#,
            r#"{"id":"b","text":"بد","label":"negative"}"#,
            r#"{"id":"c","text":"عالی","label":"positive"}"#,
            r#"{"id":"d","text":"ضعیف","label":"negative"}"#,
        ]);
        let c = parse_corpus(&text, "mem", Format::Jsonl, &ClassSet::binary(), LoadMode::Train).unwrap();
        assert_eq!(c.total(), 4);
        assert_eq!(c.class_counts(), &[2, 2]);
        assert_eq!(c.documents()[2].id, "c");
    }

    #[test]
    fn missing_label_reports_line() {
        let text = jsonl(&[r#"{"id":"a","text":"x","label":"positive"}"#, r#"{"id":"b","text":"y"}"#]);
        let err = parse_corpus(&text, "mem", Format::Jsonl, &ClassSet::binary(), LoadMode::Train).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(parse_corpus(&text, "mem", Format::Jsonl, &ClassSet::binary(), LoadMode::Predict).is_ok());
    }

    #[test]
    fn unknown_label_is_named() {
        let text = r#"{"id":"a","text":"x","label":"neutral"}"#;
        let err = parse_corpus(text, "mem", Format::Jsonl, &ClassSet::binary(), LoadMode::Train).unwrap_err();
        assert!(err.to_string().contains("neutral"), "{err}");
    }

    #[test]
    fn malformed_and_empty() {
        let err = parse_corpus("{not json", "mem", Format::Jsonl, &ClassSet::binary(), LoadMode::Train).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_corpus("\n\n", "mem", Format::Jsonl, &ClassSet::binary(), LoadMode::Train).unwrap_err();
        assert!(matches!(err, Error::Empty(_)));
        let err =
            parse_corpus("a\tb\tc\td\te\n", "mem", Format::Tsv, &ClassSet::binary(), LoadMode::Train).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = "a\tx\tpositive\na\ty\tnegative\n";
        assert!(parse_corpus(text, "mem", Format::Tsv, &ClassSet::binary(), LoadMode::Train).is_err());
    }

    #[test]
    fn tsv_with_header() {
        let text = "id\ttext\tlabel\n1\tخوب\tpositive\n2\tبد\tnegative\n";
        let c = parse_corpus(text, "mem", Format::Tsv, &ClassSet::binary(), LoadMode::Train).unwrap();
        assert_eq!(c.total(), 2);
        assert_eq!(c.documents()[1].label, Some(ClassId(0)));
    }

    #[test]
    fn blank_text_only_in_predict_mode() {
        let text = "1\t  \tpositive\n";
        assert!(parse_corpus(text, "mem", Format::Tsv, &ClassSet::binary(), LoadMode::Train).is_err());
        let c = parse_corpus("1\t\n", "mem", Format::Tsv, &ClassSet::binary(), LoadMode::Predict).unwrap();
        assert_eq!(c.documents()[0].label, None);
    }

    #[test]
    fn uneven_two_class_corpus_shape() {
        let mut lines = String::new();
        for i in 0..1020 {
            let label = if i < 511 { "positive" } else { "negative" };
            lines.push_str(&format!("{i}\tمتن {i}\t{label}\n"));
        }
        let c = parse_corpus(&lines, "mem", Format::Tsv, &ClassSet::binary(), LoadMode::Train).unwrap();
        assert_eq!(c.total(), 1020);
        assert_eq!(c.class_counts(), &[509, 511]);
    }

    #[test]
    fn class_set_validation() {
        assert!(ClassSet::new(["only"]).is_err());
        assert!(ClassSet::new(["a", "a"]).is_err());
        assert_eq!(ClassSet::new(["a", "b", "c"]).unwrap().len(), 3);
    }

    #[test]
    fn colloquial_replacement() {
        let dict = NormalizationDict::default();
        assert_eq!(dict.entries().len(), 6);
        assert_eq!(normalize_text("ازش", &dict, ZwnjPolicy::Join), "از آن");
        assert_eq!(normalize_text("خونه", &dict, ZwnjPolicy::Join), "خانه");
        assert_eq!(normalize_text("من فک کردن", &dict, ZwnjPolicy::Join), "من فکر کردن");
        assert_eq!(normalize_text("«ازش»", &dict, ZwnjPolicy::Join), "«از آن»");
        // punctuation between the two halves blocks a multi-token match
        assert_eq!(normalize_text("فک. کردن", &dict, ZwnjPolicy::Join), "فک. کردن");
    }

    #[test]
    fn identity_up_to_whitespace() {
        let dict = NormalizationDict::default();
        assert_eq!(normalize_text("  این   گوشی\tخوب است \n", &dict, ZwnjPolicy::Join), "این گوشی خوب است");
    }

    #[test]
    fn pseudo_space_policies() {
        let dict = NormalizationDict::default();
        let joined = normalize_text("دست\u{200C}خط", &dict, ZwnjPolicy::Join);
        assert_eq!(joined, "دست\u{200C}خط");
        assert_eq!(tokenize(&joined).len(), 1);
        let spaced = normalize_text("دست\u{200C}خط", &dict, ZwnjPolicy::Space);
        assert_eq!(spaced, "دست خط");
        assert_eq!(tokenize(&spaced).len(), 2);
        assert_eq!(normalize_text("دست\u{200C}\u{200C}خط\u{200C} ", &dict, ZwnjPolicy::Join), "دست\u{200C}خط");
    }

    #[test]
    fn arabic_variants_unified() {
        let dict = NormalizationDict::empty();
        assert_eq!(normalize_text("كيفيت", &dict, ZwnjPolicy::Join), "کیفیت");
        assert_eq!(normalize_text("۱۲٣", &dict, ZwnjPolicy::Join), "123");
        assert_eq!(normalize_text("خـــوب", &dict, ZwnjPolicy::Join), "خوب");
    }

    #[test]
    fn dict_validation() {
        let e = |k: &str, v: &str| (k.to_owned(), v.to_owned());
        assert!(NormalizationDict::new(vec![e("a", "a")]).is_err());
        assert!(NormalizationDict::new(vec![e("a", "b"), e("a", "c")]).is_err());
        // replacement contains a key
        assert!(NormalizationDict::new(vec![e("a", "x b"), e("b", "c")]).is_err());
        // replacement ends where a two-token key begins
        assert!(NormalizationDict::new(vec![e("a", "x y"), e("y z", "w")]).is_err());
        assert!(NormalizationDict::new(vec![e("a.", "b")]).is_err());
        assert!(NormalizationDict::new(vec![e("a", "b c"), e("d", "e")]).is_ok());
        assert!(NormalizationDict::from_tsv("nocolumns\n", "mem").is_err());
    }

    fn fragments() -> impl Strategy<Value = String> {
        let frags = vec![
            "ازش",
            "خونه",
            "فک",
            "کردن",
            "از",
            "آن",
            "نداره",
            "گوشی",
            "رو",
            " ",
            "  ",
            "\t",
            "\n",
            "\u{200C}",
            "ي",
            "ك",
            "ـ",
            ".",
            "«",
            "»",
            "،",
            "abc",
            "ً",
            "۱",
        ];
        prop::collection::vec(prop::sample::select(frags), 0..24).prop_map(|v| v.concat())
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(s in fragments(), join in any::<bool>()) {
            let policy = if join { ZwnjPolicy::Join } else { ZwnjPolicy::Space };
            let n = Normalizer::new(&NormalizationDict::default(), policy);
            let once = n.normalize(&s);
            prop_assert_eq!(n.normalize(&once), once);
        }

        #[test]
        fn normalization_is_idempotent_on_arbitrary_text(s in "\\PC{0,40}", join in any::<bool>()) {
            let policy = if join { ZwnjPolicy::Join } else { ZwnjPolicy::Space };
            let once = normalize_text(&s, &NormalizationDict::default(), policy);
            prop_assert_eq!(normalize_text(&once, &NormalizationDict::default(), policy), once);
        }
    }
}
