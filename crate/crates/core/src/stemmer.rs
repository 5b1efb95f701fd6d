//! Iterative affix-stripping stemmer for Persian.
//!
//! Each pass strips the longest matching suffix, then the longest matching
//! prefix, provided the residue keeps at least the affix's minimum stem
//! length. Passes repeat until nothing matches or the pass limit is reached.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::corpus::ZWNJ;
use crate::error::{Error, Result};

const AFFIXES_TSV: &str = include_str!("../data/affixes.tsv");

/// Pass limit used by [`Stemmer::default`]. Stripping always shortens the
/// token, so the loop terminates at a fixpoint well before this.
pub const DEFAULT_MAX_PASSES: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Affix {
    surface: String,
    chars: usize,
    min_stem_length: usize,
}

impl Affix {
    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn min_stem_length(&self) -> usize {
        self.min_stem_length
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AffixKind {
    Prefix,
    Suffix,
}

/// Suffix and prefix lists, each ordered longest surface first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffixTable {
    suffixes: Vec<Affix>,
    prefixes: Vec<Affix>,
}

impl AffixTable {
    pub fn new(entries: impl IntoIterator<Item = (AffixKind, String, usize)>) -> Result<Self> {
        let mut suffixes = Vec::new();
        let mut prefixes = Vec::new();
        let mut seen = HashSet::new();
        for (kind, surface, min_stem_length) in entries {
            if surface.is_empty() {
                return Err(Error::Data("empty affix".into()));
            }
            if min_stem_length < 2 {
                return Err(Error::Data(format!("affix `{surface}`: min_stem_length must be at least 2")));
            }
            let key = (kind == AffixKind::Prefix, surface.clone());
            if !seen.insert(key) {
                return Err(Error::Data(format!("duplicate affix `{surface}`")));
            }
            let affix = Affix { chars: surface.chars().count(), surface, min_stem_length };
            match kind {
                AffixKind::Suffix => suffixes.push(affix),
                AffixKind::Prefix => prefixes.push(affix),
            }
        }
        // stable: equal lengths keep file order
        suffixes.sort_by_key(|a| std::cmp::Reverse(a.chars));
        prefixes.sort_by_key(|a| std::cmp::Reverse(a.chars));
        Ok(AffixTable { suffixes, prefixes })
    }

    /// TSV with columns `kind` (`prefix` or `suffix`), `surface` and
    /// `min_stem_length`; `#` starts a comment.
    pub fn from_tsv(text: &str, source_name: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err =
                |message: String| Error::Parse { source_name: source_name.to_owned(), line: n + 1, message };
            let cols: Vec<&str> = line.split('\t').collect();
            let [kind, surface, min] = cols.as_slice() else {
                return Err(parse_err(format!("expected 3 tab-separated columns, found {}", cols.len())));
            };
            let kind = match *kind {
                "prefix" => AffixKind::Prefix,
                "suffix" => AffixKind::Suffix,
                other => return Err(parse_err(format!("unknown affix kind `{other}`"))),
            };
            let min: usize = min.trim().parse().map_err(|_| parse_err(format!("bad min_stem_length `{min}`")))?;
            entries.push((kind, surface.to_string(), min));
        }
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(&text, &path.display().to_string())
    }

    pub fn suffixes(&self) -> &[Affix] {
        &self.suffixes
    }

    pub fn prefixes(&self) -> &[Affix] {
        &self.prefixes
    }
}

impl Default for AffixTable {
    fn default() -> Self {
        Self::from_tsv(AFFIXES_TSV, "affixes.tsv").expect("shipped affix table is valid")
    }
}

#[derive(Clone, Debug)]
pub struct Stemmer {
    table: AffixTable,
    max_passes: usize,
}

impl Stemmer {
    pub fn new(table: AffixTable, max_passes: usize) -> Result<Self> {
        if max_passes == 0 {
            return Err(Error::Config("max_passes must be at least 1".into()));
        }
        Ok(Stemmer { table, max_passes })
    }

    pub fn table(&self) -> &AffixTable {
        &self.table
    }

    pub fn stem(&self, token: &str) -> String {
        let mut current = token;
        for _ in 0..self.max_passes {
            let before = current.len();
            if let Some(rest) = strip(current, &self.table.suffixes, AffixKind::Suffix) {
                current = rest;
            }
            if let Some(rest) = strip(current, &self.table.prefixes, AffixKind::Prefix) {
                current = rest;
            }
            if current.len() == before {
                break;
            }
        }
        current.to_owned()
    }
}

impl Default for Stemmer {
    fn default() -> Self {
        Stemmer { table: AffixTable::default(), max_passes: DEFAULT_MAX_PASSES }
    }
}

fn strip<'a>(token: &'a str, affixes: &[Affix], kind: AffixKind) -> Option<&'a str> {
    let len = token.chars().count();
    affixes.iter().find_map(|a| {
        if a.chars >= len {
            return None;
        }
        let rest = match kind {
            AffixKind::Suffix => token.strip_suffix(a.surface.as_str())?.trim_end_matches(ZWNJ),
            AffixKind::Prefix => token.strip_prefix(a.surface.as_str())?.trim_start_matches(ZWNJ),
        };
        (rest.chars().count() >= a.min_stem_length).then_some(rest)
    })
}

/// Convenience wrapper: stem with an explicit table and pass limit.
pub fn stem(token: &str, table: &AffixTable, max_passes: usize) -> String {
    Stemmer { table: table.clone(), max_passes: max_passes.max(1) }.stem(token)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plural_suffixes() {
        let s = Stemmer::default();
        assert_eq!(s.stem("تصویرها"), "تصویر");
        assert_eq!(s.stem("تصویر\u{200C}ها"), "تصویر");
        assert_eq!(s.stem("دوستان"), "دوست");
        assert_eq!(s.stem("نکات"), "نک");
        assert_eq!(s.stem("مراجعیین"), "مراجع");
    }

    #[test]
    fn present_tense_suffixes() {
        let s = Stemmer::default();
        for (token, base) in [
            ("بینم", "بین"),
            ("بینی", "بین"),
            ("ببند", "ببن"),
            ("بینیم", "بین"),
            ("ببینید", "ببین"),
            ("ببینند", "ببین"),
            ("می\u{200C}بینم", "بین"),
        ] {
            assert_eq!(s.stem(token), base, "{token}");
        }
    }

    #[test]
    fn short_and_unmatched_tokens_unchanged() {
        let s = Stemmer::default();
        assert_eq!(s.stem("ها"), "ها");
        assert_eq!(s.stem("می"), "می");
        assert_eq!(s.stem("بد"), "بد");
        assert_eq!(s.stem("کتاب"), "کتاب");
        assert_eq!(s.stem("hello"), "hello");
    }

    #[test]
    fn verb_prefix_needs_three_chars() {
        let s = Stemmer::default();
        assert_eq!(s.stem("میرو"), "میرو");
        assert_eq!(s.stem("میخواب"), "خواب");
    }

    #[test]
    fn pass_limit() {
        let table = AffixTable::default();
        assert_eq!(stem("مراجعیین", &table, 1), "مراجعی");
        assert_eq!(stem("مراجعیین", &table, 2), "مراجع");
    }

    #[test]
    fn shipped_table_has_person_and_plural_suffixes() {
        let table = AffixTable::default();
        let suffixes: Vec<&str> = table.suffixes().iter().map(Affix::surface).collect();
        for s in ["م", "ی", "د", "یم", "ید", "ند", "ها", "ان", "ات", "ین"] {
            assert!(suffixes.contains(&s), "missing suffix {s}");
        }
        let lens: Vec<usize> = table.suffixes().iter().map(|a| a.chars).collect();
        assert!(lens.windows(2).all(|w| w[0] >= w[1]));
        assert!(table.suffixes().iter().chain(table.prefixes()).all(|a| a.min_stem_length >= 2));
    }

    #[test]
    fn table_validation() {
        assert!(AffixTable::from_tsv("suffix\tها\t1\n", "mem").is_err());
        assert!(AffixTable::from_tsv("suffix\tها\t2\nsuffix\tها\t3\n", "mem").is_err());
        assert!(AffixTable::from_tsv("infix\tها\t2\n", "mem").is_err());
        assert!(AffixTable::from_tsv("suffix\tها\n", "mem").is_err());
        assert!(Stemmer::new(AffixTable::default(), 0).is_err());
    }

    proptest! {
        #[test]
        fn stem_is_shorter_nonempty_and_idempotent(t in "[ابپتثجچحخدذرزژسشصضطظعغفقکگلمنوهی\u{200C}]{1,14}") {
            let s = Stemmer::default();
            let once = s.stem(&t);
            prop_assert!(!once.is_empty());
            prop_assert!(once.chars().count() <= t.chars().count());
            prop_assert_eq!(s.stem(&once), once.clone());
            prop_assert_eq!(s.stem(&t), once);
        }
    }
}
