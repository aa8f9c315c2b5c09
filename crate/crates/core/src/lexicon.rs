//! Pronunciation lexicons: `word TAB pronunciation` per line.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cisampa::{CodecError, PhonemeId, PhonemeInventory, PhonemeString};
use crate::script::{self, GraphemeString, ScriptError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PronFormat {
    /// `B A N`
    #[default]
    Spaced,
    /// `BAN`
    Concatenated,
}

impl PronFormat {
    pub fn parse(self, inv: &PhonemeInventory, pron: &str) -> Result<PhonemeString, CodecError> {
        match self {
            PronFormat::Spaced => inv.parse_spaced(pron),
            PronFormat::Concatenated => inv.segment_concatenated(pron),
        }
    }

    pub fn render(self, inv: &PhonemeInventory, pron: &PhonemeString) -> String {
        match self {
            PronFormat::Spaced => inv.spaced(pron),
            PronFormat::Concatenated => inv.concatenate(pron),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexiconError {
    #[error("line {line}: MalformedLine: expected exactly one tab")]
    MalformedLine { line: usize },
    #[error("line {line}: {source}")]
    Word { line: usize, source: ScriptError },
    #[error("line {line}: ForeignCharacter {ch:?} in word")]
    Foreign { line: usize, ch: char },
    #[error("line {line}: {source}")]
    Pron { line: usize, source: CodecError },
    #[error("line {line}: DuplicatePair (first seen on line {first})")]
    DuplicatePair { line: usize, first: usize },
    #[error("TooSmall: slice {slice} would be empty ({words} words)")]
    TooSmall { slice: &'static str, words: usize },
    #[error("bad split fractions: {0}")]
    BadFractions(String),
    #[error("{0}")]
    Io(String),
}

impl LexiconError {
    pub fn line(&self) -> Option<usize> {
        match self {
            LexiconError::MalformedLine { line }
            | LexiconError::Word { line, .. }
            | LexiconError::Foreign { line, .. }
            | LexiconError::Pron { line, .. }
            | LexiconError::DuplicatePair { line, .. } => Some(*line),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub format: PronFormat,
    pub allow_foreign: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub word: GraphemeString,
    pub pron: PhonemeString,
    pub line_no: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    index: HashMap<String, Vec<usize>>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an entry, rejecting an exact (word, pron) duplicate.
    pub fn push(&mut self, entry: LexiconEntry) -> Result<(), LexiconError> {
        let key = entry.word.to_string();
        if let Some(positions) = self.index.get(&key) {
            if let Some(&prev) = positions.iter().find(|&&i| self.entries[i].pron == entry.pron) {
                return Err(LexiconError::DuplicatePair {
                    line: entry.line_no,
                    first: self.entries[prev].line_no,
                });
            }
        }
        self.index.entry(key).or_default().push(self.entries.len());
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn num_words(&self) -> usize {
        self.index.len()
    }

    /// All pronunciations recorded for `word`, in file order.
    pub fn prons(&self, word: &str) -> impl Iterator<Item = &PhonemeString> {
        self.index
            .get(word)
            .into_iter()
            .flatten()
            .map(|&i| &self.entries[i].pron)
    }

    /// Distinct words in order of first appearance.
    pub fn words(&self) -> Vec<&GraphemeString> {
        let mut seen = HashSet::new();
        self.entries
            .iter()
            .filter(|e| seen.insert(e.word.to_string()))
            .map(|e| &e.word)
            .collect()
    }

    pub fn parse_str(
        text: &str,
        inv: &PhonemeInventory,
        opts: LoadOptions,
    ) -> Result<Self, LexiconError> {
        let (lex, mut errors) = Self::parse_collecting(text, inv, opts);
        if errors.is_empty() {
            Ok(lex)
        } else {
            Err(errors.swap_remove(0))
        }
    }

    /// Parses every line, returning the entries that loaded and every error
    /// encountered, in line order.
    pub fn parse_collecting(
        text: &str,
        inv: &PhonemeInventory,
        opts: LoadOptions,
    ) -> (Self, Vec<LexiconError>) {
        let mut lex = Lexicon::new();
        let mut errors = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let raw = raw.strip_suffix('\r').unwrap_or(raw);
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            match parse_line(raw, line, inv, opts).and_then(|e| lex.push(e)) {
                Ok(()) => {}
                Err(e) => errors.push(e),
            }
        }
        (lex, errors)
    }

    pub fn load(
        path: impl AsRef<Path>,
        inv: &PhonemeInventory,
        opts: LoadOptions,
    ) -> Result<Self, LexiconError> {
        let text = read_utf8(path.as_ref())?;
        Self::parse_str(&text, inv, opts)
    }

    pub fn serialize(&self, inv: &PhonemeInventory, format: PronFormat) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{}", e.word, format.render(inv, &e.pron));
        }
        out
    }

    fn subset(&self, words: &[&str]) -> Lexicon {
        let mut lex = Lexicon::new();
        for w in words {
            for &i in &self.index[*w] {
                lex.push(self.entries[i].clone())
                    .expect("entries of a valid lexicon are unique");
            }
        }
        lex
    }

    /// Splits by word into (train, valid, test).
    ///
    /// Words are sorted, shuffled with a ChaCha8 stream seeded by
    /// `spec.seed`, and cut into contiguous slices. Valid and test sizes are
    /// `round(n * frac)`; the training slice absorbs the remainder.
    pub fn split(&self, spec: &SplitSpec) -> Result<(Lexicon, Lexicon, Lexicon), LexiconError> {
        spec.validate()?;
        let mut words: Vec<&str> = self.index.keys().map(String::as_str).collect();
        words.sort_unstable();
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        words.shuffle(&mut rng);

        let (n_train, n_valid, n_test) = spec.sizes(words.len());
        for (slice, size) in [("train", n_train), ("valid", n_valid), ("test", n_test)] {
            if size == 0 {
                return Err(LexiconError::TooSmall {
                    slice,
                    words: words.len(),
                });
            }
        }
        let (train, rest) = words.split_at(n_train);
        let (valid, test) = rest.split_at(n_valid);
        Ok((self.subset(train), self.subset(valid), self.subset(test)))
    }

    pub fn phoneme_stats(&self) -> PhonemeFrequencyTable {
        let mut counts: HashMap<PhonemeId, u64> = HashMap::new();
        for e in &self.entries {
            for &p in e.pron.iter() {
                *counts.entry(p).or_default() += 1;
            }
        }
        PhonemeFrequencyTable { counts }
    }

    /// Fraction of distinct words carrying at least one diacritic.
    pub fn diacritic_coverage(&self) -> f64 {
        let words = self.words();
        if words.is_empty() {
            return 0.0;
        }
        let marked = words.iter().filter(|w| w.has_diacritic()).count();
        marked as f64 / words.len() as f64
    }
}

fn parse_line(
    raw: &str,
    line: usize,
    inv: &PhonemeInventory,
    opts: LoadOptions,
) -> Result<LexiconEntry, LexiconError> {
    let mut fields = raw.split('\t');
    let (word, pron) = match (fields.next(), fields.next(), fields.next()) {
        (Some(w), Some(p), None) => (w, p),
        _ => return Err(LexiconError::MalformedLine { line }),
    };
    let word = script::normalize(word).map_err(|source| LexiconError::Word { line, source })?;
    let word = script::tokenize(&word);
    if !opts.allow_foreign {
        if let Some(g) = word.iter().find(|g| g.category == script::Category::Other) {
            return Err(LexiconError::Foreign {
                line,
                ch: g.codepoint,
            });
        }
    }
    let pron = opts
        .format
        .parse(inv, pron)
        .map_err(|source| LexiconError::Pron { line, source })?;
    Ok(LexiconEntry {
        word,
        pron,
        line_no: line,
    })
}

pub(crate) fn read_utf8(path: &Path) -> Result<String, LexiconError> {
    let bytes =
        std::fs::read(path).map_err(|e| LexiconError::Io(format!("{}: {e}", path.display())))?;
    String::from_utf8(bytes)
        .map_err(|_| LexiconError::Io(format!("{}: not valid UTF-8", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub valid_frac: f64,
    pub test_frac: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_frac: 0.85,
            valid_frac: 0.05,
            test_frac: 0.10,
            seed: crate::DEFAULT_SEED,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), LexiconError> {
        let fracs = [self.train_frac, self.valid_frac, self.test_frac];
        if fracs.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(LexiconError::BadFractions(format!("{fracs:?} outside [0, 1]")));
        }
        if (fracs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(LexiconError::BadFractions(format!("{fracs:?} do not sum to 1")));
        }
        Ok(())
    }

    /// Slice sizes for `n` words; the training slice takes the rounding slack.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let valid = (n as f64 * self.valid_frac).round() as usize;
        let test = (n as f64 * self.test_frac).round() as usize;
        let valid = valid.min(n);
        let test = test.min(n - valid);
        (n - valid - test, valid, test)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhonemeFrequencyTable {
    pub counts: HashMap<PhonemeId, u64>,
}

impl PhonemeFrequencyTable {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Rows sorted by count descending, ties in inventory order.
    pub fn sorted(&self) -> Vec<(PhonemeId, u64)> {
        let mut rows: Vec<_> = self.counts.iter().map(|(&p, &c)| (p, c)).collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        rows
    }

    /// `rank TAB name TAB count` lines.
    pub fn to_tsv(&self, inv: &PhonemeInventory) -> String {
        let mut out = String::new();
        for (rank, (p, c)) in self.sorted().into_iter().enumerate() {
            let _ = writeln!(out, "{}\t{}\t{}", rank + 1, inv.name(p), c);
        }
        out
    }

    /// Inventory phonemes that never occur.
    pub fn missing(&self, inv: &PhonemeInventory) -> BTreeSet<PhonemeId> {
        (0..inv.len() as u16)
            .map(PhonemeId)
            .filter(|p| !self.counts.contains_key(p))
            .collect()
    }
}
