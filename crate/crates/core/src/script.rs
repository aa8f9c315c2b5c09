//! Urdu orthography: the character inventory, word normalization and
//! grapheme tokenization.
//!
//! A grapheme here is one Unicode scalar value after NFC normalization.
//! Diacritics are kept as their own tokens rather than fused with the base
//! letter, so diacritized and bare spellings share the same letter tokens.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

const BUILTIN_INVENTORY: &str = include_str!("../data/urdu_script.tsv");

/// Bidi controls that show up in copy-pasted Urdu text.
const DIRECTION_CONTROLS: [char; 3] = ['\u{200E}', '\u{200F}', '\u{061C}'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    BasicLetter,
    SecondaryLetter,
    Diacritic,
    Other,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::BasicLetter => "BasicLetter",
            Category::SecondaryLetter => "SecondaryLetter",
            Category::Diacritic => "Diacritic",
            Category::Other => "Other",
        }
    }
}

impl std::str::FromStr for Category {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "BasicLetter" => Ok(Category::BasicLetter),
            "SecondaryLetter" => Ok(Category::SecondaryLetter),
            "Diacritic" => Ok(Category::Diacritic),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScriptError {
    #[error("word is empty after normalization")]
    EmptyAfterNormalization,
    #[error("word contains interior whitespace")]
    InteriorWhitespace,
    #[error("inventory line {line}: {reason}")]
    BadInventory { line: usize, reason: String },
}

/// One entry of the script inventory file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InventoryEntry {
    pub codepoint: char,
    pub category: Category,
    pub display: String,
}

/// Codepoint → category table.
#[derive(Debug, Clone)]
pub struct ScriptInventory {
    entries: Vec<InventoryEntry>,
    by_char: HashMap<char, Category>,
}

impl ScriptInventory {
    /// The inventory shipped in `data/urdu_script.tsv`.
    pub fn builtin() -> &'static ScriptInventory {
        static INV: OnceLock<ScriptInventory> = OnceLock::new();
        INV.get_or_init(|| {
            ScriptInventory::parse(BUILTIN_INVENTORY).expect("shipped script inventory is valid")
        })
    }

    /// Parses `<codepoint-hex> TAB <category> TAB <display-char>` records.
    pub fn parse(text: &str) -> Result<Self, ScriptError> {
        let mut entries = Vec::new();
        let mut by_char = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| ScriptError::BadInventory {
                line,
                reason: reason.to_string(),
            };
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() != 3 {
                return Err(bad("expected three tab-separated fields"));
            }
            let cp = u32::from_str_radix(fields[0], 16).map_err(|_| bad("bad codepoint"))?;
            let codepoint = char::from_u32(cp).ok_or_else(|| bad("not a scalar value"))?;
            if std::iter::once(codepoint).nfc().ne(std::iter::once(codepoint)) {
                return Err(bad("codepoint is not NFC-stable"));
            }
            let category: Category = fields[1].parse().map_err(|_| bad("unknown category"))?;
            if by_char.insert(codepoint, category).is_some() {
                return Err(bad("duplicate codepoint"));
            }
            entries.push(InventoryEntry {
                codepoint,
                category,
                display: fields[2].to_string(),
            });
        }
        Ok(ScriptInventory { entries, by_char })
    }

    pub fn entries(&self) -> &[InventoryEntry] {
        &self.entries
    }

    pub fn classify(&self, c: char) -> Category {
        self.by_char.get(&c).copied().unwrap_or(Category::Other)
    }

    pub fn count(&self, category: Category) -> usize {
        self.entries.iter().filter(|e| e.category == category).count()
    }

    pub fn tokenize(&self, word: &str) -> GraphemeString {
        GraphemeString(
            word.chars()
                .map(|c| Grapheme {
                    codepoint: c,
                    category: self.classify(c),
                })
                .collect(),
        )
    }
}

/// Classifies against the built-in inventory.
pub fn classify(c: char) -> Category {
    ScriptInventory::builtin().classify(c)
}

/// Tokenizes against the built-in inventory. Total on normalized input.
pub fn tokenize(word: &str) -> GraphemeString {
    ScriptInventory::builtin().tokenize(word)
}

/// Prepares one word for lookup: strips direction controls, trims ASCII
/// whitespace, rejects interior whitespace and applies NFC.
pub fn normalize(text: &str) -> Result<String, ScriptError> {
    let stripped: String = text
        .chars()
        .filter(|c| !DIRECTION_CONTROLS.contains(c))
        .collect();
    let trimmed = stripped.trim_matches(|c: char| c.is_ascii_whitespace());
    if trimmed.chars().any(char::is_whitespace) {
        return Err(ScriptError::InteriorWhitespace);
    }
    let out: String = trimmed.nfc().collect();
    if out.is_empty() {
        return Err(ScriptError::EmptyAfterNormalization);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Grapheme {
    pub codepoint: char,
    pub category: Category,
}

/// An ordered sequence of graphemes; one per scalar value of the source word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GraphemeString(pub Vec<Grapheme>);

impl GraphemeString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Grapheme> {
        self.0.iter()
    }

    pub fn has_diacritic(&self) -> bool {
        self.0.iter().any(|g| g.category == Category::Diacritic)
    }

    pub fn has_foreign(&self) -> bool {
        self.0.iter().any(|g| g.category == Category::Other)
    }
}

impl fmt::Display for GraphemeString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.0 {
            write!(f, "{}", g.codepoint)?;
        }
        Ok(())
    }
}
