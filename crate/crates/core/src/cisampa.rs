//! CISAMPA phoneme inventory and pronunciation codecs.
//!
//! Pronunciations are stored space-separated on disk. The concatenated form
//! (`ALA_AMA_AT_D`) is accepted on ingestion: every phoneme name is a chain
//! of single characters joined by underscores, so a token boundary sits
//! exactly between two adjacent non-underscore characters.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

const BUILTIN_INVENTORY: &str = include_str!("../data/cisampa.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhonemeClass {
    Consonant,
    ConsonantAspirated,
    LongVowel,
    NasalizedLongVowel,
    HalfLongVowel,
    ShortVowel,
    NasalizedShortVowel,
}

impl PhonemeClass {
    pub const ALL: [PhonemeClass; 7] = [
        PhonemeClass::Consonant,
        PhonemeClass::ConsonantAspirated,
        PhonemeClass::LongVowel,
        PhonemeClass::NasalizedLongVowel,
        PhonemeClass::HalfLongVowel,
        PhonemeClass::ShortVowel,
        PhonemeClass::NasalizedShortVowel,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PhonemeClass::Consonant => "Consonant",
            PhonemeClass::ConsonantAspirated => "ConsonantAspirated",
            PhonemeClass::LongVowel => "LongVowel",
            PhonemeClass::NasalizedLongVowel => "NasalizedLongVowel",
            PhonemeClass::HalfLongVowel => "HalfLongVowel",
            PhonemeClass::ShortVowel => "ShortVowel",
            PhonemeClass::NasalizedShortVowel => "NasalizedShortVowel",
        }
    }

    pub fn is_consonant(self) -> bool {
        matches!(self, PhonemeClass::Consonant | PhonemeClass::ConsonantAspirated)
    }

    /// Expected size of each class in the Urdu inventory.
    pub fn expected_count(self) -> usize {
        match self {
            PhonemeClass::Consonant => 28,
            PhonemeClass::ConsonantAspirated => 16,
            PhonemeClass::LongVowel => 7,
            PhonemeClass::NasalizedLongVowel => 7,
            PhonemeClass::HalfLongVowel => 3,
            PhonemeClass::ShortVowel => 3,
            PhonemeClass::NasalizedShortVowel => 3,
        }
    }
}

impl std::str::FromStr for PhonemeClass {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        PhonemeClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or(())
    }
}

impl fmt::Display for PhonemeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phoneme {
    pub name: String,
    pub ipa: String,
    pub class: PhonemeClass,
}

/// Index of a phoneme in its inventory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhonemeId(pub u16);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PhonemeString(pub Vec<PhonemeId>);

impl PhonemeString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PhonemeId> {
        self.0.iter()
    }
}

impl From<Vec<PhonemeId>> for PhonemeString {
    fn from(v: Vec<PhonemeId>) -> Self {
        PhonemeString(v)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("UnknownPhoneme: {name:?} at token {position}")]
    UnknownPhoneme { name: String, position: usize },
    #[error("MalformedSpacing: tokens must be separated by single spaces")]
    MalformedSpacing,
    #[error("UnsegmentableString: {0:?}")]
    UnsegmentableString(String),
    #[error("empty pronunciation")]
    Empty,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InventoryError {
    #[error("inventory line {line}: {reason}")]
    BadLine { line: usize, reason: String },
    #[error("duplicate phoneme name {0:?}")]
    Duplicate(String),
}

/// True when `name` is one or more single non-underscore characters joined
/// by underscores, e.g. `T_D_H`.
pub fn is_well_formed_name(name: &str) -> bool {
    let b = name.as_bytes();
    if b.is_empty() || b.len().is_multiple_of(2) {
        return false;
    }
    b.iter().enumerate().all(|(i, &c)| {
        if i % 2 == 0 {
            c.is_ascii_uppercase()
        } else {
            c == b'_'
        }
    })
}

#[derive(Debug, Clone)]
pub struct PhonemeInventory {
    phonemes: Vec<Phoneme>,
    by_name: HashMap<String, PhonemeId>,
}

impl PhonemeInventory {
    pub fn builtin() -> &'static PhonemeInventory {
        static INV: OnceLock<PhonemeInventory> = OnceLock::new();
        INV.get_or_init(|| {
            PhonemeInventory::parse(BUILTIN_INVENTORY).expect("shipped phoneme inventory is valid")
        })
    }

    /// Parses `name TAB ipa TAB class` records; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, InventoryError> {
        let mut phonemes = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| InventoryError::BadLine {
                line,
                reason: reason.to_string(),
            };
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() != 3 {
                return Err(bad("expected three tab-separated fields"));
            }
            if !is_well_formed_name(fields[0]) {
                return Err(bad("name must be single characters joined by underscores"));
            }
            let class = fields[2].parse().map_err(|_| bad("unknown class"))?;
            phonemes.push(Phoneme {
                name: fields[0].to_string(),
                ipa: fields[1].to_string(),
                class,
            });
        }
        Self::from_phonemes(phonemes)
    }

    pub fn from_phonemes(phonemes: Vec<Phoneme>) -> Result<Self, InventoryError> {
        let mut by_name = HashMap::new();
        for (i, p) in phonemes.iter().enumerate() {
            if by_name.insert(p.name.clone(), PhonemeId(i as u16)).is_some() {
                return Err(InventoryError::Duplicate(p.name.clone()));
            }
        }
        Ok(PhonemeInventory { phonemes, by_name })
    }

    pub fn len(&self) -> usize {
        self.phonemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phonemes.is_empty()
    }

    pub fn phonemes(&self) -> &[Phoneme] {
        &self.phonemes
    }

    pub fn get(&self, id: PhonemeId) -> &Phoneme {
        &self.phonemes[id.0 as usize]
    }

    pub fn name(&self, id: PhonemeId) -> &str {
        &self.phonemes[id.0 as usize].name
    }

    pub fn id(&self, name: &str) -> Option<PhonemeId> {
        self.by_name.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Result<&Phoneme, CodecError> {
        self.id(name).map(|id| self.get(id)).ok_or_else(|| CodecError::UnknownPhoneme {
            name: name.to_string(),
            position: 0,
        })
    }

    pub fn count(&self, class: PhonemeClass) -> usize {
        self.phonemes.iter().filter(|p| p.class == class).count()
    }

    fn resolve(&self, token: &str, position: usize) -> Result<PhonemeId, CodecError> {
        self.id(token).ok_or_else(|| CodecError::UnknownPhoneme {
            name: token.to_string(),
            position,
        })
    }

    /// Parses the canonical `B A N` form.
    pub fn parse_spaced(&self, pron: &str) -> Result<PhonemeString, CodecError> {
        if pron.is_empty() {
            return Err(CodecError::Empty);
        }
        pron.split(' ')
            .enumerate()
            .map(|(i, tok)| {
                if tok.is_empty() {
                    Err(CodecError::MalformedSpacing)
                } else {
                    self.resolve(tok, i)
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(PhonemeString)
    }

    /// Splits a concatenated pronunciation such as `ALA_AMA_AT_D`.
    pub fn segment_concatenated(&self, pron: &str) -> Result<PhonemeString, CodecError> {
        segment_boundaries(pron)?
            .into_iter()
            .enumerate()
            .map(|(i, tok)| self.resolve(tok, i))
            .collect::<Result<Vec<_>, _>>()
            .map(PhonemeString)
    }

    pub fn spaced(&self, p: &PhonemeString) -> String {
        let names: Vec<&str> = p.iter().map(|&id| self.name(id)).collect();
        names.join(" ")
    }

    pub fn concatenate(&self, p: &PhonemeString) -> String {
        p.iter().map(|&id| self.name(id)).collect()
    }

    pub fn check_unique_decodability(&self) -> Decodability {
        let names: Vec<&str> = self.phonemes.iter().map(|p| p.name.as_str()).collect();
        check_unique_decodability(&names)
    }
}

/// Token slices of a concatenated string, before inventory lookup.
fn segment_boundaries(pron: &str) -> Result<Vec<&str>, CodecError> {
    let unsegmentable = || CodecError::UnsegmentableString(pron.to_string());
    let b = pron.as_bytes();
    if b.is_empty() {
        return Err(CodecError::Empty);
    }
    if !b.iter().all(|&c| c.is_ascii_uppercase() || c == b'_') {
        return Err(unsegmentable());
    }
    if b[0] == b'_' || b[b.len() - 1] == b'_' || pron.contains("__") {
        return Err(unsegmentable());
    }
    let mut tokens = Vec::new();
    let mut start = 0;
    for i in 1..b.len() {
        if b[i - 1] != b'_' && b[i] != b'_' {
            tokens.push(&pron[start..i]);
            start = i;
        }
    }
    tokens.push(&pron[start..]);
    Ok(tokens)
}

/// Outcome of the Sardinas–Patterson test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decodability {
    UniquelyDecodable,
    /// A shortest string with two distinct parses.
    Ambiguous {
        witness: String,
        first: Vec<String>,
        second: Vec<String>,
    },
}

impl Decodability {
    pub fn is_uniquely_decodable(&self) -> bool {
        matches!(self, Decodability::UniquelyDecodable)
    }
}

/// Sardinas–Patterson over a set of code words.
///
/// Each search state is a dangling suffix `d` together with two partial
/// parses where `concat(lead) == concat(lag) + d`. States are expanded in
/// order of `|concat(lead)|`, so the first completed pair is a shortest
/// ambiguous string. The set of dangling suffixes is finite (all are
/// suffixes of code words), so the search terminates.
pub fn check_unique_decodability<S: AsRef<str>>(words: &[S]) -> Decodability {
    let code: BTreeSet<&str> = words.iter().map(|w| w.as_ref()).collect();
    debug_assert!(code.iter().all(|w| !w.is_empty()));

    type State = (Reverse<usize>, Reverse<String>, Vec<String>, Vec<String>);
    let mut heap: BinaryHeap<State> = BinaryHeap::new();
    for &u in &code {
        for &v in &code {
            if v.len() > u.len() && v.starts_with(u) {
                heap.push((
                    Reverse(v.len()),
                    Reverse(v[u.len()..].to_string()),
                    vec![v.to_string()],
                    vec![u.to_string()],
                ));
            }
        }
    }

    let mut seen: HashSet<String> = HashSet::new();
    while let Some((Reverse(cost), Reverse(dangling), lead, lag)) = heap.pop() {
        if !seen.insert(dangling.clone()) {
            continue;
        }
        if code.contains(dangling.as_str()) {
            let mut completed = lag.clone();
            completed.push(dangling.clone());
            let witness = lead.concat();
            let (first, second) = if lead <= completed {
                (lead, completed)
            } else {
                (completed, lead)
            };
            return Decodability::Ambiguous {
                witness,
                first,
                second,
            };
        }
        for &x in &code {
            if dangling.len() > x.len() && dangling.starts_with(x) {
                let mut lag = lag.clone();
                lag.push(x.to_string());
                heap.push((
                    Reverse(cost),
                    Reverse(dangling[x.len()..].to_string()),
                    lead.clone(),
                    lag,
                ));
            } else if x.len() > dangling.len() && x.starts_with(dangling.as_str()) {
                let mut new_lead = lag.clone();
                new_lead.push(x.to_string());
                heap.push((
                    Reverse(cost + x.len() - dangling.len()),
                    Reverse(x[dangling.len()..].to_string()),
                    new_lead,
                    lead.clone(),
                ));
            }
        }
    }
    Decodability::UniquelyDecodable
}
