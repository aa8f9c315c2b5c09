use std::collections::{BTreeSet, HashMap};

use crate::cisampa::{PhonemeId, PhonemeInventory, PhonemeString};
use crate::lexicon::Lexicon;
use crate::script::GraphemeString;

use super::ModelError;

pub const IN_PAD: usize = 0;
pub const IN_START: usize = 1;
pub const IN_UNK: usize = 2;
pub const INPUT_SPECIALS: [&str; 3] = ["<pad>", "<s>", "<unk>"];

pub const OUT_PAD: usize = 0;
pub const OUT_START: usize = 1;
pub const OUT_END: usize = 2;
pub const OUT_UNK: usize = 3;
pub const OUTPUT_SPECIALS: [&str; 4] = ["<pad>", "<os>", "</os>", "<unk>"];

/// Separate input (grapheme) and output (phoneme) symbol tables.
///
/// Specials occupy the first indices of each table; graphemes follow in
/// codepoint order and phonemes in inventory order.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    inputs: Vec<String>,
    outputs: Vec<String>,
    input_index: HashMap<char, usize>,
    output_phonemes: Vec<Option<PhonemeId>>,
    phoneme_index: HashMap<PhonemeId, usize>,
}

impl Vocab {
    /// Builds a vocabulary over the graphemes and phonemes that occur in `lex`.
    pub fn from_lexicon(lex: &Lexicon, inv: &PhonemeInventory) -> Self {
        let graphemes: BTreeSet<char> = lex
            .entries()
            .iter()
            .flat_map(|e| e.word.iter().map(|g| g.codepoint))
            .collect();
        let phonemes: BTreeSet<PhonemeId> =
            lex.entries().iter().flat_map(|e| e.pron.iter().copied()).collect();
        let names = phonemes.into_iter().map(|p| inv.name(p).to_string());
        Self::from_symbols(
            graphemes.into_iter().map(String::from).collect(),
            names.collect(),
            inv,
        )
        .expect("symbols drawn from a valid lexicon")
    }

    /// Non-special symbols only; specials are prepended.
    pub fn from_symbols(
        graphemes: Vec<String>,
        phonemes: Vec<String>,
        inv: &PhonemeInventory,
    ) -> Result<Self, ModelError> {
        let mut inputs: Vec<String> = INPUT_SPECIALS.iter().map(|s| s.to_string()).collect();
        let mut input_index = HashMap::new();
        for g in graphemes {
            let mut chars = g.chars();
            let c = match (chars.next(), chars.next()) {
                (Some(c), None) => c,
                _ => return Err(ModelError::BadVocab(format!("input symbol {g:?}"))),
            };
            if input_index.insert(c, inputs.len()).is_some() {
                return Err(ModelError::BadVocab(format!("duplicate input {g:?}")));
            }
            inputs.push(g);
        }
        let mut outputs: Vec<String> = OUTPUT_SPECIALS.iter().map(|s| s.to_string()).collect();
        let mut output_phonemes = vec![None; outputs.len()];
        let mut phoneme_index = HashMap::new();
        for name in phonemes {
            let id = inv
                .id(&name)
                .ok_or_else(|| ModelError::BadVocab(format!("unknown phoneme {name:?}")))?;
            if phoneme_index.insert(id, outputs.len()).is_some() {
                return Err(ModelError::BadVocab(format!("duplicate output {name:?}")));
            }
            output_phonemes.push(Some(id));
            outputs.push(name);
        }
        Ok(Vocab {
            inputs,
            outputs,
            input_index,
            output_phonemes,
            phoneme_index,
        })
    }

    /// Rebuilds from full symbol lists as stored in a model file.
    pub(crate) fn from_stored(
        inputs: Vec<String>,
        outputs: Vec<String>,
        inv: &PhonemeInventory,
    ) -> Result<Self, ModelError> {
        if inputs.len() < INPUT_SPECIALS.len()
            || inputs[..INPUT_SPECIALS.len()] != INPUT_SPECIALS
            || outputs.len() < OUTPUT_SPECIALS.len()
            || outputs[..OUTPUT_SPECIALS.len()] != OUTPUT_SPECIALS
        {
            return Err(ModelError::BadVocab("special symbols missing".into()));
        }
        Self::from_symbols(
            inputs[INPUT_SPECIALS.len()..].to_vec(),
            outputs[OUTPUT_SPECIALS.len()..].to_vec(),
            inv,
        )
    }

    pub fn input_size(&self) -> usize {
        self.inputs.len()
    }

    pub fn output_size(&self) -> usize {
        self.outputs.len()
    }

    pub fn input_symbols(&self) -> &[String] {
        &self.inputs
    }

    pub fn output_symbols(&self) -> &[String] {
        &self.outputs
    }

    /// Maps a word to input indices; unseen graphemes become `<unk>`.
    /// The flag reports whether any `<unk>` was produced.
    pub fn encode_word(&self, word: &GraphemeString) -> (Vec<usize>, bool) {
        let mut unknown = false;
        let idx = word
            .iter()
            .map(|g| {
                self.input_index.get(&g.codepoint).copied().unwrap_or_else(|| {
                    unknown = true;
                    IN_UNK
                })
            })
            .collect();
        (idx, unknown)
    }

    pub fn encode_pron(&self, pron: &PhonemeString) -> Vec<usize> {
        pron.iter()
            .map(|p| self.phoneme_index.get(p).copied().unwrap_or(OUT_UNK))
            .collect()
    }

    /// Drops special tokens and maps the rest to phonemes.
    pub fn decode_tokens(&self, tokens: &[usize]) -> PhonemeString {
        PhonemeString(
            tokens
                .iter()
                .filter_map(|&t| self.output_phonemes.get(t).copied().flatten())
                .collect(),
        )
    }
}
