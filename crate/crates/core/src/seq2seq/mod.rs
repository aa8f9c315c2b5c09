//! Encoder-decoder LSTM grapheme-to-phoneme transducer.
//!
//! Two stacked LSTMs with separate input and output vocabularies and no
//! attention. The encoder's final state for every layer initializes the
//! decoder. All arithmetic is `f64`.

mod decode;
mod io;
mod lstm;
mod network;
mod params;
pub mod tensor;
mod train;
mod vocab;

use std::collections::HashSet;

use thiserror::Error;

pub use decode::{beam, greedy, BeamConfig, Decoded, EncodedWord, StepModel};
pub use io::{from_bytes, load_model, save_model, to_bytes, MAGIC, VERSION};
pub use lstm::{lstm_cell, LstmState};
pub use network::{decoder_step, encode, encoder_tokens, output_logits, sequence_loss, training_loss};
pub use params::{LstmWeights, ModelParams};
pub use train::{train, train_with_progress, EpochLog, TrainingConfig, TrainingLog};
pub use vocab::{
    Vocab, INPUT_SPECIALS, IN_PAD, IN_START, IN_UNK, OUTPUT_SPECIALS, OUT_END, OUT_PAD, OUT_START,
    OUT_UNK,
};

use crate::cisampa::PhonemeString;
use crate::lexicon::Lexicon;
use crate::script::GraphemeString;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("DimensionMismatch")]
    DimensionMismatch,
    #[error("EmptyInput: word has no graphemes")]
    EmptyInput,
    #[error("EmptyPrediction: decoder ended without emitting a phoneme")]
    EmptyPrediction,
    #[error("Diverged: non-finite loss or parameters in epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("invalid vocabulary: {0}")]
    BadVocab(String),
    #[error("BadMagic: not a model file")]
    BadMagic,
    #[error("UnsupportedVersion: {0}")]
    UnsupportedVersion(u32),
    #[error("TruncatedFile")]
    TruncatedFile,
    #[error("ChecksumMismatch")]
    ChecksumMismatch,
    #[error("corrupt model file: {0}")]
    Corrupt(String),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub num_layers: usize,
    pub hidden_size: usize,
    pub embed_size: usize,
    pub max_decode_len: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            num_layers: 2,
            hidden_size: 512,
            embed_size: 512,
            max_decode_len: 40,
            seed: crate::DEFAULT_SEED,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.num_layers == 0 || self.hidden_size == 0 || self.embed_size == 0 {
            return Err(ModelError::BadConfig("layers, hidden and embed sizes must be positive".into()));
        }
        if self.max_decode_len < 2 {
            return Err(ModelError::BadConfig("max_decode_len must be at least 2".into()));
        }
        Ok(())
    }
}

/// A decoded pronunciation.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub pron: PhonemeString,
    pub log_prob: f64,
    pub score: f64,
    pub truncated: bool,
    /// The word contained graphemes outside the training vocabulary.
    pub unknown_input: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct G2pModel {
    pub config: ModelConfig,
    pub vocab: Vocab,
    pub params: ModelParams,
}

impl G2pModel {
    fn encoded(&self, word: &GraphemeString) -> Result<(EncodedWord<'_>, bool), ModelError> {
        let (idx, unknown) = self.vocab.encode_word(word);
        Ok((EncodedWord::new(&self.params, &idx)?, unknown))
    }

    pub fn greedy_decode(&self, word: &GraphemeString) -> Result<Prediction, ModelError> {
        let (enc, unknown_input) = self.encoded(word)?;
        let d = greedy(&enc, self.config.max_decode_len);
        let pron = self.vocab.decode_tokens(&d.tokens);
        if pron.is_empty() {
            return Err(ModelError::EmptyPrediction);
        }
        Ok(Prediction {
            pron,
            log_prob: d.log_prob,
            score: d.score(true),
            truncated: d.truncated,
            unknown_input,
        })
    }

    /// Up to `n_best` distinct pronunciations, best first.
    pub fn beam_decode(
        &self,
        word: &GraphemeString,
        beam_width: usize,
        n_best: usize,
        length_norm: bool,
    ) -> Result<Vec<Prediction>, ModelError> {
        if beam_width == 0 || n_best == 0 || n_best > beam_width {
            return Err(ModelError::BadConfig("need 1 <= n_best <= beam_width".into()));
        }
        let (enc, unknown_input) = self.encoded(word)?;
        let cfg = BeamConfig {
            beam_width,
            n_best,
            length_norm,
            max_len: self.config.max_decode_len,
        };
        let mut seen = HashSet::new();
        let out: Vec<Prediction> = beam(&enc, &cfg)
            .into_iter()
            .filter_map(|d| {
                let pron = self.vocab.decode_tokens(&d.tokens);
                (!pron.is_empty() && seen.insert(pron.clone())).then(|| Prediction {
                    pron,
                    log_prob: d.log_prob,
                    score: d.score(length_norm),
                    truncated: d.truncated,
                    unknown_input,
                })
            })
            .take(n_best)
            .collect();
        if out.is_empty() {
            return Err(ModelError::EmptyPrediction);
        }
        Ok(out)
    }

    /// Fraction of distinct words whose greedy decode matches none of their
    /// reference pronunciations.
    pub fn word_error_rate(&self, lex: &Lexicon) -> f64 {
        let words = lex.words();
        if words.is_empty() {
            return 0.0;
        }
        let errors = words
            .iter()
            .filter(|w| match self.greedy_decode(w) {
                Ok(p) => !lex.prons(&w.to_string()).any(|r| *r == p.pron),
                Err(_) => true,
            })
            .count();
        errors as f64 / words.len() as f64
    }
}
