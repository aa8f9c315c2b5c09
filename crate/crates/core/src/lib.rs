//! Urdu grapheme-to-phoneme toolkit.
//!
//! - [`script`]: Urdu character inventory, normalization, tokenization
//! - [`cisampa`]: CISAMPA phoneme inventory and pronunciation codecs
//! - [`lexicon`]: lexicon files, splitting and statistics
//! - [`seq2seq`]: the encoder-decoder LSTM
//! - [`eval`]: word and phoneme error rates
//! - [`cli`]: the `urdu-g2p` command line

pub mod cisampa;
pub mod cli;
pub mod eval;
pub mod lexicon;
pub mod script;
pub mod seq2seq;

/// Seed used whenever none is given.
pub const DEFAULT_SEED: u64 = 20_180_512;
