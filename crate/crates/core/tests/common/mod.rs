//! Shared fixtures for the integration tests.
#![allow(dead_code)]

pub mod synthetic;

use urdu_g2p::cisampa::PhonemeInventory;
use urdu_g2p::lexicon::{Lexicon, LoadOptions};

pub fn inv() -> &'static PhonemeInventory {
    PhonemeInventory::builtin()
}

pub fn spaced_lexicon(text: &str) -> Lexicon {
    Lexicon::parse_str(text, inv(), LoadOptions::default()).unwrap()
}
