//! A small rule-based pseudo-Urdu. Stems are drawn from syllable templates
//! over real Urdu letters with skewed letter frequencies; words are stems
//! with optional prefixes and suffixes, pronounced by fixed context rules.
//!
//! Rules, applied to the spelling alone:
//! - letter + ھ is the aspirated consonant (بھ → B_H);
//! - ن before ب is M;
//! - ا is A word-initially and A_A elsewhere; آ is A_A;
//! - و and ی are consonants (V, J) word-initially or after a vowel letter,
//!   and long vowels (O_O, I_I) after a consonant; ے is A_E;
//! - ں nasalizes the preceding long vowel;
//! - word-final ہ after a consonant is A, otherwise H;
//! - within a run of consonants, odd-numbered ones that are followed by
//!   another consonant carry an implicit A;
//! - zabar, zer and pesh after a consonant make its vowel A, I or U.

use std::collections::HashSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ASPIRATION: char = '\u{06BE}';
const ZABAR: char = '\u{064E}';
const ZER: char = '\u{0650}';
const PESH: char = '\u{064F}';

/// (letter, phoneme, aspirated phoneme), roughly by frequency.
const CONSONANTS: &[(char, &str, Option<&str>)] = &[
    ('ک', "K", Some("K_H")),
    ('ر', "R", None),
    ('ن', "N", None),
    ('م', "M", None),
    ('ت', "T_D", Some("T_D_H")),
    ('ب', "B", Some("B_H")),
    ('ل', "L", None),
    ('س', "S", None),
    ('د', "D_D", Some("D_D_H")),
    ('ہ', "H", None),
    ('پ', "P", Some("P_H")),
    ('ج', "D_Z", Some("D_Z_H")),
    ('گ', "G", Some("G_H")),
    ('چ', "T_S", Some("T_S_H")),
    ('ش', "S_H", None),
    ('ف', "F", None),
    ('ق', "Q", None),
    ('ڑ', "R_R", None),
    ('ٹ', "T", Some("T_H")),
    ('ز', "Z", None),
    ('خ', "X", None),
    ('ڈ', "D", Some("D_H")),
    ('غ', "G_G", None),
];

const PREFIXES: &[&str] = &["بے", "لا", "بد", "نا"];
const SUFFIXES: &[&str] = &[
    "ا", "ی", "ے", "وں", "یں", "نا", "تا", "تی", "ہ", "کار", "دار", "گی", "پن", "وا",
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Consonant,
    Vowel,
}

struct Unit {
    letter: char,
    aspirated: bool,
    mark: Option<char>,
}

fn units(word: &str) -> Vec<Unit> {
    let mut out: Vec<Unit> = Vec::new();
    for c in word.chars() {
        match c {
            ASPIRATION => out.last_mut().expect("ھ follows a letter").aspirated = true,
            ZABAR | ZER | PESH => out.last_mut().expect("mark follows a letter").mark = Some(c),
            _ => out.push(Unit {
                letter: c,
                aspirated: false,
                mark: None,
            }),
        }
    }
    out
}

fn roles(units: &[Unit]) -> Vec<Role> {
    let mut roles: Vec<Role> = Vec::with_capacity(units.len());
    for (i, u) in units.iter().enumerate() {
        let prev = roles.last().copied();
        let role = match u.letter {
            'ا' | 'آ' | 'ے' | 'ں' => Role::Vowel,
            'و' | 'ی' => {
                if prev.is_none_or(|r| r == Role::Vowel) {
                    Role::Consonant
                } else {
                    Role::Vowel
                }
            }
            'ہ' if i + 1 == units.len() && prev == Some(Role::Consonant) => Role::Vowel,
            _ => Role::Consonant,
        };
        roles.push(role);
    }
    roles
}

/// Consonant units that carry an implicit short vowel.
fn vowel_slots(units: &[Unit], roles: &[Role]) -> Vec<usize> {
    let mut run = 0;
    let mut slots = Vec::new();
    for i in 0..units.len() {
        if roles[i] == Role::Vowel {
            run = 0;
            continue;
        }
        run += 1;
        let next_is_consonant = roles.get(i + 1) == Some(&Role::Consonant);
        if run % 2 == 1 && next_is_consonant {
            slots.push(i);
        }
    }
    slots
}

/// Space-separated pronunciation of a word spelled with this fixture's
/// letters.
pub fn pronounce(word: &str) -> String {
    let units = units(word);
    let roles = roles(&units);
    let implicit: HashSet<usize> = vowel_slots(&units, &roles).into_iter().collect();
    let mut out: Vec<String> = Vec::new();
    for (i, u) in units.iter().enumerate() {
        match (u.letter, roles[i]) {
            ('ا', _) => out.push(if i == 0 { "A" } else { "A_A" }.into()),
            ('آ', _) => out.push("A_A".into()),
            ('ے', _) => out.push("A_E".into()),
            ('و', Role::Vowel) => out.push("O_O".into()),
            ('ی', Role::Vowel) => out.push("I_I".into()),
            ('ہ', Role::Vowel) => out.push("A".into()),
            ('ں', _) => match out.last().map(String::as_str) {
                Some("A_A" | "O_O" | "I_I" | "A_E") => {
                    let last = out.pop().unwrap();
                    out.push(format!("{last}_N"));
                }
                _ => out.push("N".into()),
            },
            (c, Role::Consonant) => {
                let name = match c {
                    'و' => "V",
                    'ی' => "J",
                    'ن' if units.get(i + 1).map(|n| n.letter) == Some('ب') => "M",
                    _ => {
                        let &(_, plain, asp) = CONSONANTS
                            .iter()
                            .find(|(l, _, _)| *l == c)
                            .expect("fixture letter");
                        if u.aspirated {
                            asp.expect("aspirable letter")
                        } else {
                            plain
                        }
                    }
                };
                out.push(name.into());
                match u.mark {
                    Some(ZABAR) => out.push("A".into()),
                    Some(ZER) => out.push("I".into()),
                    Some(PESH) => out.push("U".into()),
                    _ if implicit.contains(&i) => out.push("A".into()),
                    _ => {}
                }
            }
            (c, Role::Vowel) => unreachable!("{c} has no vowel reading"),
        }
    }
    out.join(" ")
}

fn consonant(rng: &mut ChaCha8Rng, out: &mut String, medial_heh: bool) {
    let weights = WeightedIndex::new((0..CONSONANTS.len()).map(|k| 1.0 / (k as f64 + 2.0))).unwrap();
    loop {
        let (letter, _, asp) = CONSONANTS[weights.sample(rng)];
        if letter == 'ہ' && !medial_heh {
            continue;
        }
        out.push(letter);
        if asp.is_some() && rng.gen_bool(0.12) {
            out.push(ASPIRATION);
        }
        return;
    }
}

fn stem(rng: &mut ChaCha8Rng) -> String {
    let mut w = String::new();
    let mut after_vowel = false;
    match rng.gen_range(0..100) {
        0..=11 => {
            w.push('ا');
            after_vowel = true;
        }
        12..=15 => {
            w.push('آ');
            after_vowel = true;
        }
        16..=19 => w.push('و'),
        20..=23 => w.push('ی'),
        _ => {}
    }
    let syllables = rng.gen_range(1..=2);
    for s in 0..syllables {
        if after_vowel && rng.gen_bool(0.15) {
            w.push(if rng.gen_bool(0.5) { 'و' } else { 'ی' });
        } else {
            let medial = s > 0 || !w.is_empty();
            consonant(rng, &mut w, medial);
        }
        if rng.gen_bool(0.3) {
            // a closed syllable
            consonant(rng, &mut w, true);
        }
        after_vowel = match rng.gen_range(0..10) {
            0..=2 => {
                w.push('ا');
                true
            }
            3 => {
                w.push('و');
                true
            }
            4 | 5 => {
                w.push('ی');
                true
            }
            _ => false,
        };
    }
    if after_vowel {
        if rng.gen_bool(0.2) {
            w.push('ں');
        }
    } else {
        match rng.gen_range(0..10) {
            0 => w.push('ہ'),
            1 => {
                w.push('ے');
                if rng.gen_bool(0.3) {
                    w.push('ں');
                }
            }
            _ => consonant(rng, &mut w, false),
        }
    }
    w
}

/// Adds zabar, zer or pesh on every implicit-vowel slot. `None` when the
/// word has no such slot.
fn diacritize(word: &str, rng: &mut ChaCha8Rng) -> Option<String> {
    let units = units(word);
    let roles = roles(&units);
    let slots: HashSet<usize> = vowel_slots(&units, &roles).into_iter().collect();
    if slots.is_empty() {
        return None;
    }
    let mut out = String::new();
    for (i, u) in units.iter().enumerate() {
        out.push(u.letter);
        if u.aspirated {
            out.push(ASPIRATION);
        }
        if slots.contains(&i) {
            out.push(*[ZABAR, ZER, PESH].choose(rng).unwrap());
        }
    }
    Some(out)
}

/// `n` distinct words with their pronunciations; `diacritized_frac` of them
/// (rounded) carry short-vowel marks.
pub fn generate(n: usize, diacritized_frac: f64, seed: u64) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stems = Vec::new();
    let mut seen = HashSet::new();
    while stems.len() < (n / 10).max(10) {
        let s = stem(&mut rng);
        if seen.insert(s.clone()) {
            stems.push(s);
        }
    }
    let mut seen = HashSet::new();
    let mut words = Vec::with_capacity(n);
    while words.len() < n {
        let mut w = String::new();
        if rng.gen_bool(0.15) {
            w.push_str(PREFIXES.choose(&mut rng).unwrap());
        }
        w.push_str(stems.choose(&mut rng).unwrap());
        if rng.gen_bool(0.75) {
            w.push_str(SUFFIXES.choose(&mut rng).unwrap());
        }
        if w.chars().count() >= 2 && seen.insert(w.clone()) {
            words.push(w);
        }
    }
    let target = (n as f64 * diacritized_frac).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut done = 0;
    for i in order {
        if done == target {
            break;
        }
        if let Some(d) = diacritize(&words[i], &mut rng) {
            words[i] = d;
            done += 1;
        }
    }
    assert_eq!(done, target, "not enough words with a vowel slot");
    words
        .into_iter()
        .map(|w| {
            let p = pronounce(&w);
            (w, p)
        })
        .collect()
}

/// Spaced lexicon text, one entry per line.
pub fn lexicon_text(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(w, p)| format!("{w}\t{p}\n")).collect()
}
