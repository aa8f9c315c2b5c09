//! Word error rate, phoneme error rate and phoneme confusions.
//!
//! A word counts as correct when the prediction equals any of its reference
//! pronunciations. Phoneme edits are measured against the closest reference.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::cisampa::{PhonemeId, PhonemeInventory, PhonemeString};
use crate::lexicon::Lexicon;
use crate::script::GraphemeString;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditOp<T> {
    Match(T),
    Sub { reference: T, hypothesis: T },
    Del(T),
    Ins(T),
}

impl<T: Copy> EditOp<T> {
    pub fn is_error(&self) -> bool {
        !matches!(self, EditOp::Match(_))
    }

    /// `(reference side, hypothesis side)`, `None` marking a gap.
    pub fn pair(&self) -> (Option<T>, Option<T>) {
        match *self {
            EditOp::Match(t) => (Some(t), Some(t)),
            EditOp::Sub {
                reference,
                hypothesis,
            } => (Some(reference), Some(hypothesis)),
            EditOp::Del(t) => (Some(t), None),
            EditOp::Ins(t) => (None, Some(t)),
        }
    }
}

/// Unit-cost Levenshtein distance with one optimal alignment. The backtrace
/// prefers match, then substitution, then deletion, then insertion.
pub fn edit_distance<T: PartialEq + Copy>(reference: &[T], hypothesis: &[T]) -> (usize, Vec<EditOp<T>>) {
    let (n, m) = (reference.len(), hypothesis.len());
    let width = m + 1;
    let mut d = vec![0usize; (n + 1) * width];
    for i in 0..=n {
        d[i * width] = i;
    }
    for (j, cell) in d.iter_mut().take(width).enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = d[(i - 1) * width + j - 1] + usize::from(reference[i - 1] != hypothesis[j - 1]);
            let del = d[(i - 1) * width + j] + 1;
            let ins = d[i * width + j - 1] + 1;
            d[i * width + j] = diag.min(del).min(ins);
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * width + j];
        if i > 0 && j > 0 {
            let diag = d[(i - 1) * width + j - 1];
            if reference[i - 1] == hypothesis[j - 1] && here == diag {
                ops.push(EditOp::Match(reference[i - 1]));
                i -= 1;
                j -= 1;
                continue;
            }
            if here == diag + 1 {
                ops.push(EditOp::Sub {
                    reference: reference[i - 1],
                    hypothesis: hypothesis[j - 1],
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && here == d[(i - 1) * width + j] + 1 {
            ops.push(EditOp::Del(reference[i - 1]));
            i -= 1;
        } else {
            ops.push(EditOp::Ins(hypothesis[j - 1]));
            j -= 1;
        }
    }
    ops.reverse();
    (d[n * width + m], ops)
}

pub type ConfusionKey = (Option<PhonemeId>, Option<PhonemeId>);

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub n_words: usize,
    pub n_word_errors: usize,
    pub wer: f64,
    pub accuracy: f64,
    pub n_phoneme_edits: usize,
    pub n_reference_phonemes: usize,
    pub per: f64,
    /// Aligned (reference, hypothesis) pairs, matches included.
    pub confusion: BTreeMap<ConfusionKey, usize>,
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        format!(
            "WER {:.2}% accuracy {:.2}%\nPER {:.2}%\nwords {} errors {}\nphoneme edits {} reference phonemes {}\n",
            100.0 * self.wer,
            100.0 * self.accuracy,
            100.0 * self.per,
            self.n_words,
            self.n_word_errors,
            self.n_phoneme_edits,
            self.n_reference_phonemes,
        )
    }

    /// Header plus one record.
    pub fn to_tsv(&self) -> String {
        format!(
            "n_words\tn_word_errors\twer\taccuracy\tn_phoneme_edits\tn_reference_phonemes\tper\n{}\t{}\t{:.6}\t{:.6}\t{}\t{}\t{:.6}\n",
            self.n_words,
            self.n_word_errors,
            self.wer,
            self.accuracy,
            self.n_phoneme_edits,
            self.n_reference_phonemes,
            self.per,
        )
    }

    /// `reference TAB hypothesis TAB count`; `-` marks a gap.
    pub fn confusion_tsv(&self, inv: &PhonemeInventory) -> String {
        let name = |p: Option<PhonemeId>| p.map_or("-", |p| inv.name(p));
        let mut out = String::new();
        for (&(r, h), &count) in &self.confusion {
            let _ = writeln!(out, "{}\t{}\t{}", name(r), name(h), count);
        }
        out
    }
}

/// Scores `decoder` on every distinct word of `test`. A `None` prediction
/// counts as an empty pronunciation.
pub fn evaluate<F>(test: &Lexicon, mut decoder: F) -> EvalReport
where
    F: FnMut(&GraphemeString) -> Option<PhonemeString>,
{
    let mut report = EvalReport::default();
    for word in test.words() {
        let hyp = decoder(word).unwrap_or_default();
        let refs: Vec<&PhonemeString> = test.prons(&word.to_string()).collect();
        report.n_words += 1;
        if !refs.iter().any(|r| **r == hyp) {
            report.n_word_errors += 1;
        }
        let (dist, ops, ref_len) = refs
            .iter()
            .map(|r| {
                let (d, ops) = edit_distance(&r.0, &hyp.0);
                (d, ops, r.len())
            })
            .min_by_key(|(d, _, _)| *d)
            .expect("every lexicon word has a pronunciation");
        report.n_phoneme_edits += dist;
        report.n_reference_phonemes += ref_len;
        for op in ops {
            *report.confusion.entry(op.pair()).or_default() += 1;
        }
    }
    if report.n_words > 0 {
        report.wer = report.n_word_errors as f64 / report.n_words as f64;
        report.accuracy = (report.n_words - report.n_word_errors) as f64 / report.n_words as f64;
    }
    if report.n_reference_phonemes > 0 {
        report.per = report.n_phoneme_edits as f64 / report.n_reference_phonemes as f64;
    }
    report
}
