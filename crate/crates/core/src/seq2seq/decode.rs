//! Greedy and beam decoding over any left-to-right step model.

use std::cmp::Ordering;

use super::lstm::LstmState;
use super::network::{decoder_step, encode};
use super::params::ModelParams;
use super::vocab::{OUT_END, OUT_START};
use super::ModelError;

/// A left-to-right token model: given a state and the last emitted token,
/// returns log-probabilities of the next token and the successor state.
pub trait StepModel {
    type State: Clone;

    fn initial_state(&self) -> Self::State;
    fn step(&self, state: &Self::State, token: usize) -> (Vec<f64>, Self::State);

    fn start_token(&self) -> usize {
        OUT_START
    }

    fn end_token(&self) -> usize {
        OUT_END
    }
}

/// The decoder half of the network conditioned on one encoded word.
pub struct EncodedWord<'a> {
    params: &'a ModelParams,
    init: LstmState,
}

impl<'a> EncodedWord<'a> {
    pub fn new(params: &'a ModelParams, word: &[usize]) -> Result<Self, ModelError> {
        Ok(EncodedWord {
            params,
            init: encode(params, word)?,
        })
    }
}

impl StepModel for EncodedWord<'_> {
    type State = LstmState;

    fn initial_state(&self) -> LstmState {
        self.init.clone()
    }

    fn step(&self, state: &LstmState, token: usize) -> (Vec<f64>, LstmState) {
        let (next, log_probs) = decoder_step(self.params, state, token);
        (log_probs, next)
    }
}

/// A decoded token sequence, `</os>` excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub tokens: Vec<usize>,
    pub log_prob: f64,
    /// Stopped by the length cap rather than `</os>`.
    pub truncated: bool,
}

impl Decoded {
    /// Tokens emitted, counting `</os>` when present.
    pub fn emitted_len(&self) -> usize {
        self.tokens.len() + usize::from(!self.truncated)
    }

    pub fn score(&self, length_norm: bool) -> f64 {
        if length_norm {
            self.log_prob / self.emitted_len().max(1) as f64
        } else {
            self.log_prob
        }
    }
}

/// Index of the largest value; the lowest index wins ties.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Takes the most probable token at every step, for at most `max_len`
/// non-final tokens.
pub fn greedy<M: StepModel>(model: &M, max_len: usize) -> Decoded {
    let mut state = model.initial_state();
    let mut last = model.start_token();
    let mut tokens = Vec::new();
    let mut log_prob = 0.0;
    loop {
        if tokens.len() == max_len {
            return Decoded {
                tokens,
                log_prob,
                truncated: true,
            };
        }
        let (log_probs, next) = model.step(&state, last);
        let best = argmax(&log_probs);
        log_prob += log_probs[best];
        if best == model.end_token() {
            return Decoded {
                tokens,
                log_prob,
                truncated: false,
            };
        }
        tokens.push(best);
        state = next;
        last = best;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BeamConfig {
    pub beam_width: usize,
    pub n_best: usize,
    pub length_norm: bool,
    pub max_len: usize,
}

struct Live<S> {
    tokens: Vec<usize>,
    log_prob: f64,
    state: S,
}

fn rank(a: &Decoded, b: &Decoded, length_norm: bool) -> Ordering {
    b.score(length_norm)
        .total_cmp(&a.score(length_norm))
        .then_with(|| a.tokens.cmp(&b.tokens))
}

/// Beam search. Finished hypotheses take beam slots, so the live set shrinks
/// as hypotheses end; candidates are ranked by score (descending) and then
/// by token sequence. Returns every finished hypothesis best-first; the
/// caller trims to `n_best` after any post-processing that may merge
/// hypotheses.
pub fn beam<M: StepModel>(model: &M, cfg: &BeamConfig) -> Vec<Decoded> {
    let width = cfg.beam_width.max(1);
    let mut live = vec![Live {
        tokens: Vec::new(),
        log_prob: 0.0,
        state: model.initial_state(),
    }];
    let mut finished: Vec<Decoded> = Vec::new();

    while !live.is_empty() {
        // (parent, token, log_prob)
        let mut candidates: Vec<(usize, usize, f64)> = Vec::new();
        let mut successors = Vec::with_capacity(live.len());
        for (pi, hyp) in live.iter().enumerate() {
            let last = hyp.tokens.last().copied().unwrap_or(model.start_token());
            let (log_probs, next) = model.step(&hyp.state, last);
            candidates.extend(
                log_probs
                    .iter()
                    .enumerate()
                    .map(|(tok, lp)| (pi, tok, hyp.log_prob + lp)),
            );
            successors.push(next);
        }
        let emitted = live[0].tokens.len() + 1;
        let score = |lp: f64| {
            if cfg.length_norm {
                lp / emitted as f64
            } else {
                lp
            }
        };
        candidates.sort_by(|a, b| {
            score(b.2)
                .total_cmp(&score(a.2))
                .then_with(|| live[a.0].tokens.cmp(&live[b.0].tokens))
                .then(a.1.cmp(&b.1))
        });

        let mut next_live = Vec::new();
        for &(pi, tok, lp) in candidates.iter().take(width) {
            let mut tokens = live[pi].tokens.clone();
            if tok == model.end_token() {
                finished.push(Decoded {
                    tokens,
                    log_prob: lp,
                    truncated: false,
                });
                continue;
            }
            tokens.push(tok);
            if tokens.len() >= cfg.max_len {
                finished.push(Decoded {
                    tokens,
                    log_prob: lp,
                    truncated: true,
                });
                continue;
            }
            next_live.push(Live {
                tokens,
                log_prob: lp,
                state: successors[pi].clone(),
            });
        }
        live = next_live;
    }
    finished.sort_by(|a, b| rank(a, b, cfg.length_norm));
    finished
}
