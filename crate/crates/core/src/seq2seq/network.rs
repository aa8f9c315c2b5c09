//! Forward pass and exact backpropagation through time for the
//! encoder-decoder.
//!
//! The encoder reads the word reversed and then `<s>`; its final state
//! (every layer, both `h` and `c`) is the decoder's initial state. During
//! training the decoder reads `<os> y1 … yn` and is scored against
//! `y1 … yn </os>`.

use super::lstm::{cell_backward, cell_forward, CellCache, LstmState};
use super::params::{LstmWeights, ModelParams};
use super::tensor::{axpy, log_softmax, Matrix};
use super::vocab::{IN_START, OUT_END, OUT_START};
use super::ModelError;

/// Encoder input order for a word: reversed, then `<s>`.
pub fn encoder_tokens(word: &[usize]) -> Vec<usize> {
    word.iter().rev().copied().chain([IN_START]).collect()
}

fn zero_state(params: &ModelParams) -> LstmState {
    let hidden = params.encoder[0].hidden();
    LstmState::zeros(params.encoder.len(), hidden)
}

struct StackTrace {
    /// `[t][layer]`
    caches: Vec<Vec<CellCache>>,
    tops: Vec<Vec<f64>>,
}

fn run_stack(
    layers: &[LstmWeights],
    embed: &Matrix,
    tokens: &[usize],
    mut state: LstmState,
    keep: bool,
) -> (LstmState, Option<StackTrace>) {
    let mut trace = keep.then(|| StackTrace {
        caches: Vec::with_capacity(tokens.len()),
        tops: Vec::with_capacity(tokens.len()),
    });
    for &tok in tokens {
        let mut x = embed.row(tok).to_vec();
        let mut step = Vec::new();
        for (l, w) in layers.iter().enumerate() {
            let (h, c, cache) = cell_forward(w, &x, &state.h[l], &state.c[l], keep);
            if let Some(cache) = cache {
                step.push(cache);
            }
            state.h[l] = h;
            state.c[l] = c;
            x = state.h[l].clone();
        }
        if let Some(tr) = trace.as_mut() {
            tr.caches.push(step);
            tr.tops.push(x);
        }
    }
    (state, trace)
}

/// Backpropagates a stack. `dtop[t]` is the gradient on the top hidden
/// output at step `t` (may be empty for none); `dfinal` is the gradient on
/// the final state. Returns the gradient on the initial state.
fn backprop_stack(
    layers: &[LstmWeights],
    grad_layers: &mut [LstmWeights],
    grad_embed: &mut Matrix,
    tokens: &[usize],
    trace: &StackTrace,
    dtop: &[Vec<f64>],
    dfinal: LstmState,
) -> LstmState {
    let top = layers.len() - 1;
    let LstmState {
        h: mut dh_next,
        c: mut dc_next,
    } = dfinal;
    for t in (0..tokens.len()).rev() {
        let mut from_above: Option<Vec<f64>> = None;
        for l in (0..=top).rev() {
            let mut dh = std::mem::take(&mut dh_next[l]);
            if l == top {
                if let Some(d) = dtop.get(t) {
                    axpy(1.0, d, &mut dh);
                }
            }
            if let Some(d) = from_above.take() {
                axpy(1.0, &d, &mut dh);
            }
            let (dx, dh_prev, dc_prev) = cell_backward(
                &layers[l],
                &trace.caches[t][l],
                &dh,
                &dc_next[l],
                &mut grad_layers[l],
            );
            dh_next[l] = dh_prev;
            dc_next[l] = dc_prev;
            from_above = Some(dx);
        }
        let dx = from_above.expect("non-empty stack");
        axpy(1.0, &dx, grad_embed.row_mut(tokens[t]));
    }
    LstmState {
        h: dh_next,
        c: dc_next,
    }
}

/// Runs the encoder and returns its final state.
pub fn encode(params: &ModelParams, word: &[usize]) -> Result<LstmState, ModelError> {
    if word.is_empty() {
        return Err(ModelError::EmptyInput);
    }
    let tokens = encoder_tokens(word);
    let (state, _) = run_stack(
        &params.encoder,
        &params.input_embed,
        &tokens,
        zero_state(params),
        false,
    );
    Ok(state)
}

pub fn output_logits(params: &ModelParams, top: &[f64]) -> Vec<f64> {
    let mut logits = params.b_out.clone();
    params.w_out.matvec_add(top, &mut logits);
    logits
}

/// Feeds one output token to the decoder; returns the next state and the
/// log-distribution over the following token.
pub fn decoder_step(params: &ModelParams, state: &LstmState, token: usize) -> (LstmState, Vec<f64>) {
    let (next, _) = run_stack(
        &params.decoder,
        &params.output_embed,
        &[token],
        state.clone(),
        false,
    );
    let log_probs = log_softmax(&output_logits(params, next.top()));
    (next, log_probs)
}

fn decoder_io(target: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let inputs = [OUT_START].iter().chain(target).copied().collect();
    let outputs = target.iter().copied().chain([OUT_END]).collect();
    (inputs, outputs)
}

/// Mean per-step negative log-likelihood, without gradients.
pub fn sequence_loss(params: &ModelParams, word: &[usize], target: &[usize]) -> Result<f64, ModelError> {
    let state = encode(params, word)?;
    let (inputs, outputs) = decoder_io(target);
    let (_, trace) = run_stack(&params.decoder, &params.output_embed, &inputs, state, true);
    let trace = trace.expect("trace kept");
    let total: f64 = trace
        .tops
        .iter()
        .zip(&outputs)
        .map(|(h, &y)| -log_softmax(&output_logits(params, h))[y])
        .sum();
    Ok(total / outputs.len() as f64)
}

/// Loss of one (word, target) pair and the gradient of every parameter.
pub fn training_loss(
    params: &ModelParams,
    word: &[usize],
    target: &[usize],
) -> Result<(f64, ModelParams), ModelError> {
    let mut grads = params.zeros_like();
    let loss = accumulate_gradients(params, word, target, 1.0, &mut grads)?;
    Ok((loss, grads))
}

/// Adds `scale · ∇loss` into `grads` and returns the unscaled loss.
pub(crate) fn accumulate_gradients(
    params: &ModelParams,
    word: &[usize],
    target: &[usize],
    scale: f64,
    grads: &mut ModelParams,
) -> Result<f64, ModelError> {
    if word.is_empty() {
        return Err(ModelError::EmptyInput);
    }
    let enc_tokens = encoder_tokens(word);
    let (enc_state, enc_trace) = run_stack(
        &params.encoder,
        &params.input_embed,
        &enc_tokens,
        zero_state(params),
        true,
    );
    let enc_trace = enc_trace.expect("trace kept");

    let (dec_inputs, dec_outputs) = decoder_io(target);
    let (_, dec_trace) = run_stack(
        &params.decoder,
        &params.output_embed,
        &dec_inputs,
        enc_state,
        true,
    );
    let dec_trace = dec_trace.expect("trace kept");

    let steps = dec_outputs.len() as f64;
    let mut loss = 0.0;
    let mut dtop = Vec::with_capacity(dec_outputs.len());
    for (h, &y) in dec_trace.tops.iter().zip(&dec_outputs) {
        let log_probs = log_softmax(&output_logits(params, h));
        loss -= log_probs[y];
        let mut dlogits: Vec<f64> = log_probs.iter().map(|lp| lp.exp()).collect();
        dlogits[y] -= 1.0;
        dlogits.iter_mut().for_each(|d| *d *= scale / steps);
        grads.w_out.outer_add(&dlogits, h);
        axpy(1.0, &dlogits, &mut grads.b_out);
        let mut dh = vec![0.0; h.len()];
        params.w_out.matvec_t_add(&dlogits, &mut dh);
        dtop.push(dh);
    }

    let hidden = params.decoder[0].hidden();
    let d_init = backprop_stack(
        &params.decoder,
        &mut grads.decoder,
        &mut grads.output_embed,
        &dec_inputs,
        &dec_trace,
        &dtop,
        LstmState::zeros(params.decoder.len(), hidden),
    );
    backprop_stack(
        &params.encoder,
        &mut grads.encoder,
        &mut grads.input_embed,
        &enc_tokens,
        &enc_trace,
        &[],
        d_init,
    );
    Ok(loss / steps)
}
