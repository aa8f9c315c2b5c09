//! Mini-batch Adam with global-norm clipping and early stopping on
//! validation word error rate.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::network::accumulate_gradients;
use super::params::ModelParams;
use super::vocab::Vocab;
use super::{G2pModel, ModelConfig, ModelError};
use crate::cisampa::PhonemeInventory;
use crate::lexicon::Lexicon;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    /// Global gradient-norm ceiling; non-positive disables clipping.
    pub clip_norm: f64,
    pub max_epochs: usize,
    pub patience: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 32,
            clip_norm: 5.0,
            max_epochs: 100,
            patience: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_wer: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub epochs: Vec<EpochLog>,
    pub best_epoch: usize,
}

impl TrainingLog {
    /// `epoch TAB train_loss TAB valid_wer`, with a header line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("epoch\ttrain_loss\tvalid_wer\n");
        for e in &self.epochs {
            let _ = writeln!(out, "{}\t{:.10}\t{:.6}", e.epoch, e.train_loss, e.valid_wer);
        }
        out
    }
}

struct Adam {
    m: ModelParams,
    v: ModelParams,
    t: i32,
}

impl Adam {
    fn new(params: &ModelParams) -> Self {
        Adam {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }

    fn step(&mut self, params: &mut ModelParams, grads: &ModelParams, cfg: &TrainingConfig) {
        self.t += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.t);
        let bc2 = 1.0 - cfg.beta2.powi(self.t);
        let tensors = params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut());
        for (((p, g), m), v) in tensors {
            for k in 0..p.len() {
                m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
                v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
                let m_hat = m[k] / bc1;
                let v_hat = v[k] / bc2;
                p[k] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
            }
        }
    }
}

struct Example {
    word: Vec<usize>,
    target: Vec<usize>,
}

/// Trains a fresh model on `train`, selecting the epoch with the lowest
/// validation WER.
pub fn train(
    train_lex: &Lexicon,
    valid_lex: &Lexicon,
    config: &ModelConfig,
    tcfg: &TrainingConfig,
    inv: &PhonemeInventory,
) -> Result<(G2pModel, TrainingLog), ModelError> {
    train_with_progress(train_lex, valid_lex, config, tcfg, inv, |_| {})
}

pub fn train_with_progress(
    train_lex: &Lexicon,
    valid_lex: &Lexicon,
    config: &ModelConfig,
    tcfg: &TrainingConfig,
    inv: &PhonemeInventory,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<(G2pModel, TrainingLog), ModelError> {
    config.validate()?;
    if train_lex.is_empty() || valid_lex.is_empty() {
        return Err(ModelError::BadConfig("training and validation sets must be non-empty".into()));
    }
    if tcfg.batch_size == 0 || tcfg.max_epochs == 0 {
        return Err(ModelError::BadConfig("batch size and max epochs must be positive".into()));
    }
    let vocab = Vocab::from_lexicon(train_lex, inv);
    let params = ModelParams::init(config, vocab.input_size(), vocab.output_size());
    let mut model = G2pModel {
        config: config.clone(),
        vocab,
        params,
    };
    let examples: Vec<Example> = train_lex
        .entries()
        .iter()
        .map(|e| Example {
            word: model.vocab.encode_word(&e.word).0,
            target: model.vocab.encode_pron(&e.pron),
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut adam = Adam::new(&model.params);
    let mut grads = model.params.zeros_like();
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut losses = vec![0.0; examples.len()];
    let mut log = TrainingLog::default();
    let mut best: Option<(f64, ModelParams)> = None;
    let mut since_best = 0;

    for epoch in 1..=tcfg.max_epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(tcfg.batch_size) {
            grads.tensors_mut().into_iter().for_each(|t| t.fill(0.0));
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let ex = &examples[i];
                losses[i] =
                    accumulate_gradients(&model.params, &ex.word, &ex.target, scale, &mut grads)?;
            }
            if tcfg.clip_norm > 0.0 {
                let norm = grads.norm();
                if norm > tcfg.clip_norm {
                    grads.scale(tcfg.clip_norm / norm);
                }
            }
            adam.step(&mut model.params, &grads, tcfg);
        }
        let train_loss = losses.iter().sum::<f64>() / losses.len() as f64;
        if !train_loss.is_finite() || !model.params.is_finite() {
            return Err(ModelError::Diverged { epoch });
        }
        let valid_wer = model.word_error_rate(valid_lex);
        let entry = EpochLog {
            epoch,
            train_loss,
            valid_wer,
        };
        on_epoch(&entry);
        log.epochs.push(entry);

        if best.as_ref().is_none_or(|(w, _)| valid_wer < *w) {
            best = Some((valid_wer, model.params.clone()));
            log.best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
        }
        // a perfect validation score cannot improve further
        if since_best >= tcfg.patience || valid_wer == 0.0 {
            break;
        }
    }
    if let Some((_, params)) = best {
        model.params = params;
    }
    Ok((model, log))
}
