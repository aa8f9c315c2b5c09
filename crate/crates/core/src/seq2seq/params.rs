use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::tensor::Matrix;
use super::ModelConfig;

/// Weights of one LSTM layer. Rows of the 4H blocks are ordered
/// `[input, forget, candidate, output]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmWeights {
    pub w_x: Matrix,
    pub w_h: Matrix,
    pub b: Vec<f64>,
}

impl LstmWeights {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmWeights {
            w_x: Matrix::zeros(4 * hidden, input),
            w_h: Matrix::zeros(4 * hidden, hidden),
            b: vec![0.0; 4 * hidden],
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_h.cols
    }

    pub fn input(&self) -> usize {
        self.w_x.cols
    }
}

/// All trainable tensors of the encoder-decoder.
///
/// Gradients and optimizer moments reuse this type. [`ModelParams::tensors`]
/// fixes the canonical tensor order used by the optimizer and the model file:
/// input embedding, output embedding, encoder layers bottom-up (`w_x`, `w_h`,
/// `b`), decoder layers likewise, output projection, output bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub input_embed: Matrix,
    pub output_embed: Matrix,
    pub encoder: Vec<LstmWeights>,
    pub decoder: Vec<LstmWeights>,
    pub w_out: Matrix,
    pub b_out: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(config: &ModelConfig, input_vocab: usize, output_vocab: usize) -> Self {
        let h = config.hidden_size;
        let e = config.embed_size;
        let stack = || {
            (0..config.num_layers)
                .map(|l| LstmWeights::zeros(if l == 0 { e } else { h }, h))
                .collect::<Vec<_>>()
        };
        ModelParams {
            input_embed: Matrix::zeros(input_vocab, e),
            output_embed: Matrix::zeros(output_vocab, e),
            encoder: stack(),
            decoder: stack(),
            w_out: Matrix::zeros(output_vocab, h),
            b_out: vec![0.0; output_vocab],
        }
    }

    /// Uniform `[-1/sqrt(H), 1/sqrt(H)]` weights from a ChaCha8 stream seeded
    /// with `config.seed`; forget-gate biases 1, every other bias 0.
    pub fn init(config: &ModelConfig, input_vocab: usize, output_vocab: usize) -> Self {
        let mut p = Self::zeros(config, input_vocab, output_vocab);
        let a = 1.0 / (config.hidden_size as f64).sqrt();
        let dist = Uniform::new_inclusive(-a, a);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut fill = |m: &mut Matrix| m.data.iter_mut().for_each(|v| *v = dist.sample(&mut rng));
        fill(&mut p.input_embed);
        fill(&mut p.output_embed);
        let h = config.hidden_size;
        for layer in p.encoder.iter_mut().chain(p.decoder.iter_mut()) {
            fill(&mut layer.w_x);
            fill(&mut layer.w_h);
            layer.b[h..2 * h].fill(1.0);
        }
        fill(&mut p.w_out);
        p
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.tensors_mut().into_iter().for_each(|t| t.fill(0.0));
        z
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = vec![&self.input_embed.data, &self.output_embed.data];
        for layer in self.encoder.iter().chain(&self.decoder) {
            out.push(&layer.w_x.data);
            out.push(&layer.w_h.data);
            out.push(&layer.b);
        }
        out.push(&self.w_out.data);
        out.push(&self.b_out);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> =
            vec![&mut self.input_embed.data, &mut self.output_embed.data];
        for layer in self.encoder.iter_mut().chain(self.decoder.iter_mut()) {
            out.push(&mut layer.w_x.data);
            out.push(&mut layer.w_h.data);
            out.push(&mut layer.b);
        }
        out.push(&mut self.w_out.data);
        out.push(&mut self.b_out);
        out
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= factor);
        }
    }

    /// Flat copy in canonical order.
    pub fn to_flat(&self) -> Vec<f64> {
        self.tensors().concat()
    }

    pub(crate) fn fill_from_flat(&mut self, flat: &[f64]) {
        let mut offset = 0;
        for t in self.tensors_mut() {
            t.copy_from_slice(&flat[offset..offset + t.len()]);
            offset += t.len();
        }
        debug_assert_eq!(offset, flat.len());
    }
}
