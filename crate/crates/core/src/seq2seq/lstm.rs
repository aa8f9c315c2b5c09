//! The LSTM cell: gates `i, f, o = σ(·)`, candidate `g = tanh(·)` over the
//! four slices of `W_x·x + W_h·h + b` (no peepholes), then
//! `c' = f⊙c + i⊙g` and `h' = o⊙tanh(c')`.

use super::params::LstmWeights;
use super::tensor::sigmoid;
use super::ModelError;

/// Hidden and cell vectors for every layer of a stack.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
}

impl LstmState {
    pub fn zeros(num_layers: usize, hidden: usize) -> Self {
        LstmState {
            h: vec![vec![0.0; hidden]; num_layers],
            c: vec![vec![0.0; hidden]; num_layers],
        }
    }

    pub fn num_layers(&self) -> usize {
        self.h.len()
    }

    pub fn top(&self) -> &[f64] {
        self.h.last().expect("at least one layer")
    }
}

/// Everything the backward pass needs from one cell application.
#[derive(Debug, Clone)]
pub(crate) struct CellCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Activated gates, `[i, f, g, o]`, length 4H.
    pub gates: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

/// One checked cell step.
pub fn lstm_cell(
    w: &LstmWeights,
    x: &[f64],
    h: &[f64],
    c: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), ModelError> {
    let hid = w.hidden();
    if x.len() != w.input() || h.len() != hid || c.len() != hid || w.b.len() != 4 * hid {
        return Err(ModelError::DimensionMismatch);
    }
    let (h_new, c_new, _) = cell_forward(w, x, h, c, false);
    Ok((h_new, c_new))
}

pub(crate) fn cell_forward(
    w: &LstmWeights,
    x: &[f64],
    h: &[f64],
    c: &[f64],
    keep: bool,
) -> (Vec<f64>, Vec<f64>, Option<CellCache>) {
    let hid = w.hidden();
    let mut z = w.b.clone();
    w.w_x.matvec_add(x, &mut z);
    w.w_h.matvec_add(h, &mut z);
    for (k, v) in z.iter_mut().enumerate() {
        *v = if (2 * hid..3 * hid).contains(&k) {
            v.tanh()
        } else {
            sigmoid(*v)
        };
    }
    let mut c_new = vec![0.0; hid];
    let mut h_new = vec![0.0; hid];
    let mut tanh_c = vec![0.0; hid];
    for j in 0..hid {
        let (i, f, g, o) = (z[j], z[hid + j], z[2 * hid + j], z[3 * hid + j]);
        c_new[j] = f * c[j] + i * g;
        tanh_c[j] = c_new[j].tanh();
        h_new[j] = o * tanh_c[j];
    }
    let cache = keep.then(|| CellCache {
        x: x.to_vec(),
        h_prev: h.to_vec(),
        c_prev: c.to_vec(),
        gates: z,
        tanh_c,
    });
    (h_new, c_new, cache)
}

/// Backpropagates through one cell. `dh`/`dc` are gradients w.r.t. the
/// cell's outputs; weight gradients accumulate into `grad`. Returns the
/// gradients w.r.t. `(x, h_prev, c_prev)`.
pub(crate) fn cell_backward(
    w: &LstmWeights,
    cache: &CellCache,
    dh: &[f64],
    dc: &[f64],
    grad: &mut LstmWeights,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let hid = w.hidden();
    let gt = &cache.gates;
    let mut dz = vec![0.0; 4 * hid];
    let mut dc_prev = vec![0.0; hid];
    for j in 0..hid {
        let (i, f, g, o) = (gt[j], gt[hid + j], gt[2 * hid + j], gt[3 * hid + j]);
        let tc = cache.tanh_c[j];
        let dct = dc[j] + dh[j] * o * (1.0 - tc * tc);
        dz[j] = dct * g * i * (1.0 - i);
        dz[hid + j] = dct * cache.c_prev[j] * f * (1.0 - f);
        dz[2 * hid + j] = dct * i * (1.0 - g * g);
        dz[3 * hid + j] = dh[j] * tc * o * (1.0 - o);
        dc_prev[j] = dct * f;
    }
    grad.w_x.outer_add(&dz, &cache.x);
    grad.w_h.outer_add(&dz, &cache.h_prev);
    for (b, d) in grad.b.iter_mut().zip(&dz) {
        *b += d;
    }
    let mut dx = vec![0.0; w.input()];
    w.w_x.matvec_t_add(&dz, &mut dx);
    let mut dh_prev = vec![0.0; hid];
    w.w_h.matvec_t_add(&dz, &mut dh_prev);
    (dx, dh_prev, dc_prev)
}
