//! Brute-force references for testing the optimized decoders.
//!
//! Nothing here is batched or fast. [`reference_window_decoder`] builds the
//! finite unwrapped matrix element by element from the expanded block code
//! and runs the pipelined schedule on it directly, so it shares no indexing
//! code with the stream decoder.

use crate::bp::{saturate, ATANH_LIMIT};
use crate::code_model::SparseParityCheck;
use crate::error::{Error, Result};
use crate::ldpccc::LdpcccCode;

/// Largest code length accepted by [`exact_posterior_llr`].
pub const MAX_EXACT_VARS: usize = 20;

/// Exact bitwise posterior LLRs `log P(x_n = 0 | μ) / P(x_n = 1 | μ)` over the
/// codewords of `h`, by enumerating all `2^N` words.
pub fn exact_posterior_llr(h: &SparseParityCheck, mu: &[f64]) -> Result<Vec<f64>> {
    let n = h.num_vars();
    if n > MAX_EXACT_VARS {
        return Err(Error::TooLarge(n));
    }
    if mu.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: mu.len(),
        });
    }
    let masks: Vec<u32> = h.rows().iter().map(|row| row.iter().fold(0u32, |m, &v| m | 1 << v)).collect();
    let mut zero = vec![f64::NEG_INFINITY; n];
    let mut one = vec![f64::NEG_INFINITY; n];
    for word in 0u32..(1u32 << n) {
        if masks.iter().any(|&m| (word & m).count_ones() % 2 == 1) {
            continue;
        }
        let weight: f64 = (0..n).map(|v| if word >> v & 1 == 0 { mu[v] / 2.0 } else { -mu[v] / 2.0 }).sum();
        for v in 0..n {
            let acc = if word >> v & 1 == 0 { &mut zero[v] } else { &mut one[v] };
            *acc = log_add(*acc, weight);
        }
    }
    Ok(zero.iter().zip(&one).map(|(z, o)| z - o).collect())
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// The first `frames` frames and check layers of the semi-infinite
/// unwrapped matrix. Variable `f c + n` is bit `n` of frame `f`; check
/// `t (c - b) + k` is row `k` of layer `t`.
pub fn unwrapped_matrix(code: &LdpcccCode, frames: usize) -> SparseParityCheck {
    let base = code.base().expand();
    let lambda = code.lambda();
    let (c, layer) = (code.frame_len(), code.layer_len());
    let mut rows = vec![Vec::new(); frames * layer];
    for (row, cols) in base.rows().iter().enumerate() {
        let (r, k) = (row / layer, row % layer);
        for &col in cols {
            let (j, n) = (col / c, col % c);
            // Lower part (diagonal included) sits on the current frame's
            // side of the layer, the upper part one period further back.
            let lag = if j <= r { r - j } else { lambda + r - j };
            let mut t = r;
            while t < frames {
                if let Some(f) = t.checked_sub(lag) {
                    rows[t * layer + k].push(f * c + n);
                }
                t += lambda;
            }
        }
    }
    for row in &mut rows {
        row.sort_unstable();
    }
    SparseParityCheck::new(frames * c, rows).expect("unwrapping yields a valid matrix")
}

/// Hard decisions and posteriors of one frame from the reference decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceFrame {
    pub bits: Vec<u8>,
    pub posterior: Vec<f64>,
}

/// Decodes a finite stream of channel-LLR frames with `processors`
/// iterations, following the pipelined slot schedule on the explicit
/// unwrapped matrix, zero-padded until every frame has been decided.
pub fn reference_window_decoder(code: &LdpcccCode, processors: usize, frames: &[Vec<f64>]) -> Vec<ReferenceFrame> {
    if frames.is_empty() || processors == 0 {
        return Vec::new();
    }
    let c = code.frame_len();
    let layer = code.layer_len();
    let window = code.lambda();
    let memory = code.memory();
    let total = frames.len() + processors * window - 1;
    let h = unwrapped_matrix(code, total);

    let mut mu = vec![0.0; total * c];
    for (f, llr) in frames.iter().enumerate() {
        assert_eq!(llr.len(), c, "frame {f} has the wrong length");
        mu[f * c..(f + 1) * c].copy_from_slice(llr);
    }
    // msg[m][i] is the message on the edge between check m and its i-th variable.
    let mut msg: Vec<Vec<f64>> = h.rows().iter().map(|row| row.iter().map(|&v| mu[v]).collect()).collect();
    let mut cols: Vec<Vec<(usize, usize)>> = vec![Vec::new(); total * c];
    for (m, row) in h.rows().iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            cols[v].push((m, i));
        }
    }

    let mut out = Vec::with_capacity(frames.len());
    for t in 0..total {
        let live: Vec<usize> = (0..processors).filter_map(|i| t.checked_sub(i * window)).collect();
        for &lay in &live {
            for row in &mut msg[lay * layer..(lay + 1) * layer] {
                *row = check_rule(row);
            }
        }
        for (i, &lay) in live.iter().enumerate() {
            let Some(f) = lay.checked_sub(memory) else {
                continue;
            };
            let last = i + 1 == processors;
            let mut bits = Vec::with_capacity(c);
            let mut posterior = Vec::with_capacity(c);
            for v in f * c..(f + 1) * c {
                let alpha: Vec<f64> = cols[v].iter().map(|&(m, k)| msg[m][k]).collect();
                if last {
                    let mut total = mu[v];
                    for a in &alpha {
                        total += a;
                    }
                    let post = saturate(total);
                    posterior.push(post);
                    bits.push(u8::from(post < 0.0));
                } else {
                    for (k, &(m, pos)) in cols[v].iter().enumerate() {
                        let mut sum = mu[v];
                        for (j, a) in alpha.iter().enumerate() {
                            if j != k {
                                sum += a;
                            }
                        }
                        msg[m][pos] = saturate(sum);
                    }
                }
            }
            if last && f < frames.len() {
                out.push(ReferenceFrame { bits, posterior });
            }
        }
    }
    out
}

/// `2 atanh(prefix * suffix)` for each position, with
/// `prefix = t0 ... t(k-1)` and `suffix = t(d-1) ... t(k+1)`.
fn check_rule(beta: &[f64]) -> Vec<f64> {
    let t: Vec<f64> = beta.iter().map(|b| (0.5 * b).tanh()).collect();
    (0..t.len())
        .map(|k| {
            let mut prefix = 1.0;
            for x in &t[..k] {
                prefix *= x;
            }
            let mut suffix = 1.0;
            for x in t[k + 1..].iter().rev() {
                suffix *= x;
            }
            saturate(2.0 * (prefix * suffix).clamp(-ATANH_LIMIT, ATANH_LIMIT).atanh())
        })
        .collect()
}
