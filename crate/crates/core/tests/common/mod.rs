#![allow(dead_code)]

use std::path::PathBuf;

use qcldpc::code_model::{load_code, CodeFormat, ExponentMatrix};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub fn code_a_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("codes/code_a.qc")
}

pub fn code_a() -> ExponentMatrix {
    load_code(code_a_path(), CodeFormat::QcExponent).unwrap().exponent.unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in `[0, 1)`.
pub fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Channel LLRs of noisy all-zero transmissions: `2(1 + σ g)/σ²` with a
/// crude Gaussian from twelve uniforms.
pub fn noisy_llrs(rng: &mut ChaCha8Rng, n: usize, sigma: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let g: f64 = (0..12).map(|_| uniform(rng)).sum::<f64>() - 6.0;
            2.0 * (1.0 + sigma * g) / (sigma * sigma)
        })
        .collect()
}

use qcldpc::bp::{check_node_update, decode_batch, variable_node_update, MessageBatch, LLR_MAX};
use qcldpc::code_model::{EdgeLayout, SparseParityCheck};
use qcldpc::oracle::exact_posterior_llr;

pub fn below(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

/// A random forest-shaped Tanner graph with at most `max_vars` variables.
pub fn random_tree_code(rng: &mut ChaCha8Rng, max_vars: usize) -> SparseParityCheck {
    let n = 3 + below(rng, max_vars - 2);
    let mut vars = 1;
    let mut rows = Vec::new();
    while vars < n {
        if uniform(rng) < 0.1 {
            // Start another component.
            vars += 1;
            continue;
        }
        let anchor = below(rng, vars);
        let fresh = 1 + below(rng, 3.min(n - vars));
        let mut row: Vec<usize> = (vars..vars + fresh).collect();
        row.push(anchor);
        row.sort_unstable();
        vars += fresh;
        rows.push(row);
    }
    SparseParityCheck::new(n, rows).unwrap()
}

/// Largest deviation of block BP from the exact posteriors on one random
/// cycle-free code.
pub fn oracle_exactness_trial(rng: &mut ChaCha8Rng) -> f64 {
    let h = random_tree_code(rng, 16);
    let n = h.num_vars();
    let mu: Vec<f64> = (0..n).map(|_| 3.0 * uniform(rng) - 1.5).collect();
    let exact = exact_posterior_llr(&h, &mu).unwrap();
    let layout = EdgeLayout::new(&h);
    // With σ = 1 the channel LLR is 2y.
    let y: Vec<f64> = mu.iter().map(|m| m / 2.0).collect();
    let result = decode_batch(&layout, &y, 1, 1.0, 2 * n + 2, false).unwrap();
    result.lane_posterior(0).iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn random_llr(rng: &mut ChaCha8Rng) -> f64 {
    let scale = [0.01, 1.0, 10.0, 80.0][below(rng, 4)];
    scale * (2.0 * uniform(rng) - 1.0)
}

/// One randomized check update and one variable update, checking the sign
/// rule, magnitude contraction, exclusive-sum consistency and saturation.
pub fn invariant_trial(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let d = 1 + below(rng, 8);
    let gamma = 1 + below(rng, 4);
    let tol = 1e-9;

    // One check over d variables.
    let check = SparseParityCheck::new(d, vec![(0..d).collect()]).unwrap();
    let layout = EdgeLayout::new(&check);
    let mut batch = MessageBatch::zeroed(&layout, gamma).unwrap();
    let beta: Vec<Vec<f64>> = (0..d).map(|_| (0..gamma).map(|_| random_llr(rng)).collect()).collect();
    for (e, b) in beta.iter().enumerate() {
        batch.edge_package_mut(e).copy_from_slice(b);
    }
    check_node_update(&mut batch, &layout);
    for e in 0..d {
        for lane in 0..gamma {
            let alpha = batch.edge_package(e)[lane];
            if !alpha.is_finite() || alpha.abs() > LLR_MAX {
                return Err(format!("alpha {alpha} out of bounds"));
            }
            let others = (0..d).filter(|&k| k != e).map(|k| beta[k][lane]);
            let negative = others.clone().filter(|&b| b < 0.0).count() % 2 == 1;
            let min = others.map(f64::abs).fold(f64::INFINITY, f64::min);
            if alpha != 0.0 && (alpha < 0.0) != negative {
                return Err(format!("sign rule: alpha {alpha}, beta {:?}", beta));
            }
            // Going through tanh and back amplifies one rounding of t by
            // d(2 atanh t)/dt = 2 cosh^2(beta/2), about 1e-4 near |beta| = 28.
            let slack = tol + 4.0 * d as f64 * f64::EPSILON * (min / 2.0).cosh().powi(2);
            if alpha.abs() > min + slack {
                return Err(format!("contraction: |alpha| {} > {min}", alpha.abs()));
            }
        }
    }

    // One variable in d checks.
    let var = SparseParityCheck::new(1, vec![vec![0]; d]).unwrap();
    let layout = EdgeLayout::new(&var);
    let y: Vec<f64> = (0..gamma).map(|_| random_llr(rng) / 2.0).collect();
    let mut batch = MessageBatch::zeroed(&layout, gamma).unwrap();
    batch.load(&layout, &y, 1.0).unwrap();
    let alpha: Vec<Vec<f64>> = (0..d).map(|_| (0..gamma).map(|_| random_llr(rng).clamp(-LLR_MAX, LLR_MAX)).collect()).collect();
    for (e, a) in alpha.iter().enumerate() {
        batch.edge_package_mut(e).copy_from_slice(a);
    }
    let posterior = variable_node_update(&mut batch, &layout);
    for lane in 0..gamma {
        let post = posterior[lane];
        if !post.is_finite() || post.abs() > LLR_MAX {
            return Err(format!("posterior {post} out of bounds"));
        }
        for (e, a) in alpha.iter().enumerate() {
            let b = batch.edge_package(e)[lane];
            if !b.is_finite() || b.abs() > LLR_MAX {
                return Err(format!("beta {b} out of bounds"));
            }
            if post.abs() < LLR_MAX && b.abs() < LLR_MAX && (post - b - a[lane]).abs() > tol * (1.0 + post.abs()) {
                return Err(format!("exclusive sum: {post} - {b} != {}", a[lane]));
            }
        }
    }
    Ok(())
}

/// Decodes one random word with 32 identical lanes and with one lane and
/// reports whether every lane matches bit for bit.
pub fn lane_invariance_trial(rng: &mut ChaCha8Rng, base: &ExponentMatrix) -> bool {
    let p = 3 + below(rng, 5);
    let h = base.rescaled(p).unwrap().expand();
    let layout = EdgeLayout::new(&h);
    let n = h.num_vars();
    let sigma = 0.6 + 0.4 * uniform(rng);
    let y: Vec<f64> = noisy_llrs(rng, n, sigma).iter().map(|l| l * sigma * sigma / 2.0).collect();
    let iters = 1 + below(rng, 8);
    let early = uniform(rng) < 0.5;
    let single = decode_batch(&layout, &y, 1, sigma, iters, early).unwrap();
    let wide: Vec<f64> = (0..32).flat_map(|_| y.iter().copied()).collect();
    let batch = decode_batch(&layout, &wide, 32, sigma, iters, early).unwrap();
    (0..32).all(|lane| {
        batch.lane_bits(lane) == single.lane_bits(0)
            && batch.lane_posterior(lane) == single.lane_posterior(0)
            && batch.iterations_run[lane] == single.iterations_run[0]
            && batch.syndrome_ok[lane] == single.syndrome_ok[0]
    })
}
