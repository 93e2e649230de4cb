//! Per-node update kernels over Γ-lane message packages.
//!
//! A package is `gamma` contiguous LLRs belonging to one edge, one value per
//! lane. Kernels receive the start offsets of the packages a node touches, so
//! the block decoder and the stream decoder share the exact same arithmetic.

/// LLR saturation bound (natural-log units).
pub const LLR_MAX: f64 = 50.0;

/// Largest magnitude fed to `atanh`.
pub const ATANH_LIMIT: f64 = 1.0 - 1e-12;

#[inline]
pub fn saturate(x: f64) -> f64 {
    x.clamp(-LLR_MAX, LLR_MAX)
}

/// Channel LLR `2y/σ²` of a BPSK observation, saturated.
#[inline]
pub fn channel_llr(y: f64, sigma: f64) -> f64 {
    saturate(2.0 * y / (sigma * sigma))
}

#[derive(Debug, Default, Clone)]
pub(crate) struct Scratch {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl Scratch {
    fn reserve(&mut self, len: usize, gamma: usize) {
        for v in [&mut self.a, &mut self.b] {
            if v.len() < len {
                v.resize(len, 0.0);
            }
        }
        if self.c.len() < gamma {
            self.c.resize(gamma, 0.0);
        }
    }
}

#[inline]
fn lane_active(mask: Option<&[bool]>, lane: usize) -> bool {
    mask.is_none_or(|m| m[lane])
}

/// Check-node update: every package in `packages` is replaced by
/// `2 atanh(prod_{others} tanh(beta/2))`.
///
/// The exclusive products come from a forward (prefix) and a backward
/// (suffix) pass, so each output is `prefix[k] * suffix[k]` with
/// `prefix[k] = t0 * t1 * ... * t(k-1)` and `suffix[k] = t(d-1) * ... * t(k+1)`,
/// both accumulated from 1.0.
pub(crate) fn check_update(store: &mut [f64], packages: &[usize], gamma: usize, mask: Option<&[bool]>, scratch: &mut Scratch) {
    let d = packages.len();
    if d == 0 {
        return;
    }
    scratch.reserve(d * gamma, gamma);
    let (t, fwd, suffix) = (&mut scratch.a, &mut scratch.b, &mut scratch.c);

    for (k, &p) in packages.iter().enumerate() {
        let src = &store[p..p + gamma];
        for (dst, &beta) in t[k * gamma..(k + 1) * gamma].iter_mut().zip(src) {
            *dst = (0.5 * beta).tanh();
        }
    }
    fwd[..gamma].fill(1.0);
    for k in 1..d {
        let (done, rest) = fwd.split_at_mut(k * gamma);
        let prev = &done[(k - 1) * gamma..];
        let tk = &t[(k - 1) * gamma..k * gamma];
        for ((out, &f), &x) in rest[..gamma].iter_mut().zip(prev).zip(tk) {
            *out = f * x;
        }
    }
    let suffix = &mut suffix[..gamma];
    suffix.fill(1.0);
    for k in (0..d).rev() {
        let p = packages[k];
        let dst = &mut store[p..p + gamma];
        for lane in 0..gamma {
            let prod = (fwd[k * gamma + lane] * suffix[lane]).clamp(-ATANH_LIMIT, ATANH_LIMIT);
            if lane_active(mask, lane) {
                dst[lane] = saturate(2.0 * prod.atanh());
            }
            suffix[lane] *= t[k * gamma + lane];
        }
    }
}

/// Variable-node update.
///
/// `packages` hold the incoming check-to-variable messages; `mu` is the
/// channel package. Writes the a-posteriori LLR `mu + sum(alpha)` into
/// `posterior` and, when `write_messages` is set, replaces each package by
/// its exclusive sum `mu + sum_{others} alpha`. Sums accumulate left to right
/// starting from `mu`.
pub(crate) fn variable_update(
    store: &mut [f64],
    packages: &[usize],
    mu: &[f64],
    posterior: &mut [f64],
    write_messages: bool,
    mask: Option<&[bool]>,
    scratch: &mut Scratch,
) {
    let gamma = mu.len();
    let d = packages.len();
    scratch.reserve(d * gamma, gamma);
    let alpha = &mut scratch.a;
    for (k, &p) in packages.iter().enumerate() {
        alpha[k * gamma..(k + 1) * gamma].copy_from_slice(&store[p..p + gamma]);
    }
    for lane in 0..gamma {
        if !lane_active(mask, lane) {
            continue;
        }
        let mut total = mu[lane];
        for k in 0..d {
            total += alpha[k * gamma + lane];
        }
        posterior[lane] = saturate(total);
    }
    if !write_messages {
        return;
    }
    for (k, &p) in packages.iter().enumerate() {
        for lane in 0..gamma {
            if !lane_active(mask, lane) {
                continue;
            }
            let mut sum = mu[lane];
            for j in 0..d {
                if j != k {
                    sum += alpha[j * gamma + lane];
                }
            }
            store[p + lane] = saturate(sum);
        }
    }
}
