//! Batched sum-product decoding of block LDPC codes.
//!
//! `gamma` codewords share one Tanner graph and are decoded in lock-step.
//! The messages of all lanes on one edge form a package of `gamma`
//! contiguous values, and packages are laid out in edge-ID order, so edge
//! `k` occupies `[k * gamma, (k + 1) * gamma)` of a single flat array. The
//! edge store holds either check-to-variable or variable-to-check messages,
//! never both: each phase overwrites it in place.

pub(crate) mod kernels;

pub use kernels::{channel_llr, saturate, ATANH_LIMIT, LLR_MAX};

use kernels::Scratch;

use crate::code_model::EdgeLayout;
use crate::error::{Error, Result};

/// Default number of lanes decoded together.
pub const DEFAULT_GAMMA: usize = 32;

/// Edge and channel messages for `gamma` codewords.
#[derive(Debug, Clone)]
pub struct MessageBatch {
    gamma: usize,
    edges: Vec<f64>,
    channel: Vec<f64>,
}

impl MessageBatch {
    /// All-zero batch sized for `layout`.
    pub fn zeroed(layout: &EdgeLayout, gamma: usize) -> Result<Self> {
        if gamma == 0 {
            return Err(Error::InvalidParameter("gamma must be at least 1".into()));
        }
        Ok(Self {
            gamma,
            edges: vec![0.0; layout.num_edges() * gamma],
            channel: vec![0.0; layout.num_vars() * gamma],
        })
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    /// Package of edge `e`.
    pub fn edge_package(&self, e: usize) -> &[f64] {
        &self.edges[e * self.gamma..(e + 1) * self.gamma]
    }

    pub fn edge_package_mut(&mut self, e: usize) -> &mut [f64] {
        &mut self.edges[e * self.gamma..(e + 1) * self.gamma]
    }

    /// Channel package of variable `n`.
    pub fn channel_package(&self, n: usize) -> &[f64] {
        &self.channel[n * self.gamma..(n + 1) * self.gamma]
    }

    pub fn edge_store(&self) -> &[f64] {
        &self.edges
    }

    /// Loads channel LLRs `2y/σ²` and seeds every edge with its variable's LLR.
    ///
    /// `y` is lane-major: `y[lane * N + n]`.
    pub fn load(&mut self, layout: &EdgeLayout, y: &[f64], sigma: f64) -> Result<()> {
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        let (gamma, n_vars) = (self.gamma, layout.num_vars());
        if y.len() != gamma * n_vars || self.edges.len() != layout.num_edges() * gamma {
            return Err(Error::Dimension {
                expected: gamma * n_vars,
                got: y.len(),
            });
        }
        for n in 0..n_vars {
            for lane in 0..gamma {
                self.channel[n * gamma + lane] = channel_llr(y[lane * n_vars + n], sigma);
            }
        }
        for e in 0..layout.num_edges() {
            let n = layout.edge_var(e);
            self.edges[e * gamma..(e + 1) * gamma].copy_from_slice(&self.channel[n * gamma..(n + 1) * gamma]);
        }
        Ok(())
    }
}

/// Builds a batch from received values; see [`MessageBatch::load`].
pub fn init_messages(layout: &EdgeLayout, y: &[f64], gamma: usize, sigma: f64) -> Result<MessageBatch> {
    let mut batch = MessageBatch::zeroed(layout, gamma)?;
    batch.load(layout, y, sigma)?;
    Ok(batch)
}

/// Horizontal step over every check.
pub fn check_node_update(batch: &mut MessageBatch, layout: &EdgeLayout) {
    let mut scratch = Scratch::default();
    let mut packages = Vec::new();
    horizontal(batch, layout, None, &mut packages, &mut scratch);
}

/// Vertical step over every variable; returns the a-posteriori LLRs in
/// package order (`posterior[n * gamma + lane]`).
pub fn variable_node_update(batch: &mut MessageBatch, layout: &EdgeLayout) -> Vec<f64> {
    let mut posterior = vec![0.0; layout.num_vars() * batch.gamma];
    let mut scratch = Scratch::default();
    let mut packages = Vec::new();
    vertical(batch, layout, &mut posterior, None, &mut packages, &mut scratch);
    posterior
}

/// Hard decisions (bit 0 iff LLR >= 0) and per-lane syndrome check.
///
/// `posterior` and the returned bits are in package order.
pub fn hard_decision_and_syndrome(posterior: &[f64], layout: &EdgeLayout, gamma: usize) -> (Vec<u8>, Vec<bool>) {
    let bits: Vec<u8> = posterior.iter().map(|&b| u8::from(b < 0.0)).collect();
    let ok = syndrome(&bits, layout, gamma);
    (bits, ok)
}

fn syndrome(bits: &[u8], layout: &EdgeLayout, gamma: usize) -> Vec<bool> {
    let mut ok = vec![true; gamma];
    let mut parity = vec![0u8; gamma];
    for m in 0..layout.num_checks() {
        parity.fill(0);
        for e in layout.check_edges(m) {
            let n = layout.edge_var(e);
            for (p, &b) in parity.iter_mut().zip(&bits[n * gamma..(n + 1) * gamma]) {
                *p ^= b;
            }
        }
        for (o, &p) in ok.iter_mut().zip(&parity) {
            *o &= p == 0;
        }
    }
    ok
}

fn horizontal(batch: &mut MessageBatch, layout: &EdgeLayout, mask: Option<&[bool]>, packages: &mut Vec<usize>, scratch: &mut Scratch) {
    let gamma = batch.gamma;
    for m in 0..layout.num_checks() {
        packages.clear();
        packages.extend(layout.check_edges(m).map(|e| e * gamma));
        kernels::check_update(&mut batch.edges, packages, gamma, mask, scratch);
    }
}

fn vertical(
    batch: &mut MessageBatch,
    layout: &EdgeLayout,
    posterior: &mut [f64],
    mask: Option<&[bool]>,
    packages: &mut Vec<usize>,
    scratch: &mut Scratch,
) {
    let gamma = batch.gamma;
    for n in 0..layout.num_vars() {
        packages.clear();
        packages.extend(layout.var_edges(n).iter().map(|&e| e * gamma));
        let mu = &batch.channel[n * gamma..(n + 1) * gamma];
        kernels::variable_update(
            &mut batch.edges,
            packages,
            mu,
            &mut posterior[n * gamma..(n + 1) * gamma],
            true,
            mask,
            scratch,
        );
    }
}

/// Outcome of decoding one batch. Per-lane data is lane-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub gamma: usize,
    pub num_vars: usize,
    /// `hard_bits[lane * N + n]`.
    pub hard_bits: Vec<u8>,
    pub iterations_run: Vec<usize>,
    pub syndrome_ok: Vec<bool>,
    /// `posterior[lane * N + n]`.
    pub posterior: Vec<f64>,
}

impl DecodeResult {
    pub fn lane_bits(&self, lane: usize) -> &[u8] {
        &self.hard_bits[lane * self.num_vars..(lane + 1) * self.num_vars]
    }

    pub fn lane_posterior(&self, lane: usize) -> &[f64] {
        &self.posterior[lane * self.num_vars..(lane + 1) * self.num_vars]
    }

    /// Number of ones in a lane, i.e. bit errors against the all-zero word.
    pub fn lane_weight(&self, lane: usize) -> usize {
        self.lane_bits(lane).iter().filter(|&&b| b != 0).count()
    }
}

/// Reusable decoder for one layout and batch width.
#[derive(Debug, Clone)]
pub struct BatchDecoder<'a> {
    layout: &'a EdgeLayout,
    batch: MessageBatch,
    posterior: Vec<f64>,
    packages: Vec<usize>,
    scratch: Scratch,
}

impl<'a> BatchDecoder<'a> {
    pub fn new(layout: &'a EdgeLayout, gamma: usize) -> Result<Self> {
        Ok(Self {
            layout,
            batch: MessageBatch::zeroed(layout, gamma)?,
            posterior: vec![0.0; layout.num_vars() * gamma],
            packages: Vec::new(),
            scratch: Scratch::default(),
        })
    }

    pub fn gamma(&self) -> usize {
        self.batch.gamma
    }

    pub fn layout(&self) -> &EdgeLayout {
        self.layout
    }

    /// Decodes `gamma` received words (lane-major `y`).
    ///
    /// Without `early_stop` every lane runs exactly `max_iter` iterations.
    /// With it, a lane is frozen as soon as its hard decisions satisfy all
    /// checks and its messages are not touched again.
    pub fn decode(&mut self, y: &[f64], sigma: f64, max_iter: usize, early_stop: bool) -> Result<DecodeResult> {
        if max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        let gamma = self.batch.gamma;
        let layout = self.layout;
        self.batch.load(layout, y, sigma)?;

        let mut active = vec![true; gamma];
        let mut iterations_run = vec![max_iter; gamma];
        for iter in 1..=max_iter {
            let mask = early_stop.then_some(active.as_slice());
            horizontal(&mut self.batch, layout, mask, &mut self.packages, &mut self.scratch);
            vertical(&mut self.batch, layout, &mut self.posterior, mask, &mut self.packages, &mut self.scratch);
            if early_stop {
                let bits: Vec<u8> = self.posterior.iter().map(|&b| u8::from(b < 0.0)).collect();
                for (lane, ok) in syndrome(&bits, layout, gamma).into_iter().enumerate() {
                    if ok && active[lane] {
                        active[lane] = false;
                        iterations_run[lane] = iter;
                    }
                }
                if active.iter().all(|a| !a) {
                    break;
                }
            }
        }

        let (bits, syndrome_ok) = hard_decision_and_syndrome(&self.posterior, layout, gamma);
        let n_vars = layout.num_vars();
        let mut hard_bits = vec![0u8; gamma * n_vars];
        let mut posterior = vec![0.0; gamma * n_vars];
        for n in 0..n_vars {
            for lane in 0..gamma {
                hard_bits[lane * n_vars + n] = bits[n * gamma + lane];
                posterior[lane * n_vars + n] = self.posterior[n * gamma + lane];
            }
        }
        Ok(DecodeResult {
            gamma,
            num_vars: n_vars,
            hard_bits,
            iterations_run,
            syndrome_ok,
            posterior,
        })
    }
}

/// One-shot batch decode; see [`BatchDecoder::decode`].
pub fn decode_batch(
    layout: &EdgeLayout,
    y: &[f64],
    gamma: usize,
    sigma: f64,
    max_iter: usize,
    early_stop: bool,
) -> Result<DecodeResult> {
    BatchDecoder::new(layout, gamma)?.decode(y, sigma, max_iter, early_stop)
}
