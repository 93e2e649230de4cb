//! LDPC convolutional codes built by unwrapping QC-LDPC codes, and the
//! pipelined stream decoder.
//!
//! The decoder runs `I` processors over a window of `I (m_s + 1)` frames.
//! At time slot `t` processor `i` (1-based) owns check layer
//! `t - (i - 1)(m_s + 1)`; after updating it, the oldest frame of that layer
//! has seen every one of its checks once more and gets its vertical update.
//! The frame leaving processor `I` is decided and its memory recycled.

mod code;

pub use code::{LdpcccCode, SubBlock};

use crate::bp::kernels::{self, Scratch};
use crate::bp::channel_llr;
use crate::error::{Error, Result};

/// Work performed in one time slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotSchedule {
    /// Check layer updated by processor `i + 1`, if it exists yet.
    pub layers: Vec<Option<u64>>,
    /// Frame leaving processor `i + 1`, if it exists yet.
    pub frames: Vec<Option<u64>>,
}

impl SlotSchedule {
    pub fn new(memory: usize, processors: usize, t: u64) -> Self {
        let window = (memory + 1) as u64;
        let mut layers = Vec::with_capacity(processors);
        let mut frames = Vec::with_capacity(processors);
        for i in 0..processors as u64 {
            let layer = t.checked_sub(i * window);
            layers.push(layer);
            frames.push(layer.and_then(|c| c.checked_sub(memory as u64)));
        }
        Self { layers, frames }
    }

    /// Frame decided in this slot.
    pub fn emitted(&self) -> Option<u64> {
        self.frames.last().copied().flatten()
    }
}

/// One frame leaving the decoder; `bits` and `posterior` are lane-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedFrame {
    pub index: u64,
    pub gamma: usize,
    pub frame_len: usize,
    pub bits: Vec<u8>,
    pub posterior: Vec<f64>,
    /// Emitted by `flush`.
    pub tail: bool,
}

impl DecodedFrame {
    pub fn lane_bits(&self, lane: usize) -> &[u8] {
        &self.bits[lane * self.frame_len..(lane + 1) * self.frame_len]
    }

    pub fn lane_posterior(&self, lane: usize) -> &[f64] {
        &self.posterior[lane * self.frame_len..(lane + 1) * self.frame_len]
    }

    pub fn lane_errors(&self, lane: usize) -> usize {
        self.lane_bits(lane).iter().filter(|&&b| b != 0).count()
    }
}

/// Pipelined decoder for `gamma` parallel code streams.
#[derive(Debug)]
pub struct StreamDecoder<'c> {
    code: &'c LdpcccCode,
    processors: usize,
    gamma: usize,
    /// `I` groups of `E` packages.
    msg: Vec<f64>,
    /// `I (m_s + 1)` frames of `c` channel packages.
    chan: Vec<f64>,
    t: u64,
    pushed: u64,
    emitted: u64,
    post: Vec<f64>,
    packages: Vec<usize>,
    scratch: Scratch,
}

impl<'c> StreamDecoder<'c> {
    pub fn new(code: &'c LdpcccCode, processors: usize, gamma: usize) -> Result<Self> {
        if processors == 0 {
            return Err(Error::InvalidParameter("at least one processor is required".into()));
        }
        if gamma == 0 {
            return Err(Error::InvalidParameter("gamma must be at least 1".into()));
        }
        let frames = processors * code.lambda();
        Ok(Self {
            code,
            processors,
            gamma,
            msg: vec![0.0; processors * code.edges() * gamma],
            chan: vec![0.0; frames * code.frame_len() * gamma],
            t: 0,
            pushed: 0,
            emitted: 0,
            post: vec![0.0; code.frame_len() * gamma],
            packages: Vec::new(),
            scratch: Scratch::default(),
        })
    }

    pub fn code(&self) -> &LdpcccCode {
        self.code
    }

    pub fn processors(&self) -> usize {
        self.processors
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    /// Current time slot.
    pub fn time_slot(&self) -> u64 {
        self.t
    }

    /// Message units per lane, `I E`.
    pub fn message_capacity(&self) -> usize {
        self.processors * self.code.edges()
    }

    /// Frames of channel memory, `I (m_s + 1)`.
    pub fn channel_frames(&self) -> usize {
        self.processors * self.code.lambda()
    }

    /// Memory slot `τ` holding frame `f`.
    pub fn slot_of(&self, frame: u64) -> usize {
        (frame % self.channel_frames() as u64) as usize
    }

    pub fn pushed(&self) -> u64 {
        self.pushed
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    /// Pushes one frame of received values, lane-major `gamma x c`.
    pub fn push_frame(&mut self, y: &[f64], sigma: f64) -> Result<Option<DecodedFrame>> {
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        self.check_len(y.len())?;
        let llr: Vec<f64> = y.iter().map(|&v| channel_llr(v, sigma)).collect();
        self.push_llrs(&llr)
    }

    /// Pushes one frame of channel LLRs, lane-major `gamma x c`.
    pub fn push_llrs(&mut self, llr: &[f64]) -> Result<Option<DecodedFrame>> {
        self.check_len(llr.len())?;
        self.pushed += 1;
        Ok(self.step(llr, false))
    }

    /// Drains the pipeline with zero-LLR frames and resets the decoder.
    pub fn flush(&mut self) -> Vec<DecodedFrame> {
        let mut out = Vec::new();
        let zeros = vec![0.0; self.gamma * self.code.frame_len()];
        while self.emitted < self.pushed {
            if let Some(frame) = self.step(&zeros, true) {
                out.push(frame);
            }
        }
        self.reset();
        out
    }

    pub fn reset(&mut self) {
        self.msg.fill(0.0);
        self.chan.fill(0.0);
        self.t = 0;
        self.pushed = 0;
        self.emitted = 0;
    }

    fn check_len(&self, got: usize) -> Result<()> {
        let expected = self.gamma * self.code.frame_len();
        if got != expected {
            return Err(Error::Dimension { expected, got });
        }
        Ok(())
    }

    /// Start of the message package of edge `e` of sub-block `label` for frame `f`.
    #[inline]
    fn package(&self, frame: u64, label: usize, e: usize) -> usize {
        let group = self.slot_of(frame) / self.code.lambda();
        (group * self.code.edges() + self.code.label_offset(label) + e) * self.gamma
    }

    fn step(&mut self, llr: &[f64], tail: bool) -> Option<DecodedFrame> {
        let t = self.t;
        self.load_frame(t, llr);
        let schedule = SlotSchedule::new(self.code.memory(), self.processors, t);
        for layer in schedule.layers.iter().flatten() {
            self.update_layer(*layer);
        }
        let mut decided = None;
        for (i, frame) in schedule.frames.iter().enumerate() {
            if let Some(f) = *frame {
                let last = i + 1 == self.processors;
                self.update_frame(f, !last);
                if last {
                    decided = Some(f);
                }
            }
        }
        self.t += 1;
        let f = decided?;
        let frame = self.decide(f, tail);
        self.clear_frame(f);
        self.emitted += 1;
        Some(frame)
    }

    /// Stores `μ` of the newest frame and seeds its outgoing messages.
    fn load_frame(&mut self, f: u64, llr: &[f64]) {
        let (c, gamma) = (self.code.frame_len(), self.gamma);
        let base = self.slot_of(f) * c * gamma;
        for lane in 0..gamma {
            for n in 0..c {
                self.chan[base + n * gamma + lane] = llr[lane * c + n];
            }
        }
        let code = self.code;
        for &label in &code.lut_v()[(f % code.lambda() as u64) as usize] {
            let sb = code.sub_block(label);
            for e in 0..sb.num_edges() {
                let dst = self.package(f, label, e);
                let src = base + sb.edge_col(e) * gamma;
                self.msg[dst..dst + gamma].copy_from_slice(&self.chan[src..src + gamma]);
            }
        }
    }

    fn update_layer(&mut self, layer: u64) {
        let code = self.code;
        let memory = code.memory() as u64;
        let labels = &code.lut_c()[(layer % code.lambda() as u64) as usize];
        for k in 0..code.layer_len() {
            self.packages.clear();
            for (pos, &label) in labels.iter().enumerate() {
                // Frames before the start of the stream do not take part.
                let Some(f) = (layer + pos as u64).checked_sub(memory) else {
                    continue;
                };
                for e in code.sub_block(label).row_edges(k) {
                    self.packages.push(self.package(f, label, e));
                }
            }
            kernels::check_update(&mut self.msg, &self.packages, self.gamma, None, &mut self.scratch);
        }
    }

    fn update_frame(&mut self, f: u64, write_messages: bool) {
        let code = self.code;
        let (c, gamma) = (code.frame_len(), self.gamma);
        let labels = &code.lut_v()[(f % code.lambda() as u64) as usize];
        let base = self.slot_of(f) * c * gamma;
        for n in 0..c {
            self.packages.clear();
            for &label in labels {
                for &e in code.sub_block(label).col_edges(n) {
                    self.packages.push(self.package(f, label, e));
                }
            }
            let mu = &self.chan[base + n * gamma..base + (n + 1) * gamma];
            kernels::variable_update(
                &mut self.msg,
                &self.packages,
                mu,
                &mut self.post[n * gamma..(n + 1) * gamma],
                write_messages,
                None,
                &mut self.scratch,
            );
        }
    }

    fn decide(&self, f: u64, tail: bool) -> DecodedFrame {
        let (c, gamma) = (self.code.frame_len(), self.gamma);
        let mut bits = vec![0u8; c * gamma];
        let mut posterior = vec![0.0; c * gamma];
        for n in 0..c {
            for lane in 0..gamma {
                let v = self.post[n * gamma + lane];
                posterior[lane * c + n] = v;
                bits[lane * c + n] = u8::from(v < 0.0);
            }
        }
        DecodedFrame {
            index: f,
            gamma,
            frame_len: c,
            bits,
            posterior,
            tail,
        }
    }

    fn clear_frame(&mut self, f: u64) {
        let code = self.code;
        let (c, gamma) = (code.frame_len(), self.gamma);
        let base = self.slot_of(f) * c * gamma;
        self.chan[base..base + c * gamma].fill(0.0);
        for &label in &code.lut_v()[(f % code.lambda() as u64) as usize] {
            let start = self.package(f, label, 0);
            let len = code.sub_block(label).num_edges() * gamma;
            self.msg[start..start + len].fill(0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_model::ExponentMatrix;

    fn small_code() -> LdpcccCode {
        let shifts = vec![0, 1, 2, 3, 4, 0, 2, 4, 1, 3, 0, 3, 1, 4, 2, 0, 4, 3, 2, 1, 0, 0, 0, 0];
        let e = ExponentMatrix::new(2, 12, 5, shifts).unwrap();
        LdpcccCode::unwrap_qc(&e).unwrap()
    }

    #[test]
    fn schedule_first_emission() {
        for (m_s, i) in [(3, 2), (3, 20), (1, 1), (2, 5)] {
            let first = (i * (m_s + 1) - 1) as u64;
            for t in 0..first {
                assert_eq!(SlotSchedule::new(m_s, i, t).emitted(), None);
            }
            assert_eq!(SlotSchedule::new(m_s, i, first).emitted(), Some(0));
            assert_eq!(SlotSchedule::new(m_s, i, first + 9).emitted(), Some(9));
        }
    }

    #[test]
    fn capacity_and_channel_frames() {
        let code = small_code();
        let dec = StreamDecoder::new(&code, 3, 2).unwrap();
        assert_eq!(dec.message_capacity(), 3 * 24 * 5);
        assert_eq!(dec.channel_frames(), 6);
        assert!(StreamDecoder::new(&code, 0, 2).is_err());
        assert!(StreamDecoder::new(&code, 1, 0).is_err());
    }

    #[test]
    fn emits_in_order_and_flushes() {
        let code = small_code();
        let (i, gamma) = (2, 3);
        let mut dec = StreamDecoder::new(&code, i, gamma).unwrap();
        let y = vec![1.0; gamma * code.frame_len()];
        let mut got = Vec::new();
        for t in 0..10u64 {
            let out = dec.push_frame(&y, 0.8).unwrap();
            assert_eq!(out.is_some(), t >= 3);
            got.extend(out);
        }
        let tail = dec.flush();
        assert_eq!(tail.len(), 3);
        assert!(tail.iter().all(|f| f.tail));
        got.extend(tail);
        assert_eq!(got.iter().map(|f| f.index).collect::<Vec<_>>(), (0..10).collect::<Vec<_>>());
        assert!(got.iter().all(|f| f.bits.iter().all(|&b| b == 0)));
        assert!(dec.flush().is_empty());
        assert_eq!(dec.time_slot(), 0);
    }

    #[test]
    fn rejects_wrong_length() {
        let code = small_code();
        let mut dec = StreamDecoder::new(&code, 1, 1).unwrap();
        assert!(matches!(dec.push_frame(&[1.0; 3], 1.0), Err(Error::Dimension { .. })));
        assert!(dec.push_frame(&vec![1.0; code.frame_len()], 0.0).is_err());
    }
}
