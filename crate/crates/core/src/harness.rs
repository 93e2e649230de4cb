//! Monte-Carlo BER/FER simulation and throughput benchmarks.
//!
//! Every point transmits the all-zero codeword, so any one in a hard
//! decision is a bit error and a frame with at least one is a frame error.
//! Work is split into batches of `gamma` lanes; batch `b` (or stream `s`)
//! reads noise streams `b * gamma + lane`, whichever worker picks it up.
//! With a single worker, equal configurations give identical counts.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;

use crate::bp::BatchDecoder;
use crate::channel::{ebn0_to_sigma, fill_received, NoiseSource};
use crate::code_model::{load_code, CodeFormat, EdgeLayout, ExponentMatrix, SparseParityCheck};
use crate::error::{Error, Result};
use crate::ldpccc::{LdpcccCode, StreamDecoder};

/// Default number of frame errors that ends a point.
pub const DEFAULT_STOP_ERRORS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Block,
    Stream,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Block => "block",
            Mode::Stream => "stream",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub code: PathBuf,
    pub format: CodeFormat,
    pub mode: Mode,
    pub ebn0_db: Vec<f64>,
    /// Iteration cap in block mode, processor count `I` in stream mode.
    pub iterations: usize,
    pub gamma: usize,
    pub stop_errors: u64,
    /// Frame budget per point; the point ends once it is reached.
    pub max_frames: u64,
    pub seed: u64,
    pub workers: usize,
    pub early_stop: bool,
    pub out: Option<PathBuf>,
}

impl SimulationConfig {
    pub fn new(code: impl Into<PathBuf>, format: CodeFormat, mode: Mode) -> Self {
        Self {
            code: code.into(),
            format,
            mode,
            ebn0_db: vec![3.2],
            iterations: 30,
            gamma: crate::bp::DEFAULT_GAMMA,
            stop_errors: DEFAULT_STOP_ERRORS,
            max_frames: 1_000_000,
            seed: 1,
            workers: 1,
            early_stop: false,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if self.ebn0_db.is_empty() {
            return bad("at least one Eb/N0 point is required");
        }
        if self.stop_errors == 0 {
            return bad("the error target must be at least 1");
        }
        if self.iterations == 0 || self.gamma == 0 || self.workers == 0 || self.max_frames == 0 {
            return bad("iterations, gamma, workers and max frames must be positive");
        }
        Ok(())
    }

    /// File stem of the code path.
    pub fn code_id(&self) -> String {
        self.code.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    }
}

/// One result row. The first thirteen columns are the report format;
/// `m_s` is filled in stream mode and `capped` marks points that hit the
/// frame budget before the error target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRow {
    pub code_id: String,
    pub mode: Mode,
    pub ebn0_db: f64,
    pub iters_or_i: usize,
    pub gamma: usize,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub seconds: f64,
    pub frames_per_sec: f64,
    pub info_bits_per_sec: f64,
    pub m_s: Option<usize>,
    pub capped: bool,
}

const HEADER: [&str; 15] = [
    "code_id",
    "mode",
    "ebn0_db",
    "iters_or_I",
    "gamma",
    "frames",
    "bit_errors",
    "frame_errors",
    "ber",
    "fer",
    "seconds",
    "frames_per_sec",
    "info_bits_per_sec",
    "m_s",
    "capped",
];

/// Writes rows as CSV, with a header line.
pub fn write_csv<W: Write>(out: W, rows: &[SimRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Appends rows to a CSV file, writing the header only into an empty file.
pub fn append_csv(path: &Path, rows: &[SimRow]) -> Result<()> {
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let fresh = file.metadata()?.len() == 0;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if fresh {
        w.write_record(HEADER)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    frames: u64,
    bit_errors: u64,
    frame_errors: u64,
}

/// Shared counters and the stopping rule of one point.
struct Progress {
    tally: Mutex<Tally>,
    done: AtomicBool,
    stop_errors: u64,
    max_frames: u64,
}

impl Progress {
    fn new(stop_errors: u64, max_frames: u64) -> Self {
        Self {
            tally: Mutex::new(Tally::default()),
            done: AtomicBool::new(false),
            stop_errors,
            max_frames,
        }
    }

    fn add(&self, frames: u64, bit_errors: u64, frame_errors: u64) {
        let mut t = self.tally.lock().expect("progress lock");
        t.frames += frames;
        t.bit_errors += bit_errors;
        t.frame_errors += frame_errors;
        if t.frame_errors >= self.stop_errors || t.frames >= self.max_frames {
            self.done.store(true, Ordering::Relaxed);
        }
    }

    fn done(&self) -> bool {
        self.done.load(Ordering::Relaxed)
    }

    fn into_tally(self) -> Tally {
        self.tally.into_inner().expect("progress lock")
    }
}

struct PointInfo<'a> {
    code_id: &'a str,
    mode: Mode,
    ebn0_db: f64,
    iterations: usize,
    gamma: usize,
    frame_bits: usize,
    info_bits: usize,
    m_s: Option<usize>,
    stop_errors: u64,
}

fn make_row(info: &PointInfo<'_>, tally: Tally, seconds: f64) -> SimRow {
    let frames = tally.frames;
    let rate = |x: f64| if seconds > 0.0 { x / seconds } else { 0.0 };
    SimRow {
        code_id: info.code_id.to_owned(),
        mode: info.mode,
        ebn0_db: info.ebn0_db,
        iters_or_i: info.iterations,
        gamma: info.gamma,
        frames,
        bit_errors: tally.bit_errors,
        frame_errors: tally.frame_errors,
        ber: if frames > 0 { tally.bit_errors as f64 / (frames as f64 * info.frame_bits as f64) } else { 0.0 },
        fer: if frames > 0 { tally.frame_errors as f64 / frames as f64 } else { 0.0 },
        seconds,
        frames_per_sec: rate(frames as f64),
        info_bits_per_sec: rate(frames as f64 * info.info_bits as f64),
        m_s: info.m_s,
        capped: tally.frame_errors < info.stop_errors,
    }
}

/// A block code prepared for simulation.
#[derive(Debug, Clone)]
pub struct BlockTarget {
    pub layout: EdgeLayout,
    /// Design rate `1 - M/N`.
    pub rate: f64,
    pub info_bits: usize,
}

impl BlockTarget {
    pub fn new(h: &SparseParityCheck) -> Result<Self> {
        let (n, m) = (h.num_vars(), h.num_checks());
        if m >= n {
            return Err(Error::InvalidCode(format!("{m} checks on {n} variables leave no information bits")));
        }
        Ok(Self {
            layout: EdgeLayout::new(h),
            rate: 1.0 - m as f64 / n as f64,
            info_bits: n - m,
        })
    }
}

/// Runs every configured point in block mode and appends to `cfg.out`.
pub fn run_block_simulation(cfg: &SimulationConfig) -> Result<Vec<SimRow>> {
    cfg.validate()?;
    let loaded = load_code(&cfg.code, cfg.format)?;
    let target = BlockTarget::new(&loaded.h)?;
    let id = cfg.code_id();
    let mut rows = Vec::new();
    for &ebn0 in &cfg.ebn0_db {
        let row = simulate_block_point(cfg, &id, &target, ebn0)?;
        log::info!("{id} block {ebn0} dB: {} errors in {} frames", row.frame_errors, row.frames);
        rows.push(row);
    }
    if let Some(out) = &cfg.out {
        append_csv(out, &rows)?;
    }
    Ok(rows)
}

/// One block-mode point.
pub fn simulate_block_point(cfg: &SimulationConfig, code_id: &str, target: &BlockTarget, ebn0_db: f64) -> Result<SimRow> {
    cfg.validate()?;
    let sigma = ebn0_to_sigma(ebn0_db, target.rate)?;
    let n = target.layout.num_vars();
    let gamma = cfg.gamma;
    let progress = Progress::new(cfg.stop_errors, cfg.max_frames);
    let next_batch = AtomicU64::new(0);
    let start = Instant::now();

    let worker = || -> Result<()> {
        let mut decoder = BatchDecoder::new(&target.layout, gamma)?;
        let mut noise = NoiseSource::new(cfg.seed);
        let mut y = vec![0.0; gamma * n];
        while !progress.done() {
            let batch = next_batch.fetch_add(1, Ordering::Relaxed);
            fill_received(&mut noise, sigma, batch * gamma as u64, 0, n, &mut y);
            let result = decoder.decode(&y, sigma, cfg.iterations, cfg.early_stop)?;
            let (mut bits, mut frames) = (0, 0);
            for lane in 0..gamma {
                let w = result.lane_weight(lane) as u64;
                bits += w;
                frames += u64::from(w > 0);
            }
            progress.add(gamma as u64, bits, frames);
        }
        Ok(())
    };
    run_workers(cfg.workers, &worker)?;

    let info = PointInfo {
        code_id,
        mode: Mode::Block,
        ebn0_db,
        iterations: cfg.iterations,
        gamma,
        frame_bits: n,
        info_bits: target.info_bits,
        m_s: None,
        stop_errors: cfg.stop_errors,
    };
    Ok(make_row(&info, progress.into_tally(), start.elapsed().as_secs_f64()))
}

/// Runs every configured point in stream mode and appends to `cfg.out`.
pub fn run_stream_simulation(cfg: &SimulationConfig) -> Result<Vec<SimRow>> {
    cfg.validate()?;
    let loaded = load_code(&cfg.code, cfg.format)?;
    let exponent = stream_exponent(loaded.exponent, &loaded.h)?;
    let code = LdpcccCode::unwrap_qc(&exponent)?;
    let id = cfg.code_id();
    let mut rows = Vec::new();
    for &ebn0 in &cfg.ebn0_db {
        let row = simulate_stream_point(cfg, &id, &code, ebn0)?;
        log::info!("{id} stream {ebn0} dB: {} errors in {} frames", row.frame_errors, row.frames);
        rows.push(row);
    }
    if let Some(out) = &cfg.out {
        append_csv(out, &rows)?;
    }
    Ok(rows)
}

fn stream_exponent(exponent: Option<ExponentMatrix>, h: &SparseParityCheck) -> Result<ExponentMatrix> {
    match exponent {
        Some(e) => Ok(e),
        None => Err(Error::InvalidCode(format!(
            "stream mode needs a qc-exponent code, got a {}x{} sparse matrix",
            h.num_checks(),
            h.num_vars()
        ))),
    }
}

/// One stream-mode point. Each worker decodes its own continuous stream of
/// `gamma` lanes; stream `s` reads noise streams `s * gamma + lane`, frame
/// `f` at positions `f c ..`. Only frames leaving the decoder are counted.
pub fn simulate_stream_point(cfg: &SimulationConfig, code_id: &str, code: &LdpcccCode, ebn0_db: f64) -> Result<SimRow> {
    cfg.validate()?;
    let sigma = ebn0_to_sigma(ebn0_db, code.rate())?;
    let c = code.frame_len();
    let gamma = cfg.gamma;
    let progress = Progress::new(cfg.stop_errors, cfg.max_frames);
    let next_stream = AtomicU64::new(0);
    let start = Instant::now();

    let worker = || -> Result<()> {
        let stream = next_stream.fetch_add(1, Ordering::Relaxed);
        let mut decoder = StreamDecoder::new(code, cfg.iterations, gamma)?;
        let mut noise = NoiseSource::new(cfg.seed);
        let mut y = vec![0.0; gamma * c];
        let mut f = 0u64;
        while !progress.done() {
            fill_received(&mut noise, sigma, stream * gamma as u64, f * c as u64, c, &mut y);
            f += 1;
            if let Some(frame) = decoder.push_frame(&y, sigma)? {
                let (mut bits, mut frames) = (0, 0);
                for lane in 0..gamma {
                    let w = frame.lane_errors(lane) as u64;
                    bits += w;
                    frames += u64::from(w > 0);
                }
                progress.add(gamma as u64, bits, frames);
            }
        }
        Ok(())
    };
    run_workers(cfg.workers, &worker)?;

    let info = PointInfo {
        code_id,
        mode: Mode::Stream,
        ebn0_db,
        iterations: cfg.iterations,
        gamma,
        frame_bits: c,
        info_bits: code.info_len(),
        m_s: Some(code.memory()),
        stop_errors: cfg.stop_errors,
    };
    Ok(make_row(&info, progress.into_tally(), start.elapsed().as_secs_f64()))
}

fn run_workers(workers: usize, job: &(dyn Fn() -> Result<()> + Sync)) -> Result<()> {
    if workers == 1 {
        return job();
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers).map(|_| s.spawn(job)).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation worker panicked"))
            .collect::<Result<Vec<()>>>()
    })?;
    Ok(())
}

/// One benchmark measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub code_id: String,
    pub mode: Mode,
    pub n: usize,
    pub edges: usize,
    pub iterations: usize,
    pub workers: usize,
    pub gamma: usize,
    pub frames: u64,
    pub seconds: f64,
    pub frames_per_sec: f64,
    pub info_bits_per_sec: f64,
    /// Wall time per decoded codeword.
    pub seconds_per_frame: f64,
}

/// Hardware threads, or 1 when unknown.
pub fn available_cores() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Times a fixed budget of `cfg.max_frames` frames at the first `E_b/N_0`
/// point for worker counts `{1, cores}` and batch widths `{1, cfg.gamma}`.
/// The error target is ignored.
pub fn bench_throughput(cfg: &SimulationConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    let loaded = load_code(&cfg.code, cfg.format)?;
    let id = cfg.code_id();
    let mut workers = vec![1, available_cores()];
    workers.dedup();
    let mut gammas = vec![1, cfg.gamma];
    gammas.dedup();
    let mut out = Vec::new();
    match cfg.mode {
        Mode::Block => {
            let target = BlockTarget::new(&loaded.h)?;
            for &w in &workers {
                for &g in &gammas {
                    let run = bench_config(cfg, w, g);
                    let row = simulate_block_point(&run, &id, &target, cfg.ebn0_db[0])?;
                    out.push(bench_record(&row, &id, loaded.h.num_vars(), target.layout.num_edges(), w));
                }
            }
        }
        Mode::Stream => {
            let exponent = stream_exponent(loaded.exponent, &loaded.h)?;
            let code = LdpcccCode::unwrap_qc(&exponent)?;
            for &w in &workers {
                for &g in &gammas {
                    let run = bench_config(cfg, w, g);
                    let row = simulate_stream_point(&run, &id, &code, cfg.ebn0_db[0])?;
                    out.push(bench_record(&row, &id, code.frame_len(), code.edges(), w));
                }
            }
        }
    }
    Ok(out)
}

fn bench_config(cfg: &SimulationConfig, workers: usize, gamma: usize) -> SimulationConfig {
    SimulationConfig {
        workers,
        gamma,
        stop_errors: u64::MAX,
        ..cfg.clone()
    }
}

fn bench_record(row: &SimRow, id: &str, n: usize, edges: usize, workers: usize) -> BenchRecord {
    BenchRecord {
        code_id: id.to_owned(),
        mode: row.mode,
        n,
        edges,
        iterations: row.iters_or_i,
        workers,
        gamma: row.gamma,
        frames: row.frames,
        seconds: row.seconds,
        frames_per_sec: row.frames_per_sec,
        info_bits_per_sec: row.info_bits_per_sec,
        seconds_per_frame: if row.frames > 0 { row.seconds / row.frames as f64 } else { 0.0 },
    }
}

/// Serializes records as JSON lines.
pub fn write_json_lines<W: Write>(mut out: W, records: &[BenchRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
