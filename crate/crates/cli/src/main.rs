use std::fs;
use std::io;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qcldpc::code_model::{load_code, write_alist, write_qc_exponent, CodeFormat, ExponentMatrix};
use qcldpc::harness::{self, Mode, SimulationConfig};

#[derive(Parser)]
#[command(name = "qcldpc", version, about = "QC-LDPC block and convolutional code simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER/FER of the block decoder.
    Block(SimArgs),
    /// BER/FER of the pipelined convolutional decoder.
    Stream(SimArgs),
    /// Throughput for 1 and all workers, gamma 1 and the given gamma (JSON lines).
    Bench {
        #[command(flatten)]
        sim: SimArgs,
        /// Benchmark the stream decoder instead of the block decoder.
        #[arg(long)]
        stream: bool,
    },
    /// Convert between alist and qc-exponent files.
    Convert {
        #[arg(long)]
        code: PathBuf,
        #[arg(long, default_value = "qc")]
        format: CodeFormat,
        /// Target format.
        #[arg(long)]
        to: CodeFormat,
        /// Circulant size, needed to recover exponents from an alist file.
        #[arg(long)]
        circulant: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long, default_value = "qc")]
    format: CodeFormat,
    /// Comma-separated Eb/N0 points in dB.
    #[arg(long, value_delimiter = ',', default_value = "3.2")]
    ebn0: Vec<f64>,
    /// Maximum iterations (block mode).
    #[arg(long, default_value_t = 30)]
    iters: usize,
    /// Processor count I (stream mode).
    #[arg(long, default_value_t = 20)]
    processors: usize,
    #[arg(long, default_value_t = qcldpc::bp::DEFAULT_GAMMA)]
    gamma: usize,
    #[arg(long, default_value_t = harness::DEFAULT_STOP_ERRORS)]
    stop_errors: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; 0 uses every available core.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    early_stop: bool,
    /// CSV file to append to (block/stream) or JSON-lines file (bench).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SimArgs {
    fn config(self, mode: Mode) -> SimulationConfig {
        let iterations = match mode {
            Mode::Block => self.iters,
            Mode::Stream => self.processors,
        };
        SimulationConfig {
            code: self.code,
            format: self.format,
            mode,
            ebn0_db: self.ebn0,
            iterations,
            gamma: self.gamma,
            stop_errors: self.stop_errors,
            max_frames: self.max_frames,
            seed: self.seed,
            workers: if self.workers == 0 { harness::available_cores() } else { self.workers },
            early_stop: self.early_stop,
            out: self.out,
        }
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Block(args) => simulate(args.config(Mode::Block)),
        Command::Stream(args) => simulate(args.config(Mode::Stream)),
        Command::Bench { sim, stream } => {
            let mut cfg = sim.config(if stream { Mode::Stream } else { Mode::Block });
            let out = cfg.out.take();
            let records = harness::bench_throughput(&cfg)?;
            harness::write_json_lines(io::stdout().lock(), &records)?;
            if let Some(path) = out {
                harness::write_json_lines(fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?, &records)?;
            }
            Ok(())
        }
        Command::Convert {
            code,
            format,
            to,
            circulant,
            out,
        } => convert(code, format, to, circulant, out),
    }
}

fn simulate(cfg: SimulationConfig) -> Result<()> {
    let rows = match cfg.mode {
        Mode::Block => harness::run_block_simulation(&cfg),
        Mode::Stream => harness::run_stream_simulation(&cfg),
    }
    .with_context(|| format!("simulating {}", cfg.code.display()))?;
    for row in &rows {
        if row.capped {
            log::warn!(
                "{} dB: frame budget reached with {} of {} errors; statistics are partial",
                row.ebn0_db,
                row.frame_errors,
                cfg.stop_errors
            );
        }
    }
    harness::write_csv(io::stdout().lock(), &rows)?;
    Ok(())
}

fn convert(code: PathBuf, format: CodeFormat, to: CodeFormat, circulant: Option<usize>, out: Option<PathBuf>) -> Result<()> {
    let loaded = load_code(&code, format).with_context(|| format!("loading {}", code.display()))?;
    let text = match to {
        CodeFormat::Alist => write_alist(&loaded.h),
        CodeFormat::QcExponent => {
            let exponent = match (loaded.exponent, circulant) {
                (Some(e), _) => e,
                (None, Some(p)) => ExponentMatrix::from_sparse(&loaded.h, p)?,
                (None, None) => bail!("--circulant is required to convert an alist file to qc-exponent form"),
            };
            write_qc_exponent(&exponent)
        }
    };
    match out {
        Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}
