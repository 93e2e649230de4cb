mod common;

use std::path::{Path, PathBuf};

use qcldpc::channel::{ebn0_to_sigma, fill_received, NoiseSource};
use qcldpc::bp::channel_llr;
use qcldpc::code_model::{write_qc_exponent, CodeFormat};
use qcldpc::harness::{
    append_csv, bench_throughput, run_block_simulation, run_stream_simulation, simulate_stream_point, write_csv, Mode,
    SimRow, SimulationConfig,
};
use qcldpc::ldpccc::LdpcccCode;
use qcldpc::oracle::reference_window_decoder;

fn desk_code_file(dir: &Path, p: usize) -> PathBuf {
    let path = dir.join(format!("desk_{p}.qc"));
    std::fs::write(&path, write_qc_exponent(&common::code_a().rescaled(p).unwrap())).unwrap();
    path
}

fn config(path: PathBuf, mode: Mode) -> SimulationConfig {
    let mut cfg = SimulationConfig::new(path, CodeFormat::QcExponent, mode);
    cfg.iterations = if mode == Mode::Block { 8 } else { 3 };
    cfg.gamma = 4;
    cfg.ebn0_db = vec![1.5, 2.5];
    cfg.stop_errors = 20;
    cfg.max_frames = 2000;
    cfg
}

fn without_timing(rows: &[SimRow]) -> Vec<SimRow> {
    rows.iter()
        .map(|r| SimRow {
            seconds: 0.0,
            frames_per_sec: 0.0,
            info_bits_per_sec: 0.0,
            ..r.clone()
        })
        .collect()
}

#[test]
fn block_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(desk_code_file(dir.path(), 12), Mode::Block);
    let a = run_block_simulation(&cfg).unwrap();
    let b = run_block_simulation(&cfg).unwrap();
    assert_eq!(without_timing(&a), without_timing(&b));
    let mut csv_a = Vec::new();
    let mut csv_b = Vec::new();
    write_csv(&mut csv_a, &without_timing(&a)).unwrap();
    write_csv(&mut csv_b, &without_timing(&b)).unwrap();
    assert_eq!(csv_a, csv_b);
    for row in &a {
        assert_eq!(row.code_id, "desk_12");
        assert!(row.frame_errors >= 20 || row.capped);
        assert!(row.bit_errors <= 24 * 12 * row.frames);
        assert!(row.fer >= row.ber);
    }
}

#[test]
fn noiseless_points_hit_the_frame_cap() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(desk_code_file(dir.path(), 8), Mode::Block);
    cfg.ebn0_db = vec![300.0];
    cfg.max_frames = 40;
    let rows = run_block_simulation(&cfg).unwrap();
    assert_eq!((rows[0].frames, rows[0].frame_errors, rows[0].bit_errors), (40, 0, 0));
    assert!(rows[0].capped);

    let mut cfg = config(desk_code_file(dir.path(), 8), Mode::Stream);
    cfg.ebn0_db = vec![300.0];
    cfg.max_frames = 40;
    let rows = run_stream_simulation(&cfg).unwrap();
    assert_eq!((rows[0].frames, rows[0].frame_errors), (40, 0));
    assert_eq!(rows[0].m_s, Some(3));
    assert_eq!(rows[0].mode, Mode::Stream);
}

#[test]
fn stream_counts_match_reference_decoder() {
    let exponent = common::code_a().rescaled(8).unwrap();
    let code = LdpcccCode::unwrap_qc(&exponent).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(desk_code_file(dir.path(), 8), Mode::Stream);
    cfg.gamma = 1;
    cfg.stop_errors = u64::MAX;
    cfg.max_frames = 30;
    let ebn0 = 1.0;
    let row = simulate_stream_point(&cfg, "desk", &code, ebn0).unwrap();
    assert_eq!(row.frames, 30);

    // The pipeline has read IΛ - 1 frames beyond the last counted one.
    let pushed = 30 + cfg.iterations * code.lambda() - 1;
    let sigma = ebn0_to_sigma(ebn0, code.rate()).unwrap();
    let c = code.frame_len();
    let mut noise = NoiseSource::new(cfg.seed);
    let frames: Vec<Vec<f64>> = (0..pushed)
        .map(|f| {
            let mut y = vec![0.0; c];
            fill_received(&mut noise, sigma, 0, (f * c) as u64, c, &mut y);
            y.iter().map(|&v| channel_llr(v, sigma)).collect()
        })
        .collect();
    let decoded = reference_window_decoder(&code, cfg.iterations, &frames);
    let counted = &decoded[..30];
    let bits: u64 = counted.iter().map(|f| f.bits.iter().filter(|&&b| b == 1).count() as u64).sum();
    let errors = counted.iter().filter(|f| f.bits.contains(&1)).count() as u64;
    assert!(errors > 0, "operating point too clean for a meaningful comparison");
    assert_eq!((row.bit_errors, row.frame_errors), (bits, errors));
}

#[test]
fn fer_does_not_depend_on_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(desk_code_file(dir.path(), 16), Mode::Block);
    cfg.ebn0_db = vec![4.5];
    cfg.stop_errors = u64::MAX;
    cfg.max_frames = 1600;
    let mut fers = Vec::new();
    for gamma in [1, 32] {
        cfg.gamma = gamma;
        let row = &run_block_simulation(&cfg).unwrap()[0];
        assert_eq!(row.frames, 1600);
        fers.push(row.fer);
    }
    // Two-proportion z statistic on independent noise.
    let pooled = (fers[0] + fers[1]) / 2.0;
    let se = (2.0 * pooled * (1.0 - pooled) / 1600.0).sqrt();
    assert!(pooled > 0.02 && pooled < 0.98, "pooled FER {pooled}");
    assert!(((fers[0] - fers[1]) / se).abs() < 4.0, "{fers:?}");
}

#[test]
fn csv_append_writes_one_header() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(desk_code_file(dir.path(), 6), Mode::Block);
    cfg.ebn0_db = vec![2.0];
    cfg.max_frames = 8;
    let out = dir.path().join("out.csv");
    cfg.out = Some(out.clone());
    run_block_simulation(&cfg).unwrap();
    let rows = run_block_simulation(&cfg).unwrap();
    append_csv(&out, &rows).unwrap();
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("code_id,mode,ebn0_db,iters_or_I,gamma,frames,bit_errors,frame_errors,ber,fer,seconds,frames_per_sec,info_bits_per_sec"));
    assert!(lines[1..].iter().all(|l| l.starts_with("desk_6,block,2.0,8,4,8,")));
}

#[test]
fn bench_reports_every_combination() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(desk_code_file(dir.path(), 6), Mode::Block);
    cfg.max_frames = 32;
    cfg.gamma = 8;
    let records = bench_throughput(&cfg).unwrap();
    let cores = qcldpc::harness::available_cores();
    assert_eq!(records.len(), if cores > 1 { 4 } else { 2 });
    assert!(records.iter().any(|r| r.gamma == 1) && records.iter().any(|r| r.gamma == 8));
    for r in &records {
        assert_eq!((r.n, r.edges, r.iterations), (144, 4 * 24 * 6, 8));
        assert!(r.frames >= 32 && r.frames_per_sec > 0.0);
    }
    let mut out = Vec::new();
    qcldpc::harness::write_json_lines(&mut out, &records).unwrap();
    let text = String::from_utf8(out).unwrap();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["code_id"], "desk_6");
    }
}

#[test]
fn invalid_configs_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = desk_code_file(dir.path(), 6);
    let mut cfg = config(path.clone(), Mode::Block);
    cfg.ebn0_db.clear();
    assert!(run_block_simulation(&cfg).is_err());
    let alist = dir.path().join("a.alist");
    let h = common::code_a().rescaled(6).unwrap().expand();
    std::fs::write(&alist, qcldpc::code_model::write_alist(&h)).unwrap();
    let mut cfg = config(alist, Mode::Stream);
    cfg.format = CodeFormat::Alist;
    assert!(run_stream_simulation(&cfg).is_err());
}
