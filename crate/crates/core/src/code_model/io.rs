//! Code file formats.
//!
//! * `alist`: `N M`, `max_col_wt max_row_wt`, the N column weights, the M row
//!   weights, then one line per variable with its 1-based check indices and one
//!   line per check with its 1-based variable indices (zero-padded to the
//!   maximum weight).
//! * `qc-exponent`: `J L p`, then `J` lines of `L` shifts in `-1..p`. Lines
//!   starting with `#` are comments.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{ExponentMatrix, SparseParityCheck};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeFormat {
    Alist,
    QcExponent,
}

impl FromStr for CodeFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alist" => Ok(Self::Alist),
            "qc" | "qc-exponent" => Ok(Self::QcExponent),
            other => Err(Error::InvalidParameter(format!("unknown code format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedCode {
    pub h: SparseParityCheck,
    /// Present for `qc-exponent` input.
    pub exponent: Option<ExponentMatrix>,
}

pub fn load_code(path: impl AsRef<Path>, format: CodeFormat) -> Result<LoadedCode> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    match format {
        CodeFormat::Alist => Ok(LoadedCode {
            h: parse_alist(&text, path)?,
            exponent: None,
        }),
        CodeFormat::QcExponent => {
            let e = parse_qc_exponent(&text, path)?;
            Ok(LoadedCode {
                h: e.expand(),
                exponent: Some(e),
            })
        }
    }
}

struct Lines<'a> {
    path: &'a Path,
    inner: Box<dyn Iterator<Item = (usize, &'a str)> + 'a>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, path: &'a Path, comments: bool) -> Self {
        let inner = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(move |(_, l)| !l.is_empty() && !(comments && l.starts_with('#')));
        Self {
            path,
            inner: Box::new(inner),
            last: 0,
        }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: PathBuf::from(self.path),
            line,
            msg: msg.into(),
        }
    }

    /// Next non-empty line parsed as integers.
    fn ints<T: FromStr>(&mut self, what: &str) -> Result<(usize, Vec<T>)> {
        let Some((line, text)) = self.inner.next() else {
            return Err(self.err(self.last + 1, format!("unexpected end of file, expected {what}")));
        };
        self.last = line;
        let values = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<T>()
                    .map_err(|_| self.err(line, format!("invalid integer '{tok}' in {what}")))
            })
            .collect::<Result<Vec<T>>>()?;
        Ok((line, values))
    }

    fn exact<T: FromStr>(&mut self, count: usize, what: &str) -> Result<(usize, Vec<T>)> {
        let (line, v) = self.ints(what)?;
        if v.len() != count {
            return Err(self.err(line, format!("expected {count} values in {what}, found {}", v.len())));
        }
        Ok((line, v))
    }

    fn expect_end(&mut self) -> Result<()> {
        match self.inner.next() {
            Some((line, _)) => Err(self.err(line, "unexpected trailing content")),
            None => Ok(()),
        }
    }
}

pub fn parse_qc_exponent(text: &str, path: &Path) -> Result<ExponentMatrix> {
    let mut lines = Lines::new(text, path, true);
    let (hline, header) = lines.exact::<usize>(3, "header 'J L p'")?;
    let (j, l, p) = (header[0], header[1], header[2]);
    if j == 0 || l == 0 || p == 0 {
        return Err(lines.err(hline, "J, L and p must be positive"));
    }
    if j > l {
        return Err(lines.err(hline, format!("J = {j} exceeds L = {l}")));
    }
    let mut shifts = Vec::with_capacity(j * l);
    for row in 0..j {
        let (line, values) = lines.exact::<i64>(l, &format!("block row {row}"))?;
        for (col, &s) in values.iter().enumerate() {
            if s < -1 || s >= p as i64 {
                return Err(lines.err(
                    line,
                    format!("shift {s} at block ({row}, {col}) out of range -1..{p}"),
                ));
            }
        }
        shifts.extend(values);
    }
    lines.expect_end()?;
    ExponentMatrix::new(j, l, p, shifts)
}

pub fn parse_alist(text: &str, path: &Path) -> Result<SparseParityCheck> {
    let mut lines = Lines::new(text, path, false);
    let (hline, header) = lines.exact::<usize>(2, "header 'N M'")?;
    let (n, m) = (header[0], header[1]);
    if n == 0 {
        return Err(lines.err(hline, "N must be positive"));
    }
    let (_, maxw) = lines.exact::<usize>(2, "maximum weights")?;
    let (cline, col_w) = lines.exact::<usize>(n, "column weights")?;
    let (rline, row_w) = lines.exact::<usize>(m, "row weights")?;
    if col_w.iter().any(|&w| w > maxw[0]) {
        return Err(lines.err(cline, "column weight exceeds declared maximum"));
    }
    if row_w.iter().any(|&w| w > maxw[1]) {
        return Err(lines.err(rline, "row weight exceeds declared maximum"));
    }
    let col_total: usize = col_w.iter().sum();
    let row_total: usize = row_w.iter().sum();
    if col_total != row_total {
        return Err(lines.err(
            rline,
            format!("edge count mismatch: column weights sum to {col_total}, row weights to {row_total}"),
        ));
    }

    let mut read_lists = |count: usize, weights: &[usize], bound: usize, what: &str| -> Result<Vec<(usize, Vec<usize>)>> {
        let mut out = Vec::with_capacity(count);
        for (idx, &w) in weights.iter().enumerate() {
            let (line, raw) = lines.ints::<usize>(&format!("{what} {idx} list"))?;
            let entries: Vec<usize> = raw.into_iter().filter(|&x| x != 0).collect();
            if entries.len() != w {
                return Err(lines.err(
                    line,
                    format!("edge count mismatch: {what} {idx} declares weight {w} but lists {}", entries.len()),
                ));
            }
            let mut zero_based = Vec::with_capacity(w);
            for x in entries {
                if x > bound {
                    return Err(lines.err(line, format!("index {x} out of range 1..={bound}")));
                }
                if zero_based.contains(&(x - 1)) {
                    return Err(lines.err(line, format!("duplicate index {x} in {what} {idx}")));
                }
                zero_based.push(x - 1);
            }
            zero_based.sort_unstable();
            out.push((line, zero_based));
        }
        Ok(out)
    };
    let var_lists = read_lists(n, &col_w, m, "variable")?;
    let check_lists = read_lists(m, &row_w, n, "check")?;

    let rows: Vec<Vec<usize>> = check_lists.iter().map(|(_, l)| l.clone()).collect();
    let h = SparseParityCheck::new(n, rows)?;
    for (var, (cols, (line, listed))) in h.columns().iter().zip(&var_lists).enumerate() {
        if cols != listed {
            return Err(lines.err(*line, format!("variable {var} list disagrees with the check lists")));
        }
    }
    lines.expect_end()?;
    Ok(h)
}

pub fn write_alist(h: &SparseParityCheck) -> String {
    let cols = h.columns();
    let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = h.rows().iter().map(Vec::len).max().unwrap_or(0);
    let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");

    let mut out = String::new();
    let _ = writeln!(out, "{} {}", h.num_vars(), h.num_checks());
    let _ = writeln!(out, "{max_col} {max_row}");
    let _ = writeln!(out, "{}", join(&mut cols.iter().map(Vec::len)));
    let _ = writeln!(out, "{}", join(&mut h.rows().iter().map(Vec::len)));
    for col in &cols {
        let padded = col.iter().map(|&m| m + 1).chain(std::iter::repeat(0)).take(max_col.max(1));
        let _ = writeln!(out, "{}", join(&mut padded.into_iter()));
    }
    for row in h.rows() {
        let padded = row.iter().map(|&n| n + 1).chain(std::iter::repeat(0)).take(max_row.max(1));
        let _ = writeln!(out, "{}", join(&mut padded.into_iter()));
    }
    out
}

pub fn write_qc_exponent(e: &ExponentMatrix) -> String {
    let mut out = format!("{} {} {}\n", e.block_rows(), e.block_cols(), e.circulant());
    for row in e.raw_shifts().chunks(e.block_cols()) {
        let line: Vec<String> = row.iter().map(|s| s.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::code_model::fixtures::*;

    fn p() -> &'static Path {
        Path::new("test")
    }

    #[test]
    fn qc_identity() {
        let e = parse_qc_exponent("1 1 3\n0\n", p()).unwrap();
        assert_eq!(e.expand().rows(), &[vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn qc_comments_and_errors() {
        let e = parse_qc_exponent("# code\n2 3 4\n# row 0\n0 1 -1\n3 2 0\n", p()).unwrap();
        assert_eq!(e.shift(0, 2), None);
        assert_eq!(e.shift(1, 0), Some(3));

        match parse_qc_exponent("1 2 4\n0 4\n", p()).unwrap_err() {
            Error::Parse { line, msg, .. } => {
                assert_eq!(line, 2);
                assert!(msg.contains("(0, 1)"), "{msg}");
            }
            e => panic!("unexpected {e}"),
        }
        assert!(matches!(parse_qc_exponent("1 2\n", p()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_qc_exponent("1 2 4\n0\n", p()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_qc_exponent("1 1 4\n0\n1\n", p()), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn alist_small_example() {
        let text = write_alist(&dense(&SMALL_4X8));
        let h = parse_alist(&text, p()).unwrap();
        assert_eq!(h.edge_count(), 16);
        assert!(h.columns().iter().all(|c| c.len() == 2));
        assert_eq!(h, dense(&SMALL_4X8));
    }

    #[test]
    fn alist_edge_count_mismatch() {
        // Column weights sum to 3, row weights to 2.
        let bad = "3 1\n1 2\n1 1 1\n2\n1\n1\n1\n1 2\n";
        match parse_alist(bad, p()).unwrap_err() {
            Error::Parse { line, msg, .. } => {
                assert_eq!(line, 4);
                assert!(msg.contains("edge count mismatch"), "{msg}");
            }
            e => panic!("unexpected {e}"),
        }
        // Declared weight disagrees with the listed entries.
        let bad = "2 1\n1 2\n1 1\n2\n1\n1\n1 0\n";
        assert!(matches!(parse_alist(bad, p()), Err(Error::Parse { line: 7, .. })));
        // Variable lists disagree with the check lists.
        let bad = "2 2\n1 1\n1 1\n1 1\n1\n2\n2\n1\n";
        assert!(matches!(parse_alist(bad, p()), Err(Error::Parse { line: 5, .. })));
    }

    #[test]
    fn alist_rejects_duplicates() {
        let bad = "2 1\n1 2\n1 1\n2\n1\n1\n1 1\n";
        let err = parse_alist(bad, p()).unwrap_err();
        assert!(err.to_string().contains("duplicate") || err.to_string().contains("mismatch"));
    }

    #[test]
    fn load_from_files() {
        let dir = tempfile::tempdir().unwrap();
        let qc = dir.path().join("id.qc");
        std::fs::write(&qc, "1 1 3\n0\n").unwrap();
        let loaded = load_code(&qc, CodeFormat::QcExponent).unwrap();
        assert!(loaded.exponent.is_some());
        assert_eq!(loaded.h.num_vars(), 3);

        let al = dir.path().join("irr.alist");
        std::fs::write(&al, write_alist(&dense(&IRREGULAR_5X10))).unwrap();
        let loaded = load_code(&al, CodeFormat::Alist).unwrap();
        assert!(loaded.exponent.is_none());
        assert_eq!(loaded.h.edge_count(), 28);
    }

    fn arb_exponent() -> impl Strategy<Value = ExponentMatrix> {
        (1usize..4, 0usize..4, 1usize..9).prop_flat_map(|(j, extra, circ)| {
            let l = j + extra;
            proptest::collection::vec(-1i64..circ as i64, j * l)
                .prop_map(move |s| ExponentMatrix::new(j, l, circ, s).unwrap())
        })
    }

    proptest! {
        #[test]
        fn save_load_round_trip(e in arb_exponent()) {
            let once = parse_qc_exponent(&write_qc_exponent(&e), p()).unwrap();
            prop_assert_eq!(&once, &e);
            let h = e.expand();
            let via_alist = parse_alist(&write_alist(&h), p()).unwrap();
            prop_assert_eq!(&via_alist, &h);
            prop_assert_eq!(write_alist(&via_alist), write_alist(&h));
        }
    }
}
