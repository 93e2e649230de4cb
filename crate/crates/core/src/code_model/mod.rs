//! Parity-check matrix representations.
//!
//! A quasi-cyclic code is described by an [`ExponentMatrix`]: a `J x L` grid
//! of circulant shift numbers, each standing for a `p x p` cyclically shifted
//! identity (`-1` is the all-zero block). Every decoder works on the expanded
//! [`SparseParityCheck`] through the shared [`EdgeLayout`].

mod io;
mod layout;

pub use io::{load_code, parse_alist, parse_qc_exponent, write_alist, write_qc_exponent, CodeFormat, LoadedCode};
pub use layout::{CheckIndex, EdgeLayout};

use serde::Serialize;

use crate::error::{Error, Result};

/// Grid of circulant shift numbers defining a QC-LDPC code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentMatrix {
    block_rows: usize,
    block_cols: usize,
    circulant: usize,
    shifts: Vec<i64>,
}

impl ExponentMatrix {
    /// `shifts` is row-major, `block_rows * block_cols` entries.
    pub fn new(block_rows: usize, block_cols: usize, circulant: usize, shifts: Vec<i64>) -> Result<Self> {
        if circulant == 0 {
            return Err(Error::InvalidCode("circulant size must be positive".into()));
        }
        if block_rows == 0 || block_cols == 0 {
            return Err(Error::InvalidCode("exponent matrix must have at least one block".into()));
        }
        if block_rows > block_cols {
            return Err(Error::InvalidCode(format!(
                "more block rows than block columns ({block_rows} > {block_cols})"
            )));
        }
        if shifts.len() != block_rows * block_cols {
            return Err(Error::Dimension {
                expected: block_rows * block_cols,
                got: shifts.len(),
            });
        }
        for (idx, &shift) in shifts.iter().enumerate() {
            if shift < -1 || shift >= circulant as i64 {
                return Err(Error::ShiftOutOfRange {
                    row: idx / block_cols,
                    col: idx % block_cols,
                    shift,
                    circulant,
                });
            }
        }
        Ok(Self {
            block_rows,
            block_cols,
            circulant,
            shifts,
        })
    }

    /// Number of block rows `J`.
    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    /// Number of block columns `L`.
    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    /// Circulant size `p`.
    pub fn circulant(&self) -> usize {
        self.circulant
    }

    /// Shift of block `(row, col)`, `None` for the all-zero block.
    pub fn shift(&self, row: usize, col: usize) -> Option<usize> {
        let s = self.shifts[row * self.block_cols + col];
        (s >= 0).then_some(s as usize)
    }

    pub fn raw_shifts(&self) -> &[i64] {
        &self.shifts
    }

    /// Number of ones in the expanded matrix.
    pub fn edge_count(&self) -> usize {
        self.shifts.iter().filter(|&&s| s >= 0).count() * self.circulant
    }

    /// Same shift pattern on a different circulant size, shifts taken modulo
    /// the new size. Used to get desk-scale versions of large codes.
    pub fn rescaled(&self, circulant: usize) -> Result<Self> {
        let shifts = self
            .shifts
            .iter()
            .map(|&s| if s < 0 { -1 } else { s % circulant as i64 })
            .collect();
        Self::new(self.block_rows, self.block_cols, circulant, shifts)
    }

    /// Expands every circulant into its `p x p` permutation block.
    ///
    /// Row `i` of a block with shift `s` has its single one in column
    /// `(i + s) mod p`, i.e. the identity with columns rotated right `s` times.
    pub fn expand(&self) -> SparseParityCheck {
        let p = self.circulant;
        let mut rows = Vec::with_capacity(self.block_rows * p);
        for j in 0..self.block_rows {
            for i in 0..p {
                let row = (0..self.block_cols)
                    .filter_map(|l| self.shift(j, l).map(|s| l * p + (i + s) % p))
                    .collect();
                rows.push(row);
            }
        }
        SparseParityCheck {
            num_vars: self.block_cols * p,
            rows,
        }
    }

    /// Recovers the exponent form of a sparse matrix whose `p x p` blocks are
    /// all either zero or a circulant permutation.
    pub fn from_sparse(h: &SparseParityCheck, circulant: usize) -> Result<Self> {
        let p = circulant;
        if p == 0 || !h.num_checks().is_multiple_of(p) || !h.num_vars().is_multiple_of(p) {
            return Err(Error::InvalidCode(format!(
                "{}x{} matrix is not tiled by {p}x{p} blocks",
                h.num_checks(),
                h.num_vars()
            )));
        }
        let (block_rows, block_cols) = (h.num_checks() / p, h.num_vars() / p);
        let mut shifts = vec![-1i64; block_rows * block_cols];
        for j in 0..block_rows {
            for l in 0..block_cols {
                // The first row fixes the candidate shift; every other row must agree.
                let first: Vec<usize> = block_entries(h, j * p, l, p);
                let shift = match first.as_slice() {
                    [] => -1,
                    [c] => *c as i64,
                    _ => {
                        return Err(Error::InvalidCode(format!(
                            "block ({j}, {l}) is not a circulant permutation"
                        )))
                    }
                };
                for i in 1..p {
                    let entries = block_entries(h, j * p + i, l, p);
                    let expected: Vec<usize> = if shift < 0 {
                        vec![]
                    } else {
                        vec![(i + shift as usize) % p]
                    };
                    if entries != expected {
                        return Err(Error::InvalidCode(format!(
                            "block ({j}, {l}) is not a circulant permutation"
                        )));
                    }
                }
                shifts[j * block_cols + l] = shift;
            }
        }
        Self::new(block_rows, block_cols, p, shifts)
    }
}

fn block_entries(h: &SparseParityCheck, row: usize, block_col: usize, p: usize) -> Vec<usize> {
    h.row(row)
        .iter()
        .filter(|&&n| n / p == block_col)
        .map(|&n| n % p)
        .collect()
}

/// Sparse parity-check matrix stored as the ordered variable list of each check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseParityCheck {
    num_vars: usize,
    rows: Vec<Vec<usize>>,
}

impl SparseParityCheck {
    pub fn new(num_vars: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        for (m, row) in rows.iter().enumerate() {
            for (k, &n) in row.iter().enumerate() {
                if n >= num_vars {
                    return Err(Error::InvalidCode(format!(
                        "check {m} references variable {n}, but there are only {num_vars}"
                    )));
                }
                if row[..k].contains(&n) {
                    return Err(Error::InvalidCode(format!(
                        "check {m} lists variable {n} more than once"
                    )));
                }
            }
        }
        Ok(Self { num_vars, rows })
    }

    /// Builds a matrix from 0/1 rows.
    pub fn from_dense(dense: &[&[u8]]) -> Result<Self> {
        let num_vars = dense.first().map_or(0, |r| r.len());
        let mut rows = Vec::with_capacity(dense.len());
        for (m, r) in dense.iter().enumerate() {
            if r.len() != num_vars {
                return Err(Error::InvalidCode(format!("row {m} has {} columns, expected {num_vars}", r.len())));
            }
            rows.push(r.iter().enumerate().filter(|(_, &b)| b != 0).map(|(n, _)| n).collect());
        }
        Self::new(num_vars, rows)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_checks(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, m: usize) -> &[usize] {
        &self.rows[m]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Check indices of every variable, in increasing order.
    pub fn columns(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.num_vars];
        for (m, row) in self.rows.iter().enumerate() {
            for &n in row {
                cols[n].push(m);
            }
        }
        cols
    }

    /// True when `bits` (one byte per variable, 0 or 1) satisfies every check.
    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        self.rows
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &n| acc ^ (bits[n] & 1)) == 0)
    }

    pub fn stats(&self) -> CodeStats {
        let row_weights: Vec<usize> = self.rows.iter().map(Vec::len).collect();
        let col_weights: Vec<usize> = self.columns().iter().map(Vec::len).collect();
        let min_max = |w: &[usize]| {
            (
                w.iter().copied().min().unwrap_or(0),
                w.iter().copied().max().unwrap_or(0),
            )
        };
        let (min_row_weight, max_row_weight) = min_max(&row_weights);
        let (min_col_weight, max_col_weight) = min_max(&col_weights);
        let rate_lower_bound = if self.num_vars == 0 {
            0.0
        } else {
            1.0 - self.num_checks() as f64 / self.num_vars as f64
        };
        CodeStats {
            num_vars: self.num_vars,
            num_checks: self.num_checks(),
            edges: self.edge_count(),
            min_row_weight,
            max_row_weight,
            min_col_weight,
            max_col_weight,
            regular: min_row_weight == max_row_weight && min_col_weight == max_col_weight,
            degenerate: min_row_weight == 0 || min_col_weight == 0,
            rate_lower_bound,
        }
    }
}

/// Summary of a parity-check matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodeStats {
    pub num_vars: usize,
    pub num_checks: usize,
    pub edges: usize,
    pub min_row_weight: usize,
    pub max_row_weight: usize,
    pub min_col_weight: usize,
    pub max_col_weight: usize,
    pub regular: bool,
    /// Some check or variable has no edges.
    pub degenerate: bool,
    /// `1 - M/N`; equality when the matrix has full rank.
    pub rate_lower_bound: f64,
}
