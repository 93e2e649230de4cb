use crate::code_model::ExponentMatrix;
use crate::error::{Error, Result};

/// One `(pJ/Λ) x (pL/Λ)` sub-block of the base matrix, with its edges
/// numbered row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubBlock {
    shifts: Vec<i64>,
    check_ptr: Vec<usize>,
    edge_col: Vec<usize>,
    col_ptr: Vec<usize>,
    col_edges: Vec<usize>,
}

impl SubBlock {
    fn new(shifts: Vec<i64>, block_rows: usize, block_cols: usize, p: usize) -> Self {
        let rows = block_rows * p;
        let cols = block_cols * p;
        let mut check_ptr = Vec::with_capacity(rows + 1);
        let mut edge_col = Vec::new();
        check_ptr.push(0);
        for k in 0..rows {
            let (jb, r) = (k / p, k % p);
            for lb in 0..block_cols {
                let s = shifts[jb * block_cols + lb];
                if s >= 0 {
                    edge_col.push(lb * p + (r + s as usize) % p);
                }
            }
            check_ptr.push(edge_col.len());
        }
        let mut col_ptr = vec![0usize; cols + 1];
        for &n in &edge_col {
            col_ptr[n + 1] += 1;
        }
        for n in 0..cols {
            col_ptr[n + 1] += col_ptr[n];
        }
        let mut fill = col_ptr.clone();
        let mut col_edges = vec![0usize; edge_col.len()];
        for (e, &n) in edge_col.iter().enumerate() {
            col_edges[fill[n]] = e;
            fill[n] += 1;
        }
        Self {
            shifts,
            check_ptr,
            edge_col,
            col_ptr,
            col_edges,
        }
    }

    /// Shift numbers of the circulants inside this sub-block (row-major).
    pub fn shifts(&self) -> &[i64] {
        &self.shifts
    }

    pub fn num_edges(&self) -> usize {
        self.edge_col.len()
    }

    /// Edges of check row `k` of the layer.
    #[inline]
    pub fn row_edges(&self, k: usize) -> std::ops::Range<usize> {
        self.check_ptr[k]..self.check_ptr[k + 1]
    }

    /// Edges of frame variable `n`, in increasing check-row order.
    #[inline]
    pub fn col_edges(&self, n: usize) -> &[usize] {
        &self.col_edges[self.col_ptr[n]..self.col_ptr[n + 1]]
    }

    /// Frame variable of edge `e`.
    #[inline]
    pub fn edge_col(&self, e: usize) -> usize {
        self.edge_col[e]
    }
}

/// Time-invariant description of the convolutional code obtained by
/// unwrapping a QC-LDPC block code along its sub-block diagonal.
///
/// The block matrix is cut into `Λ x Λ` sub-blocks, `Λ = gcd(J, L)`; sub-block
/// `(r, j)` carries label `r * Λ + j`. The lower triangle (diagonal included)
/// stacked on the strictly upper triangle gives the base matrix, which
/// repeats down the diagonal of the semi-infinite matrix with one frame of
/// `c = pL/Λ` variables and one check layer of `pJ/Λ` checks per time slot.
///
/// Check layer `t` uses the sub-blocks in `lut_c[t mod Λ]`, listed for
/// frames `t - m_s ..= t` (oldest first). Frame `t` sits in the sub-blocks of
/// `lut_v[t mod Λ]`, listed for check layers `t ..= t + m_s`.
#[derive(Debug, Clone)]
pub struct LdpcccCode {
    base: ExponentMatrix,
    lambda: usize,
    lut_c: Vec<Vec<usize>>,
    lut_v: Vec<Vec<usize>>,
    sub_blocks: Vec<SubBlock>,
    label_offset: Vec<usize>,
    edges: usize,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl LdpcccCode {
    /// Unwraps a QC-LDPC code.
    pub fn unwrap_qc(base: &ExponentMatrix) -> Result<Self> {
        let (j, l, p) = (base.block_rows(), base.block_cols(), base.circulant());
        let lambda = gcd(j, l);
        if lambda < 2 {
            return Err(Error::InvalidCode(format!(
                "gcd(J, L) = gcd({j}, {l}) = {lambda}; nothing to unwrap"
            )));
        }
        let (rows, cols) = (j / lambda, l / lambda);

        let mut sub_blocks = Vec::with_capacity(lambda * lambda);
        for r in 0..lambda {
            for c in 0..lambda {
                let mut shifts = Vec::with_capacity(rows * cols);
                for jb in 0..rows {
                    for lb in 0..cols {
                        shifts.push(base.raw_shifts()[(r * rows + jb) * l + c * cols + lb]);
                    }
                }
                sub_blocks.push(SubBlock::new(shifts, rows, cols, p));
            }
        }
        let lut_c = (0..lambda)
            .map(|r| (0..lambda).map(|pos| r * lambda + (r + 1 + pos) % lambda).collect())
            .collect();
        let lut_v = (0..lambda)
            .map(|c| (0..lambda).map(|pos| ((c + pos) % lambda) * lambda + c).collect())
            .collect();
        let mut label_offset = Vec::with_capacity(sub_blocks.len());
        let mut edges = 0;
        for sb in &sub_blocks {
            label_offset.push(edges);
            edges += sb.num_edges();
        }
        Ok(Self {
            base: base.clone(),
            lambda,
            lut_c,
            lut_v,
            sub_blocks,
            label_offset,
            edges,
        })
    }

    pub fn base(&self) -> &ExponentMatrix {
        &self.base
    }

    /// `Λ = gcd(J, L)`.
    pub fn lambda(&self) -> usize {
        self.lambda
    }

    /// Period `T = Λ`.
    pub fn period(&self) -> usize {
        self.lambda
    }

    /// Syndrome-former memory `m_s = Λ - 1`.
    pub fn memory(&self) -> usize {
        self.lambda - 1
    }

    /// Frame length `c = (L/Λ) p`.
    pub fn frame_len(&self) -> usize {
        self.base.block_cols() / self.lambda * self.base.circulant()
    }

    /// Check-layer size `c - b = (J/Λ) p`.
    pub fn layer_len(&self) -> usize {
        self.base.block_rows() / self.lambda * self.base.circulant()
    }

    /// Information bits per frame, `b`.
    pub fn info_len(&self) -> usize {
        self.frame_len() - self.layer_len()
    }

    pub fn rate(&self) -> f64 {
        self.info_len() as f64 / self.frame_len() as f64
    }

    /// Edges in one copy of the base matrix, `E`.
    pub fn edges(&self) -> usize {
        self.edges
    }

    pub fn num_labels(&self) -> usize {
        self.sub_blocks.len()
    }

    pub fn lut_c(&self) -> &[Vec<usize>] {
        &self.lut_c
    }

    pub fn lut_v(&self) -> &[Vec<usize>] {
        &self.lut_v
    }

    /// Circulant shifts of sub-block `label`.
    pub fn lut_sub(&self, label: usize) -> &[i64] {
        self.sub_blocks[label].shifts()
    }

    pub fn sub_block(&self, label: usize) -> &SubBlock {
        &self.sub_blocks[label]
    }

    /// Offset of sub-block `label` inside one processor's message group.
    pub fn label_offset(&self, label: usize) -> usize {
        self.label_offset[label]
    }
}
