use std::ops::Range;

use super::SparseParityCheck;

/// Where the edges of each check start.
///
/// Edges are numbered check by check, so the edges of one check always form a
/// contiguous range; a check-regular code only needs the common degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckIndex {
    Regular { degree: usize },
    /// `offsets[m]..offsets[m + 1]` are the edges of check `m`.
    Offsets(Vec<usize>),
}

/// Edge numbering and lookup tables shared by all codewords of a batch.
///
/// Edge IDs run row by row, left to right within a row. `lut_v` lists the
/// edges of every variable in increasing order and has to be stored in full,
/// since variable-side adjacency carries no structure in general.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeLayout {
    num_vars: usize,
    num_checks: usize,
    checks: CheckIndex,
    edge_var: Vec<usize>,
    var_offsets: Vec<usize>,
    var_edges: Vec<usize>,
}

impl EdgeLayout {
    pub fn new(h: &SparseParityCheck) -> Self {
        let num_checks = h.num_checks();
        let num_vars = h.num_vars();
        let edge_var: Vec<usize> = h.rows().iter().flatten().copied().collect();

        let degree = h.rows().first().map_or(0, Vec::len);
        let checks = if h.rows().iter().all(|r| r.len() == degree) {
            CheckIndex::Regular { degree }
        } else {
            let mut offsets = Vec::with_capacity(num_checks + 1);
            offsets.push(0);
            for row in h.rows() {
                offsets.push(offsets.last().unwrap() + row.len());
            }
            CheckIndex::Offsets(offsets)
        };

        let mut var_offsets = vec![0usize; num_vars + 1];
        for &n in &edge_var {
            var_offsets[n + 1] += 1;
        }
        for n in 0..num_vars {
            var_offsets[n + 1] += var_offsets[n];
        }
        let mut fill = var_offsets.clone();
        let mut var_edges = vec![0usize; edge_var.len()];
        // Scanning edges in ID order keeps each variable's list sorted.
        for (e, &n) in edge_var.iter().enumerate() {
            var_edges[fill[n]] = e;
            fill[n] += 1;
        }

        Self {
            num_vars,
            num_checks,
            checks,
            edge_var,
            var_offsets,
            var_edges,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_checks(&self) -> usize {
        self.num_checks
    }

    pub fn num_edges(&self) -> usize {
        self.edge_var.len()
    }

    pub fn check_index(&self) -> &CheckIndex {
        &self.checks
    }

    /// Common check degree when the code is check-regular.
    pub fn regular_check_degree(&self) -> Option<usize> {
        match self.checks {
            CheckIndex::Regular { degree } => Some(degree),
            CheckIndex::Offsets(_) => None,
        }
    }

    #[inline]
    pub fn check_edges(&self, m: usize) -> Range<usize> {
        match &self.checks {
            CheckIndex::Regular { degree } => m * degree..(m + 1) * degree,
            CheckIndex::Offsets(o) => o[m]..o[m + 1],
        }
    }

    #[inline]
    pub fn var_edges(&self, n: usize) -> &[usize] {
        &self.var_edges[self.var_offsets[n]..self.var_offsets[n + 1]]
    }

    /// Variable at the far end of edge `e`.
    #[inline]
    pub fn edge_var(&self, e: usize) -> usize {
        self.edge_var[e]
    }

    /// Expanded `LUT_c`: the edge IDs of every check.
    pub fn lut_c(&self) -> Vec<Vec<usize>> {
        (0..self.num_checks).map(|m| self.check_edges(m).collect()).collect()
    }

    /// `LUT_v`: the edge IDs of every variable.
    pub fn lut_v(&self) -> Vec<Vec<usize>> {
        (0..self.num_vars).map(|n| self.var_edges(n).to_vec()).collect()
    }
}
