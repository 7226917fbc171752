//! Column-compressed coordinate lists for the large, very sparse operators
//! that appear on truncated Fock spaces.

use crate::linop::{CMatrix, C64, ZERO};

/// A complex matrix stored as one sorted `(row, value)` list per column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    cols: Vec<Vec<(usize, C64)>>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            cols: vec![Vec::new(); ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn diagonal(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, z) in d.iter().enumerate() {
            m.add_entry(i, i, *z);
        }
        m
    }

    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for (i, j, v) in triplets {
            m.add_entry(i, j, v);
        }
        m
    }

    pub fn from_dense(d: &CMatrix) -> Self {
        let mut m = Self::zeros(d.nrows(), d.ncols());
        for j in 0..d.ncols() {
            for i in 0..d.nrows() {
                let z = d[(i, j)];
                if z != ZERO {
                    m.cols[j].push((i, z));
                }
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn column(&self, j: usize) -> &[(usize, C64)] {
        &self.cols[j]
    }

    /// Adds `v` to entry `(i, j)`, dropping the entry if it cancels to zero.
    pub fn add_entry(&mut self, i: usize, j: usize, v: C64) {
        assert!(i < self.nrows && j < self.ncols, "entry ({i}, {j}) out of bounds");
        if v == ZERO {
            return;
        }
        let col = &mut self.cols[j];
        match col.binary_search_by_key(&i, |(r, _)| *r) {
            Ok(k) => {
                col[k].1 += v;
                if col[k].1 == ZERO {
                    col.remove(k);
                }
            }
            Err(k) => col.insert(k, (i, v)),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match self.cols[j].binary_search_by_key(&i, |(r, _)| *r) {
            Ok(k) => self.cols[j][k].1,
            Err(_) => ZERO,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |(i, v)| (*i, j, *v)))
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut d = CMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }

    /// `self * rhs`.
    pub fn mul(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols, rhs.nrows, "inner dimensions differ");
        let mut out = SparseMatrix::zeros(self.nrows, rhs.ncols);
        let mut acc = vec![ZERO; self.nrows];
        let mut touched = Vec::new();
        for (j, col) in rhs.cols.iter().enumerate() {
            for (k, b) in col {
                for (i, a) in &self.cols[*k] {
                    if acc[*i] == ZERO {
                        touched.push(*i);
                    }
                    acc[*i] += a * b;
                }
            }
            touched.sort_unstable();
            touched.dedup();
            for i in touched.drain(..) {
                let v = std::mem::replace(&mut acc[i], ZERO);
                if v != ZERO {
                    out.cols[j].push((i, v));
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &SparseMatrix) -> SparseMatrix {
        self.axpy(C64::new(1.0, 0.0), rhs)
    }

    pub fn sub(&self, rhs: &SparseMatrix) -> SparseMatrix {
        self.axpy(C64::new(-1.0, 0.0), rhs)
    }

    /// `self + alpha * rhs`.
    pub fn axpy(&self, alpha: C64, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols), "shapes differ");
        let mut out = self.clone();
        for (i, j, v) in rhs.triplets() {
            out.add_entry(i, j, alpha * v);
        }
        out
    }

    pub fn scale(&self, z: C64) -> SparseMatrix {
        if z == ZERO {
            return SparseMatrix::zeros(self.nrows, self.ncols);
        }
        let mut out = self.clone();
        for col in &mut out.cols {
            for (_, v) in col.iter_mut() {
                *v *= z;
            }
        }
        out
    }

    /// Keeps only the listed columns (others become zero).
    pub fn restrict_columns(&self, keep: impl Fn(usize) -> bool) -> SparseMatrix {
        let mut out = SparseMatrix::zeros(self.nrows, self.ncols);
        for (j, col) in self.cols.iter().enumerate() {
            if keep(j) {
                out.cols[j] = col.clone();
            }
        }
        out
    }

    /// Submatrix on the given row and column ranges.
    pub fn block(
        &self,
        rows: std::ops::Range<usize>,
        cols: std::ops::Range<usize>,
    ) -> SparseMatrix {
        let mut out = SparseMatrix::zeros(rows.len(), cols.len());
        for j in cols.clone() {
            for (i, v) in &self.cols[j] {
                if rows.contains(i) {
                    out.cols[j - cols.start].push((i - rows.start, *v));
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.triplets().map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus difference on columns selected by `keep`.
    pub fn max_abs_diff_on(&self, other: &SparseMatrix, keep: impl Fn(usize) -> bool) -> f64 {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols), "shapes differ");
        let mut worst: f64 = 0.0;
        for j in (0..self.ncols).filter(|j| keep(*j)) {
            let (a, b) = (&self.cols[j], &other.cols[j]);
            let (mut x, mut y) = (0, 0);
            while x < a.len() || y < b.len() {
                let d = match (a.get(x), b.get(y)) {
                    (Some((ia, va)), Some((ib, vb))) if ia == ib => {
                        x += 1;
                        y += 1;
                        va - vb
                    }
                    (Some((ia, va)), Some((ib, _))) if ia < ib => {
                        x += 1;
                        *va
                    }
                    (Some(_), Some((_, vb))) | (None, Some((_, vb))) => {
                        y += 1;
                        -vb
                    }
                    (Some((_, va)), None) => {
                        x += 1;
                        *va
                    }
                    (None, None) => unreachable!(),
                };
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(i, j, _)| i == j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn product_matches_dense() {
        let a = CMatrix::from_fn(3, 4, |i, j| c(((i * 7 + j * 3) % 5) as f64 - 2.0));
        let b = CMatrix::from_fn(4, 2, |i, j| C64::new((i + j) as f64, (i as f64) - 1.0));
        let sa = SparseMatrix::from_dense(&a);
        let sb = SparseMatrix::from_dense(&b);
        assert_eq!(sa.mul(&sb).to_dense(), &a * &b);
        assert_eq!(sa.to_dense(), a);
    }

    #[test]
    fn entries_cancel_and_diff_is_columnwise() {
        let mut m = SparseMatrix::identity(3);
        m.add_entry(1, 1, c(-1.0));
        assert_eq!(m.nnz(), 2);
        let other = SparseMatrix::identity(3);
        assert_eq!(m.max_abs_diff_on(&other, |j| j != 1), 0.0);
        assert_eq!(m.max_abs_diff_on(&other, |_| true), 1.0);
    }

    #[test]
    fn block_extracts_submatrix() {
        let d = CMatrix::from_fn(4, 4, |i, j| c((4 * i + j) as f64));
        let s = SparseMatrix::from_dense(&d);
        let b = s.block(1..3, 2..4).to_dense();
        assert_eq!(b, d.view((1, 2), (2, 2)).into_owned());
    }
}
