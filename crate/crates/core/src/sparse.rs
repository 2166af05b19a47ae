//! Square sparse real matrices in canonical coordinate form.
//!
//! Entries are kept sorted by `(row, col)` with no duplicates and no explicit
//! zeros, so two matrices are equal exactly when their entry lists are equal.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseRealMatrix {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseRealMatrix {
    /// Builds a canonical matrix; duplicate coordinates are summed and exact
    /// zeros (including cancellations) are dropped.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside {dim}x{dim}");
            *acc.entry((r, c)).or_insert(0.0) += v;
        }
        let entries = acc.into_iter().filter(|&(_, v)| v != 0.0).map(|((r, c), v)| (r, c, v)).collect();
        Self { dim, entries }
    }

    /// Builds from entries the caller guarantees to be canonical already.
    pub(crate) fn from_sorted_unchecked(dim: usize, entries: Vec<(usize, usize, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1)));
        debug_assert!(entries.iter().all(|&(r, c, v)| r < dim && c < dim && v != 0.0));
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let entries = diag.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (i, i, v)).collect();
        Self { dim: diag.len(), entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        match self.entries.binary_search_by(|&(r, c, _)| (r, c).cmp(&(row, col))) {
            Ok(k) => self.entries[k].2,
            Err(_) => 0.0,
        }
    }

    /// Offsets into `entries` where each row starts (length `dim + 1`).
    pub fn row_offsets(&self) -> Vec<usize> {
        let mut offsets = vec![0usize; self.dim + 1];
        for &(r, _, _) in &self.entries {
            offsets[r + 1] += 1;
        }
        for i in 0..self.dim {
            offsets[i + 1] += offsets[i];
        }
        offsets
    }

    pub fn transpose(&self) -> Self {
        let mut entries: Vec<_> = self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect();
        entries.sort_unstable_by_key(|a| (a.0, a.1));
        Self { dim: self.dim, entries }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_triplets(self.dim, self.entries.iter().map(|&(r, c, v)| (r, c, v * s)))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, -1.0)
    }

    /// `self + s * other`
    pub fn add_scaled(&self, other: &Self, s: f64) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self::from_triplets(
            self.dim,
            self.entries.iter().copied().chain(other.entries.iter().map(|&(r, c, v)| (r, c, s * v))),
        )
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let offsets = other.row_offsets();
        let mut triplets = Vec::new();
        for &(r, k, a) in &self.entries {
            for &(_, c, b) in &other.entries[offsets[k]..offsets[k + 1]] {
                triplets.push((r, c, a * b));
            }
        }
        Self::from_triplets(self.dim, triplets)
    }

    /// `self * other - other * self`
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// `self * other + other * self`
    pub fn anticommutator(&self, other: &Self) -> Self {
        self.matmul(other).add(&other.matmul(self))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    /// Kronecker product with row index `r_a * dim_b + r_b`.
    pub fn kron(&self, other: &Self) -> Self {
        let nb = other.dim;
        let mut entries = Vec::with_capacity(self.nnz() * other.nnz());
        let offsets = other.row_offsets();
        for ra in 0..self.dim {
            let row_a = self.row(ra);
            for rb in 0..nb {
                for &(_, ca, va) in row_a {
                    for &(_, cb, vb) in &other.entries[offsets[rb]..offsets[rb + 1]] {
                        let v = va * vb;
                        if v != 0.0 {
                            entries.push((ra * nb + rb, ca * nb + cb, v));
                        }
                    }
                }
            }
        }
        Self::from_sorted_unchecked(self.dim * nb, entries)
    }

    fn row(&self, r: usize) -> &[(usize, usize, f64)] {
        let start = self.entries.partition_point(|&(row, _, _)| row < r);
        let end = self.entries.partition_point(|&(row, _, _)| row <= r);
        &self.entries[start..end]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, &(_, _, v)| m.max(v.abs()))
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.entries.iter().map(|&(r, c, _)| r.abs_diff(c)).max().unwrap_or(0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries.iter().all(|&(r, c, v)| self.get(c, r) == v)
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.entries.iter().all(|&(r, c, v)| self.get(c, r) == -v)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.dim * self.dim];
        for &(r, c, v) in &self.entries {
            a[r * self.dim + c] = v;
        }
        a
    }

    pub fn trace(&self) -> f64 {
        self.entries.iter().filter(|e| e.0 == e.1).map(|e| e.2).sum()
    }
}
