//! Angular-momentum matrices in the `L_z` eigenbasis.
//!
//! Basis index `k = m + j` runs over `0..=2j`, so `m` ascends with the index.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::sparse::SparseRealMatrix;

/// Twice the total angular momentum quantum number. Stored doubled so that
/// integer and half-integer spins are distinguished exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TwoJ(u32);

impl TwoJ {
    pub const fn new(two_j: u32) -> Self {
        Self(two_j)
    }

    /// Nearest representable spin for `j`; `None` unless `2j` is a
    /// non-negative integer.
    pub fn from_j(j: f64) -> Option<Self> {
        let doubled = 2.0 * j;
        if doubled.is_nan() || doubled < 0.0 || (doubled - doubled.round()).abs() > 1e-9 || doubled > u32::MAX as f64 {
            return None;
        }
        Some(Self(doubled.round() as u32))
    }

    pub const fn value(self) -> u32 {
        self.0
    }

    pub fn j(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// Dimension `2j + 1` of one top.
    pub const fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// Effective Planck constant `1 / (j + 1/2)`.
    pub fn hbar(self) -> f64 {
        2.0 / (f64::from(self.0) + 1.0)
    }
}

impl fmt::Display for TwoJ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// `L_x`, `L_z` and the real antisymmetric `Y` with `L_y = i Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperatorSet {
    pub two_j: TwoJ,
    pub lx: SparseRealMatrix,
    pub lz: SparseRealMatrix,
    pub ly_imag: SparseRealMatrix,
}

/// `<m+1| L_+ |m> = sqrt(j(j+1) - m(m+1))`, written in doubled integers to
/// keep the radicand exact: `(2j(2j+2) - 2m(2m+2)) / 4`.
fn ladder_element(two_j: u32, two_m: i64) -> f64 {
    let tj = i64::from(two_j);
    let radicand = tj * (tj + 2) - two_m * (two_m + 2);
    debug_assert!(radicand >= 0);
    (radicand as f64).sqrt() / 2.0
}

pub fn build_spin_operators(two_j: TwoJ) -> SpinOperatorSet {
    let n = two_j.dim();
    let tj = i64::from(two_j.value());
    let diag: Vec<f64> = (0..n).map(|k| (2 * k as i64 - tj) as f64 / 2.0).collect();
    let lz = SparseRealMatrix::from_diagonal(&diag);

    let mut x = Vec::with_capacity(2 * n);
    let mut y = Vec::with_capacity(2 * n);
    for k in 0..n.saturating_sub(1) {
        let c = ladder_element(two_j.value(), 2 * k as i64 - tj);
        // L_x = (L_+ + L_-)/2, L_y = (L_+ - L_-)/(2i) = i (L_- - L_+)/2.
        x.push((k, k + 1, c / 2.0));
        x.push((k + 1, k, c / 2.0));
        y.push((k, k + 1, c / 2.0));
        y.push((k + 1, k, -c / 2.0));
    }
    SpinOperatorSet {
        two_j,
        lx: SparseRealMatrix::from_triplets(n, x),
        lz,
        ly_imag: SparseRealMatrix::from_triplets(n, y),
    }
}

pub fn kron(a: &SparseRealMatrix, b: &SparseRealMatrix) -> SparseRealMatrix {
    a.kron(b)
}

impl SpinOperatorSet {
    /// Residuals of the three commutation relations in real form:
    /// `[L_x, Y] = L_z`, `[Y, L_z] = L_x`, `[L_z, L_x] = -Y`.
    pub fn commutator_residuals(&self) -> [f64; 3] {
        let (x, y, z) = (&self.lx, &self.ly_imag, &self.lz);
        [x.commutator(y).sub(z).max_abs(), y.commutator(z).sub(x).max_abs(), z.commutator(x).add(y).max_abs()]
    }

    /// `L_x^2 + L_y^2 + L_z^2`; note `L_y^2 = -Y^2`.
    pub fn casimir(&self) -> SparseRealMatrix {
        let x2 = self.lx.matmul(&self.lx);
        let y2 = self.ly_imag.matmul(&self.ly_imag);
        let z2 = self.lz.matmul(&self.lz);
        x2.sub(&y2).add(&z2)
    }
}
