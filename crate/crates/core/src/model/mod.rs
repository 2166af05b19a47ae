//! The two-top Hamiltonian, its symmetries, and the reduction to
//! symmetry-adapted blocks.
//!
//! Product states `|m1, m2>` are indexed by `k1 * (2j+1) + k2` with
//! `k = m + j`. With that shift every sign in this module becomes an integer
//! power of `-1`: `U2 = (-1)^(k1+k2)` and `C |k1,k2> = (-1)^(2j-k2) |2j-k1, 2j-k2>`.

mod blocks;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sparse::SparseRealMatrix;
use crate::spinops::{build_spin_operators, TwoJ};

pub use blocks::{
    build_subspace_bases, cross_block_max, project, reduce, subspace_dimensions, BlockDecomposition, BlockDims,
    BlockResiduals, ReducedBlock, SubspaceBasis,
};

/// Max-entry tolerance for exact symmetry relations.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Tolerance on `C^2 = 1` accepted by [`topological_index`].
pub const INVOLUTION_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("coupling {0} outside [0, 1]")]
    CouplingOutOfRange(f64),
    #[error("chirality block does not square to the identity (residual {0:e})")]
    NonInvolution(f64),
    #[error("{check} violated: residual {residual:e}")]
    SymmetryViolation { check: &'static str, residual: f64 },
}

/// Coupling parameter `lambda` in `[0, 1]`; `1` decouples the tops.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Coupling(f64);

impl Coupling {
    pub fn new(lambda: f64) -> Result<Self, ModelError> {
        if (0.0..=1.0).contains(&lambda) {
            Ok(Self(lambda))
        } else {
            Err(ModelError::CouplingOutOfRange(lambda))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub two_j: TwoJ,
    pub lambda: Coupling,
}

impl ModelParams {
    pub fn new(two_j: TwoJ, lambda: f64) -> Result<Self, ModelError> {
        Ok(Self { two_j, lambda: Coupling::new(lambda)? })
    }
}

/// A product state `|m1, m2>` with both projections stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StandardBasisIndex {
    pub two_m1: i32,
    pub two_m2: i32,
}

impl StandardBasisIndex {
    pub fn from_flat(two_j: TwoJ, flat: usize) -> Self {
        let n = two_j.dim();
        assert!(flat < n * n);
        let tj = two_j.value() as i32;
        Self { two_m1: 2 * (flat / n) as i32 - tj, two_m2: 2 * (flat % n) as i32 - tj }
    }

    pub fn flat(self, two_j: TwoJ) -> usize {
        let tj = two_j.value() as i32;
        let (k1, k2) = ((self.two_m1 + tj) / 2, (self.two_m2 + tj) / 2);
        assert!((0..=tj).contains(&k1) && (0..=tj).contains(&k2) && (self.two_m1 + tj) % 2 == 0);
        k1 as usize * two_j.dim() + k2 as usize
    }
}

/// Eigenvalue pair of (exchange `U1`, parity `U2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockLabel {
    PP,
    PM,
    MP,
    MM,
}

impl BlockLabel {
    pub const ALL: [BlockLabel; 4] = [BlockLabel::PP, BlockLabel::PM, BlockLabel::MP, BlockLabel::MM];

    /// Sign under exchange of the tops.
    pub fn exchange_sign(self) -> i32 {
        match self {
            BlockLabel::PP | BlockLabel::PM => 1,
            BlockLabel::MP | BlockLabel::MM => -1,
        }
    }

    /// Eigenvalue of `U2`.
    pub fn parity_sign(self) -> i32 {
        match self {
            BlockLabel::PP | BlockLabel::MP => 1,
            BlockLabel::PM | BlockLabel::MM => -1,
        }
    }

    /// Blocks on which the chirality operator acts within the block.
    pub fn is_chiral(self) -> bool {
        self.parity_sign() == 1
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BlockLabel::PP => "pp",
            BlockLabel::PM => "pm",
            BlockLabel::MP => "mp",
            BlockLabel::MM => "mm",
        }
    }
}

impl fmt::Display for BlockLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BlockLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pp" | "++" => Ok(BlockLabel::PP),
            "pm" | "+-" => Ok(BlockLabel::PM),
            "mp" | "-+" => Ok(BlockLabel::MP),
            "mm" | "--" => Ok(BlockLabel::MM),
            other => Err(format!("unknown block '{other}' (expected pp, pm, mp or mm)")),
        }
    }
}

/// Tenfold-way class of a reduced block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryClass {
    AI,
    Bdi(u32),
    CI,
}

impl SymmetryClass {
    /// Number of symmetry-protected zero modes.
    pub fn zero_modes(self) -> u32 {
        match self {
            SymmetryClass::Bdi(nu) => nu,
            SymmetryClass::AI | SymmetryClass::CI => 0,
        }
    }
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymmetryClass::AI => f.write_str("AI"),
            SymmetryClass::Bdi(nu) => write!(f, "BDI{nu}"),
            SymmetryClass::CI => f.write_str("CI"),
        }
    }
}

pub fn build_hamiltonian(params: ModelParams) -> SparseRealMatrix {
    let two_j = params.two_j;
    let lambda = params.lambda.value();
    let ops = build_spin_operators(two_j);
    let id = SparseRealMatrix::identity(two_j.dim());
    let inv = two_j.hbar();
    let field = crate::spinops::kron(&ops.lz, &id).add(&crate::spinops::kron(&id, &ops.lz));
    let coupling = crate::spinops::kron(&ops.lx, &ops.lx);
    field.scale((1.0 + lambda) * inv).add_scaled(&coupling, 4.0 * (1.0 - lambda) * inv * inv)
}

/// Exchange of the two tops.
pub fn build_u1(two_j: TwoJ) -> SparseRealMatrix {
    let n = two_j.dim();
    SparseRealMatrix::from_triplets(n * n, (0..n).flat_map(|k1| (0..n).map(move |k2| (k2 * n + k1, k1 * n + k2, 1.0))))
}

/// `exp(i pi (2j - m1 - m2))`, which is `(-1)^(k1+k2)`.
pub fn build_u2(two_j: TwoJ) -> SparseRealMatrix {
    let n = two_j.dim();
    let diag: Vec<f64> = (0..n * n).map(|i| sign((i / n + i % n) as u32)).collect();
    SparseRealMatrix::from_diagonal(&diag)
}

/// Real signed permutation `C |m1,m2> = (-1)^(j-m2) |-m1,-m2>`. The complex
/// global phase present at half-integer `j` is dropped; only `C^2` matters.
pub fn build_chirality(two_j: TwoJ) -> SparseRealMatrix {
    let n = two_j.dim();
    let tj = two_j.value() as usize;
    SparseRealMatrix::from_triplets(
        n * n,
        (0..n).flat_map(|k1| (0..n).map(move |k2| ((tj - k1) * n + (tj - k2), k1 * n + k2, sign((tj - k2) as u32)))),
    )
}

/// Sign of `C^2`: `+1` for integer `j`, `-1` for half-integer `j`.
pub fn chirality_square_sign(two_j: TwoJ) -> i32 {
    if two_j.is_integer() {
        1
    } else {
        -1
    }
}

fn sign(power: u32) -> f64 {
    if power.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Index from the trace of an involutive chirality block: paired `+1/-1`
/// eigenvalues cancel, unpaired ones survive.
pub fn topological_index(c_block: &SparseRealMatrix) -> Result<u32, ModelError> {
    let dev = c_block.matmul(c_block).sub(&SparseRealMatrix::identity(c_block.dim())).max_abs();
    if dev > INVOLUTION_TOL {
        return Err(ModelError::NonInvolution(dev));
    }
    Ok(c_block.trace().abs().round() as u32)
}

/// Class of a block. For integer `j` the chiral blocks carry
/// `BDI(nu)` with `nu` from the trace of the reduced chirality operator.
pub fn classify(label: BlockLabel, two_j: TwoJ) -> SymmetryClass {
    if !label.is_chiral() {
        return SymmetryClass::AI;
    }
    if !two_j.is_integer() {
        return SymmetryClass::CI;
    }
    let bases = build_subspace_bases(two_j);
    let basis = &bases[label.index()];
    let c = project(&build_chirality(two_j), basis);
    let nu = topological_index(&c).expect("reduced chirality is a signed permutation");
    SymmetryClass::Bdi(nu)
}

/// Outcome of the time-reversal check. Time reversal acts as complex
/// conjugation in the product basis, so invariance is reality of every matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeReversalCheck {
    /// Largest imaginary part among `H` and its reduced blocks. Zero by
    /// construction: the only complex operator, `L_y`, never enters `H`.
    pub imaginary_residual: f64,
    /// Largest `|A - A^T|` entry among `H` and the reduced blocks.
    pub hermiticity_residual: f64,
}

pub fn build_time_reversal_check(params: ModelParams) -> TimeReversalCheck {
    let h = build_hamiltonian(params);
    let mut herm = h.sub(&h.transpose()).max_abs();
    for basis in build_subspace_bases(params.two_j).iter() {
        let hb = project(&h, basis);
        herm = herm.max(hb.sub(&hb.transpose()).max_abs());
    }
    TimeReversalCheck { imaginary_residual: 0.0, hermiticity_residual: herm }
}
