//! Symmetry-adapted bases and block reduction.

use std::ops::Index;

use super::{
    build_chirality, build_hamiltonian, chirality_square_sign, topological_index, BlockLabel, ModelError, ModelParams,
    SymmetryClass, SYMMETRY_TOL,
};
use crate::sparse::SparseRealMatrix;
use crate::spinops::TwoJ;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockDims {
    pub pp: usize,
    pub pm: usize,
    pub mp: usize,
    pub mm: usize,
}

impl BlockDims {
    pub fn get(&self, label: BlockLabel) -> usize {
        match label {
            BlockLabel::PP => self.pp,
            BlockLabel::PM => self.pm,
            BlockLabel::MP => self.mp,
            BlockLabel::MM => self.mm,
        }
    }

    pub fn total(&self) -> usize {
        self.pp + self.pm + self.mp + self.mm
    }
}

/// Closed-form block dimensions.
pub fn subspace_dimensions(two_j: TwoJ) -> BlockDims {
    let tj = two_j.value() as usize;
    let pp = if two_j.is_integer() { (tj + 2) * (tj + 2) / 4 } else { ((tj + 2) * (tj + 2) - 1) / 4 };
    let pm = (tj + 1) * (tj + 2) / 2 - pp;
    BlockDims { pp, pm, mp: pp - (tj + 1), mm: pm }
}

/// Orthonormal real basis of one invariant subspace. Each vector has one
/// entry `1` (diagonal state) or two entries `+-1/sqrt(2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    pub label: BlockLabel,
    pub two_j: TwoJ,
    vectors: Vec<Vec<(usize, f64)>>,
    /// For every product state: the basis vector it contributes to and the
    /// coefficient. A product state feeds at most one vector per block.
    lookup: Vec<Option<(u32, f64)>>,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<(usize, f64)>] {
        &self.vectors
    }

    pub fn coefficient(&self, flat: usize) -> Option<(usize, f64)> {
        self.lookup[flat].map(|(p, c)| (p as usize, c))
    }

    /// Embeds block coordinates into the product space.
    pub fn embed(&self, coords: &[f64]) -> Vec<f64> {
        assert_eq!(coords.len(), self.dim());
        let mut out = vec![0.0; self.lookup.len()];
        for (v, &x) in self.vectors.iter().zip(coords) {
            for &(i, c) in v {
                out[i] += c * x;
            }
        }
        out
    }
}

/// Bases in lexicographic `(m1, m2)` order with `m2 >= m1`, indexed by
/// [`BlockLabel::index`].
pub fn build_subspace_bases(two_j: TwoJ) -> [SubspaceBasis; 4] {
    let n = two_j.dim();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut vectors: [Vec<Vec<(usize, f64)>>; 4] = Default::default();
    for k1 in 0..n {
        for k2 in k1..n {
            let even = (k1 + k2) % 2 == 0;
            let (a, b) = (k1 * n + k2, k2 * n + k1);
            if k1 == k2 {
                vectors[BlockLabel::PP.index()].push(vec![(a, 1.0)]);
                continue;
            }
            let (sym, anti) = if even { (BlockLabel::PP, BlockLabel::MP) } else { (BlockLabel::PM, BlockLabel::MM) };
            vectors[sym.index()].push(vec![(a, r), (b, r)]);
            vectors[anti.index()].push(vec![(a, r), (b, -r)]);
        }
    }
    BlockLabel::ALL.map(|label| {
        let vecs = std::mem::take(&mut vectors[label.index()]);
        let mut lookup = vec![None; n * n];
        for (p, v) in vecs.iter().enumerate() {
            for &(i, c) in v {
                lookup[i] = Some((p as u32, c));
            }
        }
        SubspaceBasis { label, two_j, vectors: vecs, lookup }
    })
}

/// `R^T A C` as canonical triplets; the product-space operator `a` is
/// visited once.
fn project_triplets(a: &SparseRealMatrix, rows: &SubspaceBasis, cols: &SubspaceBasis) -> Vec<(usize, usize, f64)> {
    let mut t = Vec::with_capacity(a.nnz());
    for &(r, c, v) in a.entries() {
        if let (Some((q, bq)), Some((p, bp))) = (rows.lookup[r], cols.lookup[c]) {
            t.push((q as usize, p as usize, bq * v * bp));
        }
    }
    t.sort_unstable_by_key(|x| (x.0, x.1));
    let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(t.len());
    for (q, p, v) in t {
        match merged.last_mut() {
            Some(last) if last.0 == q && last.1 == p => last.2 += v,
            _ => merged.push((q, p, v)),
        }
    }
    merged
}

/// Reduced matrix `B^T A B` of a product-space operator on one subspace.
pub fn project(a: &SparseRealMatrix, basis: &SubspaceBasis) -> SparseRealMatrix {
    let t = project_triplets(a, basis, basis).into_iter().filter(|e| e.2 != 0.0).collect();
    SparseRealMatrix::from_sorted_unchecked(basis.dim(), t)
}

/// Largest `|<r| A |c>|` between two subspaces.
pub fn cross_block_max(a: &SparseRealMatrix, rows: &SubspaceBasis, cols: &SubspaceBasis) -> f64 {
    project_triplets(a, rows, cols).iter().fold(0.0, |m, e| m.max(e.2.abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedBlock {
    pub label: BlockLabel,
    pub basis: SubspaceBasis,
    pub hamiltonian: SparseRealMatrix,
    pub class: SymmetryClass,
    pub topo_index: u32,
    /// Present exactly for the chiral blocks `PP` and `MP`.
    pub chirality: Option<SparseRealMatrix>,
}

impl ReducedBlock {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }
}

/// Residuals of the reduction, all max-entry.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlockResiduals {
    /// `H` between distinct subspaces.
    pub cross_block: f64,
    /// `H_b C_b + C_b H_b` over the chiral blocks.
    pub anticommutator: f64,
    /// `C` images leaving their target subspace: `PP -> PP`, `MP -> MP`,
    /// `PM -> MM`, `MM -> PM`.
    pub chirality_leakage: f64,
    /// `B^T B - 1` over all bases.
    pub orthonormality: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    pub params: ModelParams,
    pub blocks: [ReducedBlock; 4],
    pub residuals: BlockResiduals,
}

impl Index<BlockLabel> for BlockDecomposition {
    type Output = ReducedBlock;

    fn index(&self, label: BlockLabel) -> &ReducedBlock {
        &self.blocks[label.index()]
    }
}

fn chirality_target(label: BlockLabel) -> BlockLabel {
    match label {
        BlockLabel::PP => BlockLabel::PP,
        BlockLabel::MP => BlockLabel::MP,
        BlockLabel::PM => BlockLabel::MM,
        BlockLabel::MM => BlockLabel::PM,
    }
}

fn gram_residual(basis: &SubspaceBasis) -> f64 {
    let id = SparseRealMatrix::identity(basis.lookup.len());
    project(&id, basis).sub(&SparseRealMatrix::identity(basis.dim())).max_abs()
}

/// Reduces `H` to the four blocks and checks every symmetry relation the
/// reduction relies on.
pub fn reduce(params: ModelParams) -> Result<BlockDecomposition, ModelError> {
    let two_j = params.two_j;
    let h = build_hamiltonian(params);
    let c = build_chirality(two_j);
    let bases = build_subspace_bases(two_j);

    let mut res = BlockResiduals::default();
    for x in &bases {
        res.orthonormality = res.orthonormality.max(gram_residual(x));
        for y in &bases {
            if x.label != y.label {
                res.cross_block = res.cross_block.max(cross_block_max(&h, x, y));
            }
        }
        let target = chirality_target(x.label);
        for y in bases.iter().filter(|y| y.label != target) {
            res.chirality_leakage = res.chirality_leakage.max(cross_block_max(&c, y, x));
        }
    }

    let blocks = bases.map(|basis| {
        let label = basis.label;
        let hamiltonian = project(&h, &basis);
        let chirality = label.is_chiral().then(|| project(&c, &basis));
        ReducedBlock { label, basis, hamiltonian, class: SymmetryClass::AI, topo_index: 0, chirality }
    });
    let mut blocks = blocks;
    for block in blocks.iter_mut() {
        let Some(cb) = &block.chirality else { continue };
        let ac = cb.anticommutator(&block.hamiltonian).max_abs();
        res.anticommutator = res.anticommutator.max(ac);
        if chirality_square_sign(two_j) > 0 {
            block.topo_index = topological_index(cb)?;
            block.class = SymmetryClass::Bdi(block.topo_index);
        } else {
            block.class = SymmetryClass::CI;
        }
    }

    for (check, residual) in [
        ("block orthonormality", res.orthonormality),
        ("block diagonality", res.cross_block),
        ("chirality anticommutation", res.anticommutator),
        ("chirality block structure", res.chirality_leakage),
    ] {
        if residual > SYMMETRY_TOL {
            return Err(ModelError::SymmetryViolation { check, residual });
        }
    }
    Ok(BlockDecomposition { params, blocks, residuals: res })
}
