//! Ensemble statistics over many spin quantum numbers: the counting-function
//! deviation `delta N(e)` and the first-eigenvalue distribution `I(e)`,
//! scored against the random-matrix predictions.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigen::{
    default_m, eigs_near_zero_with, unfold, zero_tol, EigenError, RawSpectrum, SolverConfig, UnfoldedSpectrum,
};
use crate::model::{classify, reduce, BlockLabel, ModelError, ModelParams, SymmetryClass};
use crate::rmt::{delta_n_prediction, gap_cdf, SymmetryClassId};
use crate::spinops::TwoJ;

/// Fraction of the shortest reliable window kept for `delta N`.
pub const E_CAP_FRACTION: f64 = 0.8;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("ensemble has no members")]
    EmptyEnsemble,
    #[error("lambda = 1 is degenerate and excluded from ensemble statistics")]
    DegenerateCoupling,
    #[error("j = {two_j}/2 block {block} has class {found}, ensemble expects {expected}")]
    MixedClass { two_j: u32, block: BlockLabel, found: SymmetryClass, expected: SymmetryClass },
    #[error("class {0} has no reference prediction")]
    NoPrediction(SymmetryClass),
    #[error("reference {class_id} does not describe class {class}")]
    PredictionMismatch { class_id: SymmetryClassId, class: SymmetryClass },
    #[error("grid reaches e = {grid_max} but the reliable range ends at {e_cap}")]
    InsufficientWindow { grid_max: f64, e_cap: f64 },
    #[error("j = {two_j}/2 block {block}: {source}")]
    Solver { two_j: u32, block: BlockLabel, source: EigenError },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One spectrum source: a spin and a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub two_j: TwoJ,
    pub block: BlockLabel,
}

/// A set of blocks sharing one symmetry class at one coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    class: SymmetryClass,
    class_id: SymmetryClassId,
    lambda: f64,
    members: Vec<EnsembleMember>,
}

impl EnsembleSpec {
    /// Validates that every member has the same class and that `class_id`
    /// describes it. For AI both the GOE and the Poisson reference qualify.
    pub fn new(class_id: SymmetryClassId, lambda: f64, members: Vec<EnsembleMember>) -> Result<Self, StatsError> {
        ModelParams::new(TwoJ::new(1), lambda)?;
        if lambda == 1.0 {
            return Err(StatsError::DegenerateCoupling);
        }
        let first = members.first().ok_or(StatsError::EmptyEnsemble)?;
        let class = classify(first.block, first.two_j);
        for m in &members {
            let found = classify(m.block, m.two_j);
            if found != class {
                return Err(StatsError::MixedClass { two_j: m.two_j.value(), block: m.block, found, expected: class });
            }
        }
        let native = SymmetryClassId::from_class(class).ok_or(StatsError::NoPrediction(class))?;
        let fits = native == class_id || (class == SymmetryClass::AI && class_id == SymmetryClassId::AiPoisson);
        if !fits {
            return Err(StatsError::PredictionMismatch { class_id, class });
        }
        Ok(Self { class, class_id, lambda, members })
    }

    /// All blocks of class `class_id` with `j_min <= j <= j_max`, stepping
    /// `j` by one half.
    pub fn over_range(class_id: SymmetryClassId, lambda: f64, j_min: f64, j_max: f64) -> Result<Self, StatsError> {
        let lo = (2.0 * j_min).ceil().max(1.0) as u32;
        let hi = (2.0 * j_max).floor() as u32;
        let members = (lo..=hi)
            .flat_map(|tj| BlockLabel::ALL.into_iter().map(move |block| EnsembleMember { two_j: TwoJ::new(tj), block }))
            .filter(|m| {
                let class = classify(m.block, m.two_j);
                SymmetryClassId::from_class(class) == Some(class_id)
                    || (class == SymmetryClass::AI && class_id == SymmetryClassId::AiPoisson)
            })
            .collect();
        Self::new(class_id, lambda, members)
    }

    pub fn class(&self) -> SymmetryClass {
        self.class
    }

    pub fn class_id(&self) -> SymmetryClassId {
        self.class_id
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn members(&self) -> &[EnsembleMember] {
        &self.members
    }

    /// The same members scored against another reference of the same class.
    pub fn with_reference(&self, class_id: SymmetryClassId) -> Result<Self, StatsError> {
        Self::new(class_id, self.lambda, self.members.clone())
    }
}

/// Window size per block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum WindowPolicy {
    /// 61 levels for odd block dimension, 60 for even.
    #[default]
    Standard,
    Fixed(usize),
}

impl WindowPolicy {
    pub fn m(self, block_dim: usize) -> usize {
        match self {
            WindowPolicy::Standard => default_m(block_dim),
            WindowPolicy::Fixed(m) => m.min(block_dim),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCurves {
    pub spec: EnsembleSpec,
    pub grid: Vec<f64>,
    pub delta_n: Vec<f64>,
    pub gap_cdf: Vec<f64>,
    pub n_spectra: usize,
}

impl EmpiricalCurves {
    pub fn from_spectra(spec: EnsembleSpec, spectra: &[UnfoldedSpectrum], grid: &[f64]) -> Result<Self, StatsError> {
        Ok(Self {
            delta_n: empirical_delta_n(spectra, grid)?,
            gap_cdf: empirical_gap_cdf(spectra, grid),
            grid: grid.to_vec(),
            n_spectra: spectra.len(),
            spec,
        })
    }

    pub fn delta_n_prediction(&self) -> Vec<f64> {
        delta_n_prediction(self.spec.class_id, &self.grid).values
    }

    pub fn gap_prediction(&self) -> Vec<f64> {
        self.grid.iter().map(|&e| gap_cdf(self.spec.class_id, e)).collect()
    }

    /// Sup-norm distance of the first-eigenvalue CDF from the prediction.
    pub fn gap_ks(&self) -> f64 {
        ks_distance(&self.gap_cdf, &self.gap_prediction())
    }

    /// Sup-norm deviation of `delta N` from the prediction over
    /// `lo <= e <= hi`.
    pub fn delta_n_deviation(&self, lo: f64, hi: f64) -> f64 {
        let pred = self.delta_n_prediction();
        self.grid
            .iter()
            .zip(self.delta_n.iter().zip(&pred))
            .filter(|(&e, _)| e >= lo && e <= hi)
            .map(|(_, (a, b))| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `E_CAP_FRACTION` of the smallest window edge over the ensemble.
pub fn e_cap(spectra: &[UnfoldedSpectrum]) -> f64 {
    E_CAP_FRACTION * spectra.iter().map(UnfoldedSpectrum::max_e).fold(f64::INFINITY, f64::min)
}

/// `(1/N) sum_j #{n : e_n <= e} - e` on the grid.
pub fn empirical_delta_n(spectra: &[UnfoldedSpectrum], grid: &[f64]) -> Result<Vec<f64>, StatsError> {
    if spectra.is_empty() {
        return Err(StatsError::EmptyEnsemble);
    }
    let cap = e_cap(spectra);
    let grid_max = grid.iter().copied().fold(0.0, f64::max);
    if grid_max > cap {
        return Err(StatsError::InsufficientWindow { grid_max, e_cap: cap });
    }
    let levels: Vec<&[f64]> = spectra.iter().map(|s| s.e.as_slice()).collect();
    Ok(delta_n_from_levels(&levels, grid))
}

/// Counting-function deviation of sorted level lists, without a window cap.
pub fn delta_n_from_levels<L: AsRef<[f64]>>(levels: &[L], grid: &[f64]) -> Vec<f64> {
    let n = levels.len() as f64;
    grid.iter()
        .map(|&e| {
            let total: usize = levels.iter().map(|l| l.as_ref().partition_point(|&x| x <= e)).sum();
            total as f64 / n - e
        })
        .collect()
}

/// Fraction of spectra whose first positive level is at most `e`.
pub fn empirical_gap_cdf(spectra: &[UnfoldedSpectrum], grid: &[f64]) -> Vec<f64> {
    let firsts: Vec<f64> = spectra.iter().map(|s| s.first().unwrap_or(f64::INFINITY)).collect();
    cdf_on_grid(&firsts, grid)
}

/// Empirical CDF of `samples` evaluated on the grid.
pub fn cdf_on_grid(samples: &[f64], grid: &[f64]) -> Vec<f64> {
    if samples.is_empty() {
        return vec![0.0; grid.len()];
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    grid.iter().map(|&e| sorted.partition_point(|&x| x <= e) as f64 / n).collect()
}

/// Sup-norm distance between two curves on a common grid.
pub fn ks_distance(empirical: &[f64], prediction: &[f64]) -> f64 {
    assert_eq!(empirical.len(), prediction.len(), "curves must share a grid");
    empirical.iter().zip(prediction).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Builds, reduces, solves and unfolds every member, one task per spin.
/// Output order follows the member order.
pub fn solve_members(
    lambda: f64,
    members: &[EnsembleMember],
    window: WindowPolicy,
    solver: &SolverConfig,
) -> Result<Vec<UnfoldedSpectrum>, StatsError> {
    let mut by_spin: BTreeMap<TwoJ, Vec<BlockLabel>> = BTreeMap::new();
    for m in members {
        by_spin.entry(m.two_j).or_default().push(m.block);
    }
    let groups: Vec<(TwoJ, Vec<BlockLabel>)> = by_spin.into_iter().collect();
    let solved: Vec<Result<Vec<(BlockLabel, UnfoldedSpectrum)>, StatsError>> = groups
        .par_iter()
        .map(|(two_j, blocks)| {
            let decomposition = reduce(ModelParams::new(*two_j, lambda)?)?;
            blocks
                .iter()
                .map(|&block| {
                    let reduced = &decomposition[block];
                    let h = &reduced.hamiltonian;
                    let fail = |source| StatsError::Solver { two_j: two_j.value(), block, source };
                    let m = window.m(h.dim());
                    let energies = eigs_near_zero_with(h, m, solver).map_err(fail)?;
                    let raw = RawSpectrum { block, two_j: two_j.value(), lambda, energies, whole_block: m == h.dim() };
                    let unfolded = unfold(raw, zero_tol(h), reduced.topo_index).map_err(fail)?;
                    Ok((block, unfolded))
                })
                .collect()
        })
        .collect();
    let mut table: BTreeMap<EnsembleMember, UnfoldedSpectrum> = BTreeMap::new();
    for (group, result) in groups.iter().zip(solved) {
        for (block, spectrum) in result? {
            table.insert(EnsembleMember { two_j: group.0, block }, spectrum);
        }
    }
    Ok(members.iter().map(|m| table[m].clone()).collect())
}

pub fn run_ensemble(
    spec: &EnsembleSpec,
    window: WindowPolicy,
    solver: &SolverConfig,
    grid: &[f64],
) -> Result<(EmpiricalCurves, Vec<UnfoldedSpectrum>), StatsError> {
    let spectra = solve_members(spec.lambda, &spec.members, window, solver)?;
    let curves = EmpiricalCurves::from_spectra(spec.clone(), &spectra, grid)?;
    Ok((curves, spectra))
}
