//! Eigenvalues nearest zero, mean level spacing and unfolding.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::banded::BandedLu;
use crate::linalg::dense::symmetric_eigenvalues;
use crate::linalg::lanczos::{largest_magnitude, LanczosConfig};
use crate::linalg::LinalgError;
use crate::model::BlockLabel;
use crate::sparse::SparseRealMatrix;
use crate::spinops::TwoJ;

/// Window sizes of the unfolding protocol.
pub const WINDOW_EVEN: usize = 60;
pub const WINDOW_ODD: usize = 61;
/// Zero modes are eigenvalues below this multiple of the max matrix entry.
pub const ZERO_TOL_REL: f64 = 1e-8;
const PROBE_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("window of {m} eigenvalues requested from a {dim}-dimensional matrix")]
    WindowTooLarge { m: usize, dim: usize },
    #[error("window needs at least two eigenvalues, got {0}")]
    WindowTooSmall(usize),
    #[error("shift-invert Lanczos did not converge ({0})")]
    ConvergenceFailure(LinalgError),
    #[error("dense diagonalization failed ({0})")]
    DenseFailure(LinalgError),
    #[error("found {found} zero modes where the symmetry class predicts {expected}")]
    ZeroModeMismatch { expected: u32, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverPath {
    /// Dense at or below the configured threshold, shift-invert above.
    Auto,
    Dense,
    ShiftInvert,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub path: SolverPath,
    pub dense_threshold: usize,
    /// Extra eigenvalues converged beyond the window so the window edge is
    /// never decided by an unconverged Ritz value.
    pub guard: usize,
    /// A pivot below `pivot_floor * max|H|` counts as singular at shift zero.
    pub pivot_floor: f64,
    /// Fallback shift as a multiple of `max|H|`.
    pub reshift: f64,
    /// Eigenvalues below `null_cut * max|H|` are locked in a first pass so
    /// they cannot swamp the convergence test of the rest.
    pub null_cut: f64,
    /// Cap on deflated restarts that search for missed eigenvalues.
    pub max_deflation_rounds: usize,
    pub lanczos: LanczosConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            path: SolverPath::Auto,
            dense_threshold: 512,
            guard: 10,
            pivot_floor: 1e-12,
            reshift: 1e-8,
            null_cut: 1e-6,
            max_deflation_rounds: 16,
            lanczos: LanczosConfig::default(),
        }
    }
}

/// Window size for a block: 61 for odd dimension, 60 for even, capped.
pub fn default_m(block_dim: usize) -> usize {
    let m = if block_dim % 2 == 1 { WINDOW_ODD } else { WINDOW_EVEN };
    m.min(block_dim)
}

/// The `m` eigenvalues of smallest magnitude, ascending.
pub fn eigs_near_zero(matrix: &SparseRealMatrix, m: usize) -> Result<Vec<f64>, EigenError> {
    eigs_near_zero_with(matrix, m, &SolverConfig::default())
}

pub fn eigs_near_zero_with(matrix: &SparseRealMatrix, m: usize, cfg: &SolverConfig) -> Result<Vec<f64>, EigenError> {
    let n = matrix.dim();
    if m > n {
        return Err(EigenError::WindowTooLarge { m, dim: n });
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    let dense = match cfg.path {
        SolverPath::Dense => true,
        SolverPath::ShiftInvert => false,
        SolverPath::Auto => n <= cfg.dense_threshold,
    };
    let all = if dense {
        symmetric_eigenvalues(&matrix.to_dense(), n).map_err(EigenError::DenseFailure)?
    } else {
        shift_invert(matrix, m, cfg)?
    };
    Ok(nearest_zero(all, m))
}

fn nearest_zero(mut values: Vec<f64>, m: usize) -> Vec<f64> {
    values.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    values.truncate(m);
    values.sort_by(f64::total_cmp);
    values
}

/// Shift-invert Lanczos at zero with Rayleigh-quotient refinement. A
/// deflated second search confirms that no eigenvalue closer to the shift
/// than the converged set was missed.
fn shift_invert(h: &SparseRealMatrix, m: usize, cfg: &SolverConfig) -> Result<Vec<f64>, EigenError> {
    let n = h.dim();
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    let lu = match BandedLu::factor_shifted(h, 0.0) {
        Ok(lu) if lu.min_pivot() > cfg.pivot_floor * scale => lu,
        _ => BandedLu::factor_shifted(h, cfg.reshift * scale).map_err(EigenError::ConvergenceFailure)?,
    };
    let apply = |x: &[f64], y: &mut [f64]| {
        y.copy_from_slice(x);
        lu.solve_in_place(y);
    };
    let want = (m + cfg.guard).min(n);
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut probe = cfg.lanczos;
    // Pairs come back by decreasing |theta|, so null vectors lead; a run that
    // returns any regular pair has exposed all of them.
    'null: while locked.len() < want {
        probe.seed = probe.seed.wrapping_add(0x9e37);
        let top = largest_magnitude(apply, n, 1, &locked, &probe).map_err(EigenError::ConvergenceFailure)?;
        if top.is_empty() {
            break;
        }
        for p in top {
            if rayleigh(h, &p.vector).abs() >= cfg.null_cut * scale {
                break 'null;
            }
            locked.push(p.vector);
        }
    }
    let rest = want - locked.len();
    let first = largest_magnitude(apply, n, rest, &locked, &cfg.lanczos).map_err(EigenError::ConvergenceFailure)?;
    locked.extend(first.into_iter().take(rest).map(|p| p.vector));

    // A probe only has to decide whether anything below the cut remains.
    probe.tol = cfg.lanczos.tol.max(PROBE_TOL);
    for round in 0..cfg.max_deflation_rounds {
        if locked.len() >= n {
            break;
        }
        let cut = locked.iter().map(|x| rayleigh(h, x).abs()).fold(0.0f64, f64::max);
        probe.seed = cfg.lanczos.seed.wrapping_add(round as u64 + 1);
        let extra = largest_magnitude(apply, n, 1, &locked, &probe).map_err(EigenError::ConvergenceFailure)?;
        let missed: Vec<Vec<f64>> =
            extra.into_iter().filter(|p| rayleigh(h, &p.vector).abs() < cut).map(|p| p.vector).collect();
        if missed.is_empty() {
            break;
        }
        locked.extend(missed);
    }
    Ok(locked.iter().map(|x| rayleigh(h, x)).collect())
}

fn rayleigh(h: &SparseRealMatrix, x: &[f64]) -> f64 {
    let hx = h.mul_vec(x);
    let num: f64 = hx.iter().zip(x).map(|(a, b)| a * b).sum();
    let den: f64 = x.iter().map(|a| a * a).sum();
    num / den
}

/// The eigenvalue window of one block, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSpectrum {
    pub block: BlockLabel,
    pub two_j: u32,
    pub lambda: f64,
    pub energies: Vec<f64>,
    /// Set when the window is the entire block spectrum.
    pub whole_block: bool,
}

impl RawSpectrum {
    pub fn m(&self) -> usize {
        self.energies.len()
    }

    pub fn spin(&self) -> TwoJ {
        TwoJ::new(self.two_j)
    }
}

/// Positive unfolded eigenvalues `e_n = E_n / mean_spacing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfoldedSpectrum {
    pub raw: RawSpectrum,
    pub mean_spacing: f64,
    pub e: Vec<f64>,
    pub zero_modes_removed: usize,
}

impl UnfoldedSpectrum {
    /// Smallest positive unfolded eigenvalue.
    pub fn first(&self) -> Option<f64> {
        self.e.first().copied()
    }

    pub fn max_e(&self) -> f64 {
        self.e.last().copied().unwrap_or(0.0)
    }
}

/// Default zero-mode threshold for a matrix.
pub fn zero_tol(matrix: &SparseRealMatrix) -> f64 {
    ZERO_TOL_REL * matrix.max_abs()
}

/// Spacing comes from the full window, zero modes included; exactly `nu`
/// eigenvalues with `|E| < zero_tol` must be present and are dropped.
pub fn unfold(raw: RawSpectrum, zero_tol: f64, nu: u32) -> Result<UnfoldedSpectrum, EigenError> {
    let m = raw.m();
    if m < 2 {
        return Err(EigenError::WindowTooSmall(m));
    }
    let found = raw.energies.iter().filter(|e| e.abs() < zero_tol).count();
    if found != nu as usize {
        return Err(EigenError::ZeroModeMismatch { expected: nu, found });
    }
    let mean_spacing = (raw.energies[m - 1] - raw.energies[0]) / (m - 1) as f64;
    let e = raw.energies.iter().filter(|&&x| x >= zero_tol).map(|x| x / mean_spacing).collect();
    Ok(UnfoldedSpectrum { raw, mean_spacing, e, zero_modes_removed: found })
}

/// `max_n |E_n + E_{M+1-n}|` over an ascending window.
pub fn mirror_residual(energies: &[f64]) -> f64 {
    let m = energies.len();
    (0..m).map(|i| (energies[i] + energies[m - 1 - i]).abs()).fold(0.0, f64::max)
}

/// Mirror residual of two blocks related by the chirality operator, taken on
/// the union of their windows.
pub fn mirror_residual_union(a: &[f64], b: &[f64]) -> f64 {
    let mut u: Vec<f64> = a.iter().chain(b).copied().collect();
    u.sort_by(f64::total_cmp);
    mirror_residual(&u)
}
