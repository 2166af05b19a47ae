//! Random-matrix predictions near the symmetry point: microscopic densities,
//! counting-function deviations and first-eigenvalue distributions.

pub mod sampling;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::SymmetryClass;
use crate::quad::{integrate, integrate_panels};
use crate::special::{bessel_j, bessel_j_integral, bessel_j_signed, erf};

/// Reference statistics compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryClassId {
    AiGoe,
    AiPoisson,
    Bdi0,
    Bdi1,
    Ci,
}

impl SymmetryClassId {
    pub const ALL: [SymmetryClassId; 5] = [
        SymmetryClassId::AiGoe,
        SymmetryClassId::AiPoisson,
        SymmetryClassId::Bdi0,
        SymmetryClassId::Bdi1,
        SymmetryClassId::Ci,
    ];

    /// The chaotic-limit reference for a block class. AI maps to GOE; the
    /// Poisson alternative is never the default.
    pub fn from_class(class: SymmetryClass) -> Option<Self> {
        match class {
            SymmetryClass::AI => Some(SymmetryClassId::AiGoe),
            SymmetryClass::Bdi(0) => Some(SymmetryClassId::Bdi0),
            SymmetryClass::Bdi(1) => Some(SymmetryClassId::Bdi1),
            SymmetryClass::Bdi(_) => None,
            SymmetryClass::CI => Some(SymmetryClassId::Ci),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SymmetryClassId::AiGoe => "ai-goe",
            SymmetryClassId::AiPoisson => "ai-poisson",
            SymmetryClassId::Bdi0 => "bdi0",
            SymmetryClassId::Bdi1 => "bdi1",
            SymmetryClassId::Ci => "ci",
        }
    }
}

impl fmt::Display for SymmetryClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SymmetryClassId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SymmetryClassId::ALL
            .into_iter()
            .find(|c| c.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown class '{s}' (expected ai-goe, ai-poisson, bdi0, bdi1 or ci)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    /// Microscopic density `d(e)`, smooth part.
    Density,
    /// Counting-function deviation `int_0^e (d - 1)`.
    DeltaN,
    /// First-eigenvalue distribution `I(e)`.
    Gap,
}

impl FromStr for CurveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "d" | "density" => Ok(CurveKind::Density),
            "delta-n" => Ok(CurveKind::DeltaN),
            "gap" => Ok(CurveKind::Gap),
            other => Err(format!("unknown curve '{other}' (expected d, delta-n or gap)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionCurve {
    pub class_id: SymmetryClassId,
    pub kind: CurveKind,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// Smooth part of the chiral orthogonal density with `nu` zero modes.
pub fn d_bdi(nu: u32, e: f64) -> f64 {
    let x = PI * e.abs();
    let n = nu as i32;
    let jn = bessel_j(nu, x);
    let integral = if nu == 1 { 1.0 - bessel_j(0, x) } else { bessel_j_integral(nu, x) };
    let wronskian = jn * jn - bessel_j_signed(n - 1, x) * bessel_j_signed(n + 1, x);
    0.5 * PI * (x * wronskian + jn * (1.0 - integral))
}

/// Density of the antichiral orthogonal class, closed form.
pub fn d_ci(e: f64) -> f64 {
    let x = PI * e.abs();
    let (j0, j1) = (bessel_j(0, x), bessel_j(1, x));
    0.5 * PI * x * (j0 * j0 + j1 * j1) - 0.5 * PI * j0 * j1
}

/// Density of the antichiral orthogonal class as `(pi/2) int_0^{pi e} J0 J1 / z`.
pub fn d_ci_integral_form(e: f64) -> f64 {
    let x = PI * e.abs();
    let f = |z: f64| if z == 0.0 { 0.5 } else { bessel_j(0, z) * bessel_j(1, z) / z };
    let panels = (x / 2.0).ceil().max(1.0) as usize;
    0.5 * PI * integrate_panels(f, 0.0, x, panels, 1e-14, 0.0).value
}

/// Smooth density for a class; Wigner-Dyson classes are flat.
pub fn density(class_id: SymmetryClassId, e: f64) -> f64 {
    match class_id {
        SymmetryClassId::AiGoe | SymmetryClassId::AiPoisson => 1.0,
        SymmetryClassId::Bdi0 => d_bdi(0, e),
        SymmetryClassId::Bdi1 => d_bdi(1, e),
        SymmetryClassId::Ci => d_ci(e),
    }
}

/// `delta N(e) = int_0^e (d(e') - 1) de'` accumulated panel by panel
/// along an ascending grid that starts at zero.
pub fn delta_n_prediction(class_id: SymmetryClassId, grid: &[f64]) -> PredictionCurve {
    assert!(grid.first().is_none_or(|&g| g == 0.0), "grid must start at 0");
    assert!(grid.windows(2).all(|w| w[0] < w[1]), "grid must be strictly ascending");
    let mut values = Vec::with_capacity(grid.len());
    let flat = matches!(class_id, SymmetryClassId::AiGoe | SymmetryClassId::AiPoisson);
    let mut acc = 0.0;
    for (i, &e) in grid.iter().enumerate() {
        if i > 0 && !flat {
            acc += integrate(|x| density(class_id, x) - 1.0, grid[i - 1], e, 1e-12, 0.0).value;
        }
        values.push(acc);
    }
    PredictionCurve { class_id, kind: CurveKind::DeltaN, grid: grid.to_vec(), values }
}

/// Probability that the first positive unfolded eigenvalue is at most `e`.
pub fn gap_cdf(class_id: SymmetryClassId, e: f64) -> f64 {
    let e = e.max(0.0);
    let a = PI * PI * e * e / 8.0;
    match class_id {
        SymmetryClassId::AiGoe => erf(PI.sqrt() * e / 2.0),
        SymmetryClassId::AiPoisson => -(-e).exp_m1(),
        SymmetryClassId::Bdi0 => -(-(a + PI * e / 2.0)).exp_m1(),
        SymmetryClassId::Bdi1 | SymmetryClassId::Ci => -(-a).exp_m1(),
    }
}

/// Nearest-neighbour spacing density `(pi s / 2) exp(-pi s^2 / 4)`.
pub fn wigner_surmise(s: f64) -> f64 {
    0.5 * PI * s * (-0.25 * PI * s * s).exp()
}

pub fn wigner_surmise_cdf(s: f64) -> f64 {
    -(-0.25 * PI * s * s).exp_m1()
}

/// First-level distribution of a spectrum without a special point, built
/// from the spacing law: `int_0^e s P(s) ds + e int_e^inf P(s) ds`.
pub fn goe_gap_from_spacing(e: f64) -> f64 {
    if e <= 0.0 {
        return 0.0;
    }
    let inner = integrate(|s| s * wigner_surmise(s), 0.0, e, 1e-14, 0.0).value;
    // P(s) < 1e-40 beyond s = e + 12.
    let tail = integrate(wigner_surmise, e, e + 12.0, 1e-15, 0.0).value;
    inner + e * tail
}

/// Values of one prediction curve on a grid.
pub fn predict(class_id: SymmetryClassId, kind: CurveKind, grid: &[f64]) -> PredictionCurve {
    match kind {
        CurveKind::DeltaN => delta_n_prediction(class_id, grid),
        CurveKind::Density => PredictionCurve {
            class_id,
            kind,
            grid: grid.to_vec(),
            values: grid.iter().map(|&e| density(class_id, e)).collect(),
        },
        CurveKind::Gap => PredictionCurve {
            class_id,
            kind,
            grid: grid.to_vec(),
            values: grid.iter().map(|&e| gap_cdf(class_id, e)).collect(),
        },
    }
}

/// `points` equally spaced values on `[0, emax]`.
pub fn uniform_grid(emax: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && emax > 0.0);
    (0..points).map(|i| emax * i as f64 / (points - 1) as f64).collect()
}
