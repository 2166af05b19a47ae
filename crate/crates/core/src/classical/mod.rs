//! Classical limit: two unit vectors `L` and `M` on spheres with
//! `H = (1 + lambda)(L_z + M_z) + 4 (1 - lambda) L_x M_x`.
//!
//! Canonical chart: `L = (sqrt(1 - P1^2) cos Q1, sqrt(1 - P1^2) sin Q1, P1)`,
//! likewise `M` with `(P2, Q2)`. Integration runs on the six Cartesian
//! components; the chart is only used for input and output.

pub mod ode;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use ode::{Integrator, OdeError, StepControls};

/// Distance from the poles below which the canonical chart is refused.
pub const CHART_MARGIN: f64 = 1e-9;
/// Largest tolerated `|H(t) - H(0)|` while recording a section.
pub const SHELL_TOL: f64 = 1e-6;
/// Separation at which the Lyapunov estimate stops.
pub const SATURATION: f64 = 0.1;
pub const DEFAULT_EPSILON: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassicalError {
    #[error("|P| = {p} is within {CHART_MARGIN} of a pole of the canonical chart")]
    ChartSingularity { p: f64 },
    #[error("integration failed: {0}")]
    StepFailure(#[from] OdeError),
    #[error("energy drifted by {drift} at t = {t}, leaving the shell")]
    LostShell { t: f64, drift: f64 },
    #[error("momentum {0} outside [-1, 1]")]
    InvalidPoint(f64),
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint {
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
}

impl PhaseSpacePoint {
    pub fn new(p1: f64, q1: f64, p2: f64, q2: f64) -> Result<Self, ClassicalError> {
        for p in [p1, p2] {
            if !(-1.0..=1.0).contains(&p) {
                return Err(ClassicalError::InvalidPoint(p));
            }
        }
        Ok(Self { p1, q1, p2, q2 })
    }

    pub fn to_cartesian(self) -> CartesianState {
        let s1 = (1.0 - self.p1 * self.p1).max(0.0).sqrt();
        let s2 = (1.0 - self.p2 * self.p2).max(0.0).sqrt();
        CartesianState([
            s1 * self.q1.cos(),
            s1 * self.q1.sin(),
            self.p1,
            s2 * self.q2.cos(),
            s2 * self.q2.sin(),
            self.p2,
        ])
    }

    /// Angles land in `[0, 2 pi)`.
    pub fn from_cartesian(s: &CartesianState) -> Self {
        let [lx, ly, lz, mx, my, mz] = s.0;
        Self {
            p1: lz.clamp(-1.0, 1.0),
            q1: ly.atan2(lx).rem_euclid(TAU),
            p2: mz.clamp(-1.0, 1.0),
            q2: my.atan2(mx).rem_euclid(TAU),
        }
    }

    /// `L_y = sqrt(1 - P1^2) sin Q1`.
    pub fn l_y(&self) -> f64 {
        (1.0 - self.p1 * self.p1).max(0.0).sqrt() * self.q1.sin()
    }
}

/// `(L_x, L_y, L_z, M_x, M_y, M_z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState(pub [f64; 6]);

impl CartesianState {
    pub fn l_norm(&self) -> f64 {
        self.0[..3].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn m_norm(&self) -> f64 {
        self.0[3..].iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub fn hamiltonian_value(x: &PhaseSpacePoint, lambda: f64) -> f64 {
    let s1 = (1.0 - x.p1 * x.p1).max(0.0).sqrt();
    let s2 = (1.0 - x.p2 * x.p2).max(0.0).sqrt();
    (1.0 + lambda) * (x.p1 + x.p2) + 4.0 * (1.0 - lambda) * s1 * s2 * x.q1.cos() * x.q2.cos()
}

pub fn hamiltonian_cartesian(s: &[f64; 6], lambda: f64) -> f64 {
    (1.0 + lambda) * (s[2] + s[5]) + 4.0 * (1.0 - lambda) * s[0] * s[3]
}

/// `(dP1, dQ1, dP2, dQ2)/dt` with `dQ = dH/dP` and `dP = -dH/dQ`.
pub fn equations_of_motion(x: &PhaseSpacePoint, lambda: f64) -> Result<[f64; 4], ClassicalError> {
    for p in [x.p1, x.p2] {
        if 1.0 - p.abs() < CHART_MARGIN {
            return Err(ClassicalError::ChartSingularity { p });
        }
    }
    let s1 = (1.0 - x.p1 * x.p1).sqrt();
    let s2 = (1.0 - x.p2 * x.p2).sqrt();
    let (c1, c2) = (x.q1.cos(), x.q2.cos());
    let g = 4.0 * (1.0 - lambda);
    Ok([
        g * s1 * x.q1.sin() * s2 * c2,
        (1.0 + lambda) - g * x.p1 / s1 * c1 * s2 * c2,
        g * s1 * c1 * s2 * x.q2.sin(),
        (1.0 + lambda) - g * x.p2 / s2 * c2 * s1 * c1,
    ])
}

/// `dL/dt = grad_L H x L` and likewise for `M`; at `lambda = 1` both vectors
/// precess about `z` with angular velocity 2.
pub fn cartesian_flow(s: &[f64; 6], lambda: f64) -> [f64; 6] {
    let g = 4.0 * (1.0 - lambda);
    let b = 1.0 + lambda;
    let (al, am) = (g * s[3], g * s[0]);
    [-b * s[1], b * s[0] - al * s[2], al * s[1], -b * s[4], b * s[3] - am * s[5], am * s[4]]
}

/// Chart velocities induced by a Cartesian velocity.
pub fn chart_velocity(s: &[f64; 6], ds: &[f64; 6]) -> [f64; 4] {
    let dq = |x: f64, y: f64, dx: f64, dy: f64| (x * dy - y * dx) / (x * x + y * y);
    [ds[2], dq(s[0], s[1], ds[0], ds[1]), ds[5], dq(s[3], s[4], ds[3], ds[4])]
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IntegrationControls {
    pub step: StepControls,
    /// Rescale `L` and `M` to unit length after every step.
    pub renormalize: bool,
    /// Sample spacing; `None` records every accepted step.
    pub sample_dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub lambda: f64,
    pub samples: Vec<(f64, PhaseSpacePoint)>,
    /// `max_t |H(t) - H(0)|`.
    pub energy_drift: f64,
    /// `max_t max(| |L| - 1 |, | |M| - 1 |)`.
    pub norm_drift: f64,
    pub end: CartesianState,
}

fn normalize(s: &mut [f64; 6]) {
    for half in s.chunks_mut(3) {
        let n = half.iter().map(|v| v * v).sum::<f64>().sqrt();
        half.iter_mut().for_each(|v| *v /= n);
    }
}

/// Integrates from `t = 0` to `t_end`, backwards when `t_end < 0`.
pub fn integrate(
    x0: &PhaseSpacePoint,
    lambda: f64,
    t_end: f64,
    controls: &IntegrationControls,
) -> Result<Trajectory, ClassicalError> {
    integrate_cartesian(x0.to_cartesian(), lambda, t_end, controls)
}

pub fn integrate_cartesian(
    start: CartesianState,
    lambda: f64,
    t_end: f64,
    controls: &IntegrationControls,
) -> Result<Trajectory, ClassicalError> {
    let h0 = hamiltonian_cartesian(&start.0, lambda);
    let mut it =
        Integrator::new(|_, y: &[f64; 6]| cartesian_flow(y, lambda), 0.0, start.0, t_end >= 0.0, controls.step);
    let mut samples = vec![(0.0, PhaseSpacePoint::from_cartesian(&start))];
    let mut energy_drift = 0.0f64;
    let mut norm_drift = 0.0f64;
    let mut taken = 1u32;
    while it.t() != t_end {
        it.step(t_end)?;
        if controls.renormalize {
            it.modify_state(normalize);
        }
        if let Some(dt) = controls.sample_dt {
            let sample_at = |k: u32| f64::from(k) * dt.abs() * t_end.signum();
            while (it.t() - sample_at(taken)) * t_end.signum() >= 0.0 {
                let y = it.dense(sample_at(taken));
                samples.push((sample_at(taken), PhaseSpacePoint::from_cartesian(&CartesianState(y))));
                taken += 1;
            }
        } else {
            samples.push((it.t(), PhaseSpacePoint::from_cartesian(&CartesianState(*it.y()))));
        }
        let s = CartesianState(*it.y());
        energy_drift = energy_drift.max((hamiltonian_cartesian(&s.0, lambda) - h0).abs());
        norm_drift = norm_drift.max((s.l_norm() - 1.0).abs()).max((s.m_norm() - 1.0).abs());
    }
    Ok(Trajectory { lambda, samples, energy_drift, norm_drift, end: CartesianState(*it.y()) })
}

/// `count` points with `Q2 = pi/2` and `P2 = -P1`, where the coupling term
/// vanishes and `H = 0` for every `lambda`. `P1` and `Q1` are uniform, which
/// is the uniform measure on the first sphere.
pub fn sample_energy_shell(lambda: f64, seed: u64, count: usize) -> Vec<PhaseSpacePoint> {
    let _ = lambda;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let p1: f64 = rng.random_range(-1.0..=1.0);
            let q1: f64 = rng.random_range(0.0..TAU);
            PhaseSpacePoint { p1, q1, p2: -p1, q2: FRAC_PI_2 }
        })
        .collect()
}

/// Which passages through `Q2 = pi/2` are recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SectionDirection {
    /// `dQ2/dt > 0`.
    #[default]
    Positive,
    Negative,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    /// Folded into `[0, pi)`.
    pub q1: f64,
    pub p1: f64,
    pub crossing_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionOptions {
    pub direction: SectionDirection,
    pub step: StepControls,
    /// Crossing times are bracketed to this width.
    pub time_tol: f64,
    /// Integration stops here even if fewer crossings were found.
    pub max_time: f64,
}

impl Default for SectionOptions {
    fn default() -> Self {
        Self { direction: SectionDirection::Positive, step: StepControls::default(), time_tol: 1e-10, max_time: 1e6 }
    }
}

pub fn poincare_section(
    x0: &PhaseSpacePoint,
    lambda: f64,
    n_crossings: usize,
    direction: SectionDirection,
) -> Result<Vec<SectionPoint>, ClassicalError> {
    poincare_section_with(x0, lambda, n_crossings, &SectionOptions { direction, ..SectionOptions::default() })
}

/// `Q2 = pi/2` is `M_x = 0` with `M_y > 0`; there `dQ2/dt > 0` exactly when
/// `M_x` decreases.
pub fn poincare_section_with(
    x0: &PhaseSpacePoint,
    lambda: f64,
    n_crossings: usize,
    options: &SectionOptions,
) -> Result<Vec<SectionPoint>, ClassicalError> {
    let start = x0.to_cartesian();
    let h0 = hamiltonian_cartesian(&start.0, lambda);
    let mut it = Integrator::new(|_, y: &[f64; 6]| cartesian_flow(y, lambda), 0.0, start.0, true, options.step);
    let mut points = Vec::with_capacity(n_crossings);
    while points.len() < n_crossings && it.t() < options.max_time {
        it.step(options.max_time)?;
        let (before, after) = (it.y_prev()[3], it.y()[3]);
        let drift = (hamiltonian_cartesian(it.y(), lambda) - h0).abs();
        if drift > SHELL_TOL {
            return Err(ClassicalError::LostShell { t: it.t(), drift });
        }
        let wanted = match options.direction {
            SectionDirection::Positive => before > 0.0 && after <= 0.0,
            SectionDirection::Negative => before < 0.0 && after >= 0.0,
            SectionDirection::Both => (before > 0.0 && after <= 0.0) || (before < 0.0 && after >= 0.0),
        };
        // A start on the surface is not a crossing.
        if !wanted || (it.t_prev() == 0.0 && start.0[3].abs() < CHART_MARGIN) {
            continue;
        }
        let (mut lo, mut hi) = (it.t_prev(), it.t());
        while hi - lo > options.time_tol {
            let mid = 0.5 * (lo + hi);
            if (it.dense(mid)[3] > 0.0) == (before > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_cross = 0.5 * (lo + hi);
        let y = it.dense(t_cross);
        if y[4] <= 0.0 {
            continue;
        }
        let p = PhaseSpacePoint::from_cartesian(&CartesianState(y));
        points.push(SectionPoint { q1: p.q1.rem_euclid(PI), p1: p.p1, crossing_time: t_cross });
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSample {
    pub t: f64,
    /// `(1/t) ln(delta / epsilon)`.
    pub lambda_eps: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub series: Vec<LyapunovSample>,
    /// `lambda_eps` at the last sample before the separation first reached
    /// `SATURATION`, or at the cutoff.
    pub summary: f64,
    pub summary_time: f64,
    /// Set when the separation saturated before `t_cutoff`.
    pub saturated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovOptions {
    pub epsilon: f64,
    pub t_cutoff: f64,
    pub sample_dt: f64,
    pub step: StepControls,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        Self { epsilon: DEFAULT_EPSILON, t_cutoff: 1e3, sample_dt: 0.1, step: StepControls::default() }
    }
}

/// Euclidean distance in `(P1, Q1, P2, Q2)` with angle differences wrapped
/// into `(-pi, pi]`.
pub fn chart_distance(a: &PhaseSpacePoint, b: &PhaseSpacePoint) -> f64 {
    let wrap = |d: f64| {
        let r = d.rem_euclid(TAU);
        if r > PI {
            r - TAU
        } else {
            r
        }
    };
    let d = [a.p1 - b.p1, wrap(a.q1 - b.q1), a.p2 - b.p2, wrap(a.q2 - b.q2)];
    d.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn lyapunov_estimate(
    x0: &PhaseSpacePoint,
    lambda: f64,
    epsilon: f64,
    t_cutoff: f64,
) -> Result<LyapunovEstimate, ClassicalError> {
    lyapunov_estimate_with(x0, lambda, &LyapunovOptions { epsilon, t_cutoff, ..LyapunovOptions::default() })
}

/// Co-integrates `x0` and `x0 + epsilon (1, 1, 1, 1)/2` under one step-size
/// sequence so that the separation is not swamped by independent truncation
/// errors.
pub fn lyapunov_estimate_with(
    x0: &PhaseSpacePoint,
    lambda: f64,
    options: &LyapunovOptions,
) -> Result<LyapunovEstimate, ClassicalError> {
    let eps = options.epsilon;
    if eps <= 0.0 || eps.is_nan() {
        return Err(ClassicalError::InvalidEpsilon(eps));
    }
    let shifted =
        PhaseSpacePoint { p1: x0.p1 + 0.5 * eps, q1: x0.q1 + 0.5 * eps, p2: x0.p2 + 0.5 * eps, q2: x0.q2 + 0.5 * eps };
    for p in [shifted.p1, shifted.p2] {
        if 1.0 - p.abs() < CHART_MARGIN {
            return Err(ClassicalError::ChartSingularity { p });
        }
    }
    let (a, b) = (x0.to_cartesian().0, shifted.to_cartesian().0);
    let mut y0 = [0.0; 12];
    y0[..6].copy_from_slice(&a);
    y0[6..].copy_from_slice(&b);
    let flow = |_: f64, y: &[f64; 12]| {
        let mut out = [0.0; 12];
        let (ya, yb) = y.split_at(6);
        out[..6].copy_from_slice(&cartesian_flow(ya.try_into().expect("six components"), lambda));
        out[6..].copy_from_slice(&cartesian_flow(yb.try_into().expect("six components"), lambda));
        out
    };
    let separation = |y: &[f64; 12]| {
        let pa = PhaseSpacePoint::from_cartesian(&CartesianState(y[..6].try_into().expect("six components")));
        let pb = PhaseSpacePoint::from_cartesian(&CartesianState(y[6..].try_into().expect("six components")));
        chart_distance(&pa, &pb)
    };
    let mut it = Integrator::new(flow, 0.0, y0, true, options.step);
    let mut series = Vec::new();
    let mut taken = 1u32;
    let mut saturated = false;
    'outer: while it.t() < options.t_cutoff {
        it.step(options.t_cutoff)?;
        loop {
            let next = f64::from(taken) * options.sample_dt;
            if next > it.t() + 1e-12 {
                break;
            }
            let delta = separation(&it.dense(next));
            if delta >= SATURATION {
                saturated = next < options.t_cutoff;
                break 'outer;
            }
            series.push(LyapunovSample { t: next, lambda_eps: (delta / eps).ln() / next, delta });
            taken += 1;
        }
    }
    let (summary, summary_time) = series.last().map_or((0.0, 0.0), |s| (s.lambda_eps, s.t));
    Ok(LyapunovEstimate { series, summary, summary_time, saturated })
}

/// Sections of several starting points, in input order.
pub fn sections_for_points(
    points: &[PhaseSpacePoint],
    lambda: f64,
    n_crossings: usize,
    options: &SectionOptions,
) -> Result<Vec<Vec<SectionPoint>>, ClassicalError> {
    points.par_iter().map(|x| poincare_section_with(x, lambda, n_crossings, options)).collect()
}

/// Lyapunov estimates of several starting points, in input order.
pub fn lyapunov_for_points(
    points: &[PhaseSpacePoint],
    lambda: f64,
    options: &LyapunovOptions,
) -> Result<Vec<LyapunovEstimate>, ClassicalError> {
    points.par_iter().map(|x| lyapunov_estimate_with(x, lambda, options)).collect()
}
