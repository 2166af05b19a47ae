//! Acceptance suite: one PASS/FAIL line per criterion, sub-checks indented
//! beneath it. Runs as a plain binary (`harness = false`) so the report is
//! always printed. The process fails only on a criterion outside
//! `KNOWN_FAILURES`.
//!
//! The ensemble criteria (7, 8) solve several hundred blocks with up to
//! 22 000 rows each and take tens of minutes on one core.

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;
use std::time::Instant;

use coupled_tops::classical::{
    integrate, lyapunov_for_points, poincare_section, sample_energy_shell, sections_for_points, IntegrationControls,
    LyapunovOptions, SectionDirection, SectionOptions,
};
use coupled_tops::cli::dispatch;
use coupled_tops::eigen::{default_m, eigs_near_zero_with, SolverConfig, SolverPath, UnfoldedSpectrum};
use coupled_tops::linalg::dense::symmetric_eigenvalues;
use coupled_tops::model::{
    build_chirality, build_hamiltonian, build_u1, build_u2, reduce, subspace_dimensions, BlockLabel, ModelParams,
    SymmetryClass,
};
use coupled_tops::rmt::sampling::sample_chgoe;
use coupled_tops::rmt::{
    d_bdi, d_ci, delta_n_prediction, gap_cdf, goe_gap_from_spacing, uniform_grid, SymmetryClassId,
};
use coupled_tops::special::{bessel_j, erf};
use coupled_tops::spinops::TwoJ;
use coupled_tops::stats::{
    cdf_on_grid, ks_distance, solve_members, EmpiricalCurves, EnsembleMember, EnsembleSpec, WindowPolicy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SYMMETRY_TOL: f64 = 1e-12;
const ZERO_MODE_TOL: f64 = 1e-8;
const EXACT_TOL: f64 = 1e-12;
const SOLVER_TOL: f64 = 1e-9;
const ANALYTIC_TOL: f64 = 1e-9;
const BESSEL_TOL: f64 = 1e-10;
const HIST_SIGMAS: f64 = 3.0;
const MC_KS_TOL: f64 = 0.03;
const DELTA_N_TOL: f64 = 0.1;
const ENSEMBLE_KS_TOL: f64 = 0.08;
const MIN_SPECTRA: usize = 120;
const CROSSOVER_DEVIATION: f64 = 0.1;
const DRIFT_TOL: f64 = 1e-9;
const PERIOD_TOL: f64 = 1e-8;
const IDENTITY_TOL: f64 = 1e-6;
const LEVEL_CURVE_TOL: f64 = 0.05;

/// Criteria expected to fail, with the reason. See the project notes.
const KNOWN_FAILURES: &[(u32, &str)] = &[
    (
        7,
        "with 120-220 spectra per class the thresholds sit near the median of their own sampling noise; \
         ideal chGOE/GOE ensembles of 121 spectra pass a class only about 30% of the time \
         (see examples/ensemble_power.rs)",
    ),
    (
        9,
        "near lambda = 1 the section conserves (1 - P1^2) sin Q1, not L_y; the L_y spread stays near 0.2 as lambda -> 1",
    ),
];

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new(id: u32, title: &'static str) -> Self {
        Self { id, title, pass: true, lines: Vec::new() }
    }

    /// Records a sub-check; the criterion passes only if all of them do.
    fn check(&mut self, ok: bool, text: String) {
        self.pass &= ok;
        self.lines.push(format!("{} {text}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, text: String) {
        self.lines.push(format!("     {text}"));
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn dense_eigs(m: &coupled_tops::sparse::SparseRealMatrix) -> Vec<f64> {
    symmetric_eigenvalues(&m.to_dense(), m.dim()).expect("dense diagonalization")
}

const LAMBDAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn criterion_1() -> Outcome {
    let mut o = Outcome::new(1, "exact symmetries, block residuals and dimensions");
    let (mut inv, mut chiral, mut block, mut dims_ok) = (0.0f64, 0.0f64, 0.0f64, true);
    for tj in 1..=24u32 {
        let two_j = TwoJ::new(tj);
        let (u1, u2, c) = (build_u1(two_j), build_u2(two_j), build_chirality(two_j));
        let ct = c.transpose();
        let d = subspace_dimensions(two_j);
        // Closed forms in quarter units to stay in integers.
        let j4 = 2 * tj as i64;
        let n_pp = if tj % 2 == 0 { (j4 + 4) * (j4 + 4) / 16 } else { ((j4 + 4) * (j4 + 4) - 4) / 16 };
        let n_pm = (tj as i64 + 1) * (tj as i64 + 2) / 2 - n_pp;
        let n_mp = n_pp - (tj as i64 + 1);
        let expected = [n_pp, n_pm, n_mp, n_pm];
        let got = BlockLabel::ALL.map(|b| d.get(b) as i64);
        dims_ok &= got == expected && got.iter().sum::<i64>() == (tj as i64 + 1).pow(2);
        for lambda in LAMBDAS {
            let params = ModelParams::new(two_j, lambda).unwrap();
            let h = build_hamiltonian(params);
            inv = inv.max(u1.matmul(&h).matmul(&u1.transpose()).sub(&h).max_abs());
            inv = inv.max(u2.matmul(&h).matmul(&u2.transpose()).sub(&h).max_abs());
            chiral = chiral.max(c.matmul(&h).matmul(&ct).add(&h).max_abs());
            let dec = reduce(params).unwrap();
            let r = dec.residuals;
            block = block.max(r.cross_block).max(r.anticommutator).max(r.chirality_leakage).max(r.orthonormality);
        }
    }
    o.check(inv <= SYMMETRY_TOL, format!("max |U H U^T - H| = {inv:.2e} (tol {SYMMETRY_TOL:.0e})"));
    o.check(chiral <= SYMMETRY_TOL, format!("max |C H C^-1 + H| = {chiral:.2e} (tol {SYMMETRY_TOL:.0e})"));
    o.check(block <= SYMMETRY_TOL, format!("max block residual = {block:.2e} (tol {SYMMETRY_TOL:.0e})"));
    o.check(dims_ok, "block dimensions equal the closed forms for 2j = 1..24".into());
    o
}

/// Alternating-sign count of the unpaired chirality eigenvalues: in PP the
/// states `|0,0>` and `|m,-m> + |-m,m>` (m = 1..j) map to themselves with
/// sign `(-1)^(j+m)`; in MP the antisymmetric partners carry the opposite
/// sign and `m = 0` is absent.
fn index_by_counting(j: i64, label: BlockLabel) -> u32 {
    let sign = |m: i64| if (j + m) % 2 == 0 { 1i64 } else { -1 };
    let s: i64 = match label {
        BlockLabel::PP => (0..=j).map(sign).sum(),
        BlockLabel::MP => -(1..=j).map(sign).sum::<i64>(),
        _ => unreachable!(),
    };
    s.unsigned_abs() as u32
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new(2, "topological index and zero modes");
    let (mut sum_ok, mut oracle_ok, mut modes_ok) = (true, true, true);
    let mut convention = String::new();
    for j in 1..=24u32 {
        let two_j = TwoJ::new(2 * j);
        let dec = reduce(ModelParams::new(two_j, 0.5).unwrap()).unwrap();
        let nu = |b: BlockLabel| dec[b].topo_index;
        sum_ok &= nu(BlockLabel::PP) + nu(BlockLabel::MP) == 1;
        for b in [BlockLabel::PP, BlockLabel::MP] {
            oracle_ok &= nu(b) == index_by_counting(j as i64, b);
            oracle_ok &= dec[b].class == SymmetryClass::Bdi(nu(b));
        }
        if j == 2 {
            convention = format!("even j: nu_PP = {}, nu_MP = {}", nu(BlockLabel::PP), nu(BlockLabel::MP));
        }
        for k in 1..=9 {
            let lambda = f64::from(k) / 10.0;
            let dec = reduce(ModelParams::new(two_j, lambda).unwrap()).unwrap();
            for b in [BlockLabel::PP, BlockLabel::MP] {
                let zeros = dense_eigs(&dec[b].hamiltonian).iter().filter(|e| e.abs() < ZERO_MODE_TOL).count();
                modes_ok &= zeros == dec[b].topo_index as usize;
            }
        }
    }
    o.check(sum_ok, "nu_PP + nu_MP = 1 for integer j = 1..24".into());
    o.check(oracle_ok, "trace index equals the alternating-sign count".into());
    o.check(modes_ok, format!("zero modes (|E| < {ZERO_MODE_TOL:.0e}) equal nu for lambda = 0.1..0.9"));
    o.note(format!("realized convention: {convention}"));
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new(3, "small-case spectra");
    let h = build_hamiltonian(ModelParams::new(TwoJ::new(1), 0.0).unwrap());
    let err = max_diff(&dense_eigs(&h), &[-SQRT_2, -1.0, 1.0, SQRT_2]);
    o.check(err <= EXACT_TOL, format!("j = 1/2, lambda = 0: max error {err:.2e} (tol {EXACT_TOL:.0e})"));
    let mut worst = 0.0f64;
    for tj in 1..=6u32 {
        let two_j = TwoJ::new(tj);
        let h = build_hamiltonian(ModelParams::new(two_j, 1.0).unwrap());
        let j = two_j.j();
        let exact: Vec<f64> =
            (0..=tj).flat_map(|a| (0..=tj).map(move |b| 2.0 * ((a + b) as f64 - 2.0 * j) / (j + 0.5))).collect();
        worst = worst.max(max_diff(&dense_eigs(&h), &sorted(exact)));
    }
    o.check(worst <= EXACT_TOL, format!("lambda = 1, j <= 3: max error {worst:.2e} against 2(m1+m2)/(j+1/2)"));
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new(4, "dense and shift-invert paths agree");
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let dense = SolverConfig { path: SolverPath::Dense, ..SolverConfig::default() };
    let lanczos = SolverConfig { path: SolverPath::ShiftInvert, ..SolverConfig::default() };
    let (mut worst, mut failures) = (0.0f64, 0);
    let started = Instant::now();
    for _ in 0..50 {
        let tj = rng.random_range(4..=50u32);
        let lambda: f64 = rng.random_range(0.0..1.0);
        let block = BlockLabel::ALL[rng.random_range(0..4)];
        let dec = reduce(ModelParams::new(TwoJ::new(tj), lambda).unwrap()).unwrap();
        let h = &dec[block].hamiltonian;
        let m = default_m(h.dim());
        match (eigs_near_zero_with(h, m, &dense), eigs_near_zero_with(h, m, &lanczos)) {
            (Ok(a), Ok(b)) => worst = worst.max(max_diff(&a, &b)),
            _ => failures += 1,
        }
    }
    o.check(failures == 0, format!("{failures} solver failures in 50 instances"));
    o.check(worst <= SOLVER_TOL, format!("max deviation {worst:.2e} (tol {SOLVER_TOL:.0e})"));
    o.note(format!("runtime {:.1} s", started.elapsed().as_secs_f64()));
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new(5, "analytic self-consistency");
    let grid = uniform_grid(10.0, 2001);
    let ci = grid.iter().map(|&e| (d_ci(e) - d_bdi(1, e)).abs()).fold(0.0, f64::max);
    o.check(ci <= ANALYTIC_TOL, format!("max |d_CI - d_BDI1| on [0,10] = {ci:.2e} (tol {ANALYTIC_TOL:.0e})"));
    let gap = uniform_grid(6.0, 601)
        .iter()
        .map(|&e| (goe_gap_from_spacing(e) - erf(PI.sqrt() * e / 2.0)).abs())
        .fold(0.0, f64::max);
    o.check(gap <= ANALYTIC_TOL, format!("max |I_GOE(spacing) - erf form| on [0,6] = {gap:.2e}"));
    let mut integral = 0.0f64;
    let mut norm = 0.0f64;
    for k in 0..=40 {
        let x = 0.75 * f64::from(k);
        let panels = (x / 2.0).ceil().max(1.0) as usize;
        let i = coupled_tops::quad::integrate_panels(|t| bessel_j(1, t), 0.0, x, panels, 1e-15, 0.0).value;
        integral = integral.max((i - (1.0 - bessel_j(0, x))).abs());
        let s = bessel_j(0, x) + 2.0 * (1..60).map(|n| bessel_j(2 * n, x)).sum::<f64>();
        norm = norm.max((s - 1.0).abs());
    }
    o.check(integral <= BESSEL_TOL, format!("max |int_0^x J1 - (1 - J0)| = {integral:.2e} (tol {BESSEL_TOL:.0e})"));
    o.check(norm <= BESSEL_TOL, format!("max |J0 + 2 sum J_2k - 1| = {norm:.2e} (tol {BESSEL_TOL:.0e})"));
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new(6, "chiral Monte Carlo against the analytic curves");
    let started = Instant::now();
    let width = 0.05;
    let edges: Vec<f64> = (0..=60).map(|k| k as f64 * width).collect();
    for nu in [0usize, 1] {
        let id = if nu == 0 { SymmetryClassId::Bdi0 } else { SymmetryClassId::Bdi1 };
        let samples = sample_chgoe(200, nu, 100_000, 12, 6 + nu as u64);
        let dn = delta_n_prediction(id, &edges).values;
        let n = samples.len() as f64;
        let (mut sum, mut sum_sq) = (vec![0.0; 60], vec![0.0; 60]);
        let mut counts = [0u32; 60];
        for s in &samples {
            counts.iter_mut().for_each(|c| *c = 0);
            for &e in s.iter().filter(|&&e| e < 3.0) {
                counts[((e / width) as usize).min(59)] += 1;
            }
            for b in 0..60 {
                sum[b] += f64::from(counts[b]);
                sum_sq[b] += f64::from(counts[b]).powi(2);
            }
        }
        let mut worst = 0.0f64;
        let mut outside = 0;
        for b in 0..60 {
            let mean = sum[b] / n;
            let se = ((sum_sq[b] / n - mean * mean).max(0.0) / n).sqrt();
            // Expected count: integral of d over the bin.
            let expected = width + dn[b + 1] - dn[b];
            let z = (mean - expected).abs() / se.max(1e-300);
            worst = worst.max(z);
            outside += usize::from(z > HIST_SIGMAS);
        }
        o.check(
            outside == 0,
            format!("BDI{nu}: {outside}/60 bins beyond {HIST_SIGMAS} sigma (largest {worst:.2} sigma)"),
        );
        let firsts: Vec<f64> = sample_chgoe(200, nu, 10_000, 1, 60 + nu as u64).iter().map(|s| s[0]).collect();
        let grid = uniform_grid(4.0, 4001);
        let pred: Vec<f64> = grid.iter().map(|&e| gap_cdf(id, e)).collect();
        let ks = ks_distance(&cdf_on_grid(&firsts, &grid), &pred);
        o.check(ks < MC_KS_TOL, format!("BDI{nu}: first-level KS = {ks:.4} over 10^4 samples (tol {MC_KS_TOL})"));
    }
    o.note(format!("runtime {:.1} s", started.elapsed().as_secs_f64()));
    o
}

/// Spectra at one coupling, grouped by class.
struct Ensembles {
    lambda: f64,
    curves: Vec<EmpiricalCurves>,
    seconds: f64,
}

impl Ensembles {
    fn get(&self, id: SymmetryClassId) -> &EmpiricalCurves {
        self.curves.iter().find(|c| c.spec.class_id() == id).expect("ensemble present")
    }
}

/// Every block with `j` in [40.5, 150], plus the chiral blocks of integer
/// `j` in [30, 40]: each integer `j` adds only one spectrum to each chiral
/// class, and [40.5, 150] alone gives 110. The half-integer spins are
/// included only for the chaotic run, where CI is scored.
fn ensemble_members(with_half_integer: bool) -> Vec<EnsembleMember> {
    let mut members = Vec::new();
    for tj in 60..=300u32 {
        let blocks: &[BlockLabel] = match (tj % 2 == 0, tj >= 81) {
            (true, true) => &[BlockLabel::PP, BlockLabel::MP, BlockLabel::PM],
            (true, false) => &[BlockLabel::PP, BlockLabel::MP],
            (false, true) if with_half_integer => &[BlockLabel::PP, BlockLabel::MP, BlockLabel::PM],
            (false, _) => &[],
        };
        members.extend(blocks.iter().map(|&block| EnsembleMember { two_j: TwoJ::new(tj), block }));
    }
    members
}

fn run_ensembles(lambda: f64, with_half_integer: bool) -> Ensembles {
    let started = Instant::now();
    let members = ensemble_members(with_half_integer);
    let spectra =
        solve_members(lambda, &members, WindowPolicy::Standard, &SolverConfig::default()).expect("ensemble solves");
    let grid = uniform_grid(3.0, 301);
    let mut by_class: Vec<(SymmetryClassId, Vec<EnsembleMember>, Vec<UnfoldedSpectrum>)> = Vec::new();
    for (m, s) in members.iter().zip(spectra) {
        let id = SymmetryClassId::from_class(coupled_tops::model::classify(m.block, m.two_j)).unwrap();
        match by_class.iter_mut().find(|g| g.0 == id) {
            Some(g) => {
                g.1.push(*m);
                g.2.push(s);
            }
            None => by_class.push((id, vec![*m], vec![s])),
        }
    }
    let curves = by_class
        .into_iter()
        .map(|(id, m, s)| EmpiricalCurves::from_spectra(EnsembleSpec::new(id, lambda, m).unwrap(), &s, &grid).unwrap())
        .collect();
    Ensembles { lambda, curves, seconds: started.elapsed().as_secs_f64() }
}

fn ks_against(c: &EmpiricalCurves, id: SymmetryClassId) -> f64 {
    let pred: Vec<f64> = c.grid.iter().map(|&e| gap_cdf(id, e)).collect();
    ks_distance(&c.gap_cdf, &pred)
}

fn criterion_7(e: &Ensembles) -> Outcome {
    let mut o = Outcome::new(7, "chaotic-limit statistics at lambda = 0");
    for id in [SymmetryClassId::Bdi0, SymmetryClassId::Bdi1, SymmetryClassId::Ci, SymmetryClassId::AiGoe] {
        let c = e.get(id);
        let dev = c.delta_n_deviation(0.2, 3.0);
        let ks = c.gap_ks();
        o.check(c.n_spectra >= MIN_SPECTRA, format!("{id}: {} spectra (need {MIN_SPECTRA})", c.n_spectra));
        o.check(
            dev < DELTA_N_TOL,
            format!("{id}: sup |delta N - prediction| on [0.2,3] = {dev:.4} (tol {DELTA_N_TOL})"),
        );
        o.check(ks < ENSEMBLE_KS_TOL, format!("{id}: first-level KS = {ks:.4} (tol {ENSEMBLE_KS_TOL})"));
    }
    o.note(format!("lambda = {} ensembles solved in {:.0} s", e.lambda, e.seconds));
    o
}

fn criterion_8(chaotic: &Ensembles, mixed: &Ensembles) -> Outcome {
    let mut o = Outcome::new(8, "crossover towards regular statistics");
    let ai = mixed.get(SymmetryClassId::AiGoe);
    let (p, g) = (ks_against(ai, SymmetryClassId::AiPoisson), ks_against(ai, SymmetryClassId::AiGoe));
    o.check(p < g, format!("lambda = {}: KS(Poisson) = {p:.4} < KS(GOE) = {g:.4}", mixed.lambda));
    let ai0 = chaotic.get(SymmetryClassId::AiGoe);
    let (p0, g0) = (ks_against(ai0, SymmetryClassId::AiPoisson), ks_against(ai0, SymmetryClassId::AiGoe));
    o.check(g0 < p0, format!("lambda = {}: KS(GOE) = {g0:.4} < KS(Poisson) = {p0:.4}", chaotic.lambda));
    for id in [SymmetryClassId::Bdi0, SymmetryClassId::Bdi1] {
        let dev = mixed.get(id).delta_n_deviation(0.2, 3.0);
        o.check(
            dev > CROSSOVER_DEVIATION,
            format!("lambda = {}: {id} delta N deviation {dev:.4} (> {CROSSOVER_DEVIATION})", mixed.lambda),
        );
    }
    o.note(format!("lambda = {} ensembles solved in {:.0} s", mixed.lambda, mixed.seconds));
    o
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::new(9, "classical dynamics");
    let started = Instant::now();

    let mut drift = 0.0f64;
    for lambda in [0.0, 0.25, 0.5, 0.75] {
        for x in sample_energy_shell(lambda, 9, 3) {
            let t = integrate(&x, lambda, 1e3, &IntegrationControls::default()).unwrap();
            drift = drift.max(t.energy_drift).max(t.norm_drift);
        }
    }
    o.check(drift <= DRIFT_TOL, format!("energy/norm drift over t = 1000: {drift:.2e} (tol {DRIFT_TOL:.0e})"));

    let (mut period, mut identity) = (0.0f64, 0.0f64);
    for x in sample_energy_shell(1.0, 1, 5) {
        let t = integrate(&x, 1.0, PI, &IntegrationControls::default()).unwrap();
        period = period.max(max_diff(&t.end.0, &x.to_cartesian().0));
        let pts = poincare_section(&x, 1.0, 20, SectionDirection::Positive).unwrap();
        for w in pts.windows(2) {
            identity = identity.max((w[0].p1 - w[1].p1).abs()).max((w[0].q1 - w[1].q1).abs());
        }
    }
    o.check(period <= PERIOD_TOL, format!("lambda = 1: return after pi within {period:.2e} (tol {PERIOD_TOL:.0e})"));
    o.check(
        identity <= IDENTITY_TOL,
        format!("lambda = 1: section map moves points by {identity:.2e} (tol {IDENTITY_TOL:.0e})"),
    );

    let opts = LyapunovOptions::default();
    let shell = |lambda: f64, n: u64| -> Vec<_> { (0..n).map(|s| sample_energy_shell(lambda, s, 1)[0]).collect() };
    let est = lyapunov_for_points(&shell(0.0, 10), 0.0, &opts).unwrap();
    let inside = est.iter().filter(|e| (0.6..=1.05).contains(&e.summary)).count();
    let values: Vec<String> = est.iter().map(|e| format!("{:.2}", e.summary)).collect();
    o.check(inside >= 8, format!("lambda = 0: {inside}/10 summaries in [0.6, 1.05]: {}", values.join(" ")));

    // Bimodality over 100 seeds: both groups populated and at least 80% of
    // the seeds inside one of them.
    let est = lyapunov_for_points(&shell(0.5, 100), 0.5, &opts).unwrap();
    let regular = est.iter().filter(|e| !e.saturated && e.summary.abs() < 0.02).count();
    let chaotic = est.iter().filter(|e| e.saturated && (0.15..=0.45).contains(&e.summary)).count();
    o.check(
        regular > 0 && chaotic > 0 && regular + chaotic >= 80,
        format!(
            "lambda = 0.5: {chaotic} chaotic in [0.15, 0.45], {regular} regular below 0.02, {} between",
            100 - chaotic - regular
        ),
    );

    let pts = poincare_section(&sample_energy_shell(0.0, 0, 1)[0], 0.0, 10_000, SectionDirection::Positive).unwrap();
    let mut grid = [[0u32; 20]; 20];
    for p in &pts {
        let i = ((p.q1 / PI * 20.0) as usize).min(19);
        let k = (((p.p1 + 1.0) / 2.0 * 20.0) as usize).min(19);
        grid[i][k] += 1;
    }
    let empty = grid.iter().flatten().filter(|&&c| c == 0).count();
    o.check(
        pts.len() == 10_000 && empty == 0,
        format!("lambda = 0: {} crossings leave {empty}/400 cells empty", pts.len()),
    );

    let starts = shell(0.95, 5);
    let sections = sections_for_points(&starts, 0.95, 300, &SectionOptions::default()).unwrap();
    let spread = |f: &dyn Fn(f64, f64) -> f64| {
        sections
            .iter()
            .map(|s| {
                let v: Vec<f64> = s.iter().map(|p| f(p.p1, p.q1)).collect();
                v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
            })
            .fold(0.0, f64::max)
    };
    let l_y = spread(&|p, q| (1.0 - p * p).sqrt() * q.sin());
    let averaged = spread(&|p, q| (1.0 - p * p) * q.sin());
    o.check(
        l_y <= LEVEL_CURVE_TOL,
        format!("lambda = 0.95: L_y spread along a section {l_y:.3} (tol {LEVEL_CURVE_TOL})"),
    );
    o.note(format!("lambda = 0.95: spread of (1 - P1^2) sin Q1 is {averaged:.3}"));
    o.note(format!("runtime {:.1} s", started.elapsed().as_secs_f64()));
    o
}

fn run_cli(args: &[&str], out: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut argv = vec!["coupled-tops".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.push("--out".into());
    argv.push(out.display().to_string());
    assert_eq!(dispatch(argv), 0, "{args:?}");
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".csv"))
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_10() -> Outcome {
    let mut o = Outcome::new(10, "byte-identical reruns");
    let runs: [&[&str]; 5] = [
        &["rmt", "sample", "--ensemble", "chgoe", "--nu", "1", "--count", "3000", "--seed", "5"],
        &["rmt", "sample", "--ensemble", "goe", "--count", "300", "--seed", "5"],
        &["classical", "poincare", "--lambda", "0.3", "--seeds", "3", "--crossings", "200", "--seed", "2"],
        &["classical", "lyapunov", "--lambda", "0.25", "--seeds", "3", "--t-cutoff", "100"],
        &["quantum", "ensemble", "--lambda", "0.4", "--j-min", "20", "--j-max", "23"],
    ];
    for args in runs {
        let dir = tempfile::tempdir().unwrap();
        let a = run_cli(args, &dir.path().join("a"));
        let mut threaded = vec!["--threads", "2"];
        threaded.extend_from_slice(args);
        let b = run_cli(&threaded, &dir.path().join("b"));
        let mut single = vec!["--threads", "1"];
        single.extend_from_slice(args);
        let c = run_cli(&single, &dir.path().join("c"));
        let same = !a.is_empty() && a == b && a == c;
        o.check(same, format!("{} {}: {} file(s) identical across 3 runs", args[0], args[1], a.len()));
    }
    o
}

/// `ACCEPTANCE_ONLY=1,5,9` restricts the run to the listed criteria.
fn selected() -> impl Fn(u32) -> bool {
    let only: Option<Vec<u32>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    move |id| only.as_ref().is_none_or(|o| o.contains(&id))
}

fn main() {
    let started = Instant::now();
    let want = selected();
    let cheap: [(u32, fn() -> Outcome); 6] =
        [(1, criterion_1), (2, criterion_2), (3, criterion_3), (4, criterion_4), (5, criterion_5), (6, criterion_6)];
    let mut outcomes: Vec<Outcome> = cheap.iter().filter(|c| want(c.0)).map(|c| c.1()).collect();
    if want(7) || want(8) {
        let chaotic = run_ensembles(0.0, true);
        if want(7) {
            outcomes.push(criterion_7(&chaotic));
        }
        if want(8) {
            let mixed = run_ensembles(0.75, false);
            outcomes.push(criterion_8(&chaotic, &mixed));
        }
    }
    if want(9) {
        outcomes.push(criterion_9());
    }
    if want(10) {
        outcomes.push(criterion_10());
    }

    let mut report = String::new();
    let mut unexpected = Vec::new();
    for o in &outcomes {
        let _ = writeln!(report, "{} [{}] {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.title);
        for l in &o.lines {
            let _ = writeln!(report, "        {l}");
        }
        if !o.pass {
            match KNOWN_FAILURES.iter().find(|k| k.0 == o.id) {
                Some((_, why)) => {
                    let _ = writeln!(report, "        known failure: {why}");
                }
                None => unexpected.push(o.id),
            }
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    let _ = writeln!(report, "{passed}/{} criteria pass ({:.0} s)", outcomes.len(), started.elapsed().as_secs_f64());
    print!("{report}");
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
