//! Lanczos iteration with full reorthogonalization, aimed at the
//! largest-magnitude eigenvalues of a symmetric operator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::dense::tridiagonal_eigenpairs;
use super::LinalgError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosConfig {
    /// Converged when `|beta * s_last| <= tol * max|theta|`.
    pub tol: f64,
    /// Hard cap on the Krylov basis size.
    pub max_basis: usize,
    /// Ritz values are examined every this many steps.
    pub check_every: usize,
    pub seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self { tol: 1e-11, max_basis: 1200, check_every: 10, seed: 0x1a2c_05e5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RitzPair {
    pub theta: f64,
    pub vector: Vec<f64>,
    /// Residual estimate `|beta * s_last|`.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Two classical Gram-Schmidt passes against every vector in both sets.
fn orthogonalize(w: &mut [f64], locked: &[Vec<f64>], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in locked.iter().chain(basis) {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng, locked: &[Vec<f64>], basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..4 {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        orthogonalize(&mut v, locked, basis);
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

/// Indices of the wanted Ritz values: the `count` largest in magnitude plus
/// both ends of the spectrum.
fn wanted(values: &[f64], count: usize) -> Vec<usize> {
    let k = values.len();
    let mut by_mag: Vec<usize> = (0..k).collect();
    by_mag.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()));
    let mut w: Vec<usize> = by_mag.into_iter().take(count).collect();
    for end in [0, k - 1] {
        if !w.contains(&end) {
            w.push(end);
        }
    }
    w
}

/// Runs Lanczos for `apply` (`y = A x`) in the orthogonal complement of
/// `locked` until the wanted Ritz pairs converge. The returned pairs are
/// sorted by decreasing `|theta|`.
pub fn largest_magnitude<F>(
    apply: F,
    n: usize,
    count: usize,
    locked: &[Vec<f64>],
    cfg: &LanczosConfig,
) -> Result<Vec<RitzPair>, LinalgError>
where
    F: Fn(&[f64], &mut [f64]),
{
    let space = n.saturating_sub(locked.len());
    if space == 0 {
        return Ok(Vec::new());
    }
    let max_basis = cfg.max_basis.min(space);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let Some(mut q) = random_unit(n, &mut rng, locked, &basis) else {
        return Ok(Vec::new());
    };
    let mut w = vec![0.0; n];
    loop {
        apply(&q, &mut w);
        let a = dot(&q, &w);
        basis.push(q);
        alpha.push(a);
        orthogonalize(&mut w, locked, &basis);
        let b = norm(&w);
        let k = basis.len();
        let exhausted = k == max_basis;
        let scale = alpha.iter().chain(&beta).fold(0.0f64, |m, x| m.max(x.abs()));
        let breakdown = b <= 1e-13 * scale.max(f64::MIN_POSITIVE);
        if k.is_multiple_of(cfg.check_every) || exhausted || breakdown {
            let (values, vectors) = tridiagonal_eigenpairs(&alpha, &beta)?;
            let want = wanted(&values, count.min(k));
            let resid = |i: usize| (b * vectors[(k - 1) * k + i]).abs();
            let spread = values[0].abs().max(values[k - 1].abs());
            let done = k == space || (k >= count && want.iter().all(|&i| resid(i) <= cfg.tol * spread));
            if done {
                let mut pairs: Vec<RitzPair> = want
                    .iter()
                    .map(|&i| {
                        let mut x = vec![0.0; n];
                        for (col, qv) in basis.iter().enumerate() {
                            axpy(vectors[col * k + i], qv, &mut x);
                        }
                        let nx = norm(&x);
                        x.iter_mut().for_each(|v| *v /= nx);
                        RitzPair { theta: values[i], vector: x, residual: resid(i) }
                    })
                    .collect();
                pairs.sort_by(|p, r| r.theta.abs().total_cmp(&p.theta.abs()));
                return Ok(pairs);
            }
            if exhausted {
                return Err(LinalgError::NoConvergence { iterations: k });
            }
        }
        if breakdown {
            // Invariant subspace found: continue from a fresh direction.
            match random_unit(n, &mut rng, locked, &basis) {
                Some(v) => {
                    beta.push(0.0);
                    q = v;
                }
                None => return Err(LinalgError::NoConvergence { iterations: k }),
            }
        } else {
            beta.push(b);
            q = w.iter().map(|x| x / b).collect();
        }
    }
}
