//! Monte Carlo samplers for the chiral Gaussian orthogonal ensemble and the
//! Gaussian orthogonal ensemble.
//!
//! Both use the tridiagonal/bidiagonal models with independent chi-distributed
//! entries, which have exactly the eigenvalue law of the dense Gaussian
//! ensembles at a fraction of the cost. Dense routes are kept for
//! cross-checks at small sizes.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::linalg::dense::{symmetric_eigenvalues, tridiagonal_ql};

/// Work is always split into this many RNG streams, so results do not
/// depend on the thread count.
pub const SHARDS: usize = 32;

fn shard_rng(seed: u64, shard: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard as u64);
    rng
}

/// Runs `per_sample` `count` times across the fixed shards and concatenates
/// the results in shard order.
fn sharded<T, F>(count: usize, seed: u64, per_sample: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let base = count / SHARDS;
    let extra = count % SHARDS;
    let chunks: Vec<Vec<T>> = (0..SHARDS)
        .into_par_iter()
        .map(|s| {
            let mut rng = shard_rng(seed, s);
            let n = base + usize::from(s < extra);
            (0..n).map(|_| per_sample(&mut rng)).collect()
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

fn chi<R: Rng>(rng: &mut R, dof: usize) -> f64 {
    ChiSquared::new(dof as f64).expect("positive degrees of freedom").sample(rng).sqrt()
}

/// Mean spacing of positive eigenvalues at zero for the chiral matrix
/// `[[0, W], [W^T, 0]]` with `W` of size `n x (n + nu)` and unit-variance entries.
pub fn chgoe_mean_spacing(n: usize, nu: usize) -> f64 {
    PI / (2.0 * (2 * n + nu) as f64).sqrt()
}

/// Number of eigenvalues of the zero-diagonal tridiagonal matrix with
/// off-diagonal `off` that are strictly below `x` (Sturm count).
fn sturm_count(off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = -x;
    if q < 0.0 {
        count += 1;
    }
    for &b in off {
        let prev = if q == 0.0 { f64::EPSILON * (b.abs() + x.abs()).max(1e-300) } else { q };
        q = -x - b * b / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest `k` singular values of the square bidiagonal matrix whose
/// Golub-Kahan form has off-diagonal `off` (length `2n - 1`), by bisection.
fn smallest_singular_values(off: &[f64], k: usize) -> Vec<f64> {
    let dim = off.len() + 1;
    let half = dim / 2;
    let bound = 2.0 * off.iter().fold(0.0f64, |m, b| m.max(b.abs())) + 1.0;
    (0..k)
        .map(|i| {
            // Target the (half + i)-th eigenvalue, i.e. the (i+1)-th positive one.
            let target = half + i + 1;
            let (mut lo, mut hi) = (0.0, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if sturm_count(off, mid) >= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= 1e-14 * hi {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// One chiral sample: the `levels` smallest singular values of a Gaussian
/// `n x (n + nu)` matrix, via its bidiagonal model with diagonal
/// `chi_{n+nu}, ..., chi_{nu+1}` and off-diagonal `chi_{n-1}, ..., chi_1`.
pub fn chgoe_singular_values<R: Rng>(rng: &mut R, n: usize, nu: usize, levels: usize) -> Vec<f64> {
    let mut off = Vec::with_capacity(2 * n - 1);
    for i in 0..n {
        off.push(chi(rng, n + nu - i));
        if i + 1 < n {
            off.push(chi(rng, n - 1 - i));
        }
    }
    smallest_singular_values(&off, levels.min(n))
}

/// Unfolded positive eigenvalue sets of the chiral ensemble, `levels` per
/// sample, in units of [`chgoe_mean_spacing`].
pub fn sample_chgoe(n: usize, nu: usize, count: usize, levels: usize, seed: u64) -> Vec<Vec<f64>> {
    let spacing = chgoe_mean_spacing(n, nu);
    sharded(count, seed, |rng| chgoe_singular_values(rng, n, nu, levels).into_iter().map(|s| s / spacing).collect())
}

/// Full spectrum of one dense chiral sample, ascending.
pub fn chgoe_dense_spectrum<R: Rng>(rng: &mut R, n: usize, nu: usize) -> Vec<f64> {
    let dim = 2 * n + nu;
    let mut h = vec![0.0; dim * dim];
    for r in 0..n {
        for c in 0..n + nu {
            let x: f64 = StandardNormal.sample(rng);
            h[r * dim + n + c] = x;
            h[(n + c) * dim + r] = x;
        }
    }
    symmetric_eigenvalues(&h, dim).expect("dense chiral sample diagonalizes")
}

/// Semicircle counting function for the GOE tridiagonal model of size `n`
/// (radius `sqrt(2n)`).
pub fn semicircle_count(n: usize, e: f64) -> f64 {
    let r = (2.0 * n as f64).sqrt();
    let x = (e / r).clamp(-1.0, 1.0);
    n as f64 * (0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / PI)
}

/// Fraction of the spectrum, centred on zero, whose spacings are kept.
pub const GOE_CENTRAL_FRACTION: f64 = 0.2;

/// Unfolded nearest-neighbour spacings from the centre of GOE spectra.
pub fn sample_goe(n: usize, count: usize, seed: u64) -> Vec<f64> {
    let r = (2.0 * n as f64).sqrt();
    let window = GOE_CENTRAL_FRACTION * r;
    let per_sample = sharded(count, seed, |rng| {
        let diag: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let sub: Vec<f64> = (1..n).rev().map(|k| chi(rng, k) / 2f64.sqrt()).collect();
        let mut d = diag;
        tridiagonal_ql(&mut d, &sub, None).expect("tridiagonal GOE sample diagonalizes");
        d.sort_by(f64::total_cmp);
        d.windows(2)
            .filter(|w| w[0].abs() < window && w[1].abs() < window)
            .map(|w| semicircle_count(n, w[1]) - semicircle_count(n, w[0]))
            .collect::<Vec<f64>>()
    });
    per_sample.into_iter().flatten().collect()
}

/// Full spectrum of one dense GOE sample (off-diagonal variance 1/2,
/// diagonal variance 1), ascending.
pub fn goe_dense_spectrum<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = StandardNormal.sample(rng);
        for j in 0..i {
            let x: f64 = StandardNormal.sample(rng);
            h[i * n + j] = x / 2f64.sqrt();
            h[j * n + i] = x / 2f64.sqrt();
        }
    }
    symmetric_eigenvalues(&h, n).expect("dense GOE sample diagonalizes")
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmt::wigner_surmise_cdf;

    #[test]
    fn sturm_count_matches_dense() {
        let off = [1.0, 0.5, 2.0, 0.3, 1.5];
        let dim = off.len() + 1;
        let mut a = vec![0.0; dim * dim];
        for (i, &b) in off.iter().enumerate() {
            a[i * dim + i + 1] = b;
            a[(i + 1) * dim + i] = b;
        }
        let eig = symmetric_eigenvalues(&a, dim).unwrap();
        for x in [-3.0, -0.7, 0.01, 0.4, 2.9] {
            assert_eq!(sturm_count(&off, x), eig.iter().filter(|&&e| e < x).count());
        }
        let sv = smallest_singular_values(&off, 3);
        for (s, e) in sv.iter().zip(&eig[3..]) {
            assert!((s - e).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_chiral_spectrum_is_mirror_symmetric_with_zero_modes() {
        let mut rng = shard_rng(7, 0);
        for nu in [0, 1, 2] {
            let e = chgoe_dense_spectrum(&mut rng, 12, nu);
            let m = e.len();
            assert!((0..m).all(|i| (e[i] + e[m - 1 - i]).abs() < 1e-12));
            assert_eq!(e.iter().filter(|x| x.abs() < 1e-10).count(), nu);
        }
    }

    #[test]
    fn bidiagonal_and_dense_routes_agree() {
        let (n, nu, count) = (16, 1, 4000);
        let spacing = chgoe_mean_spacing(n, nu);
        let bidiag: Vec<f64> = sample_chgoe(n, nu, count, 1, 11).iter().map(|s| s[0]).collect();
        let mut rng = shard_rng(12, 0);
        let dense: Vec<f64> = (0..count)
            .map(|_| {
                let e = chgoe_dense_spectrum(&mut rng, n, nu);
                e.into_iter().find(|&x| x > 1e-10).unwrap() / spacing
            })
            .collect();
        // Two-sample 0.1% critical value for 4000 vs 4000 is about 0.044.
        let d = ks_two_sample(&bidiag, &dense);
        assert!(d < 0.044, "two-sample KS {d}");
    }

    #[test]
    fn goe_routes_agree_and_match_the_surmise() {
        let spacings = sample_goe(100, 2000, 3);
        let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean spacing {mean}");
        let mut rng = shard_rng(4, 0);
        let r = (200f64).sqrt() * GOE_CENTRAL_FRACTION;
        let dense: Vec<f64> = (0..400)
            .flat_map(|_| {
                let e = goe_dense_spectrum(&mut rng, 100);
                e.windows(2)
                    .filter(|w| w[0].abs() < r && w[1].abs() < r)
                    .map(|w| semicircle_count(100, w[1]) - semicircle_count(100, w[0]))
                    .collect::<Vec<_>>()
            })
            .collect();
        assert!(ks_two_sample(&spacings, &dense) < 0.05);
        let mut s = spacings.clone();
        s.sort_by(f64::total_cmp);
        let ks = s
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = wigner_surmise_cdf(x);
                (f - i as f64 / s.len() as f64).abs().max((f - (i + 1) as f64 / s.len() as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.03, "KS vs surmise {ks}");
    }

    #[test]
    fn samples_are_reproducible() {
        assert_eq!(sample_chgoe(50, 0, 40, 3, 99), sample_chgoe(50, 0, 40, 3, 99));
        assert_ne!(sample_chgoe(50, 0, 40, 3, 99), sample_chgoe(50, 0, 40, 3, 100));
        assert_eq!(sample_goe(50, 10, 5), sample_goe(50, 10, 5));
    }

    #[test]
    fn two_sample_ks_extremes() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_two_sample(&[1.0], &[2.0]), 1.0);
    }
}
