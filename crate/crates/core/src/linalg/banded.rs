//! Banded LU factorization with partial pivoting.
//!
//! Storage follows the LAPACK general-band layout: column-major with leading
//! dimension `2 kl + ku + 1`, element `(r, c)` at `c * ldab + kv + r - c`
//! where `kv = kl + ku`. The extra `kl` rows hold fill-in from row swaps.

use super::LinalgError;
use crate::sparse::SparseRealMatrix;

#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    kv: usize,
    ldab: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
    min_pivot: f64,
}

impl BandedLu {
    /// Factors `a - shift * I` for a square matrix of half-bandwidth `kd`
    /// (both lower and upper).
    pub fn factor_shifted(a: &SparseRealMatrix, shift: f64) -> Result<Self, LinalgError> {
        let n = a.dim();
        let kd = a.bandwidth();
        let (kl, ku) = (kd, kd);
        let kv = kl + ku;
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ldab * n];
        for &(r, c, v) in a.entries() {
            ab[c * ldab + kv + r - c] += v;
        }
        for i in 0..n {
            ab[i * ldab + kv] -= shift;
        }
        let mut ipiv = vec![0; n];
        let at = |r: usize, c: usize| c * ldab + kv + r - c;
        let mut ju = 0usize;
        let mut min_pivot = f64::INFINITY;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = ab[at(j, j)].abs();
            for p in 1..=km {
                let x = ab[at(j + p, j)].abs();
                if x > best {
                    best = x;
                    jp = p;
                }
            }
            ipiv[j] = j + jp;
            min_pivot = min_pivot.min(best);
            if best == 0.0 {
                return Err(LinalgError::Singular { column: j });
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    ab.swap(at(j, c), at(j + jp, c));
                }
            }
            if km > 0 {
                let pivot = ab[at(j, j)];
                for p in 1..=km {
                    ab[at(j + p, j)] /= pivot;
                }
                for c in j + 1..=ju {
                    let t = ab[at(j, c)];
                    if t != 0.0 {
                        let col = c * ldab + kv - c;
                        let lcol = j * ldab + kv - j;
                        for p in 1..=km {
                            ab[col + j + p] -= ab[lcol + j + p] * t;
                        }
                    }
                }
            }
        }
        Ok(Self { n, kl, kv, ldab, ab, ipiv, min_pivot })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Smallest pivot magnitude encountered.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// Solves `(A - shift) x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let (n, kl, kv, ldab) = (self.n, self.kl, self.kv, self.ldab);
        for j in 0..n.saturating_sub(1) {
            let lm = kl.min(n - 1 - j);
            let l = self.ipiv[j];
            if l != j {
                b.swap(l, j);
            }
            let bj = b[j];
            if bj != 0.0 {
                let col = &self.ab[j * ldab + kv + 1..j * ldab + kv + 1 + lm];
                for (x, &m) in b[j + 1..j + 1 + lm].iter_mut().zip(col) {
                    *x -= m * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.ab[j * ldab + kv];
            let t = b[j];
            if t != 0.0 {
                let lo = j.saturating_sub(kv);
                let col = &self.ab[j * ldab + kv + lo - j..j * ldab + kv];
                for (x, &u) in b[lo..j].iter_mut().zip(col) {
                    *x -= u * t;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_banded(n: usize, kd: usize, seed: u64) -> SparseRealMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            for j in i..(i + kd + 1).min(n) {
                let x: f64 = rng.random_range(-1.0..1.0);
                t.push((i, j, x));
                if i != j {
                    t.push((j, i, x));
                }
            }
        }
        SparseRealMatrix::from_triplets(n, t)
    }

    #[test]
    fn solves_random_indefinite_systems() {
        for (n, kd) in [(1, 0), (5, 1), (40, 3), (200, 12)] {
            let a = random_banded(n, kd, n as u64);
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let b = a.mul_vec(&x);
            let lu = BandedLu::factor_shifted(&a, 0.0).unwrap();
            let mut y = b.clone();
            lu.solve_in_place(&mut y);
            let r: f64 = a.mul_vec(&y).iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(r < 1e-10, "n={n} residual {r}");
        }
    }

    #[test]
    fn zero_diagonal_needs_pivoting() {
        let a = SparseRealMatrix::from_triplets(2, [(0, 1, 1.0), (1, 0, 1.0)]);
        let lu = BandedLu::factor_shifted(&a, 0.0).unwrap();
        let mut b = vec![3.0, 5.0];
        lu.solve_in_place(&mut b);
        assert_eq!(b, vec![5.0, 3.0]);
    }

    #[test]
    fn exact_singularity_reported() {
        let a = SparseRealMatrix::from_diagonal(&[1.0, 0.0, 2.0]);
        assert!(matches!(BandedLu::factor_shifted(&a, 0.0), Err(LinalgError::Singular { column: 1 })));
        let lu = BandedLu::factor_shifted(&a, 0.5).unwrap();
        assert_eq!(lu.min_pivot(), 0.5);
    }
}
