//! Dense symmetric eigenvalues: Householder reduction to tridiagonal form
//! followed by implicit QL with Wilkinson-type shifts.

use super::LinalgError;

const QL_MAX_SWEEPS: usize = 60;

/// Reduces the symmetric row-major `a` (`n x n`) to tridiagonal form.
/// Returns `(diag, sub)` with `sub[i]` coupling `i` and `i + 1`.
pub fn tridiagonalize(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let mut a = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let col = |a: &[f64], i: usize| a[(k + 1 + i) * n + k];
        let norm = (0..m).map(|i| col(&a, i).powi(2)).sum::<f64>().sqrt();
        d[k] = a[k * n + k];
        if norm == 0.0 {
            e[k] = 0.0;
            continue;
        }
        let x0 = col(&a, 0);
        let alpha = if x0 > 0.0 { -norm } else { norm };
        for (i, vi) in v[..m].iter_mut().enumerate() {
            *vi = col(&a, i);
        }
        v[0] -= alpha;
        let vnorm = v[..m].iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut v[..m] {
            *x /= vnorm;
        }
        // Trailing block A <- (I - 2vv^T) A (I - 2vv^T) = A - 2 v w^T - 2 w v^T.
        for i in 0..m {
            let row = &a[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            p[i] = row.iter().zip(&v[..m]).map(|(x, y)| x * y).sum();
        }
        let kappa: f64 = v[..m].iter().zip(&p[..m]).map(|(x, y)| x * y).sum();
        for i in 0..m {
            p[i] -= kappa * v[i];
        }
        for i in 0..m {
            let row = &mut a[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            for (jj, x) in row.iter_mut().enumerate() {
                *x -= 2.0 * (v[i] * p[jj] + p[i] * v[jj]);
            }
        }
        e[k] = alpha;
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2) * n + n - 2];
        d[n - 1] = a[(n - 1) * n + n - 1];
        e[n - 2] = a[(n - 1) * n + n - 2];
    } else if n == 1 {
        d[0] = a[0];
    }
    (d, e)
}

/// Eigen-decomposition of a symmetric tridiagonal matrix by implicit QL.
/// If `z` is given (row-major `n x n`, usually the identity) it is
/// accumulated so that column `i` becomes the eigenvector of `d[i]`.
/// Eigenvalues are returned unsorted.
pub fn tridiagonal_ql(d: &mut [f64], sub: &[f64], mut z: Option<&mut [f64]>) -> Result<(), LinalgError> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    assert_eq!(sub.len(), n - 1);
    let mut e = sub.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > QL_MAX_SWEEPS {
                return Err(LinalgError::NoConvergence { iterations: sweeps });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// All eigenvalues of a symmetric row-major matrix, ascending.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Result<Vec<f64>, LinalgError> {
    let (mut d, e) = tridiagonalize(a, n);
    tridiagonal_ql(&mut d, &e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenpairs of a symmetric tridiagonal matrix, ascending. Vectors are the
/// columns of the returned row-major matrix.
pub fn tridiagonal_eigenpairs(diag: &[f64], sub: &[f64]) -> Result<(Vec<f64>, Vec<f64>), LinalgError> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tridiagonal_ql(&mut d, sub, Some(&mut z))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + new] = z[k * n + old];
        }
    }
    Ok((values, vectors))
}
