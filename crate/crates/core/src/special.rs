//! Bessel functions of integer order and the error function.

use std::f64::consts::{FRAC_2_SQRT_PI, PI};

use crate::quad::integrate_panels;

/// Below this argument the ascending series is used.
const SERIES_LIMIT: f64 = 6.0;
/// At and above this argument low orders use the Hankel expansion.
const ASYMPTOTIC_LIMIT: f64 = 25.0;
/// Highest order evaluated by the Hankel expansion.
const ASYMPTOTIC_MAX_ORDER: u32 = 3;

/// `J_n(x)` for `x >= 0`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    assert!(x >= 0.0, "bessel_j needs x >= 0, got {x}");
    if x < SERIES_LIMIT {
        bessel_series(n, x)
    } else if x >= ASYMPTOTIC_LIMIT && n <= ASYMPTOTIC_MAX_ORDER {
        bessel_asymptotic(n, x)
    } else {
        bessel_miller(n, x)
    }
}

/// `J_n` for any integer order via `J_{-n} = (-1)^n J_n`.
pub fn bessel_j_signed(n: i32, x: f64) -> f64 {
    let v = bessel_j(n.unsigned_abs(), x);
    if n < 0 && n % 2 != 0 {
        -v
    } else {
        v
    }
}

/// Ascending series `sum (-1)^k (x/2)^(2k+n) / (k! (k+n)!)`.
pub fn bessel_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / f64::from(k);
    }
    let q = -half * half;
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + f64::from(n)));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && k > 2.0 {
            break;
        }
        if k > 500.0 {
            break;
        }
    }
    sum
}

/// Backward recurrence from well above the turning point, normalized by
/// `J_0 + 2 sum J_2k = 1`.
pub fn bessel_miller(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let start = ((x.max(f64::from(n)) + 30.0 + 3.0 * x.cbrt()) as usize + 10) & !1;
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        // cur = J_k, next = J_{k+1} (unnormalized)
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if k - 1 == n as usize {
            wanted = cur;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
    }
    norm += cur;
    if n as usize > start {
        return 0.0;
    }
    wanted / norm
}

/// Hankel expansion `sqrt(2/(pi x)) (P cos chi - Q sin chi)`.
pub fn bessel_asymptotic(n: u32, x: f64) -> f64 {
    let mu = 4.0 * f64::from(n) * f64::from(n);
    let (mut p, mut q) = (0.0, 0.0);
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let odd = f64::from(2 * k - 1);
            term *= (mu - odd * odd) / (f64::from(k) * 8.0 * x);
        }
        if term.abs() > last {
            break;
        }
        last = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-18 {
            break;
        }
    }
    let chi = x - (0.5 * f64::from(n) + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `int_0^x J_n(z) dz` by adaptive quadrature, panels no wider than 2.
pub fn bessel_j_integral(n: u32, x: f64) -> f64 {
    assert!(x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    let panels = (x / 2.0).ceil() as usize;
    integrate_panels(|z| bessel_j(n, z), 0.0, x, panels, 1e-14, 0.0).value
}

pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x < 2.5 {
        erf_series(x)
    } else {
        1.0 - erfc_continued_fraction(x)
    }
}

pub fn erfc(x: f64) -> f64 {
    if x < 2.5 {
        1.0 - erf(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// `erf x = (2x/sqrt(pi)) e^{-x^2} sum (2x^2)^n / (1*3*...*(2n+1))`; every
/// term is positive.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    while term > 1e-17 * sum {
        k += 1.0;
        term *= 2.0 * x2 / (2.0 * k + 1.0);
        sum += term;
    }
    FRAC_2_SQRT_PI * x * (-x2).exp() * sum
}

/// `erfc x = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`,
/// evaluated with the modified Lentz method.
fn erfc_continued_fraction(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = 0.5 * f64::from(k);
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}
