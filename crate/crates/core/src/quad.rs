//! Adaptive Gauss-Kronrod (7/15) quadrature.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// Gauss weights for the odd-indexed Kronrod nodes (the last one is the centre).
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

const MAX_DEPTH: u32 = 24;
/// Panels whose error estimate is within this many ulps of `int |f|` are
/// accepted; further bisection would only chase roundoff.
const ROUNDOFF_FLOOR: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Sum of `|K15 - G7|` over accepted panels.
    pub error: f64,
    pub evaluations: usize,
}

/// One 15-point panel: `(kronrod, |kronrod - gauss|)`.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let (k, e, _) = gk15_with_magnitude(f, a, b);
    (k, e)
}

/// As [`gk15`], also returning the Kronrod estimate of `int |f|`, which
/// sets the roundoff floor of the panel.
fn gk15_with_magnitude<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut mag = WGK[7] * fc.abs();
    for i in 0..7 {
        let dx = h * XGK[i];
        let (lo, hi) = (f(c - dx), f(c + dx));
        k += WGK[i] * (lo + hi);
        mag += WGK[i] * (lo.abs() + hi.abs());
        if i % 2 == 1 {
            g += WG[i / 2] * (lo + hi);
        }
    }
    (k * h, ((k - g) * h).abs(), (mag * h).abs())
}

/// Adaptive bisection until each panel meets its share of
/// `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> QuadResult {
    integrate_panels(f, a, b, 1, abs_tol, rel_tol)
}

/// As [`integrate`], starting from `panels` equal subintervals; useful for
/// oscillatory integrands.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    panels: usize,
    abs_tol: f64,
    rel_tol: f64,
) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, evaluations: 0 };
    }
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let rough: f64 = (0..panels).map(|i| gk15(&f, a + i as f64 * width, a + (i + 1) as f64 * width).0).sum();
    let target = abs_tol.max(rel_tol * rough.abs());
    let mut out = QuadResult { value: 0.0, error: 0.0, evaluations: 15 * panels };
    let mut stack: Vec<(f64, f64, u32)> = (0..panels)
        .rev()
        .map(|i| (a + i as f64 * width, if i + 1 == panels { b } else { a + (i + 1) as f64 * width }, 0))
        .collect();
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e, mag) = gk15_with_magnitude(&f, lo, hi);
        out.evaluations += 15;
        let share = target * ((hi - lo) / (b - a)).abs();
        let roundoff = ROUNDOFF_FLOOR * f64::EPSILON * mag;
        if e <= share || e <= roundoff || depth >= MAX_DEPTH {
            out.value += v;
            out.error += e;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    out
}

/// Non-adaptive composite rule on `panels` equal subintervals.
pub fn composite_gk15<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let w = (b - a) / panels as f64;
    (0..panels).map(|i| gk15(&f, a + i as f64 * w, a + (i + 1) as f64 * w).0).sum()
}

/// Composite trapezoid rule with `panels` intervals.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let inner: f64 = (1..panels).map(|i| f(a + i as f64 * h)).sum();
    h * (0.5 * (f(a) + f(b)) + inner)
}
