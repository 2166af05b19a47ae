//! Verner's efficient 6(5) pair with a fifth-order continuous extension.
//!
//! Stage 9 is evaluated at the new point, so it doubles as stage 1 of the
//! next step.

use thiserror::Error;

const STAGES: usize = 9;
const DENSE_DEGREE: usize = 6;

const C: [f64; STAGES] = [0.0, 0.06, 9.593_333_333_333_333e-2, 0.1439, 0.4973, 0.9725, 0.9995, 1.0, 1.0];

const A: [[f64; STAGES]; STAGES] = [
    [0.0; STAGES],
    [0.06, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.923_996_296_296_296_2e-2, 7.669_337_037_037_037e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.035975, 0.0, 0.107925, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.318_683_415_233_148_4, 0.0, -5.042_058_063_628_562, 4.220_674_648_395_414, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        -41.872_591_664_327_516,
        0.0,
        159.432_562_163_137_5,
        -122.119_213_565_010_03,
        5.531_743_066_200_054,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        -54.430_156_935_316_504,
        0.0,
        207.067_251_365_018_48,
        -158.610_813_784_59,
        6.991_816_585_950_242,
        -1.859_723_106_220_323_4e-2,
        0.0,
        0.0,
        0.0,
    ],
    [
        -54.663_741_787_281_98,
        0.0,
        207.952_806_255_389_36,
        -159.288_957_474_499_5,
        7.018_743_740_796_944,
        -1.833_878_590_504_572_2e-2,
        -5.119_484_997_882_099e-4,
        0.0,
        0.0,
    ],
    B6,
];

/// Sixth-order weights; the last stage weight is zero.
const B6: [f64; STAGES] = [
    3.438_957_868_357_036e-2,
    0.0,
    0.0,
    0.258_262_455_563_350_3,
    0.420_937_118_967_353_7,
    4.405_396_469_669_31,
    -176.483_119_024_298_65,
    172.364_133_401_415_07,
    0.0,
];

/// Embedded fifth-order weights.
const B5: [f64; STAGES] = [
    4.909_967_648_382_49e-2,
    0.0,
    0.0,
    0.225_111_222_951_652_42,
    0.469_468_225_302_956_2,
    0.806_579_224_998_886_8,
    0.0,
    -0.607_119_489_177_796,
    5.686_113_944_047_569_6e-2,
];

/// The extra stage of the continuous extension, at `c = 1/2`.
const C_EXTRA: f64 = 0.5;
const A_EXTRA: [f64; STAGES] = [
    1.652_415_901_357_280_6e-2,
    0.0,
    0.0,
    0.305_312_818_751_417_9,
    0.207_120_093_820_197_9,
    -1.293_879_140_655_123,
    57.119_884_115_881_49,
    -55.879_792_075_109_32,
    2.483_002_829_776_601_4e-2,
];

/// `y(t0 + u h) = y0 + h u sum_i k_i sum_p D[i][p] u^p`, rows over the nine
/// stages and then the extra one.
const DENSE: [[f64; DENSE_DEGREE]; STAGES + 1] = [
    [
        1.0,
        -5.308_169_607_103_577,
        10.181_680_448_958_68,
        -7.520_036_991_611_715,
        0.934_048_536_863_116_1,
        0.746_867_191_577_065,
    ],
    [0.0; DENSE_DEGREE],
    [0.0; DENSE_DEGREE],
    [
        0.0,
        6.272_050_253_212_501,
        -16.026_181_474_677_46,
        12.844_356_324_519_618,
        -1.148_794_504_476_759_1,
        -1.683_168_143_014_549_8,
    ],
    [
        0.0,
        6.876_491_702_846_304,
        -24.635_767_260_846_333,
        33.210_786_483_797_17,
        -17.494_615_282_636_44,
        2.464_041_475_806_649_6,
    ],
    [
        0.0,
        -35.544_451_710_599_6,
        165.701_617_019_024_2,
        -385.463_539_549_114_3,
        442.432_413_701_570_17,
        -182.720_642_991_211_2,
    ],
    [
        0.0,
        1_918.654_856_698_011_4,
        -9_268.121_508_966_042,
        20_858.337_028_772_55,
        -22_645.827_671_584_81,
        8_960.474_176_055_992,
    ],
    [
        0.0,
        -1_883.069_802_132_718_2,
        9_101.025_187_200_634,
        -20_473.188_551_959_534,
        22_209.765_551_256_532,
        -8_782.168_250_963_5,
    ],
    [
        0.0,
        0.119_024_796_351_236_43,
        -0.125_026_967_050_393_76,
        1.779_956_919_394_999_1,
        -4.660_932_123_043_763,
        2.886_977_374_347_921,
    ],
    [0.0, -8.0, 32.0, -40.0, 16.0, 0.0],
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControls {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step magnitude.
    pub h_init: f64,
    /// Smallest step magnitude before giving up.
    pub h_min: f64,
    pub h_max: f64,
}

impl Default for StepControls {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_init: 1e-3, h_min: 1e-13, h_max: 0.5 }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
}

/// One adaptive integration in either time direction. `y` and `t` always
/// hold the last accepted point; the stages of the step that reached it are
/// kept for dense output.
pub struct Integrator<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]> {
    f: F,
    controls: StepControls,
    direction: f64,
    t: f64,
    y: [f64; N],
    /// `f(t, y)`.
    slope: [f64; N],
    h: f64,
    t_prev: f64,
    y_prev: [f64; N],
    h_prev: f64,
    stages: [[f64; N]; STAGES + 1],
    /// Whether `stages[STAGES]` belongs to the last step.
    extra_ready: bool,
    pub accepted: usize,
    pub rejected: usize,
}

fn combine<const N: usize>(y: &[f64; N], h: f64, weights: &[f64], k: &[[f64; N]]) -> [f64; N] {
    let mut out = *y;
    for (w, ki) in weights.iter().zip(k) {
        if *w != 0.0 {
            for (o, v) in out.iter_mut().zip(ki) {
                *o += h * w * v;
            }
        }
    }
    out
}

impl<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]> Integrator<N, F> {
    /// `forward = false` integrates towards decreasing time.
    pub fn new(f: F, t0: f64, y0: [f64; N], forward: bool, controls: StepControls) -> Self {
        let slope = f(t0, &y0);
        Self {
            f,
            controls,
            direction: if forward { 1.0 } else { -1.0 },
            t: t0,
            y: y0,
            slope,
            h: controls.h_init,
            t_prev: t0,
            y_prev: y0,
            h_prev: 0.0,
            stages: [[0.0; N]; STAGES + 1],
            extra_ready: false,
            accepted: 0,
            rejected: 0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    pub fn t_prev(&self) -> f64 {
        self.t_prev
    }

    pub fn y_prev(&self) -> &[f64; N] {
        &self.y_prev
    }

    /// Takes one accepted step, not passing `t_stop`.
    pub fn step(&mut self, t_stop: f64) -> Result<(), OdeError> {
        let StepControls { rtol, atol, h_min, h_max, .. } = self.controls;
        let mut k = [[0.0; N]; STAGES + 1];
        k[0] = self.slope;
        loop {
            let remaining = (t_stop - self.t) * self.direction;
            let mut h = self.h.min(h_max);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let hs = h * self.direction;
            for s in 1..STAGES - 1 {
                let ys = combine(&self.y, hs, &A[s][..s], &k[..s]);
                k[s] = (self.f)(self.t + C[s] * hs, &ys);
            }
            // The last row of A equals B6, so the final stage sits at the new point.
            let y_new = combine(&self.y, hs, &B6, &k[..STAGES - 1]);
            k[STAGES - 1] = (self.f)(self.t + hs, &y_new);
            let y5 = combine(&self.y, hs, &B5, &k[..STAGES]);
            let mut sum = 0.0;
            for i in 0..N {
                let scale = atol + rtol * self.y[i].abs().max(y_new[i].abs());
                let e = (y_new[i] - y5[i]) / scale;
                sum += e * e;
            }
            let err = (sum / N as f64).sqrt();
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-1.0 / 6.0)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                self.t_prev = self.t;
                self.y_prev = self.y;
                self.h_prev = hs;
                self.t = if last { t_stop } else { self.t + hs };
                self.y = y_new;
                self.slope = k[STAGES - 1];
                self.stages = k;
                self.extra_ready = false;
                if !last || factor < 1.0 {
                    self.h = (h * factor).min(h_max);
                }
                self.accepted += 1;
                return Ok(());
            }
            self.rejected += 1;
            self.h = h * factor.min(1.0);
            if self.h < h_min {
                return Err(OdeError::StepUnderflow { t: self.t });
            }
        }
    }

    /// Applies `g` to the current point, e.g. a projection back onto a
    /// constraint surface. Dense output on the last step is unaffected.
    pub fn modify_state(&mut self, g: impl FnOnce(&mut [f64; N])) {
        g(&mut self.y);
        self.slope = (self.f)(self.t, &self.y);
    }

    /// Fifth-order interpolant on the last accepted step.
    pub fn dense(&mut self, t: f64) -> [f64; N] {
        if self.h_prev == 0.0 {
            return self.y;
        }
        if !self.extra_ready {
            let ys = combine(&self.y_prev, self.h_prev, &A_EXTRA, &self.stages[..STAGES]);
            self.stages[STAGES] = (self.f)(self.t_prev + C_EXTRA * self.h_prev, &ys);
            self.extra_ready = true;
        }
        let u = (t - self.t_prev) / self.h_prev;
        let mut weights = [0.0; STAGES + 1];
        for (w, row) in weights.iter_mut().zip(&DENSE) {
            *w = row.iter().rev().fold(0.0, |acc, c| acc * u + c) * u;
        }
        combine(&self.y_prev, self.h_prev, &weights, &self.stages)
    }
}
