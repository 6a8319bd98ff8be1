//! Adaptive Verner 6(5) Runge–Kutta pair with continuous 5th-order extension.
//!
//! The 6th-order solution is propagated, the embedded 5th-order one drives step control. One
//! extra stage per accepted step feeds the dense-output polynomial.

use serde::{Deserialize, Serialize};

use super::CompanionSystem;
use crate::{CMatrix, Error, Result, C64};

const STAGES: usize = 9;
const DENSE_STAGES: usize = 10;
const DENSE_DEGREE: usize = 6;

const C: [f64; STAGES] = [
    0.0,
    0.6e-1,
    9.593_333_333_333_333e-2,
    0.1439,
    0.4973,
    0.9725,
    0.9995,
    1.0,
    1.0,
];

const A: [[f64; STAGES]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.6e-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        1.923_996_296_296_296_2e-2,
        7.669_337_037_037_037e-2,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [0.35975e-1, 0.0, 0.107925, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        1.318_683_415_233_148_4,
        0.0,
        -5.042_058_063_628_562,
        4.220_674_648_395_414,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
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
    [
        3.438_957_868_357_036e-2,
        0.0,
        0.0,
        0.258_262_455_563_350_3,
        0.420_937_118_967_353_7,
        4.405_396_469_669_31,
        -176.483_119_024_298_65,
        172.364_133_401_415_07,
        0.0,
    ],
];

/// 6th-order weights (the last stage is the FSAL evaluation at the new point).
const B: [f64; STAGES] = [
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

/// Embedded 5th-order weights.
const B_HAT: [f64; STAGES] = [
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

const C_DENSE: f64 = 0.5;
const A_DENSE: [f64; DENSE_STAGES] = [
    1.652_415_901_357_280_6e-2,
    0.0,
    0.0,
    0.305_312_818_751_417_9,
    0.207_120_093_820_197_9,
    -1.293_879_140_655_123,
    57.119_884_115_881_49,
    -55.879_792_075_109_32,
    2.483_002_829_776_601_4e-2,
    0.0,
];

/// Dense-output weight polynomials `b_i(theta) = sum_p B_DENSE[i][p] theta^p`.
const B_DENSE: [[f64; DENSE_DEGREE]; DENSE_STAGES] = [
    [
        1.0,
        -5.308_169_607_103_577,
        10.181_680_448_958_68,
        -7.520_036_991_611_715,
        0.934_048_536_863_116_1,
        0.746_867_191_577_065,
    ],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
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

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 200_000,
        }
    }
}

impl IntegratorConfig {
    /// Same value for relative and absolute tolerance.
    pub fn uniform(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::invalid(format!(
                "integrator tolerances must be positive (rtol = {}, atol = {})",
                self.rtol, self.atol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
}

#[derive(Debug, Clone)]
struct Step {
    t: f64,
    h: f64,
    y0: CMatrix,
    /// `y(t + theta h) = y0 + theta * sum_p theta^p coef[p]`
    coef: Vec<CMatrix>,
}

/// Piecewise-polynomial dense output of a matrix-valued Cauchy solve.
#[derive(Debug, Clone)]
pub struct DenseOutput {
    t0: f64,
    t1: f64,
    steps: Vec<Step>,
    final_state: CMatrix,
    stats: IntegratorStats,
}

impl DenseOutput {
    pub fn span(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn stats(&self) -> IntegratorStats {
        self.stats
    }

    pub fn shape(&self) -> (usize, usize) {
        self.final_state.shape()
    }

    /// Step start points followed by the final time.
    pub fn mesh(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self.steps.iter().map(|s| s.t).collect();
        m.push(self.t1);
        m
    }

    fn locate(&self, t: f64) -> Result<(&Step, f64)> {
        let slack = 1e-12 * (self.t1 - self.t0).max(self.t0.abs()).max(self.t1.abs());
        if t.is_nan() || t < self.t0 - slack || t > self.t1 + slack {
            return Err(Error::DomainError {
                t,
                a: self.t0,
                b: self.t1,
            });
        }
        let t = t.clamp(self.t0, self.t1);
        let idx = self
            .steps
            .partition_point(|s| s.t <= t)
            .saturating_sub(1)
            .min(self.steps.len() - 1);
        let step = &self.steps[idx];
        Ok((step, (t - step.t) / step.h))
    }

    /// State at `t`; exact initial data at `t0` and the propagated state at `t1`.
    pub fn eval(&self, t: f64) -> Result<CMatrix> {
        if t == self.t1 {
            return Ok(self.final_state.clone());
        }
        let (step, theta) = self.locate(t)?;
        if theta == 0.0 {
            return Ok(step.y0.clone());
        }
        let th = C64::new(theta, 0.0);
        let mut acc = step.coef[DENSE_DEGREE - 1].clone();
        for p in (0..DENSE_DEGREE - 1).rev() {
            acc *= th;
            acc += &step.coef[p];
        }
        Ok(&step.y0 + acc * th)
    }

    /// Time derivative of the interpolant (independent of the right-hand side).
    pub fn eval_derivative(&self, t: f64) -> Result<CMatrix> {
        let (step, theta) = self.locate(t)?;
        let th = C64::new(theta, 0.0);
        let mut acc = &step.coef[DENSE_DEGREE - 1] * C64::new(DENSE_DEGREE as f64, 0.0);
        for p in (0..DENSE_DEGREE - 1).rev() {
            acc *= th;
            acc += &step.coef[p] * C64::new((p + 1) as f64, 0.0);
        }
        Ok(acc / C64::new(step.h, 0.0))
    }
}

fn error_norm(err: &CMatrix, y: &CMatrix, y_new: &CMatrix, cfg: &IntegratorConfig) -> f64 {
    let mut sum = 0.0;
    for ((e, a), b) in err.iter().zip(y.iter()).zip(y_new.iter()) {
        let sc = cfg.atol + cfg.rtol * a.norm().max(b.norm());
        let q = e.norm() / sc;
        sum += q * q;
    }
    (sum / err.len().max(1) as f64).sqrt()
}

fn scaled_norm(x: &CMatrix, y: &CMatrix, cfg: &IntegratorConfig) -> f64 {
    let mut sum = 0.0;
    for (v, s) in x.iter().zip(y.iter()) {
        let q = v.norm() / (cfg.atol + cfg.rtol * s.norm());
        sum += q * q;
    }
    (sum / x.len().max(1) as f64).sqrt()
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1` with dense output.
pub(crate) fn integrate<F>(rhs: F, t0: f64, t1: f64, y0: CMatrix, cfg: &IntegratorConfig) -> Result<DenseOutput>
where
    F: Fn(f64, &CMatrix) -> Result<CMatrix>,
{
    cfg.validate()?;
    let span = t1 - t0;
    if span.is_nan() || span <= 0.0 {
        return Err(Error::invalid(format!(
            "integration span must be positive, got [{t0}, {t1}]"
        )));
    }
    let mut stats = IntegratorStats::default();
    let mut eval = |t: f64, y: &CMatrix| {
        stats.rhs_evaluations += 1;
        rhs(t, y)
    };

    let mut t = t0;
    let mut y = y0;
    let mut k: Vec<CMatrix> = Vec::with_capacity(DENSE_STAGES);
    k.push(eval(t, &y)?);

    // initial step (Hairer, Norsett & Wanner, II.4)
    let mut h = {
        let d0 = scaled_norm(&y, &y, cfg);
        let d1 = scaled_norm(&k[0], &y, cfg);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6 * span.max(1.0)
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(span);
        let y1 = &y + &k[0] * C64::new(h0, 0.0);
        let f1 = eval(t + h0, &y1)?;
        let d2 = scaled_norm(&(&f1 - &k[0]), &y, cfg) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6 * span)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 6.0)
        };
        (100.0 * h0).min(h1).min(span)
    };

    let h_min = 64.0 * f64::EPSILON * t0.abs().max(t1.abs()).max(span);
    let mut steps = Vec::new();
    let mut last_rejected = false;

    while t < t1 {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(Error::IntegrationFailure {
                t,
                reason: format!("step budget of {} exhausted", cfg.max_steps),
            });
        }
        if h < h_min {
            return Err(Error::IntegrationFailure {
                t,
                reason: format!("step size {h:e} underflow; problem too stiff for the explicit pair"),
            });
        }
        let last = t + h >= t1 || t1 - (t + h) < h_min;
        if last {
            h = t1 - t;
        }
        let hc = C64::new(h, 0.0);

        k.truncate(1);
        for i in 1..STAGES {
            let mut yi = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if A[i][j] != 0.0 {
                    yi += kj * (hc * A[i][j]);
                }
            }
            let ti = if i == STAGES - 1 {
                if last {
                    t1
                } else {
                    t + h
                }
            } else {
                t + C[i] * h
            };
            k.push(eval(ti, &yi)?);
        }
        // stage 9 is evaluated at y_new
        let mut y_new = y.clone();
        for (j, kj) in k.iter().enumerate() {
            if B[j] != 0.0 {
                y_new += kj * (hc * B[j]);
            }
        }
        let mut err = CMatrix::zeros(y.nrows(), y.ncols());
        for (j, kj) in k.iter().enumerate() {
            let w = B[j] - B_HAT[j];
            if w != 0.0 {
                err += kj * (hc * w);
            }
        }
        let en = error_norm(&err, &y, &y_new, cfg);
        if !en.is_finite() {
            return Err(Error::IntegrationFailure {
                t,
                reason: "non-finite state".into(),
            });
        }

        if en <= 1.0 {
            let mut yd = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if A_DENSE[j] != 0.0 {
                    yd += kj * (hc * A_DENSE[j]);
                }
            }
            k.push(eval(t + C_DENSE * h, &yd)?);
            let coef = (0..DENSE_DEGREE)
                .map(|p| {
                    let mut c = CMatrix::zeros(y.nrows(), y.ncols());
                    for (i, ki) in k.iter().enumerate() {
                        let w = B_DENSE[i][p];
                        if w != 0.0 {
                            c += ki * (hc * w);
                        }
                    }
                    c
                })
                .collect();
            steps.push(Step {
                t,
                h,
                y0: y.clone(),
                coef,
            });
            stats.accepted += 1;
            t = if last { t1 } else { t + h };
            y = y_new;
            let fsal = k.swap_remove(STAGES - 1);
            k.clear();
            k.push(fsal);

            let mut fac = if en == 0.0 {
                5.0
            } else {
                (0.9 * en.powf(-1.0 / 6.0)).clamp(0.2, 5.0)
            };
            if last_rejected {
                fac = fac.min(1.0);
            }
            h *= fac;
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h *= (0.9 * en.powf(-1.0 / 6.0)).clamp(0.2, 1.0);
            last_rejected = true;
        }
    }

    Ok(DenseOutput {
        t0,
        t1,
        steps,
        final_state: y,
        stats,
    })
}

/// Solves `Z' + K(t) Z = O`, `Z(a) = initial`, over the system interval.
pub fn solve_matrix_cauchy(
    companion: &CompanionSystem,
    initial: CMatrix,
    cfg: &IntegratorConfig,
) -> Result<DenseOutput> {
    if initial.nrows() != companion.dimension() {
        return Err(Error::shape(
            "Cauchy initial data rows",
            companion.dimension(),
            initial.nrows(),
        ));
    }
    let iv = companion.system().interval();
    integrate(|t, z| companion.rate(t, z, None), iv.a, iv.b, initial, cfg)
}
