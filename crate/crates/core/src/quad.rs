//! Adaptive Gauss-Kronrod (G7/K15) quadrature over real or complex integrands.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not converge: estimate {estimate}, error {error:e}")]
    NotConverged { estimate: f64, error: f64 },
    #[error("integrand returned a non-finite value at {0}")]
    NonFinite(f64),
}

pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

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
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-12, rel_tol: 1e-12, max_intervals: 2000 }
    }
}

/// One G7/K15 panel: (Kronrod estimate, |K - G|).
pub fn gk15<V: QuadValue>(f: &mut impl FnMut(f64) -> V, a: f64, b: f64) -> (V, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k = k + s * WGK[i];
        if i % 2 == 1 {
            g = g + s * WG[i / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).magnitude())
}

/// Global adaptive integration of `f` over `[a, b]`.
pub fn integrate<V: QuadValue>(
    mut f: impl FnMut(f64) -> V,
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> Result<(V, f64), QuadError> {
    if a == b {
        return Ok((V::zero(), 0.0));
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let total = panels.iter().fold(V::zero(), |s, p| s + p.2);
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if !total.magnitude().is_finite() || !err.is_finite() {
            return Err(QuadError::NonFinite(0.5 * (a + b)));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.magnitude()) {
            return Ok((total, err));
        }
        if panels.len() >= opts.max_intervals {
            return Err(QuadError::NotConverged { estimate: total.magnitude(), error: err });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            return Err(QuadError::NotConverged { estimate: total.magnitude(), error: err });
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}
