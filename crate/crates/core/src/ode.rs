//! Dormand-Prince 5(4) integrator with continuous (dense) output.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("too many steps (stopped at t = {t})")]
    TooManySteps { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12, h0: 1e-3, max_steps: 500_000 }
    }
}

#[derive(Clone, Debug)]
struct Step<const N: usize> {
    t0: f64,
    h: f64,
    r: [[f64; N]; 5],
}

/// Piecewise-polynomial solution produced by [`integrate`].
#[derive(Clone, Debug)]
pub struct DenseSolution<const N: usize> {
    steps: Vec<Step<N>>,
    pub t_start: f64,
    pub t_end: f64,
    pub y_end: [f64; N],
    /// Set when the stop predicate fired before reaching the requested end.
    pub stopped: bool,
}

impl<const N: usize> DenseSolution<N> {
    fn locate(&self, t: f64) -> Option<&Step<N>> {
        if self.steps.is_empty() {
            return None;
        }
        let forward = self.t_end >= self.t_start;
        let (lo, hi) = if forward { (self.t_start, self.t_end) } else { (self.t_end, self.t_start) };
        if t < lo - 1e-14 || t > hi + 1e-14 {
            return None;
        }
        let idx = self.steps.partition_point(|s| {
            if forward {
                s.t0 + s.h < t
            } else {
                s.t0 + s.h > t
            }
        });
        Some(&self.steps[idx.min(self.steps.len() - 1)])
    }

    /// Value and t-derivative of the interpolant.
    pub fn eval(&self, t: f64) -> Option<([f64; N], [f64; N])> {
        let s = self.locate(t)?;
        let th = (t - s.t0) / s.h;
        let th1 = 1.0 - th;
        let mut y = [0.0; N];
        let mut dy = [0.0; N];
        for i in 0..N {
            let [r1, r2, r3, r4, r5] = [s.r[0][i], s.r[1][i], s.r[2][i], s.r[3][i], s.r[4][i]];
            let a = r4 + th1 * r5;
            let da = -r5;
            let b = r3 + th * a;
            let db = a + th * da;
            let c = r2 + th1 * b;
            let dc = -b + th1 * db;
            y[i] = r1 + th * c;
            dy[i] = (c + th * dc) / s.h;
        }
        Some((y, dy))
    }

    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integrate `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// `stop` is checked after every accepted step; when it returns true the
/// solution ends there with `stopped = true`.
pub fn integrate<const N: usize>(
    mut f: impl FnMut(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: OdeOptions,
    mut stop: impl FnMut(f64, &[f64; N]) -> bool,
) -> Result<DenseSolution<N>, OdeError> {
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut sol = DenseSolution { steps: Vec::new(), t_start: t0, t_end: t0, y_end: y0, stopped: false };
    if span == 0.0 {
        return Ok(sol);
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = opts.h0.min(span) * dir;
    let mut n = 0;
    loop {
        if n >= opts.max_steps {
            return Err(OdeError::TooManySteps { t });
        }
        n += 1;
        let last = (t + h - t1) * dir >= 0.0;
        if last {
            h = t1 - t;
        }
        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        for s in 1..7 {
            let mut ys = y;
            for (i, yi) in ys.iter_mut().enumerate() {
                for j in 0..s {
                    *yi += h * A[s][j] * k[j][i];
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y1 = y;
        for (i, yi) in y1.iter_mut().enumerate() {
            for j in 0..6 {
                *yi += h * A[6][j] * k[j][i];
            }
        }
        let mut err = 0.0;
        for i in 0..N {
            let e: f64 = (0..7).map(|j| E[j] * k[j][i]).sum::<f64>() * h;
            let sc = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            h *= 0.2;
            if h.abs() < 1e-15 * t.abs().max(1.0) {
                return Err(OdeError::NonFinite { t });
            }
            continue;
        }
        if err <= 1.0 {
            let mut r = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y1[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                r[0][i] = y[i];
                r[1][i] = ydiff;
                r[2][i] = bspl;
                r[3][i] = ydiff - h * k[6][i] - bspl;
                r[4][i] = h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>();
            }
            sol.steps.push(Step { t0: t, h, r });
            t += h;
            y = y1;
            k1 = k[6];
            sol.t_end = t;
            sol.y_end = y;
            if last {
                return Ok(sol);
            }
            if stop(t, &y) {
                sol.stopped = true;
                return Ok(sol);
            }
        }
        let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        h *= if err <= 1.0 { fac } else { fac.min(1.0) };
        if h.abs() < 1e-14 * t.abs().max(1e-3) {
            return Err(OdeError::StepUnderflow { t });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_with_dense_output() {
        let sol = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], 10.0, OdeOptions::default(), |_, _| false)
            .unwrap();
        assert!((sol.y_end[0] - 10f64.sin()).abs() < 1e-8);
        for &t in &[0.3, 2.71, 7.77] {
            let (y, dy) = sol.eval(t).unwrap();
            assert!((y[0] - t.sin()).abs() < 1e-8);
            assert!((dy[0] - t.cos()).abs() < 1e-6);
        }
    }

    #[test]
    fn backward_and_stop() {
        let sol = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], -5.0, OdeOptions::default(), |_, _| false)
            .unwrap();
        // y = 1/(1-t)
        assert!((sol.y_end[0] - 1.0 / 6.0).abs() < 1e-10);
        let (y, _) = sol.eval(-2.5).unwrap();
        assert!((y[0] - 1.0 / 3.5).abs() < 1e-9);
        let blow = integrate(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 2.0, OdeOptions::default(), |_, y| y[0] > 50.0)
            .unwrap();
        assert!(blow.stopped && blow.t_end < 1.0 && blow.t_end > 0.97);
    }
}
