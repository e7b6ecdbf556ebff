//! Complete elliptic integrals and the `chi` equation `2(1-y^2) chi'' = c3 chi`.
//!
//! Elliptic integrals take the parameter `m`:
//!
//! ```text
//! K(m) = int_0^{pi/2} (1 - m sin^2 t)^{-1/2} dt
//! E(m) = int_0^{pi/2} (1 - m sin^2 t)^{1/2} dt
//! ```

use crate::jet::{Jet, ORDER};
use crate::ode::{self, DenseSolution, OdeError, OdeOptions};
use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecfunError {
    #[error("parameter m = {0} outside the allowed range")]
    OutOfRange(f64),
    #[error("K(m) diverges at m = 1")]
    Divergent,
    #[error("grid point {0} is within the endpoint margin of +-1")]
    EndpointGrid(f64),
    #[error("chi vanishes at y = {0}; U_theta is singular there")]
    ChiZero(f64),
    #[error("y = {0} lies outside the integrated range")]
    OutsideRange(f64),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// `(K, E)` given `m` and its complement `mc = 1 - m`, both in `[0, 1]`.
pub fn elliptic_ke_comp(m: f64, mc: f64) -> Result<(f64, f64), SpecfunError> {
    if !(0.0..=1.0).contains(&m) || !(0.0..=1.0).contains(&mc) {
        return Err(SpecfunError::OutOfRange(m));
    }
    if mc == 0.0 {
        return Err(SpecfunError::Divergent);
    }
    let mut a = 1.0f64;
    let mut b = mc.sqrt();
    let mut c = m.sqrt();
    let mut sum = 0.5 * c * c;
    let mut pow = 0.5;
    for _ in 0..60 {
        if c.abs() <= 1e-17 * a {
            break;
        }
        let an = 0.5 * (a + b);
        c = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
    }
    let k = FRAC_PI_2 / a;
    Ok((k, k * (1.0 - sum)))
}

pub fn elliptic_k(m: f64) -> Result<f64, SpecfunError> {
    if !(0.0..1.0).contains(&m) {
        return Err(if m == 1.0 { SpecfunError::Divergent } else { SpecfunError::OutOfRange(m) });
    }
    Ok(elliptic_ke_comp(m, 1.0 - m)?.0)
}

pub fn elliptic_e(m: f64) -> Result<f64, SpecfunError> {
    if m == 1.0 {
        return Ok(1.0);
    }
    if !(0.0..1.0).contains(&m) {
        return Err(SpecfunError::OutOfRange(m));
    }
    Ok(elliptic_ke_comp(m, 1.0 - m)?.1)
}

const SERIES_TERMS: usize = 140;
const SERIES_MAX_M: f64 = 0.5;

/// Maclaurin coefficients of `K`, `E` and `E - (1-m) K` (without the `pi/2` factor).
fn series_coeffs() -> &'static [[f64; SERIES_TERMS]; 3] {
    static C: OnceLock<[[f64; SERIES_TERMS]; 3]> = OnceLock::new();
    C.get_or_init(|| {
        let mut k = [0.0; SERIES_TERMS];
        let mut e = [0.0; SERIES_TERMS];
        let mut d = [0.0; SERIES_TERMS];
        let mut r = 1.0;
        for n in 0..SERIES_TERMS {
            if n > 0 {
                r *= (2 * n - 1) as f64 / (2 * n) as f64;
            }
            k[n] = r * r;
            e[n] = -k[n] / (2.0 * n as f64 - 1.0);
            if n > 0 {
                d[n] = e[n] - k[n] + k[n - 1];
            }
        }
        [k, e, d]
    })
}

/// Power series `(pi/2) sum a_n m^n` with its derivatives, composed with the jet `m`.
fn series_jet(m: Jet, a: &[f64; SERIES_TERMS]) -> Jet {
    let x = m.value();
    let mut d = [0.0; ORDER + 1];
    for (k, dk) in d.iter_mut().enumerate() {
        // sum_n a_n n!/(n-k)! x^(n-k), Horner from the top
        let mut acc = 0.0;
        for n in (k..SERIES_TERMS).rev() {
            let mut f = 1.0;
            for i in 0..k {
                f *= (n - i) as f64;
            }
            acc = acc * x + a[n] * f;
        }
        *dk = FRAC_PI_2 * acc;
    }
    m.compose(&d)
}

/// `(K(m), E(m))` as Taylor jets, with `mc = 1 - m` supplied for accuracy near `m = 1`.
///
/// Small `m` uses the Maclaurin series. Otherwise higher derivatives come from
/// `m(1-m) K'' + (1-2m) K' - K/4 = 0` and `m(1-m) E'' + (1-m) E' + E/4 = 0`,
/// differentiated `n` times.
pub fn elliptic_ke_jet(m: Jet, mc: Jet) -> Result<(Jet, Jet), SpecfunError> {
    let (m0, mc0) = (m.value(), mc.value());
    let (k, e) = elliptic_ke_comp(m0, mc0)?;
    if m0 <= SERIES_MAX_M {
        let c = series_coeffs();
        let mut kj = series_jet(m, &c[0]);
        let mut ej = series_jet(m, &c[1]);
        kj.c[0] = k;
        ej.c[0] = e;
        return Ok((kj, ej));
    }
    let w = m0 * mc0;
    let one_2m = mc0 - m0;
    let mut kd = [0.0; ORDER + 1];
    let mut ed = [0.0; ORDER + 1];
    kd[0] = k;
    ed[0] = e;
    kd[1] = (e - mc0 * k) / (2.0 * w);
    ed[1] = (e - k) / (2.0 * m0);
    for n in 0..ORDER - 1 {
        let nf = n as f64;
        kd[n + 2] = ((nf + 0.5).powi(2) * kd[n] - (nf + 1.0) * one_2m * kd[n + 1]) / w;
        ed[n + 2] = ((nf * nf - 0.25) * ed[n] - (nf * one_2m + mc0) * ed[n + 1]) / w;
    }
    Ok((m.compose(&kd), m.compose(&ed)))
}

/// `E(m) - (1-m) K(m)` as a jet, free of cancellation for small `m`.
pub fn elliptic_d_jet(m: Jet, mc: Jet) -> Result<Jet, SpecfunError> {
    if m.value() <= SERIES_MAX_M {
        if !(m.value() >= 0.0) {
            return Err(SpecfunError::OutOfRange(m.value()));
        }
        return Ok(series_jet(m, &series_coeffs()[2]));
    }
    let (k, e) = elliptic_ke_jet(m, mc)?;
    Ok(e - mc * k)
}

/// Solution of `2(1-y^2) chi'' = c3 chi` from initial data at `y0`.
#[derive(Clone, Debug)]
pub struct ChiSolution {
    pub c3: f64,
    pub y0: f64,
    fwd: Option<DenseSolution<2>>,
    bwd: Option<DenseSolution<2>>,
}

const CHI_MARGIN: f64 = 1e-6;

pub fn chi_solve(c3: f64, init: (f64, f64), y0: f64, grid: &[f64]) -> Result<ChiSolution, SpecfunError> {
    for &y in grid.iter().chain(std::iter::once(&y0)) {
        if !(y.abs() < 1.0 - CHI_MARGIN) {
            return Err(SpecfunError::EndpointGrid(y));
        }
    }
    let lo = grid.iter().cloned().fold(y0, f64::min);
    let hi = grid.iter().cloned().fold(y0, f64::max);
    let rhs = |y: f64, s: &[f64; 2]| [s[1], c3 * s[0] / (2.0 * (1.0 - y * y))];
    let opts = OdeOptions { rtol: 1e-12, atol: 1e-14, ..Default::default() };
    let run = |end: f64| -> Result<Option<DenseSolution<2>>, SpecfunError> {
        if end == y0 {
            return Ok(None);
        }
        Ok(Some(ode::integrate(rhs, y0, [init.0, init.1], end, opts, |_, _| false)?))
    };
    Ok(ChiSolution { c3, y0, fwd: run(hi)?, bwd: run(lo)? })
}

impl ChiSolution {
    /// `(chi, chi')` at `y`.
    pub fn values(&self, y: f64) -> Result<(f64, f64), SpecfunError> {
        let piece = if y >= self.y0 { &self.fwd } else { &self.bwd };
        match piece {
            Some(s) => s.eval(y).map(|(v, _)| (v[0], v[1])).ok_or(SpecfunError::OutsideRange(y)),
            None if y == self.y0 => {
                let s = self.fwd.as_ref().or(self.bwd.as_ref()).ok_or(SpecfunError::OutsideRange(y))?;
                let (v, _) = s.eval(y).ok_or(SpecfunError::OutsideRange(y))?;
                Ok((v[0], v[1]))
            }
            None => Err(SpecfunError::OutsideRange(y)),
        }
    }

    /// `|2(1-y^2) chi'' - c3 chi| / (1 + |chi|)` using the interpolant derivative.
    pub fn residual(&self, y: f64) -> Result<f64, SpecfunError> {
        let piece = if y >= self.y0 { &self.fwd } else { &self.bwd };
        let s = piece.as_ref().ok_or(SpecfunError::OutsideRange(y))?;
        let (v, dv) = s.eval(y).ok_or(SpecfunError::OutsideRange(y))?;
        Ok((2.0 * (1.0 - y * y) * dv[1] - self.c3 * v[0]).abs() / (1.0 + v[0].abs()))
    }
}

/// `U_theta = 2(1-y^2) chi' / chi`.
pub fn u_theta_from_chi(chi: &ChiSolution, y: f64) -> Result<f64, SpecfunError> {
    let (c, dc) = chi.values(y)?;
    if c.abs() < 1e-13 * (1.0 + dc.abs()) {
        return Err(SpecfunError::ChiZero(y));
    }
    Ok(2.0 * (1.0 - y * y) * dc / c)
}

/// Closed-form `chi` for `c3 = -4`: `(1-y^2) ln((1+y)/(1-y)) + 2y + 2 alpha (1-y^2)`.
pub fn chi_closed_c3m4(alpha: f64, y: f64) -> (f64, f64) {
    let l = ((1.0 + y) / (1.0 - y)).ln();
    let q = 1.0 - y * y;
    (q * l + 2.0 * y + 2.0 * alpha * q, -2.0 * y * l + 4.0 - 4.0 * alpha * y)
}

/// Bisection for a root of `f` in `[a, b]` given a sign change.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    while (b - a).abs() > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}
