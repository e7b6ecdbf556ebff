//! Solutions built from a locally univalent meromorphic function `f`.
//!
//! The potential on the sphere is
//!
//! ```text
//! phi = ln( |f'(z)|^2 (1 + |z|^2)^2 / (1 + |f(z)|^2)^2 ),   z = stereographic(R x)
//! ```
//!
//! and the velocity is `u = grad phi + (2 e^phi - 2) e_r`. For a prescription
//! of singular points `P_j` with integer exponents `l_j`, `R` sends the last
//! point to the north pole and `f' = prod_{j<m} (z - z_j)^(l_j - 1)`.

use crate::extrapolate::lstsq;
use crate::field::{FieldError, SphereField};
use crate::geometry::{
    basis_vectors, rotation_to_north, stereographic_forward, FieldSample, GeometryError, SphericalPoint,
};
use crate::quad::{integrate, QuadError, QuadOptions};
use nalgebra::{Rotation3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::RwLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiouvilleError {
    #[error("need at least two singular points, got {0}")]
    TooFewPoints(usize),
    #[error("{points} points but {exponents} exponents")]
    ExponentCount { points: usize, exponents: usize },
    #[error("exponent {0} is not allowed (0, 1 and -1 are excluded)")]
    ForbiddenExponent(i32),
    #[error("exponents sum to {sum}, expected {expected}")]
    ExponentSum { sum: i32, expected: i32 },
    #[error("point {0} is not a nonzero finite vector")]
    BadPoint(usize),
    #[error("points {0} and {1} coincide")]
    PointsTooClose(usize, usize),
    #[error("basepoint lies on a singular point of f'")]
    BasepointAtPole,
    #[error("f' has residue {residue:e} at point {index}; the primitive is multivalued")]
    MultivaluedPrimitive { index: usize, residue: f64 },
    #[error("invalid closed form parameters: {0}")]
    ClosedForm(String),
    #[error("point is within {distance:e} of a singularity")]
    NearSingularity { distance: f64 },
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<LiouvilleError> for FieldError {
    fn from(e: LiouvilleError) -> Self {
        match e {
            LiouvilleError::Quad(q) => FieldError::Quad(q),
            LiouvilleError::Geometry(g) => FieldError::Geometry(g),
            _ => FieldError::Domain { theta: f64::NAN, phi: f64::NAN },
        }
    }
}

/// Singular points, integer exponents and the base of the path integral.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prescription {
    pub points: Vec<[f64; 3]>,
    pub exponents: Vec<i32>,
    #[serde(default = "default_basepoint")]
    pub basepoint: [f64; 2],
}

fn default_basepoint() -> [f64; 2] {
    [0.5, 0.25]
}

/// Generators with an explicit formula for `f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "f", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClosedForm {
    /// `a z^alpha`
    Power { a: [f64; 2], alpha: f64 },
    /// `a e^(b z)`
    Exp { a: [f64; 2], b: [f64; 2] },
    /// `e^(z^k)`
    ExpPower { k: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LiouvilleInput {
    Closed(ClosedForm),
    Prescription(Prescription),
}

const MIN_SEPARATION: f64 = 1e-6;
const MIN_DISTANCE: f64 = 1e-5;
const CELL: f64 = 0.125;

fn cx(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

/// `ln(1 + e^s)` without overflow.
fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

fn sigmoid(s: f64) -> f64 {
    1.0 / (1.0 + (-s).exp())
}

/// Quantities of `f` entering the potential and its z-derivative.
#[derive(Clone, Copy, Debug)]
struct Local {
    /// `ln |f'|^2`
    ln_fp2: f64,
    /// `ln |f|^2`
    ln_f2: f64,
    /// `f'' / f'`
    fpp_over_fp: Complex64,
    /// `conj(f) f' / (1 + |f|^2)`
    coupling: Complex64,
}

impl Local {
    fn from_values(f: Complex64, fp: Complex64, fpp_over_fp: Complex64) -> Self {
        let af = f.norm();
        let coupling = if af <= 1.0 { f.conj() * fp / (1.0 + af * af) } else { fp / f / (1.0 + 1.0 / (af * af)) };
        Local { ln_fp2: 2.0 * fp.norm().ln(), ln_f2: 2.0 * af.ln(), fpp_over_fp, coupling }
    }

    fn from_log(ln_f2: f64, fp_over_f: Complex64, ln_fp2: f64, fpp_over_fp: Complex64) -> Self {
        Local { ln_fp2, ln_f2, fpp_over_fp, coupling: fp_over_f * sigmoid(ln_f2) }
    }

    fn xi_hat(&self, z: Complex64) -> f64 {
        self.ln_fp2 + 2.0 * z.norm_sqr().ln_1p() - 2.0 * softplus(self.ln_f2)
    }

    /// `d xi_hat / dz`
    fn xi_hat_z(&self, z: Complex64) -> Complex64 {
        self.fpp_over_fp + 2.0 * z.conj() / (1.0 + z.norm_sqr()) - 2.0 * self.coupling
    }
}

impl ClosedForm {
    fn validate(&self) -> Result<(), LiouvilleError> {
        let bad = |s: &str| Err(LiouvilleError::ClosedForm(s.into()));
        match self {
            ClosedForm::Power { a, alpha } => {
                if cx(*a).norm() == 0.0 || !cx(*a).norm().is_finite() || *alpha == 0.0 || !alpha.is_finite() {
                    return bad("power needs a != 0 and alpha != 0");
                }
            }
            ClosedForm::Exp { a, b } => {
                if cx(*a).norm() == 0.0 || cx(*b).norm() == 0.0 || !(cx(*a).norm() + cx(*b).norm()).is_finite() {
                    return bad("exp needs a != 0 and b != 0");
                }
            }
            ClosedForm::ExpPower { k } => {
                if *k == 0 {
                    return bad("exp_power needs k >= 1");
                }
            }
        }
        Ok(())
    }

    fn values(&self, z: Complex64) -> (Complex64, Complex64, Complex64) {
        match self {
            ClosedForm::Power { a, alpha } => {
                let a = cx(*a);
                (a * z.powf(*alpha), a * alpha * z.powf(alpha - 1.0), a * alpha * (alpha - 1.0) * z.powf(alpha - 2.0))
            }
            ClosedForm::Exp { a, b } => {
                let (a, b) = (cx(*a), cx(*b));
                let f = a * (b * z).exp();
                (f, b * f, b * b * f)
            }
            ClosedForm::ExpPower { k } => {
                let k = *k as f64;
                let zk = z.powf(k);
                let f = zk.exp();
                let g = k * z.powf(k - 1.0);
                let gp = k * (k - 1.0) * z.powf(k - 2.0);
                (f, g * f, (gp + g * g) * f)
            }
        }
    }

    fn local(&self, z: Complex64) -> Local {
        match self {
            ClosedForm::Power { a, alpha } => {
                let ln_f2 = 2.0 * cx(*a).norm().ln() + 2.0 * alpha * z.norm().ln();
                let ln_fp2 = ln_f2 + 2.0 * alpha.abs().ln() - 2.0 * z.norm().ln();
                Local::from_log(ln_f2, *alpha / z, ln_fp2, (alpha - 1.0) / z)
            }
            ClosedForm::Exp { a, b } => {
                let b = cx(*b);
                let ln_f2 = 2.0 * cx(*a).norm().ln() + 2.0 * (b * z).re;
                Local::from_log(ln_f2, b, ln_f2 + 2.0 * b.norm().ln(), b)
            }
            ClosedForm::ExpPower { k } => {
                let kf = *k as f64;
                let g = kf * z.powi(*k as i32 - 1);
                let ln_f2 = 2.0 * z.powi(*k as i32).re;
                Local::from_log(ln_f2, g, ln_f2 + 2.0 * g.norm().ln(), (kf - 1.0) / z + g)
            }
        }
    }

    fn singular_points(&self) -> Vec<Vector3<f64>> {
        let (n, s) = (Vector3::new(0.0, 0.0, 1.0), Vector3::new(0.0, 0.0, -1.0));
        match self {
            ClosedForm::Power { alpha, .. } if alpha.abs() == 1.0 => vec![],
            ClosedForm::Power { .. } => vec![n, s],
            _ => vec![n],
        }
    }
}

/// `f(z) = int_a^z prod (t - z_j)^(e_j) dt`, evaluated along pole-avoiding paths.
#[derive(Debug)]
struct PathIntegral {
    zs: Vec<Complex64>,
    powers: Vec<i32>,
    base: Complex64,
    detour: Vec<f64>,
    cache: RwLock<HashMap<(i64, i64), (Complex64, Complex64)>>,
}

fn quad_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-12, rel_tol: 1e-11, max_intervals: 4000 }
}

/// Closest parameter and distance from `c` to the segment `p + t (q - p)`.
fn closest(p: Complex64, q: Complex64, c: Complex64) -> (f64, f64) {
    let d = q - p;
    let t = if d.norm_sqr() == 0.0 { 0.0 } else { ((c - p) * d.conj()).re / d.norm_sqr() };
    let t = t.clamp(0.0, 1.0);
    (t, (p + d * t - c).norm())
}

impl PathIntegral {
    fn fprime(&self, z: Complex64) -> Complex64 {
        self.zs.iter().zip(&self.powers).fold(Complex64::new(1.0, 0.0), |acc, (zj, e)| acc * (z - zj).powi(*e))
    }

    fn log_derivative(&self, z: Complex64) -> Complex64 {
        self.zs.iter().zip(&self.powers).map(|(zj, e)| *e as f64 / (z - zj)).sum()
    }

    fn poles(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.zs.iter().zip(&self.powers).enumerate().filter(|(_, (_, e))| **e < 0).map(|(i, (z, _))| (i, *z))
    }

    fn segment(&self, p: Complex64, q: Complex64) -> Result<Complex64, LiouvilleError> {
        let d = q - p;
        Ok(integrate(|t| self.fprime(p + d * t) * d, 0.0, 1.0, quad_opts())?.0)
    }

    fn arc(&self, c: Complex64, r: f64, a0: f64, a1: f64) -> Result<Complex64, LiouvilleError> {
        Ok(integrate(
            |a| {
                let e = Complex64::from_polar(1.0, a);
                self.fprime(c + r * e) * Complex64::new(0.0, r) * e
            },
            a0,
            a1,
            quad_opts(),
        )?
        .0)
    }

    /// Straight path from `p` to `q` with circular detours around poles.
    fn path(&self, p: Complex64, q: Complex64) -> Result<Complex64, LiouvilleError> {
        let dir = q - p;
        let len = dir.norm();
        if len == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let mut hits = vec![];
        for (i, zj) in self.poles() {
            let r = self.detour[i].min(0.5 * (p - zj).norm()).min(0.5 * (q - zj).norm());
            let (t, dist) = closest(p, q, zj);
            if dist < r && t > 0.0 && t < 1.0 {
                let half = (r * r - dist * dist).sqrt() / len;
                let tc = ((zj - p) * dir.conj()).re / (len * len);
                hits.push((tc - half, tc + half, zj, r));
            }
        }
        hits.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut total = Complex64::new(0.0, 0.0);
        let mut cur = p;
        for (t1, t2, zj, r) in hits {
            let (a, b) = (p + dir * t1, p + dir * t2);
            total += self.segment(cur, a)?;
            let a0 = (a - zj).arg();
            let mut da = (b - zj).arg() - a0;
            if da > PI {
                da -= TAU;
            } else if da <= -PI {
                da += TAU;
            }
            total += self.arc(zj, r, a0, a0 + da)?;
            cur = b;
        }
        total += self.segment(cur, q)?;
        Ok(total)
    }

    fn segment_is_clear(&self, p: Complex64, q: Complex64) -> bool {
        self.poles().all(|(_, zj)| {
            let (_, d) = closest(p, q, zj);
            d >= 0.5 * (p - zj).norm().min((q - zj).norm())
        })
    }

    fn value(&self, z: Complex64) -> Result<Complex64, LiouvilleError> {
        let key = ((z.re / CELL).floor() as i64, (z.im / CELL).floor() as i64);
        let anchor = self.cache.read().expect("cache lock").get(&key).copied();
        if let Some((za, fa)) = anchor {
            if self.segment_is_clear(za, z) {
                return Ok(fa + self.segment(za, z)?);
            }
        }
        let v = self.path(self.base, z)?;
        self.cache.write().expect("cache lock").entry(key).or_insert((z, v));
        Ok(v)
    }

    fn local(&self, z: Complex64) -> Result<Local, LiouvilleError> {
        let f = self.value(z)?;
        let fp = self.fprime(z);
        Ok(Local::from_values(f, fp, self.log_derivative(z)))
    }

    /// Residue of `f'` at pole `i` from the trapezoidal rule on a small circle.
    fn residue(&self, i: usize) -> (f64, f64) {
        let n = 256;
        let r = 0.5 * self.detour[i];
        let mut sum = Complex64::new(0.0, 0.0);
        let mut scale = 0.0f64;
        for k in 0..n {
            let e = Complex64::from_polar(1.0, TAU * k as f64 / n as f64);
            let v = self.fprime(self.zs[i] + r * e) * e * r;
            scale = scale.max(v.norm());
            sum += v;
        }
        ((sum / n as f64).norm(), scale)
    }
}

#[derive(Debug)]
enum Generator {
    Closed(ClosedForm),
    Path(PathIntegral),
}

/// Fitted coefficient of `|u| ~ slope / |x - P| + intercept` near one singular point.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticFit {
    pub point: [f64; 3],
    pub exponent: Option<i32>,
    pub expected: Option<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
    pub within_tolerance: Option<bool>,
}

pub const ASYMPTOTIC_TOLERANCE: f64 = 0.03;

/// A (-1)-homogeneous solution generated by `f`.
#[derive(Debug)]
pub struct LiouvilleField {
    generator: Generator,
    rotation: Rotation3<f64>,
    singular: Vec<Vector3<f64>>,
    exponents: Vec<Option<i32>>,
}

impl LiouvilleField {
    pub fn from_input(input: &LiouvilleInput) -> Result<Self, LiouvilleError> {
        match input {
            LiouvilleInput::Closed(c) => Self::closed_form(c.clone()),
            LiouvilleInput::Prescription(p) => Self::build(p),
        }
    }

    pub fn closed_form(c: ClosedForm) -> Result<Self, LiouvilleError> {
        c.validate()?;
        let singular = c.singular_points();
        Ok(LiouvilleField {
            exponents: vec![None; singular.len()],
            singular,
            generator: Generator::Closed(c),
            rotation: Rotation3::identity(),
        })
    }

    pub fn build(p: &Prescription) -> Result<Self, LiouvilleError> {
        let m = p.points.len();
        if m < 2 {
            return Err(LiouvilleError::TooFewPoints(m));
        }
        if p.exponents.len() != m {
            return Err(LiouvilleError::ExponentCount { points: m, exponents: p.exponents.len() });
        }
        if let Some(&l) = p.exponents.iter().find(|l| l.abs() <= 1) {
            return Err(LiouvilleError::ForbiddenExponent(l));
        }
        let sum: i32 = p.exponents.iter().sum();
        if sum != m as i32 - 2 {
            return Err(LiouvilleError::ExponentSum { sum, expected: m as i32 - 2 });
        }
        let mut pts = Vec::with_capacity(m);
        for (i, q) in p.points.iter().enumerate() {
            let v = Vector3::new(q[0], q[1], q[2]);
            let n = v.norm();
            if !(n > 0.0 && n.is_finite()) {
                return Err(LiouvilleError::BadPoint(i));
            }
            pts.push(v / n);
        }
        for i in 0..m {
            for j in i + 1..m {
                if 2.0 * (0.5 * (pts[i] - pts[j]).norm()).asin() <= MIN_SEPARATION {
                    return Err(LiouvilleError::PointsTooClose(i, j));
                }
            }
        }
        let rotation = rotation_to_north(&pts[m - 1]);
        let zs = pts[..m - 1]
            .iter()
            .map(|q| stereographic_forward(&(rotation * q)))
            .collect::<Result<Vec<_>, _>>()?;
        let base = cx(p.basepoint);
        if zs.iter().any(|z| (z - base).norm() <= 1e-8) {
            return Err(LiouvilleError::BasepointAtPole);
        }
        let detour = (0..zs.len())
            .map(|i| {
                (0..zs.len())
                    .filter(|&k| k != i)
                    .map(|k| 0.5 * (zs[i] - zs[k]).norm())
                    .fold(1.0f64, f64::min)
            })
            .collect();
        let powers = p.exponents[..m - 1].iter().map(|l| l - 1).collect();
        let integral = PathIntegral { zs, powers, base, detour, cache: RwLock::new(HashMap::new()) };
        for (i, _) in integral.poles().collect::<Vec<_>>() {
            let (res, scale) = integral.residue(i);
            if res > 1e-9 * scale {
                return Err(LiouvilleError::MultivaluedPrimitive { index: i, residue: res });
            }
        }
        Ok(LiouvilleField {
            generator: Generator::Path(integral),
            rotation,
            singular: pts,
            exponents: p.exponents.iter().map(|&l| Some(l)).collect(),
        })
    }

    /// Stereographic images of the first `m - 1` points after rotation.
    pub fn z_list(&self) -> Vec<Complex64> {
        match &self.generator {
            Generator::Path(p) => p.zs.clone(),
            Generator::Closed(_) => vec![],
        }
    }

    pub fn rotation(&self) -> &Rotation3<f64> {
        &self.rotation
    }

    /// `(f, f', f'')` in the rotated chart.
    pub fn f_and_derivatives(&self, z: Complex64) -> Result<(Complex64, Complex64, Complex64), LiouvilleError> {
        match &self.generator {
            Generator::Closed(c) => Ok(c.values(z)),
            Generator::Path(p) => {
                if p.poles().any(|(_, zj)| (z - zj).norm() < 1e-12) {
                    return Err(LiouvilleError::NearSingularity { distance: 0.0 });
                }
                let fp = p.fprime(z);
                Ok((p.value(z)?, fp, fp * p.log_derivative(z)))
            }
        }
    }

    fn local(&self, z: Complex64) -> Result<Local, LiouvilleError> {
        match &self.generator {
            Generator::Closed(c) => Ok(c.local(z)),
            Generator::Path(p) => p.local(z),
        }
    }

    fn check_distance(&self, x: &Vector3<f64>) -> Result<(), LiouvilleError> {
        let d = self.singular.iter().map(|p| (x - p).norm()).fold(f64::INFINITY, f64::min);
        if d < MIN_DISTANCE {
            return Err(LiouvilleError::NearSingularity { distance: d });
        }
        Ok(())
    }

    /// Chart data in the rotated frame: `(x', z, 1 - x'_3)`.
    fn chart(&self, x: &Vector3<f64>) -> (Vector3<f64>, Complex64, f64) {
        let y = self.rotation * x;
        let s = if y.z > 0.0 { (y.x * y.x + y.y * y.y) / (1.0 + y.z) } else { 1.0 - y.z };
        (y, Complex64::new(y.x / s, y.y / s), s)
    }

    /// The potential at a unit vector.
    pub fn potential(&self, x: &Vector3<f64>) -> Result<f64, LiouvilleError> {
        self.check_distance(x)?;
        let (_, z, _) = self.chart(x);
        Ok(self.local(z)?.xi_hat(z))
    }

    /// `u_r` and the Cartesian tangential velocity at a unit vector.
    pub fn velocity_at(&self, x: &Vector3<f64>) -> Result<(f64, Vector3<f64>), LiouvilleError> {
        self.check_distance(x)?;
        let (y, z, s) = self.chart(x);
        let loc = self.local(z)?;
        let w = loc.xi_hat_z(z);
        let g1 = Vector3::new(1.0 / s, 0.0, y.x / (s * s));
        let g2 = Vector3::new(0.0, 1.0 / s, y.y / (s * s));
        let g = g1 * (2.0 * w.re) - g2 * (2.0 * w.im);
        let g = g - y * g.dot(&y);
        let u_r = 2.0 * loc.xi_hat(z).exp() - 2.0;
        Ok((u_r, self.rotation.inverse() * g))
    }

    fn spherical(&self, theta: f64, phi: f64) -> Result<(f64, f64, f64), LiouvilleError> {
        let x = SphericalPoint::unit(theta, phi)?.to_cartesian();
        let (u_r, t) = self.velocity_at(&x)?;
        let (_, et, ep) = basis_vectors(theta, phi);
        Ok((u_r, t.dot(&et), t.dot(&ep)))
    }

    /// Pressure from the radial momentum balance, with finite differences of `u_r`.
    pub fn pressure_balance(&self, theta: f64, phi: f64, h: f64) -> Result<f64, LiouvilleError> {
        let x = SphericalPoint::unit(theta, phi)?.to_cartesian();
        let d = self.singular.iter().map(|p| (x - p).norm()).fold(f64::INFINITY, f64::min);
        if d <= 5.0 * h {
            return Err(GeometryError::StencilContamination { point: [x.x, x.y, x.z], h, distance: d }.into());
        }
        let ur = |t: f64, p: f64| self.spherical(t, p).map(|v| v.0);
        let d12 = |f: &dyn Fn(f64) -> Result<f64, LiouvilleError>| -> Result<(f64, f64), LiouvilleError> {
            let v: Vec<f64> = (-3..=3).map(|k| f(k as f64 * h)).collect::<Result<_, _>>()?;
            let d1 = (45.0 * (v[4] - v[2]) - 9.0 * (v[5] - v[1]) + (v[6] - v[0])) / (60.0 * h);
            let d2 = (2.0 * (v[6] + v[0]) - 27.0 * (v[5] + v[1]) + 270.0 * (v[4] + v[2]) - 490.0 * v[3]) / (180.0 * h * h);
            Ok((d1, d2))
        };
        let (urt, urtt) = d12(&|dt| ur(theta + dt, phi))?;
        let (urp, urpp) = d12(&|dp| ur(theta, phi + dp))?;
        let (u_r, u_t, u_p) = self.spherical(theta, phi)?;
        let (s, c) = theta.sin_cos();
        Ok(-0.5 * (urtt + c / s * urt + urpp / (s * s) - u_t * urt - u_p * urp / s + u_r * u_r + u_t * u_t + u_p * u_p))
    }

    /// Least-squares fit of `|u|` against `1/|x - P_j|` along 8 directions at
    /// distances `1e-2 .. 1e-4`, for every singular point.
    pub fn verify_asymptotics(&self) -> Vec<Result<AsymptoticFit, LiouvilleError>> {
        let dists: Vec<f64> = (0..5).map(|k| 10f64.powf(-2.0 - 0.5 * k as f64)).collect();
        self.singular
            .iter()
            .zip(&self.exponents)
            .map(|(p, l)| {
                let a = if p.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
                let e1 = a.cross(p).normalize();
                let e2 = p.cross(&e1);
                let mut rows = vec![];
                let mut ys = vec![];
                for k in 0..8 {
                    let psi = TAU * k as f64 / 8.0 + 0.1;
                    for &d in &dists {
                        let x = p * d.cos() + (e1 * psi.cos() + e2 * psi.sin()) * d.sin();
                        let (u_r, t) = self.velocity_at(&x)?;
                        rows.push(vec![1.0 / (x - p).norm(), 1.0]);
                        ys.push((u_r * u_r + t.norm_squared()).sqrt());
                    }
                }
                let c = lstsq(&rows, &ys);
                let rms = (rows.iter().zip(&ys).map(|(r, y)| (r[0] * c[0] + c[1] - y).powi(2)).sum::<f64>()
                    / ys.len() as f64)
                    .sqrt();
                let expected = l.map(|l| 2.0 * (l.abs() as f64 - 1.0));
                Ok(AsymptoticFit {
                    point: [p.x, p.y, p.z],
                    exponent: *l,
                    expected,
                    slope: c[0],
                    intercept: c[1],
                    rms,
                    within_tolerance: expected.map(|e| (c[0] - e).abs() <= ASYMPTOTIC_TOLERANCE * e),
                })
            })
            .collect()
    }
}

impl SphereField for LiouvilleField {
    fn sample(&self, theta: f64, phi: f64) -> Result<FieldSample, FieldError> {
        let (u_r, u_theta, u_phi) = self.spherical(theta, phi).map_err(|e| match e {
            LiouvilleError::NearSingularity { .. } => FieldError::Domain { theta, phi },
            other => other.into(),
        })?;
        let s = FieldSample { u_r, u_theta, u_phi, p: u_r - 0.5 * (u_theta * u_theta + u_phi * u_phi) };
        if !s.is_finite() {
            return Err(FieldError::NonFinite { theta, phi });
        }
        Ok(s)
    }

    fn singular_points(&self) -> Vec<Vector3<f64>> {
        self.singular.clone()
    }
}
