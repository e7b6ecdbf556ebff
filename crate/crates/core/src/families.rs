//! Closed-form (-1)-homogeneous solutions.
//!
//! A [`SolutionSpec`] names a family and its parameters; [`Solution::new`]
//! validates it and precomputes the domain and pressure constant.

use crate::field::{euler_pressure_from_velocity, pressure_from_velocity, AxisymmetricField, FieldError, SphereField};
use crate::geometry::{north, south, FieldSample};
use crate::jet::Jet;
use crate::specfun::{bisect, elliptic_d_jet, elliptic_ke_jet};
use nalgebra::Vector3;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("invalid parameters for {family}: {reason}")]
    InvalidParams { family: &'static str, reason: String },
}

fn invalid(family: &'static str, reason: impl Into<String>) -> SpecError {
    SpecError::InvalidParams { family, reason: reason.into() }
}

/// `+1` or `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sign(i8);

impl Sign {
    pub const PLUS: Sign = Sign(1);
    pub const MINUS: Sign = Sign(-1);

    pub fn new(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign(1)),
            -1 => Some(Sign(-1)),
            _ => None,
        }
    }

    pub fn value(self) -> f64 {
        self.0 as f64
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.0)
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        if v == 1.0 {
            Ok(Sign(1))
        } else if v == -1.0 {
            Ok(Sign(-1))
        } else {
            Err(serde::de::Error::custom(format!("sign must be 1 or -1, got {v}")))
        }
    }
}

/// Real parameter that may also be `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinity,
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => s.serialize_f64(*v),
            ExtendedReal::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => {
                Ok(ExtendedReal::Finite(n.as_f64().ok_or_else(|| serde::de::Error::custom("bad number"))?))
            }
            serde_json::Value::String(s) if matches!(s.as_str(), "inf" | "infinity" | "∞") => {
                Ok(ExtendedReal::Infinity)
            }
            other => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolutionSpec {
    Landau { sigma: f64 },
    NoSwirlOneSing { tau: f64, sigma: f64 },
    TypeTwoLog { alpha: f64 },
    EllipticC3Half { alpha: ExtendedReal },
    PowerLiouville { alpha: f64, a_abs: f64 },
    ExpLiouville { a_abs: f64, b1: f64, b2: f64 },
    ExpPowerLiouville { k: u32 },
    LimitPole { sign: Sign },
    EulerNoSwirl { c0: f64, c1: f64, c2: f64, sign: Sign },
    #[serde(rename = "euler_ns")]
    EulerNS { a: f64, b: f64 },
    WithConstantSwirl {
        base: Box<SolutionSpec>,
        #[serde(rename = "C")]
        c: f64,
    },
    /// `u_theta = -4 cot(theta)`, `u_r = -4`, `p = -8 csc^2(theta)`.
    #[serde(rename = "global_c3m4")]
    GlobalC3m4,
}

/// The global solution for `c = (0, 0, -4)`.
pub fn special_global_c3m4() -> SolutionSpec {
    SolutionSpec::GlobalC3m4
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DomainDescriptor {
    pub theta_min: f64,
    pub theta_max: f64,
    pub excluded_points: Vec<[f64; 3]>,
}

impl DomainDescriptor {
    pub fn contains(&self, theta: f64) -> bool {
        theta > self.theta_min && theta < self.theta_max
    }
}

const TAU2_TOL: f64 = 1e-12;

impl SolutionSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SolutionSpec::Landau { .. } => "landau",
            SolutionSpec::NoSwirlOneSing { .. } => "no_swirl_one_sing",
            SolutionSpec::TypeTwoLog { .. } => "type_two_log",
            SolutionSpec::EllipticC3Half { .. } => "elliptic_c3_half",
            SolutionSpec::PowerLiouville { .. } => "power_liouville",
            SolutionSpec::ExpLiouville { .. } => "exp_liouville",
            SolutionSpec::ExpPowerLiouville { .. } => "exp_power_liouville",
            SolutionSpec::LimitPole { .. } => "limit_pole",
            SolutionSpec::EulerNoSwirl { .. } => "euler_no_swirl",
            SolutionSpec::EulerNS { .. } => "euler_ns",
            SolutionSpec::WithConstantSwirl { .. } => "with_constant_swirl",
            SolutionSpec::GlobalC3m4 => "global_c3m4",
        }
    }

    pub fn is_axisymmetric(&self) -> bool {
        !matches!(self, SolutionSpec::ExpLiouville { .. } | SolutionSpec::ExpPowerLiouville { .. })
    }

    fn has_swirl(&self) -> bool {
        matches!(
            self,
            SolutionSpec::WithConstantSwirl { .. } | SolutionSpec::ExpLiouville { .. } | SolutionSpec::ExpPowerLiouville { .. }
        )
    }

    /// Solves Euler only, not Navier-Stokes.
    pub fn is_euler_only(&self) -> bool {
        match self {
            SolutionSpec::EulerNoSwirl { .. } => true,
            SolutionSpec::WithConstantSwirl { base, .. } => base.is_euler_only(),
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let finite = |name: &'static str, vals: &[f64]| {
            if vals.iter().all(|v| v.is_finite()) {
                Ok(())
            } else {
                Err(invalid(name, "parameters must be finite"))
            }
        };
        match self {
            SolutionSpec::Landau { sigma } => {
                finite("landau", &[*sigma])?;
                if *sigma == 0.0 || *sigma >= 1.0 {
                    return Err(invalid("landau", format!("sigma = {sigma} must lie in (-inf, 0) U (0, 1)")));
                }
            }
            SolutionSpec::NoSwirlOneSing { tau, sigma } => {
                finite("no_swirl_one_sing", &[*tau, *sigma])?;
                let lower = *tau <= 2.0 && *sigma <= 0.25 * (4.0 - tau);
                let upper = *tau >= 2.0 && (sigma - 0.25 * tau).abs() <= TAU2_TOL;
                if !(lower || upper) {
                    return Err(invalid(
                        "no_swirl_one_sing",
                        format!("(tau, sigma) = ({tau}, {sigma}) outside the admissible set"),
                    ));
                }
            }
            SolutionSpec::TypeTwoLog { alpha } => finite("type_two_log", &[*alpha])?,
            SolutionSpec::EllipticC3Half { alpha } => {
                if let ExtendedReal::Finite(a) = alpha {
                    finite("elliptic_c3_half", &[*a])?;
                }
            }
            SolutionSpec::PowerLiouville { alpha, a_abs } => {
                finite("power_liouville", &[*alpha, *a_abs])?;
                if *alpha == 0.0 || *a_abs <= 0.0 {
                    return Err(invalid("power_liouville", "need alpha != 0 and a_abs > 0"));
                }
            }
            SolutionSpec::ExpLiouville { a_abs, b1, b2 } => {
                finite("exp_liouville", &[*a_abs, *b1, *b2])?;
                if *a_abs <= 0.0 || b1.hypot(*b2) == 0.0 {
                    return Err(invalid("exp_liouville", "need a_abs > 0 and |b| > 0"));
                }
            }
            SolutionSpec::ExpPowerLiouville { k } => {
                if *k == 0 {
                    return Err(invalid("exp_power_liouville", "k must be a positive integer"));
                }
            }
            SolutionSpec::LimitPole { .. } | SolutionSpec::GlobalC3m4 => {}
            SolutionSpec::EulerNoSwirl { c0, c1, c2, .. } => {
                finite("euler_no_swirl", &[*c0, *c1, *c2])?;
                let q = |y: f64| c0 + c1 * y + c2 * y * y;
                let mut min = q(-1.0).min(q(1.0));
                if *c2 > 0.0 {
                    let yv = -c1 / (2.0 * c2);
                    if yv.abs() < 1.0 {
                        min = min.min(q(yv));
                    }
                }
                if min < 0.0 {
                    return Err(invalid("euler_no_swirl", "c0 + c1 y + c2 y^2 must be nonnegative on [-1, 1]"));
                }
            }
            SolutionSpec::EulerNS { a, b } => finite("euler_ns", &[*a, *b])?,
            SolutionSpec::WithConstantSwirl { base, c } => {
                finite("with_constant_swirl", &[*c])?;
                if !base.is_axisymmetric() || base.has_swirl() {
                    return Err(invalid("with_constant_swirl", "base must be an axisymmetric solution without swirl"));
                }
                base.validate()?;
            }
        }
        Ok(())
    }
}

/// A validated family member, ready for evaluation.
#[derive(Clone, Debug)]
pub struct Solution {
    spec: SolutionSpec,
    domain: DomainDescriptor,
    /// Constant in `p = u_r - u_theta^2 / 2 + c3` for the no-swirl families.
    c3: f64,
    base: Option<Box<Solution>>,
}

fn half(th: Jet) -> (Jet, Jet) {
    let h = th * 0.5;
    (h.cos(), h.sin())
}

fn divergence_free_ur(ut: Jet, th: Jet) -> Jet {
    -ut.deriv() - th.cos() / th.sin() * ut
}

fn type_two_log_d(alpha: f64, theta: f64) -> f64 {
    let l = (0.5 * theta).tan().recip().ln() + alpha;
    theta.cos() + theta.sin().powi(2) * l
}

impl Solution {
    pub fn new(spec: SolutionSpec) -> Result<Self, SpecError> {
        spec.validate()?;
        let base = match &spec {
            SolutionSpec::WithConstantSwirl { base, .. } => Some(Box::new(Solution::new((**base).clone())?)),
            _ => None,
        };
        let mut sol = Solution {
            domain: DomainDescriptor { theta_min: 0.0, theta_max: PI, excluded_points: vec![] },
            spec,
            c3: 0.0,
            base,
        };
        sol.domain = sol.compute_domain();
        if let SolutionSpec::Landau { .. } | SolutionSpec::NoSwirlOneSing { .. } = sol.spec {
            let tau = match sol.spec {
                SolutionSpec::NoSwirlOneSing { tau, .. } => tau,
                _ => 0.0,
            };
            let j = sol.theta_jets(FRAC_PI_2).map_err(|e| invalid("no_swirl_one_sing", e.to_string()))?;
            // c1 from the limit at S, c2 = 0 since U vanishes at N
            let c1 = 0.25 * tau * tau - tau;
            sol.c3 = j[0].value() + 0.5 * j[1].value().powi(2) - c1;
        }
        Ok(sol)
    }

    pub fn spec(&self) -> &SolutionSpec {
        &self.spec
    }

    pub fn domain(&self) -> &DomainDescriptor {
        &self.domain
    }

    fn compute_domain(&self) -> DomainDescriptor {
        let pts = |v: &[Vector3<f64>]| v.iter().map(|p| [p.x, p.y, p.z]).collect::<Vec<_>>();
        let full = |ex: Vec<Vector3<f64>>| DomainDescriptor { theta_min: 0.0, theta_max: PI, excluded_points: pts(&ex) };
        let (n, s) = (north(), south());
        match &self.spec {
            SolutionSpec::Landau { .. } => full(vec![]),
            SolutionSpec::NoSwirlOneSing { tau, sigma } => {
                if *tau == 0.0 && *sigma < 1.0 {
                    full(vec![])
                } else {
                    full(vec![s])
                }
            }
            SolutionSpec::TypeTwoLog { alpha } => {
                let t0 = bisect(|t| type_two_log_d(*alpha, t), 1e-12, PI - 1e-12, 1e-14).unwrap_or(0.0);
                DomainDescriptor { theta_min: t0, theta_max: PI, excluded_points: pts(&[s]) }
            }
            SolutionSpec::EllipticC3Half { alpha: ExtendedReal::Finite(a) } if *a < 0.0 => {
                let den = |t: f64| self.elliptic_parts(Jet::constant(t)).map(|(_, d)| d.value()).unwrap_or(f64::NAN);
                let mut hi = PI - 1e-9;
                let mut prev = (1e-6, den(1e-6));
                for i in 1..=2000 {
                    let t = 1e-6 + (PI - 2e-6) * i as f64 / 2000.0;
                    let v = den(t);
                    if v.signum() != prev.1.signum() {
                        hi = bisect(den, prev.0, t, 1e-14).unwrap_or(t);
                        break;
                    }
                    prev = (t, v);
                }
                DomainDescriptor { theta_min: 0.0, theta_max: hi, excluded_points: pts(&[n]) }
            }
            SolutionSpec::EllipticC3Half { .. } => full(vec![n, s]),
            SolutionSpec::PowerLiouville { alpha, .. } => {
                if alpha.abs() == 1.0 {
                    full(vec![])
                } else {
                    full(vec![n, s])
                }
            }
            SolutionSpec::ExpLiouville { .. } | SolutionSpec::ExpPowerLiouville { .. } => full(vec![n]),
            SolutionSpec::LimitPole { sign } => full(vec![if sign.0 > 0 { n } else { s }]),
            SolutionSpec::EulerNoSwirl { c0, c1, c2, .. } => {
                let mut ex = vec![];
                if c0 + c1 + c2 > 0.0 {
                    ex.push(n);
                }
                if c0 - c1 + c2 > 0.0 {
                    ex.push(s);
                }
                full(ex)
            }
            SolutionSpec::EulerNS { a, b } => {
                let mut ex = vec![];
                if a + b != 0.0 {
                    ex.push(n);
                }
                if b - a != 0.0 {
                    ex.push(s);
                }
                full(ex)
            }
            SolutionSpec::GlobalC3m4 => full(vec![n, s]),
            SolutionSpec::WithConstantSwirl { c, .. } => {
                let mut d = self.base.as_ref().expect("base").domain.clone();
                if *c != 0.0 {
                    for p in [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]] {
                        if !d.excluded_points.contains(&p) {
                            d.excluded_points.push(p);
                        }
                    }
                }
                d
            }
        }
    }

    /// Numerator and denominator of `u_theta` for the elliptic family.
    fn elliptic_parts(&self, th: Jet) -> Result<(Jet, Jet), FieldError> {
        let SolutionSpec::EllipticC3Half { alpha } = self.spec else { unreachable!() };
        let (c, s) = half(th);
        let (m1, m2) = (c * c, s * s);
        let st = th.sin();
        let (k2, _) = elliptic_ke_jet(m2, m1)?;
        let d2 = elliptic_d_jet(m2, m1)?;
        match alpha {
            ExtendedReal::Infinity => Ok((-st * k2, 2.0 * d2)),
            ExtendedReal::Finite(a) => {
                let (k1, _) = elliptic_ke_jet(m1, m2)?;
                let d1 = elliptic_d_jet(m1, m2)?;
                Ok((st * (k1 - a * k2), 2.0 * (d1 + a * d2)))
            }
        }
    }

    /// Velocity jets with `th` and `ph` seeded as needed. Axisymmetric families
    /// require `ph` constant.
    fn velocity(&self, th: Jet, ph: Jet) -> Result<[Jet; 3], FieldError> {
        let zero = Jet::constant(0.0);
        let (c, s) = half(th);
        let st = th.sin();
        let ct = th.cos();
        Ok(match &self.spec {
            SolutionSpec::Landau { sigma } => {
                let ut = 2.0 * st / ((2.0 - sigma) / sigma + ct);
                [divergence_free_ur(ut, th), ut, zero]
            }
            SolutionSpec::NoSwirlOneSing { tau, sigma } => {
                let tan = s / c;
                let ut = if (tau - 2.0).abs() <= TAU2_TOL {
                    let k = 1.0 - 2.0 * sigma;
                    tan * (1.0 + 2.0 * k / (k * 2.0 * c.ln() - 2.0))
                } else if *tau < 2.0 {
                    let b = 1.0 - 0.5 * tau;
                    let den = (1.0 - 2.0 * sigma + b) * c.powf(-2.0 * b) + (2.0 * sigma - 1.0 + b);
                    tan * (1.0 - b - 2.0 * b * (1.0 - 2.0 * sigma - b) / den)
                } else {
                    tan * (0.5 * tau)
                };
                [divergence_free_ur(ut, th), ut, zero]
            }
            SolutionSpec::TypeTwoLog { alpha } => {
                let l = (c / s).ln() + *alpha;
                let d = ct + st * st * l;
                let n = 1.0 - ct * l;
                [-4.0 - 8.0 * n / (d * d), 4.0 * st * n / d, zero]
            }
            SolutionSpec::EllipticC3Half { .. } => {
                let (num, den) = self.elliptic_parts(th)?;
                let ut = num / den;
                [divergence_free_ur(ut, th), ut, zero]
            }
            SolutionSpec::PowerLiouville { alpha, a_abs } => {
                let w = a_abs.ln() + *alpha * (c / s).ln();
                let ut = 2.0 / st * (-ct + *alpha * w.tanh());
                let ur = -2.0 + 2.0 * alpha * alpha * w.sech2() / (st * st);
                [ur, ut, zero]
            }
            SolutionSpec::ExpLiouville { a_abs, b1, b2 } => {
                let (sp, cp) = (ph.sin(), ph.cos());
                let beta = *b1 * cp - *b2 * sp;
                let gamma = *b1 * sp + *b2 * cp;
                let cot = c / s;
                let w = cot * beta + a_abs.ln();
                let th_w = w.tanh();
                let s2 = s * s;
                let ut = -2.0 * cot + beta * th_w / s2;
                let up = 2.0 * gamma * cot * th_w / st;
                let ur = -2.0 + (b1 * b1 + b2 * b2) * w.sech2() / (2.0 * s2 * s2);
                [ur, ut, up]
            }
            SolutionSpec::ExpPowerLiouville { k } => {
                let kf = *k as f64;
                let ck = (c / s).powi(*k as i32);
                let kp = ph * kf;
                let w = ck * kp.cos();
                let tw = w.tanh();
                let ut = -2.0 * (ct + kf) / st + 2.0 * kf * kp.cos() * ck * tw / st;
                let up = 2.0 * kf * kp.sin() * ck * tw / st;
                let ur = -2.0 + 2.0 * kf * kf * ck * ck * w.sech2() / (st * st);
                [ur, ut, up]
            }
            SolutionSpec::LimitPole { sign } => {
                let ut = if sign.0 > 0 { -2.0 * c / s } else { 2.0 * s / c };
                [Jet::constant(-2.0), ut, zero]
            }
            SolutionSpec::EulerNoSwirl { c0, c1, c2, sign } => {
                let q = 2.0 * (*c0 + *c1 * ct + *c2 * ct * ct);
                if q.value() <= 0.0 {
                    return Err(FieldError::Domain { theta: th.value(), phi: ph.value() });
                }
                let rq = q.sqrt();
                let sg = sign.value();
                [sg * (*c1 + 2.0 * *c2 * ct) / rq, sg * rq / st, zero]
            }
            SolutionSpec::EulerNS { a, b } => [Jet::constant(*a), (*a * ct + *b) / st, zero],
            SolutionSpec::GlobalC3m4 => [Jet::constant(-4.0), -4.0 * ct / st, zero],
            SolutionSpec::WithConstantSwirl { c: cs, .. } => {
                let [ur, ut, _] = self.base.as_ref().expect("base").velocity(th, ph)?;
                [ur, ut, *cs / st]
            }
        })
    }

    fn check(&self, theta: f64, phi: f64) -> Result<(), FieldError> {
        if !(theta > 0.0 && theta < PI) || !self.domain.contains(theta) || !phi.is_finite() {
            return Err(FieldError::Domain { theta, phi });
        }
        Ok(())
    }

    /// Component jets in `theta` at fixed `phi`.
    pub fn jets_theta(&self, theta: f64, phi: f64) -> Result<[Jet; 3], FieldError> {
        self.check(theta, phi)?;
        self.velocity(Jet::variable(theta), Jet::constant(phi))
    }

    /// Component jets in `phi` at fixed `theta`.
    pub fn jets_phi(&self, theta: f64, phi: f64) -> Result<[Jet; 3], FieldError> {
        self.check(theta, phi)?;
        if self.spec.is_axisymmetric() {
            let v = self.velocity(Jet::variable(theta), Jet::constant(phi))?;
            return Ok(v.map(|j| Jet::constant(j.value())));
        }
        self.velocity(Jet::constant(theta), Jet::variable(phi))
    }

    /// Pressure from the radial momentum balance, using analytic derivatives.
    pub fn pressure_from_balance(&self, theta: f64, phi: f64) -> Result<f64, FieldError> {
        let th = self.jets_theta(theta, phi)?;
        let ph = self.jets_phi(theta, phi)?;
        Ok(pressure_from_velocity(&th, &ph, theta))
    }

    fn pressure(&self, theta: f64, phi: f64, v: &[Jet; 3]) -> Result<f64, FieldError> {
        let (ur, ut) = (v[0].value(), v[1].value());
        let st = theta.sin();
        Ok(match &self.spec {
            SolutionSpec::Landau { .. } | SolutionSpec::NoSwirlOneSing { .. } => ur - 0.5 * ut * ut + self.c3,
            SolutionSpec::TypeTwoLog { alpha } => {
                let l = (0.5 * theta).tan().recip().ln() + alpha;
                let d = theta.cos() + st * st * l;
                8.0 * (-2.0 + theta.cos() * l - st * st * l * l) / (d * d)
            }
            SolutionSpec::EllipticC3Half { .. } => {
                let urj = v[0];
                let cot = theta.cos() / st;
                -0.5 * (urj.derivative(2) + (cot - ut) * urj.derivative(1) + ur * ur + ut * ut)
            }
            SolutionSpec::PowerLiouville { .. } => ur - 0.5 * ut * ut,
            SolutionSpec::ExpLiouville { .. } | SolutionSpec::ExpPowerLiouville { .. } => {
                let up = v[2].value();
                ur - 0.5 * (ut * ut + up * up)
            }
            SolutionSpec::LimitPole { sign } => {
                let (s, c) = (0.5 * theta).sin_cos();
                if sign.0 > 0 {
                    -2.0 / (s * s)
                } else {
                    -2.0 / (c * c)
                }
            }
            SolutionSpec::EulerNoSwirl { .. } => {
                let ph = self.jets_phi(theta, phi)?;
                euler_pressure_from_velocity(v, &ph, theta)
            }
            SolutionSpec::EulerNS { a, b } => -(a * a + b * b + 2.0 * a * b * theta.cos()) / (2.0 * st * st),
            SolutionSpec::GlobalC3m4 => -8.0 / (st * st),
            SolutionSpec::WithConstantSwirl { c, .. } => {
                let base = self.base.as_ref().expect("base");
                let bv = base.velocity(Jet::variable(theta), Jet::constant(phi))?;
                base.pressure(theta, phi, &bv)? - c * c / (2.0 * st * st)
            }
        })
    }
}

impl SphereField for Solution {
    fn sample(&self, theta: f64, phi: f64) -> Result<FieldSample, FieldError> {
        let v = self.jets_theta(theta, phi)?;
        let p = self.pressure(theta, phi, &v)?;
        let s = FieldSample { u_r: v[0].value(), u_theta: v[1].value(), u_phi: v[2].value(), p };
        if !s.is_finite() {
            return Err(FieldError::NonFinite { theta, phi });
        }
        Ok(s)
    }

    fn singular_points(&self) -> Vec<Vector3<f64>> {
        self.domain.excluded_points.iter().map(|p| Vector3::new(p[0], p[1], p[2])).collect()
    }
}

impl AxisymmetricField for Solution {
    fn theta_jets(&self, theta: f64) -> Result<[Jet; 3], FieldError> {
        if !self.spec.is_axisymmetric() {
            return Err(FieldError::Domain { theta, phi: f64::NAN });
        }
        self.jets_theta(theta, 0.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Validate and evaluate in one call.
pub fn evaluate(spec: &SolutionSpec, theta: f64, phi: f64) -> Result<FieldSample, EvalError> {
    Ok(Solution::new(spec.clone())?.sample(theta, phi)?)
}

pub fn domain_of(spec: &SolutionSpec) -> Result<DomainDescriptor, SpecError> {
    Ok(Solution::new(spec.clone())?.domain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{distance_to_ray, spatial_derivatives, SphericalPoint};
    use std::f64::consts::FRAC_PI_4;

    fn spec(json: &str) -> SolutionSpec {
        serde_json::from_str(json).unwrap()
    }

    fn at(s: SolutionSpec, theta: f64, phi: f64) -> FieldSample {
        evaluate(&s, theta, phi).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn displayed_values() {
        let s = at(SolutionSpec::NoSwirlOneSing { tau: 4.0, sigma: 1.0 }, FRAC_PI_2, 0.0);
        assert!(close(s.u_theta, 2.0, 1e-12) && close(s.u_r, -2.0, 1e-12));
        let s = at(SolutionSpec::Landau { sigma: 0.5 }, FRAC_PI_2, 0.0);
        assert!(close(s.u_theta, 2.0 / 3.0, 1e-14));
        let s = at(SolutionSpec::PowerLiouville { alpha: 2.0, a_abs: 1.0 }, FRAC_PI_2, 0.3);
        assert!(s.u_theta.abs() < 1e-12 && close(s.u_r, 6.0, 1e-12) && s.u_phi == 0.0);
        let s = at(SolutionSpec::ExpPowerLiouville { k: 2 }, FRAC_PI_2, FRAC_PI_4);
        assert!(close(s.u_theta, -4.0, 1e-12) && s.u_phi.abs() < 1e-12 && close(s.u_r, 6.0, 1e-12));
        let s = at(SolutionSpec::EulerNS { a: 1.0, b: 1.0 }, FRAC_PI_2, 0.0);
        assert!(close(s.u_theta, 1.0, 1e-14) && close(s.u_r, 1.0, 1e-14) && close(s.p, -1.0, 1e-14));
        let s = at(SolutionSpec::LimitPole { sign: Sign(1) }, FRAC_PI_2, 0.0);
        assert!(close(s.u_theta, -2.0, 1e-14) && close(s.u_r, -2.0, 1e-14) && close(s.p, -4.0, 1e-14));
        let s = at(special_global_c3m4(), FRAC_PI_2, 0.0);
        assert!(s.u_theta.abs() < 1e-14 && s.u_r == -4.0 && close(s.p, -8.0, 1e-14));
        assert!(close(at(special_global_c3m4(), FRAC_PI_4, 0.0).u_theta, -4.0, 1e-14));
    }

    #[test]
    fn power_liouville_unit_exponent_vanishes() {
        for (th, ph) in [(0.3, 0.0), (1.1, 2.0), (2.9, 5.0)] {
            let s = at(SolutionSpec::PowerLiouville { alpha: 1.0, a_abs: 1.0 }, th, ph);
            assert!(s.velocity_norm() < 1e-13, "{s:?}");
        }
    }

    #[test]
    fn power_liouville_symmetry() {
        for (a, m) in [(2.0, 1.0), (-3.0, 0.7), (0.5, 2.5)] {
            let p = Solution::new(SolutionSpec::PowerLiouville { alpha: a, a_abs: m }).unwrap();
            let q = Solution::new(SolutionSpec::PowerLiouville { alpha: -a, a_abs: 1.0 / m }).unwrap();
            for th in [0.4, 1.3, 2.2, 2.8] {
                let (x, y) = (p.sample(th, 0.0).unwrap(), q.sample(th, 0.0).unwrap());
                for (u, v) in [(x.u_r, y.u_r), (x.u_theta, y.u_theta), (x.u_phi, y.u_phi)] {
                    assert!((u - v).abs() < 1e-12 * (1.0 + u.abs()));
                }
            }
        }
    }

    #[test]
    fn domains() {
        let d = domain_of(&SolutionSpec::Landau { sigma: 0.5 }).unwrap();
        assert_eq!((d.theta_min, d.theta_max), (0.0, PI));
        assert!(d.excluded_points.is_empty());
        let d = domain_of(&SolutionSpec::TypeTwoLog { alpha: 0.0 }).unwrap();
        let t0 = d.theta_min;
        assert!(t0 > 0.0 && d.theta_max == PI);
        assert!((t0.cos() + t0.sin().powi(2) * (0.5 * t0).tan().recip().ln()).abs() < 1e-12);
        assert!(evaluate(&SolutionSpec::TypeTwoLog { alpha: 0.0 }, 0.5 * t0, 0.0).is_err());
        let d = domain_of(&SolutionSpec::NoSwirlOneSing { tau: 4.0, sigma: 1.0 }).unwrap();
        assert_eq!(d.excluded_points, vec![[0.0, 0.0, -1.0]]);
        let d = domain_of(&SolutionSpec::EllipticC3Half { alpha: ExtendedReal::Finite(1.0) }).unwrap();
        assert_eq!((d.theta_min, d.theta_max), (0.0, PI));
        assert!(evaluate(&SolutionSpec::Landau { sigma: 0.5 }, 0.0, 0.0).is_err());
    }

    #[test]
    fn validation_rejects() {
        for s in [
            SolutionSpec::Landau { sigma: 1.0 },
            SolutionSpec::Landau { sigma: 0.0 },
            SolutionSpec::NoSwirlOneSing { tau: 1.0, sigma: 0.9 },
            SolutionSpec::NoSwirlOneSing { tau: 4.0, sigma: 0.5 },
            SolutionSpec::PowerLiouville { alpha: 0.0, a_abs: 1.0 },
            SolutionSpec::ExpLiouville { a_abs: 1.0, b1: 0.0, b2: 0.0 },
            SolutionSpec::ExpPowerLiouville { k: 0 },
            SolutionSpec::EulerNoSwirl { c0: -1.0, c1: 0.0, c2: 0.5, sign: Sign(1) },
            SolutionSpec::WithConstantSwirl { base: Box::new(SolutionSpec::ExpPowerLiouville { k: 1 }), c: 1.0 },
        ] {
            assert!(Solution::new(s.clone()).is_err(), "{s:?}");
        }
        assert!(Solution::new(SolutionSpec::NoSwirlOneSing { tau: 2.0, sigma: 0.5 }).is_ok());
        assert!(Solution::new(SolutionSpec::NoSwirlOneSing { tau: -3.0, sigma: -10.0 }).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let s = spec(r#"{"family":"with_constant_swirl","params":{"base":{"family":"landau","params":{"sigma":0.5}},"C":1.5}}"#);
        assert_eq!(s, SolutionSpec::WithConstantSwirl { base: Box::new(SolutionSpec::Landau { sigma: 0.5 }), c: 1.5 });
        let back: SolutionSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        let e = spec(r#"{"family":"elliptic_c3_half","params":{"alpha":"inf"}}"#);
        assert_eq!(e, SolutionSpec::EllipticC3Half { alpha: ExtendedReal::Infinity });
        assert_eq!(spec(r#"{"family":"limit_pole","params":{"sign":-1}}"#), SolutionSpec::LimitPole { sign: Sign(-1) });
        assert!(serde_json::from_str::<SolutionSpec>(r#"{"family":"landau","params":{"sigma":0.5,"x":1}}"#).is_err());
        assert!(serde_json::from_str::<SolutionSpec>(r#"{"family":"limit_pole","params":{"sign":2}}"#).is_err());
    }

    fn axisymmetric_catalog() -> Vec<SolutionSpec> {
        vec![
            SolutionSpec::Landau { sigma: 0.5 },
            SolutionSpec::Landau { sigma: -2.0 },
            SolutionSpec::NoSwirlOneSing { tau: 4.0, sigma: 1.0 },
            SolutionSpec::NoSwirlOneSing { tau: 2.0, sigma: 0.5 },
            SolutionSpec::NoSwirlOneSing { tau: 1.0, sigma: 0.2 },
            SolutionSpec::NoSwirlOneSing { tau: -1.0, sigma: 1.25 },
            SolutionSpec::TypeTwoLog { alpha: 0.0 },
            SolutionSpec::EllipticC3Half { alpha: ExtendedReal::Finite(1.0) },
            SolutionSpec::EllipticC3Half { alpha: ExtendedReal::Infinity },
            SolutionSpec::PowerLiouville { alpha: 2.0, a_abs: 1.0 },
            SolutionSpec::LimitPole { sign: Sign(1) },
            SolutionSpec::LimitPole { sign: Sign(-1) },
            SolutionSpec::EulerNoSwirl { c0: 1.0, c1: 0.0, c2: 1.0, sign: Sign(1) },
            SolutionSpec::EulerNS { a: 1.0, b: 1.0 },
            special_global_c3m4(),
        ]
    }

    #[test]
    fn divergence_identity() {
        for s in axisymmetric_catalog() {
            let sol = Solution::new(s.clone()).unwrap();
            for i in 0..9 {
                let th = 0.3 + (PI - 0.6) * i as f64 / 8.0;
                if !sol.domain().contains(th) {
                    continue;
                }
                let j = sol.theta_jets(th).unwrap();
                let want = -j[1].derivative(1) - j[1].value() * th.cos() / th.sin();
                assert!((j[0].value() - want).abs() < 1e-8 * (1.0 + want.abs()), "{s:?} at {th}");
            }
        }
    }

    #[test]
    fn pressure_balance_cross_check() {
        let lp = Solution::new(SolutionSpec::LimitPole { sign: Sign(1) }).unwrap();
        assert!((lp.pressure_from_balance(FRAC_PI_2, 0.0).unwrap() + 4.0).abs() < 1e-6);
        let zero = Solution::new(SolutionSpec::PowerLiouville { alpha: 1.0, a_abs: 1.0 }).unwrap();
        assert!(zero.pressure_from_balance(1.0, 0.5).unwrap().abs() < 1e-12);
        for s in [
            SolutionSpec::Landau { sigma: 0.5 },
            SolutionSpec::NoSwirlOneSing { tau: 4.0, sigma: 1.0 },
            SolutionSpec::PowerLiouville { alpha: -3.0, a_abs: 1.0 },
            SolutionSpec::ExpLiouville { a_abs: 2.0, b1: 0.3, b2: 0.4 },
            SolutionSpec::ExpPowerLiouville { k: 2 },
            SolutionSpec::EllipticC3Half { alpha: ExtendedReal::Finite(1.0) },
            SolutionSpec::TypeTwoLog { alpha: 0.0 },
            SolutionSpec::EulerNS { a: 1.0, b: 1.0 },
        ] {
            let sol = Solution::new(s.clone()).unwrap();
            let pts: Vec<(f64, f64)> = (0..6)
                .map(|i| (1.0 + 0.25 * i as f64, 0.7 * i as f64))
                .filter(|&(t, _)| sol.domain().contains(t - 0.1))
                .collect();
            assert!(pts.len() >= 3);
            let diffs: Vec<f64> = pts
                .iter()
                .map(|&(t, p)| sol.sample(t, p).unwrap().p - sol.pressure_from_balance(t, p).unwrap())
                .collect();
            let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
            for d in &diffs {
                assert!((d - mean).abs() < 1e-6, "{s:?}: {diffs:?}");
            }
        }
    }

    #[test]
    fn constant_swirl_augmentation() {
        let base = SolutionSpec::NoSwirlOneSing { tau: 1.0, sigma: 0.2 };
        let b = Solution::new(base.clone()).unwrap();
        let w = Solution::new(SolutionSpec::WithConstantSwirl { base: Box::new(base), c: 0.8 }).unwrap();
        let (x, y) = (b.sample(1.2, 0.0).unwrap(), w.sample(1.2, 0.0).unwrap());
        assert_eq!((x.u_r, x.u_theta), (y.u_r, y.u_theta));
        assert!((y.u_phi - 0.8 / 1.2f64.sin()).abs() < 1e-15);
        assert_eq!(w.domain().excluded_points.len(), 2);
    }

    #[test]
    fn euler_separation() {
        let res = |s: SolutionSpec| {
            let sol = Solution::new(s).unwrap();
            let sing = sol.singular_points();
            let (mut e, mut n) = (0.0f64, 0.0f64);
            for i in 0..10 {
                for j in 0..4 {
                    let th = 0.4 + (PI - 0.8) * i as f64 / 9.0;
                    let x = SphericalPoint::unit(th, 1.3 * j as f64).unwrap().to_cartesian();
                    let d = sing.iter().map(|p| distance_to_ray(&x, p)).fold(1.0f64, f64::min);
                    let r = spatial_derivatives(|y: &Vector3<f64>| sol.cartesian(y), &x, 6e-3 * d).unwrap();
                    e = e.max(r.euler().norm());
                    n = n.max(r.navier_stokes().norm());
                }
            }
            (e, n)
        };
        let (e, n) = res(SolutionSpec::EulerNoSwirl { c0: 1.0, c1: 0.0, c2: 1.0, sign: Sign(1) });
        assert!(e < 1e-6 && n > 0.1, "{e} {n}");
        let (_, n) = res(SolutionSpec::EulerNS { a: 1.0, b: 1.0 });
        assert!(n < 1e-6);
    }
}
