//! Spherical coordinates, stereographic projection, homogeneous extension and
//! finite-difference operators on the sphere and in space.

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point ({theta}, {phi}) is not an interior spherical point")]
    InvalidPoint { theta: f64, phi: f64 },
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("north pole maps to infinity under stereographic projection")]
    PoleAtInfinity,
    #[error("stencil of size {h} at {point:?} comes within {distance:e} of a singular ray")]
    StencilContamination { point: [f64; 3], h: f64, distance: f64 },
}

pub fn north() -> Vector3<f64> {
    Vector3::new(0.0, 0.0, 1.0)
}

pub fn south() -> Vector3<f64> {
    Vector3::new(0.0, 0.0, -1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalPoint {
    r: f64,
    theta: f64,
    phi: f64,
}

impl SphericalPoint {
    /// Validates `r > 0`, `0 < theta < pi`; `phi` is wrapped into `[0, 2pi)`.
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self, GeometryError> {
        if !(r > 0.0 && theta > 0.0 && theta < PI && phi.is_finite() && r.is_finite()) {
            return Err(GeometryError::InvalidPoint { theta, phi });
        }
        Ok(SphericalPoint { r, theta, phi: phi.rem_euclid(TAU) })
    }

    pub fn unit(theta: f64, phi: f64) -> Result<Self, GeometryError> {
        Self::new(1.0, theta, phi)
    }

    pub fn from_cartesian(x: &Vector3<f64>) -> Result<Self, GeometryError> {
        let r = x.norm();
        if r == 0.0 {
            return Err(GeometryError::ZeroVector);
        }
        let rho = x.x.hypot(x.y);
        Self::new(r, rho.atan2(x.z), x.y.atan2(x.x))
    }

    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn to_cartesian(&self) -> Vector3<f64> {
        self.basis().0 * self.r
    }

    /// `(e_r, e_theta, e_phi)`.
    pub fn basis(&self) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
        basis_vectors(self.theta, self.phi)
    }
}

pub fn basis_vectors(theta: f64, phi: f64) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    (
        Vector3::new(st * cp, st * sp, ct),
        Vector3::new(ct * cp, ct * sp, -st),
        Vector3::new(-sp, cp, 0.0),
    )
}

/// Velocity components in the spherical frame and pressure.
#[derive(Clone, Copy, Debug, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct FieldSample {
    pub u_r: f64,
    pub u_theta: f64,
    pub u_phi: f64,
    pub p: f64,
}

impl FieldSample {
    pub fn velocity_norm(&self) -> f64 {
        (self.u_r * self.u_r + self.u_theta * self.u_theta + self.u_phi * self.u_phi).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.u_r.is_finite() && self.u_theta.is_finite() && self.u_phi.is_finite() && self.p.is_finite()
    }

    pub fn cartesian_velocity(&self, theta: f64, phi: f64) -> Vector3<f64> {
        let (er, et, ep) = basis_vectors(theta, phi);
        er * self.u_r + et * self.u_theta + ep * self.u_phi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct TangentVector {
    pub a_theta: f64,
    pub a_phi: f64,
}

/// Scale a unit-sphere sample to a point at radius `r`.
pub fn extend_homogeneous(s: FieldSample, r: f64) -> Result<FieldSample, GeometryError> {
    if !(r > 0.0) {
        return Err(GeometryError::ZeroVector);
    }
    Ok(FieldSample { u_r: s.u_r / r, u_theta: s.u_theta / r, u_phi: s.u_phi / r, p: s.p / (r * r) })
}

/// `z = (x1 + i x2) / (1 - x3)`.
pub fn stereographic_forward(x: &Vector3<f64>) -> Result<Complex64, GeometryError> {
    let d = 1.0 - x.z;
    if d <= 0.0 {
        return Err(GeometryError::PoleAtInfinity);
    }
    Ok(Complex64::new(x.x / d, x.y / d))
}

pub fn stereographic_inverse(z: Complex64) -> Vector3<f64> {
    let n2 = z.norm_sqr();
    let den = 1.0 + n2;
    Vector3::new(2.0 * z.re / den, 2.0 * z.im / den, (n2 - 1.0) / den)
}

/// Rotation taking the unit vector `p` to the north pole.
pub fn rotation_to_north(p: &Vector3<f64>) -> Rotation3<f64> {
    let n = north();
    Rotation3::rotation_between(p, &n).unwrap_or_else(|| {
        Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::new(1.0, 0.0, 0.0)), PI)
    })
}

/// Distance from `x` to the ray through the unit vector `dir`.
pub fn distance_to_ray(x: &Vector3<f64>, dir: &Vector3<f64>) -> f64 {
    let t = x.dot(dir);
    if t <= 0.0 {
        x.norm()
    } else {
        (x - dir * t).norm()
    }
}

/// Reject stencils reaching within `10 h` of a singular ray.
pub fn check_stencil(x: &Vector3<f64>, h: f64, singular: &[Vector3<f64>]) -> Result<(), GeometryError> {
    for s in singular {
        let d = distance_to_ray(x, s);
        if d < 10.0 * h {
            return Err(GeometryError::StencilContamination { point: [x.x, x.y, x.z], h, distance: d });
        }
    }
    Ok(())
}

/// Central-difference surface gradient of `f(theta, phi)`.
pub fn surface_gradient<E: From<GeometryError>>(
    f: impl Fn(&SphericalPoint) -> Result<f64, E>,
    p: &SphericalPoint,
    h: f64,
) -> Result<TangentVector, E> {
    let at = |dt: f64, dp: f64| -> Result<f64, E> { f(&SphericalPoint::new(p.r, p.theta + dt, p.phi + dp)?) };
    let a_theta = (at(h, 0.0)? - at(-h, 0.0)?) / (2.0 * h);
    let a_phi = (at(0.0, h)? - at(0.0, -h)?) / (2.0 * h * p.theta.sin());
    Ok(TangentVector { a_theta, a_phi })
}

/// Five-point Laplace-Beltrami operator on the unit sphere.
pub fn laplace_beltrami<E: From<GeometryError>>(
    f: impl Fn(&SphericalPoint) -> Result<f64, E>,
    p: &SphericalPoint,
    h: f64,
) -> Result<f64, E> {
    let at = |dt: f64, dp: f64| -> Result<f64, E> { f(&SphericalPoint::new(p.r, p.theta + dt, p.phi + dp)?) };
    let f0 = at(0.0, 0.0)?;
    let st = p.theta.sin();
    let th = ((p.theta + 0.5 * h).sin() * (at(h, 0.0)? - f0) - (p.theta - 0.5 * h).sin() * (f0 - at(-h, 0.0)?))
        / (h * h * st);
    let ph = (at(0.0, h)? - 2.0 * f0 + at(0.0, -h)?) / (h * h * st * st);
    Ok(th + ph)
}

/// First and second derivatives of a velocity/pressure pair at a point in space.
#[derive(Clone, Copy, Debug)]
pub struct SpatialDerivatives {
    pub u: Vector3<f64>,
    /// `jac[(i, j)] = d u_i / d x_j`.
    pub jac: Matrix3<f64>,
    pub lap: Vector3<f64>,
    pub grad_p: Vector3<f64>,
}

impl SpatialDerivatives {
    pub fn divergence(&self) -> f64 {
        self.jac.trace()
    }

    /// `-Delta u + (u . grad) u + grad p`.
    pub fn navier_stokes(&self) -> Vector3<f64> {
        -self.lap + self.jac * self.u + self.grad_p
    }

    /// `(u . grad) u + grad p`.
    pub fn euler(&self) -> Vector3<f64> {
        self.jac * self.u + self.grad_p
    }
}

fn stencil6<E>(
    f: &impl Fn(&Vector3<f64>) -> Result<(Vector3<f64>, f64), E>,
    x: &Vector3<f64>,
    h: f64,
) -> Result<(Vector3<f64>, Matrix3<f64>, Vector3<f64>, Vector3<f64>), E> {
    const D1: [f64; 3] = [45.0, -9.0, 1.0];
    const D2: [f64; 3] = [270.0, -27.0, 2.0];
    let (u0, _) = f(x)?;
    let mut jac = Matrix3::zeros();
    let mut lap = Vector3::zeros();
    let mut gp = Vector3::zeros();
    for j in 0..3 {
        let mut e = Vector3::zeros();
        e[j] = h;
        let mut du = Vector3::zeros();
        let mut ddu = -490.0 * u0;
        let mut dp = 0.0;
        for k in 0..3 {
            let off = (k + 1) as f64 * e;
            let (up, pp) = f(&(x + off))?;
            let (um, pm) = f(&(x - off))?;
            du += D1[k] * (up - um);
            ddu += D2[k] * (up + um);
            dp += D1[k] * (pp - pm);
        }
        jac.set_column(j, &(du / (60.0 * h)));
        lap += ddu / (180.0 * h * h);
        gp[j] = dp / (60.0 * h);
    }
    Ok((u0, jac, lap, gp))
}

/// Sixth-order central differences at steps `h` and `h/2`, combined by Richardson extrapolation.
///
/// The stencil reaches `3h` from `x`.
pub fn spatial_derivatives<E>(
    f: impl Fn(&Vector3<f64>) -> Result<(Vector3<f64>, f64), E>,
    x: &Vector3<f64>,
    h: f64,
) -> Result<SpatialDerivatives, E> {
    let (u, j1, l1, g1) = stencil6(&f, x, h)?;
    let (_, j2, l2, g2) = stencil6(&f, x, 0.5 * h)?;
    Ok(SpatialDerivatives {
        u,
        jac: (64.0 * j2 - j1) / 63.0,
        lap: (64.0 * l2 - l1) / 63.0,
        grad_p: (64.0 * g2 - g1) / 63.0,
    })
}

pub fn divergence_3d<E>(
    f: impl Fn(&Vector3<f64>) -> Result<(Vector3<f64>, f64), E>,
    x: &Vector3<f64>,
    h: f64,
) -> Result<f64, E> {
    Ok(spatial_derivatives(f, x, h)?.divergence())
}

pub fn ns_operator_3d<E>(
    f: impl Fn(&Vector3<f64>) -> Result<(Vector3<f64>, f64), E>,
    x: &Vector3<f64>,
    h: f64,
) -> Result<Vector3<f64>, E> {
    Ok(spatial_derivatives(f, x, h)?.navier_stokes())
}

/// Velocity gradient `d u_i / d x_j` in the `(e_r, e_theta, e_phi)` frame for a
/// (-1)-homogeneous field, from the unit-sphere components and their angular derivatives.
pub fn gradient_tensor(
    u: [f64; 3],
    d_theta: [f64; 3],
    d_phi: [f64; 3],
    theta: f64,
    r: f64,
) -> Matrix3<f64> {
    let [ur, ut, up] = u;
    let st = theta.sin();
    let cot = theta.cos() / st;
    let m = Matrix3::new(
        -ur,
        d_theta[0] - ut,
        d_phi[0] / st - up,
        -ut,
        d_theta[1] + ur,
        d_phi[1] / st - up * cot,
        -up,
        d_theta[2],
        d_phi[2] / st + ur + ut * cot,
    );
    m / (r * r)
}

/// Axisymmetric case of [`gradient_tensor`].
pub fn gradient_tensor_axisym(u: [f64; 3], d_theta: [f64; 3], theta: f64, r: f64) -> Matrix3<f64> {
    gradient_tensor(u, d_theta, [0.0; 3], theta, r)
}

/// Express a Cartesian tensor in the spherical frame at `(theta, phi)`.
pub fn to_spherical_frame(t: &Matrix3<f64>, theta: f64, phi: f64) -> Matrix3<f64> {
    let (er, et, ep) = basis_vectors(theta, phi);
    let q = Matrix3::from_columns(&[er, et, ep]);
    q.transpose() * t * q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Vector3<f64>, b: &Vector3<f64>, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn axis_aligned_points() {
        let p = SphericalPoint::new(1.0, PI / 2.0, 0.0).unwrap();
        let (er, et, ep) = p.basis();
        assert!(close(&er, &Vector3::new(1.0, 0.0, 0.0), 1e-15));
        assert!(close(&et, &Vector3::new(0.0, 0.0, -1.0), 1e-15));
        assert!(close(&ep, &Vector3::new(0.0, 1.0, 0.0), 1e-15));
        let q = SphericalPoint::new(2.0, PI / 2.0, PI / 2.0).unwrap();
        assert!(close(&q.to_cartesian(), &Vector3::new(0.0, 2.0, 0.0), 1e-15));
        let s = SphericalPoint::new(1.0, PI / 3.0, 0.0).unwrap();
        assert!(close(&s.to_cartesian(), &Vector3::new(3f64.sqrt() / 2.0, 0.0, 0.5), 1e-15));
    }

    #[test]
    fn poles_are_not_points() {
        assert!(SphericalPoint::unit(0.0, 0.0).is_err());
        assert!(SphericalPoint::unit(PI, 0.0).is_err());
        assert!(SphericalPoint::from_cartesian(&Vector3::zeros()).is_err());
    }

    #[test]
    fn stereographic_examples() {
        assert_eq!(stereographic_forward(&south()).unwrap(), Complex64::new(0.0, 0.0));
        assert!((stereographic_forward(&Vector3::new(1.0, 0.0, 0.0)).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((stereographic_forward(&Vector3::new(0.0, 1.0, 0.0)).unwrap() - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(stereographic_forward(&north()), Err(GeometryError::PoleAtInfinity));
    }

    #[test]
    fn homogeneous_extension() {
        let s = FieldSample { u_r: -2.0, p: -4.0, ..Default::default() };
        let t = extend_homogeneous(s, 2.0).unwrap();
        assert_eq!((t.u_r, t.p), (-1.0, -1.0));
        assert_eq!(extend_homogeneous(s, 1.0).unwrap(), s);
        let w = extend_homogeneous(FieldSample { u_theta: 3.0, ..Default::default() }, 0.5).unwrap();
        assert_eq!(w.u_theta, 6.0);
        assert!(extend_homogeneous(s, 0.0).is_err());
    }

    #[test]
    fn surface_operators() {
        let p = SphericalPoint::unit(PI / 2.0, 1.0).unwrap();
        let g = surface_gradient(|q: &SphericalPoint| Ok::<_, GeometryError>(q.theta().cos()), &p, 1e-4).unwrap();
        assert!((g.a_theta + 1.0).abs() < 1e-8 && g.a_phi.abs() < 1e-12);
        let q = SphericalPoint::unit(PI / 2.0, PI).unwrap();
        let g = surface_gradient(|s: &SphericalPoint| Ok::<_, GeometryError>(s.phi()), &q, 1e-4).unwrap();
        assert!(g.a_theta.abs() < 1e-12 && (g.a_phi - 1.0).abs() < 1e-8);
        let c = surface_gradient(|_: &SphericalPoint| Ok::<_, GeometryError>(3.0), &q, 1e-4).unwrap();
        assert_eq!(c, TangentVector::default());
        let lb = |f: fn(&SphericalPoint) -> f64, t: f64, ph: f64| {
            let p = SphericalPoint::unit(t, ph).unwrap();
            laplace_beltrami(|s: &SphericalPoint| Ok::<_, GeometryError>(f(s)), &p, 1e-3).unwrap()
        };
        assert!(lb(|_| 1.0, 1.0, 1.0).abs() < 1e-9);
        assert!((lb(|s| s.theta().cos(), 0.7, 0.2) + 2.0 * 0.7f64.cos()).abs() < 1e-5);
        let y1 = |s: &SphericalPoint| s.theta().sin() * s.phi().cos();
        assert!((lb(y1, 1.1, 0.4) + 2.0 * 1.1f64.sin() * 0.4f64.cos()).abs() < 1e-5);
        // l = 3 zonal harmonic: P3(cos theta)
        let p3 = |s: &SphericalPoint| {
            let c = s.theta().cos();
            0.5 * (5.0 * c * c * c - 3.0 * c)
        };
        let c = 0.9f64.cos();
        assert!((lb(p3, 0.9, 0.0) + 12.0 * 0.5 * (5.0 * c * c * c - 3.0 * c)).abs() < 1e-4);
    }

    #[test]
    fn gradient_tensor_constant_radial() {
        let t = gradient_tensor_axisym([-2.0, 0.0, 0.0], [0.0; 3], 1.0, 1.0);
        assert_eq!((t[(0, 0)], t[(1, 1)], t[(2, 2)]), (2.0, -2.0, -2.0));
        assert_eq!(gradient_tensor_axisym([0.0; 3], [0.0; 3], 1.0, 2.0), Matrix3::zeros());
    }

    #[test]
    fn pure_swirl_is_divergence_free() {
        let f = |x: &Vector3<f64>| -> Result<(Vector3<f64>, f64), GeometryError> {
            let rho2 = x.x * x.x + x.y * x.y;
            Ok((Vector3::new(-x.y, x.x, 0.0) / rho2, 0.0))
        };
        let x = Vector3::new(0.6, -0.3, 0.5);
        assert!(divergence_3d(f, &x, 1e-3).unwrap().abs() < 1e-10);
        let zero = |_: &Vector3<f64>| Ok::<_, GeometryError>((Vector3::zeros(), 0.0));
        assert_eq!(ns_operator_3d(zero, &x, 1e-3).unwrap(), Vector3::zeros());
    }

    #[test]
    fn fd_jacobian_matches_frame_tensor_for_swirl() {
        // u = e_phi / (r sin theta)
        let f = |x: &Vector3<f64>| -> Result<(Vector3<f64>, f64), GeometryError> {
            let rho2 = x.x * x.x + x.y * x.y;
            Ok((Vector3::new(-x.y, x.x, 0.0) / rho2, 0.0))
        };
        let p = SphericalPoint::new(1.3, 0.8, 2.0).unwrap();
        let d = spatial_derivatives(f, &p.to_cartesian(), 1e-3).unwrap();
        let fd = to_spherical_frame(&d.jac, p.theta(), p.phi());
        let st = p.theta().sin();
        let an = gradient_tensor_axisym([0.0, 0.0, 1.0 / st], [0.0, 0.0, -p.theta().cos() / (st * st)], p.theta(), p.r());
        assert!((fd - an).norm() < 1e-8, "{fd} {an}");
    }

    #[test]
    fn rotation_to_north_maps_points() {
        for p in [south(), Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.3, -0.4, 0.5).normalize()] {
            assert!(close(&(rotation_to_north(&p) * p), &north(), 1e-14));
        }
    }

    #[test]
    fn contamination() {
        let x = Vector3::new(1e-3, 0.0, -1.0);
        assert!(check_stencil(&x, 1e-3, &[south()]).is_err());
        assert!(check_stencil(&x, 1e-3, &[north()]).is_ok());
    }
}
