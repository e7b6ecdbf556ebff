//! Common interface for (-1)-homogeneous velocity/pressure fields given on the unit sphere.

use crate::geometry::{extend_homogeneous, FieldSample, GeometryError, SphericalPoint};
use crate::jet::Jet;
use crate::quad::QuadError;
use crate::specfun::SpecfunError;
use nalgebra::Vector3;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("point (theta = {theta}, phi = {phi}) is outside the solution domain")]
    Domain { theta: f64, phi: f64 },
    #[error("non-finite value at (theta = {theta}, phi = {phi})")]
    NonFinite { theta: f64, phi: f64 },
    #[error("pressure is not available for this field")]
    NoPressure,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

pub trait SphereField: Send + Sync {
    /// Velocity components and pressure on the unit sphere.
    fn sample(&self, theta: f64, phi: f64) -> Result<FieldSample, FieldError>;

    /// Unit vectors of the singular rays.
    fn singular_points(&self) -> Vec<Vector3<f64>>;

    /// Sample at an arbitrary nonzero point using homogeneity.
    fn sample_at(&self, x: &Vector3<f64>) -> Result<FieldSample, FieldError> {
        let p = SphericalPoint::from_cartesian(x)?;
        Ok(extend_homogeneous(self.sample(p.theta(), p.phi())?, p.r())?)
    }

    /// Cartesian velocity and pressure at a nonzero point.
    fn cartesian(&self, x: &Vector3<f64>) -> Result<(Vector3<f64>, f64), FieldError> {
        let p = SphericalPoint::from_cartesian(x)?;
        let s = extend_homogeneous(self.sample(p.theta(), p.phi())?, p.r())?;
        Ok((s.cartesian_velocity(p.theta(), p.phi()), s.p))
    }
}

/// Fields whose components depend on the colatitude only.
pub trait AxisymmetricField: SphereField {
    /// `(u_r, u_theta, u_phi)` as Taylor jets in `theta`.
    fn theta_jets(&self, theta: f64) -> Result<[Jet; 3], FieldError>;
}

/// Pressure from the radial momentum balance:
///
/// ```text
/// p = -1/2 ( u_r,tt + cot(t) u_r,t + u_r,pp / sin^2 t - u_t u_r,t - u_p u_r,p / sin t
///            + u_r^2 + u_t^2 + u_p^2 )
/// ```
///
/// `th` and `ph` are the component jets in `theta` and `phi` at the same point.
pub fn pressure_from_velocity(th: &[Jet; 3], ph: &[Jet; 3], theta: f64) -> f64 {
    let [ur, ut, up] = [th[0].value(), th[1].value(), th[2].value()];
    let urt = th[0].derivative(1);
    let urtt = th[0].derivative(2);
    let urp = ph[0].derivative(1);
    let urpp = ph[0].derivative(2);
    let (s, c) = theta.sin_cos();
    -0.5 * (urtt + c / s * urt + urpp / (s * s) - ut * urt - up * urp / s + ur * ur + ut * ut + up * up)
}

/// Inviscid counterpart of [`pressure_from_velocity`]:
/// `p = -1/2 ( u_r^2 + u_t^2 + u_p^2 - u_t u_r,t - u_p u_r,p / sin t )`.
pub fn euler_pressure_from_velocity(th: &[Jet; 3], ph: &[Jet; 3], theta: f64) -> f64 {
    let [ur, ut, up] = [th[0].value(), th[1].value(), th[2].value()];
    let s = theta.sin();
    -0.5 * (ur * ur + ut * ut + up * up - ut * th[0].derivative(1) - up * ph[0].derivative(1) / s)
}
