pub mod extrapolate;
pub mod geometry;
pub mod jet;
pub mod ode;
pub mod quad;
pub mod specfun;
pub mod families;
pub mod field;
pub mod reduced_ode;
pub mod liouville;
pub mod analysis;
