//! Numerical laboratory for perturbed geodesic flows on compact hyperbolic
//! surfaces: exact flows in group coordinates, Fuchsian reduction, smooth
//! bump potentials, a symplectic splitting integrator, geodesic averaging
//! functionals, and the equidistribution experiment suite built on top.

pub mod error;
pub mod experiments;
pub mod fields;
pub mod flows;
pub mod functionals;
pub mod hyperbolic;
pub mod report;
pub mod surface;

pub use error::{Error, Result};
pub use hyperbolic::{
    apply_moebius, hyperbolic_distance, orientation_self_test, rotate_covector_perp,
    CotangentState, CurvatureConstants, HorocycleBranch, MoebiusMap, UnitTangentFrame,
};
