//! Complex-analytic numerics shared by every other module.

pub mod cauchy;
pub mod jet;
pub mod path;
pub mod sampling;
pub mod theta;

pub use cauchy::{cauchy_derivative, laurent_coeff};
pub use jet::{pv, ppv, unit, CauchyConfig, FnJet, Jet, JetRef, Locus, PoleSet, Remap};
pub use path::{path_integrate, PathKind, PathSpec};
pub use sampling::{sample_points, Region, Rng};
pub use theta::{rho, theta};

pub use num_complex::Complex64 as C64;

/// `C64::new` shorthand.
pub const fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
