//! Construction and numerical verification of GT structures, the
//! integrability data behind Whitham-type hierarchies, together with the
//! Gibbons-Tsarev systems and hydrodynamic reductions they induce.

pub mod catalog;
pub mod error;
pub mod gibbons_tsarev;
pub mod gt;
pub mod hierarchy;
pub mod hyperelliptic;
pub mod kernel;
pub mod report;

pub use error::{Error, Result};
pub use kernel::{c64, C64};
pub use report::VerificationReport;
