//! Logarithms continued from an anchor, so Cauchy circles never see a cut.

use crate::kernel::jet::{FnJet, PoleSet};
use crate::kernel::C64;

/// `ln r(x)` as a jet, continued from the anchor along the circle.
/// `r` must be single valued and nonvanishing off `poles`.
pub fn log_of<R>(arity: usize, poles: PoleSet, r: R) -> FnJet
where
    R: Fn(&[C64]) -> C64 + Send + Sync + 'static,
{
    FnJet::continued(arity, poles, move |anchor, x| {
        let ra = r(anchor);
        if anchor == x {
            return ra.ln();
        }
        ra.ln() + (r(x) / ra).ln()
    })
}
