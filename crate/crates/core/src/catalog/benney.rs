//! `f = 1/(p1 - p2)` with added points only.

use crate::error::{Error, Result};
use crate::gt::{add_points, GtStructure, Sampler};
use crate::kernel::jet::{FnJet, PoleSet};
use crate::kernel::sampling::{sample_points_with, Region};

pub const POINT_REGION: Region = Region::square(2.5);
pub const FIELD_REGION: Region = Region::square(2.0);

pub fn base() -> Result<GtStructure> {
    let f = FnJet::new(2, PoleSet::new().diagonal(0, 1), |x| 1.0 / (x[0] - x[1]));
    let sampler = Sampler::planar(|_| Ok(Vec::new()), POINT_REGION, |_| Vec::new());
    GtStructure::new("benney", Vec::new(), Vec::new(), f.into_ref(), sampler)
}

/// `g = sum 1/(p - u_i) d/du_i`.
pub fn structure(n: usize) -> Result<GtStructure> {
    if n == 0 {
        return Err(Error::InvalidArgument("benney needs n >= 1".into()));
    }
    let mut s = add_points(&base()?, n)?;
    s.label = format!("benney(n={n})");
    s.sampler = s.sampler.with_fields(move |rng| sample_points_with(rng, &FIELD_REGION, n, &[], super::FIELD_SEPARATION));
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::jet::pv;
    use crate::kernel::c64;

    #[test]
    fn single_point_coefficient() {
        let s = structure(1).unwrap();
        let g = s.g[0].value(&pv(c64(2.0, 0.0), &[c64(5.0, 0.0)]));
        assert!((g - c64(-1.0 / 3.0, 0.0)).norm() < 1e-15);
    }
}
