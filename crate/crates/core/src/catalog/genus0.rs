//! Rational structure with three points fixed at 0, 1 and infinity.

use super::logjet::log_of;
use super::Family;
use crate::error::{Error, Result};
use crate::gt::{add_points, EnhancedGt, GtStructure, Potential, Sampler};
use crate::kernel::jet::{FnJet, PoleSet};
use crate::kernel::sampling::{sample_points_with, Region};
use crate::kernel::{c64, C64};

pub const POINT_REGION: Region = Region::square(2.5);
pub const FIELD_REGION: Region = Region::square(2.0);

const FIXED: [C64; 2] = [c64(0.0, 0.0), c64(1.0, 0.0)];

/// `f(p1, p2) = p2 (p2 - 1) / ((p1 - p2) p1 (p1 - 1))` with no fields.
pub fn base() -> Result<GtStructure> {
    let poles = PoleSet::new().diagonal(0, 1).point(0, FIXED[0]).point(0, FIXED[1]);
    let f = FnJet::new(2, poles, |x| {
        let (p1, p2) = (x[0], x[1]);
        p2 * (p2 - 1.0) / ((p1 - p2) * p1 * (p1 - 1.0))
    });
    let sampler = Sampler::planar(|_| Ok(Vec::new()), POINT_REGION, |_| FIXED.to_vec());
    GtStructure::new("genus0", Vec::new(), Vec::new(), f.into_ref(), sampler)
}

pub fn structure(n: usize) -> Result<GtStructure> {
    if n == 0 {
        return Err(Error::InvalidArgument("genus0 needs n >= 1".into()));
    }
    let mut s = add_points(&base()?, n)?;
    s.label = format!("genus0(n={n})");
    s.sampler = s.sampler.with_fields(move |rng| sample_points_with(rng, &FIELD_REGION, n, &FIXED, super::FIELD_SEPARATION));
    Ok(s)
}

/// Enhanced structure with `lambda = 1/(p1 - p2)` and the log potentials.
pub fn family(n: usize) -> Result<Family> {
    let s = structure(n)?;
    let m = s.m();
    let lambda = FnJet::new(m + 2, PoleSet::new().diagonal(0, 1), |x| 1.0 / (x[0] - x[1]));
    let enhanced = EnhancedGt::new(s, lambda.into_ref())?;
    let one = C64::new(1.0, 0.0);
    // roots of the raw logs: u_1..u_n, then 0 and 1; slot None means a fixed point
    let mut roots: Vec<(String, Option<usize>, C64)> = (0..n).map(|j| (format!("u{}", j + 1), Some(1 + j), C64::default())).collect();
    roots.push(("0".into(), None, C64::default()));
    roots.push(("1".into(), None, one));
    let raw_jet = |slot: Option<usize>, c: C64| {
        let poles = match slot {
            Some(k) => PoleSet::new().diagonal(0, k),
            None => PoleSet::new().point(0, c),
        };
        log_of(m + 1, poles, move |x| x[0] - slot.map_or(c, |k| x[k]))
    };
    let mut potentials = Vec::new();
    for (name, slot, c) in roots.iter().skip(1).cloned() {
        let poles = match slot {
            Some(k) => PoleSet::new().diagonal(0, k),
            None => PoleSet::new().point(0, c),
        }
        .diagonal(0, 1);
        let h = log_of(m + 1, poles, move |x| (x[0] - slot.map_or(c, |k| x[k])) / (x[0] - x[1]));
        potentials.push(Potential::new(format!("ln(p-{name})-ln(p-u1)"), h.into_ref()));
    }
    let raw = roots.into_iter().map(|(name, slot, c)| Potential::raw(format!("ln(p-{name})"), raw_jet(slot, c).into_ref())).collect();
    Ok(Family { enhanced, potentials, raw })
}
