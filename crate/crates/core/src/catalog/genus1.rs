//! Elliptic structure over the modular parameter `tau`.

use std::f64::consts::TAU;

use super::logjet::log_of;
use super::Family;
use crate::error::{Error, Result};
use crate::gt::{add_points, EnhancedGt, GtStructure, Potential, Sampler};
use crate::kernel::jet::{FnJet, PoleSet};
use crate::kernel::sampling::Region;
use crate::kernel::theta::{rho_unchecked, theta_jet, THETA_TOL};
use crate::kernel::{c64, C64};

pub const TAU_REGION: Region = Region::new((-0.25, 0.25), (0.5, 3.0));
/// Points and punctures stay in a small box around the origin so that
/// lattice translates are far away.
pub const POINT_REGION: Region = Region::new((-0.35, 0.35), (-0.25, 0.25));

pub const TWO_PI_I: C64 = c64(0.0, TAU);

fn theta0(p: C64, tau: C64) -> C64 {
    theta_jet(p, tau, THETA_TOL)[0]
}

/// `g = 2 pi i d/dtau`, `f = rho(p1 - p2) - rho(p1)`.
pub fn base() -> Result<GtStructure> {
    let g = FnJet::constant(2, TWO_PI_I);
    let poles = PoleSet::new().lattice_diff(0, 1, 2).lattice_point(0, 2);
    let f = FnJet::new(3, poles, |x| rho_unchecked(x[0] - x[1], x[2]) - rho_unchecked(x[0], x[2]));
    let sampler = Sampler::planar(|rng| Ok(vec![TAU_REGION.draw(rng)]), POINT_REGION, |_| vec![C64::default()]);
    GtStructure::new("genus1", vec!["tau".into()], vec![g.into_ref()], f.into_ref(), sampler)
}

pub fn structure(n: usize) -> Result<GtStructure> {
    if n == 0 {
        return Err(Error::InvalidArgument("genus1 needs n >= 1".into()));
    }
    let mut s = add_points(&base()?, n)?;
    s.label = format!("genus1(n={n})");
    Ok(s)
}

/// Layout `[p1, p2, tau, u..]`; `lambda = f - 2 pi i`.
pub fn family(n: usize) -> Result<Family> {
    let s = structure(n)?;
    let m = s.m();
    let poles = PoleSet::new().lattice_diff(0, 1, 2).lattice_point(0, 2);
    let lambda = FnJet::new(m + 2, poles, |x| rho_unchecked(x[0] - x[1], x[2]) - rho_unchecked(x[0], x[2]) - TWO_PI_I);
    let enhanced = EnhancedGt::new(s, lambda.into_ref())?;

    // layout [p, tau, u_1..u_n]; u_j sits at 1 + j
    let linear = FnJet::new(m + 1, PoleSet::new(), |x| x[0] - x[1]);
    let mut potentials = vec![Potential::new("p-tau", linear.into_ref())];
    for j in 2..=n {
        let (uj, u1) = (1 + j, 2);
        let poles = PoleSet::new().lattice_diff(0, uj, 1).lattice_diff(0, u1, 1).lattice_point(uj, 1).lattice_point(u1, 1);
        let h = log_of(m + 1, poles, move |x| {
            let t = x[1];
            theta0(x[0] - x[uj], t) * theta0(x[u1], t) / (theta0(x[uj], t) * theta0(x[0] - x[u1], t))
        });
        potentials.push(Potential::new(format!("h{j}-h1"), h.into_ref()));
    }
    let raw = (1..=n)
        .map(|j| {
            let uj = 1 + j;
            let poles = PoleSet::new().lattice_diff(0, uj, 1).lattice_point(uj, 1);
            let h = log_of(m + 1, poles, move |x| theta0(x[0] - x[uj], x[1]) / theta0(x[uj], x[1]));
            Potential::raw(format!("h{j}"), h.into_ref())
        })
        .collect();
    Ok(Family { enhanced, potentials, raw })
}
