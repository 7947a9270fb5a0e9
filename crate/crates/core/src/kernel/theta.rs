//! Odd genus-1 theta function and its logarithmic derivative.
//!
//! `theta(p, tau) = sum_k (-1)^k exp(2 pi i (k p + k (k - 1) tau / 2))`,
//! summed in pairs `k, 1 - k` which share the quadratic exponent.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Default truncation tolerance of the series.
pub const THETA_TOL: f64 = 1e-12;

/// Guard distance to a lattice point below which `rho` refuses to evaluate.
pub const POLE_GUARD: f64 = 1e-10;

const MAX_TERMS: i64 = 10_000;

/// Sum of the series and its first two p-derivatives.
/// Returns NaN for `Im tau <= 0`; validation is left to the callers.
pub fn theta_jet(p: C64, tau: C64, tol: f64) -> [C64; 3] {
    let nan = C64::new(f64::NAN, f64::NAN);
    if !(tau.im > 0.0) {
        return [nan; 3];
    }
    let i2pi = C64::new(0.0, TAU);
    let term = |k: i64| {
        let kf = k as f64;
        let e = (i2pi * (kf * p + 0.5 * kf * (kf - 1.0) * tau)).exp();
        let t = if k % 2 == 0 { e } else { -e };
        let d = i2pi * kf;
        [t, t * d, t * d * d]
    };
    // magnitude of term k including the second-derivative weight
    let bound = |k: i64| {
        let kf = k as f64;
        let e = -TAU * (kf * p.im + 0.5 * kf * (kf - 1.0) * tau.im);
        e.exp() * (1.0 + TAU * kf.abs()).powi(2)
    };
    let mut sum = [C64::new(0.0, 0.0); 3];
    let mut k = 1;
    loop {
        for j in [k, 1 - k] {
            let t = term(j);
            for (s, v) in sum.iter_mut().zip(t) {
                *s += v;
            }
        }
        let (up, down) = (k + 1, -k);
        let r_up = 4.0 * (-TAU * (p.im + up as f64 * tau.im)).exp();
        let r_down = 4.0 * (-TAU * (-p.im + (1 - down) as f64 * tau.im)).exp();
        let scale = sum[0].norm().max(1.0);
        if r_up < 0.5 && r_down < 0.5 && 2.0 * (bound(up) + bound(down)) <= tol * scale {
            return sum;
        }
        k += 1;
        if k > MAX_TERMS {
            return [nan; 3];
        }
    }
}

fn check_tau(tau: C64) -> Result<()> {
    if tau.im > 0.0 && tau.re.is_finite() && tau.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModulus(tau.im))
    }
}

/// Theta series truncated at the tail bound `tol`.
pub fn theta(p: C64, tau: C64, tol: f64) -> Result<C64> {
    check_tau(tau)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("theta tolerance {tol} must be positive")));
    }
    Ok(theta_jet(p, tau, tol)[0])
}

/// Distance from `p` to the nearest point of `Z + tau Z`.
pub fn lattice_distance(p: C64, tau: C64) -> f64 {
    let n0 = (p.im / tau.im).round();
    let mut best = f64::INFINITY;
    for dn in -1..=1 {
        let n = n0 + dn as f64;
        let m0 = (p - n * tau).re.round();
        for dm in -1..=1 {
            best = best.min((p - (m0 + dm as f64) - n * tau).norm());
        }
    }
    best
}

/// `theta' / theta` without validation, for use inside evaluators.
pub fn rho_unchecked(p: C64, tau: C64) -> C64 {
    let [t, dt, _] = theta_jet(p, tau, THETA_TOL);
    dt / t
}

/// Logarithmic derivative of theta in `p`.
pub fn rho(p: C64, tau: C64) -> Result<C64> {
    check_tau(tau)?;
    let d = lattice_distance(p, tau);
    if d < POLE_GUARD {
        return Err(Error::PoleHit(format!("p = {p} lies within {d:e} of a zero of theta")));
    }
    Ok(rho_unchecked(p, tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::cauchy::laurent_coeff;
    use crate::kernel::jet::{FnJet, PoleSet};
    use crate::kernel::sampling::{rng, Region};

    fn samples(seed: u64, n: usize) -> Vec<(C64, C64)> {
        let mut r = rng(seed);
        let pr = Region::new((-0.5, 0.5), (-0.5, 0.5));
        let tr = Region::new((-0.5, 0.5), (0.5, 3.0));
        (0..n).map(|_| (pr.draw(&mut r), tr.draw(&mut r))).collect()
    }

    #[test]
    fn vanishes_at_origin() {
        for (_, tau) in samples(1, 10) {
            assert_eq!(theta(C64::new(0.0, 0.0), tau, THETA_TOL).unwrap(), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn quasi_periodicity() {
        let i2pi = C64::new(0.0, TAU);
        for (p, tau) in samples(2, 50) {
            let t = theta(p, tau, THETA_TOL).unwrap();
            let t1 = theta(p + 1.0, tau, THETA_TOL).unwrap();
            let tt = theta(p + tau, tau, THETA_TOL).unwrap();
            assert!((t1 - t).norm() < 1e-10 * t.norm());
            assert!((tt + (-i2pi * p).exp() * t).norm() < 1e-10 * tt.norm());
            let r = rho(p, tau).unwrap();
            assert!((rho(p + 1.0, tau).unwrap() - r).norm() < 1e-10 * r.norm().max(1.0));
            assert!((rho(p + tau, tau).unwrap() - (r - i2pi)).norm() < 1e-10 * r.norm().max(1.0));
        }
    }

    #[test]
    fn rho_residue_one() {
        for (_, tau) in samples(3, 5) {
            let e = FnJet::new(1, PoleSet::new(), move |x| rho_unchecked(x[0], tau));
            let z = C64::new(0.0, 0.0);
            let res = laurent_coeff(&e, 0, &[z], z, -1, Some(0.2), 64, None).unwrap();
            assert!((res - 1.0).norm() < 1e-12);
            let a0 = laurent_coeff(&e, 0, &[z], z, 0, Some(0.2), 64, None).unwrap();
            // theta(-p) = -exp(-2 pi i p) theta(p) gives rho(p) + rho(-p) = 2 pi i
            assert!((a0 - C64::new(0.0, std::f64::consts::PI)).norm() < 1e-12);
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(theta(C64::new(0.1, 0.0), C64::new(0.0, -1.0), 1e-12), Err(Error::InvalidModulus(_))));
        let tau = C64::new(0.1, 1.0);
        assert!(matches!(rho(tau + 1.0, tau), Err(Error::PoleHit(_))));
    }
}
