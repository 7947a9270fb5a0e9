//! Circle quadrature for derivatives and Laurent coefficients.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;

use super::jet::{CauchyConfig, Jet};
use crate::error::{Error, Result};

/// `(1 / (N r^k)) sum_j f(c + r w^j) w^(-k j)`, the trapezoid rule for the
/// k-th Laurent coefficient on the circle of radius `r` about `c`.
pub fn circle_coeff<F>(mut f: F, center: C64, radius: f64, nodes: usize, k: i32) -> C64
where
    F: FnMut(C64) -> C64,
{
    let n = nodes as f64;
    let mut sum = C64::new(0.0, 0.0);
    for j in 0..nodes {
        let w = C64::from_polar(1.0, TAU * j as f64 / n);
        sum += f(center + radius * w) * w.powi(-k);
    }
    sum / (n * radius.powi(k))
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Tensor-product trapezoid evaluation of a mixed partial, radii from the
/// jet's own clearance.
pub fn nested_partial<J: Jet + ?Sized>(jet: &J, x: &[C64], orders: &[u32], cfg: &CauchyConfig) -> C64 {
    let active: Vec<(usize, u32, f64)> = orders
        .iter()
        .enumerate()
        .filter(|(_, &o)| o > 0)
        .map(|(s, &o)| (s, o, cfg.radius(jet.clearance(x, s))))
        .collect();
    if active.is_empty() {
        return jet.value(x);
    }
    let n = cfg.nodes;
    let roots: Vec<C64> = (0..n).map(|j| C64::from_polar(1.0, TAU * j as f64 / n as f64)).collect();
    let d = active.len();
    let mut idx = vec![0usize; d];
    let mut y = x.to_vec();
    let mut sum = C64::new(0.0, 0.0);
    loop {
        let mut weight = C64::new(1.0, 0.0);
        for (a, &(s, o, r)) in active.iter().enumerate() {
            let w = roots[idx[a]];
            y[s] = x[s] + r * w;
            weight *= w.conj().powu(o);
        }
        sum += weight * jet.value_from(x, &y);
        let mut a = 0;
        while a < d {
            idx[a] += 1;
            if idx[a] < n {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
        if a == d {
            break;
        }
    }
    let scale: f64 = active.iter().map(|&(_, o, r)| factorial(o) / (n as f64 * r.powi(o as i32))).product();
    sum * scale
}

fn single_slot(e: &dyn Jet, slot: usize, args: &[C64], center: C64, radius: f64, nodes: usize, k: i32) -> C64 {
    let mut y = args.to_vec();
    let mut anchor = args.to_vec();
    anchor[slot] = center;
    circle_coeff(
        |z| {
            y[slot] = z;
            e.value_from(&anchor, &y)
        },
        center,
        radius,
        nodes,
        k,
    )
}

fn check_args(e: &dyn Jet, slot: usize, args: &[C64], nodes: usize) -> Result<()> {
    if args.len() != e.arity() || slot >= args.len() {
        return Err(Error::InvalidArgument(format!(
            "slot {slot} with {} arguments for arity {}",
            args.len(),
            e.arity()
        )));
    }
    if nodes < 8 {
        return Err(Error::InvalidArgument(format!("{nodes} circle nodes, need at least 8")));
    }
    if args.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("non-finite argument".into()));
    }
    Ok(())
}

fn refine(coarse: C64, fine: C64, tol: Option<f64>, what: &str) -> Result<C64> {
    if let Some(tol) = tol {
        let diff = (fine - coarse).norm();
        if !(diff <= tol * fine.norm().max(1.0)) {
            return Err(Error::NonConvergence(format!("{what}: node doubling changed the result by {diff:e}")));
        }
    }
    Ok(fine)
}

/// Derivative of `order` in argument `slot` by circle quadrature.
///
/// `radius` defaults to a quarter of the clearance. With `tol` set, the rule
/// is rerun with doubled nodes and the two results must agree.
pub fn cauchy_derivative(
    e: &dyn Jet,
    slot: usize,
    args: &[C64],
    order: u32,
    radius: Option<f64>,
    nodes: usize,
    tol: Option<f64>,
) -> Result<C64> {
    check_args(e, slot, args, nodes)?;
    let clearance = e.clearance(args, slot);
    let r = radius.unwrap_or(0.25 * clearance.min(2.0));
    if !(r > 0.0 && r < clearance) {
        return Err(Error::DomainViolation(format!(
            "radius {r:e} reaches a singularity at distance {clearance:e}"
        )));
    }
    if order == 0 {
        return Ok(e.value(args));
    }
    let f = factorial(order);
    let k = order as i32;
    let coarse = f * single_slot(e, slot, args, args[slot], r, nodes, k);
    if tol.is_none() {
        return Ok(coarse);
    }
    let fine = f * single_slot(e, slot, args, args[slot], r, 2 * nodes, k);
    refine(coarse, fine, tol, "cauchy derivative")
}

/// Distance from `center` to the nearest singularity other than `center` itself.
pub fn clearance_excluding(e: &dyn Jet, slot: usize, args: &[C64], center: C64) -> f64 {
    let mut y = args.to_vec();
    y[slot] = center;
    let guard = 1e-9 * (1.0 + center.norm());
    e.singularities(&y, slot)
        .iter()
        .map(|s| (s - center).norm())
        .filter(|d| *d > guard)
        .fold(f64::INFINITY, f64::min)
}

/// k-th Laurent coefficient of `e` in argument `slot` about `center`.
#[allow(clippy::too_many_arguments)]
pub fn laurent_coeff(
    e: &dyn Jet,
    slot: usize,
    args: &[C64],
    center: C64,
    k: i32,
    radius: Option<f64>,
    nodes: usize,
    tol: Option<f64>,
) -> Result<C64> {
    check_args(e, slot, args, nodes)?;
    let clearance = clearance_excluding(e, slot, args, center);
    let r = radius.unwrap_or(0.25 * clearance.min(2.0));
    if !(r > 0.0 && r < clearance) {
        return Err(Error::DomainViolation(format!(
            "radius {r:e} reaches a singularity at distance {clearance:e}"
        )));
    }
    let coarse = single_slot(e, slot, args, center, r, nodes, k);
    if tol.is_none() {
        return Ok(coarse);
    }
    let fine = single_slot(e, slot, args, center, r, 2 * nodes, k);
    refine(coarse, fine, tol, "laurent coefficient")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::jet::{FnJet, PoleSet};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn polynomial_and_exp() {
        let sq = FnJet::new(1, PoleSet::new(), |x| x[0] * x[0]);
        let d = cauchy_derivative(&sq, 0, &[c(1.0, 0.0)], 1, None, 32, Some(1e-12)).unwrap();
        assert!((d - c(2.0, 0.0)).norm() < 1e-13);
        let ex = FnJet::new(1, PoleSet::new(), |x| x[0].exp());
        for k in 0..5 {
            let d = cauchy_derivative(&ex, 0, &[c(0.0, 0.0)], k, None, 32, None).unwrap();
            assert!((d - 1.0).norm() < 1e-12, "order {k}: {d}");
        }
    }

    #[test]
    fn simple_pole() {
        let e = FnJet::new(1, PoleSet::new().point(0, c(2.0, 0.0)), |x| 1.0 / (x[0] - 2.0));
        let d = cauchy_derivative(&e, 0, &[c(0.0, 0.0)], 1, None, 32, Some(1e-12)).unwrap();
        // central difference as an independent check
        let h = 1e-5;
        let fd = (1.0 / (h - 2.0) - 1.0 / (-h - 2.0)) / (2.0 * h);
        // d/dp (p - 2)^-1 = -(p - 2)^-2, so -1/4 at the origin
        assert!((d + 0.25).norm() < 1e-13);
        assert!((d.re - fd).abs() < 1e-9);
        let res = laurent_coeff(&e, 0, &[c(0.0, 0.0)], c(2.0, 0.0), -1, Some(0.5), 32, None).unwrap();
        assert!((res - 1.0).norm() < 1e-14);
        let a0 = laurent_coeff(&e, 0, &[c(0.0, 0.0)], c(2.0, 0.0), 0, Some(0.5), 32, None).unwrap();
        assert!(a0.norm() < 1e-14);
    }

    #[test]
    fn disc_touching_pole_is_rejected() {
        let e = FnJet::new(1, PoleSet::new().point(0, c(2.0, 0.0)), |x| 1.0 / (x[0] - 2.0));
        let err = cauchy_derivative(&e, 0, &[c(0.0, 0.0)], 1, Some(2.5), 32, None);
        assert!(matches!(err, Err(Error::DomainViolation(_))));
    }

    #[test]
    fn mixed_partials_commute() {
        let cfg = CauchyConfig::default();
        let e = FnJet::new(2, PoleSet::new().diagonal(0, 1), |x| (x[0] * x[1]).exp() / (x[0] - x[1]));
        let x = [c(0.3, 0.1), c(-0.4, 0.2)];
        let mixed = e.partial(&x, &[1, 1], &cfg);
        // iterated: differentiate the slot-1 derivative in slot 0
        let d1 = FnJet::new(2, PoleSet::new().diagonal(0, 1), {
            let e = e.clone();
            move |y: &[C64]| e.partial(y, &[0, 1], &CauchyConfig::default())
        });
        let iter = d1.partial(&x, &[1, 0], &cfg);
        assert!((mixed - iter).norm() < 1e-9 * mixed.norm());
    }
}
