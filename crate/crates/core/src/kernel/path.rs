//! Contour integration along circles and polylines.

use std::f64::consts::TAU;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::jet::Jet;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Circle {
        center: C64,
        radius: f64,
        #[serde(default)]
        clockwise: bool,
    },
    Polyline(Vec<C64>),
    ClosedPolyline(Vec<C64>),
}

/// Integration contour. `nodes` is the trapezoid count on circles and the
/// Gauss-Legendre order per segment on polylines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub kind: PathKind,
    pub nodes: usize,
}

impl PathSpec {
    pub fn circle(center: C64, radius: f64, nodes: usize) -> Self {
        Self { kind: PathKind::Circle { center, radius, clockwise: false }, nodes }
    }

    pub fn polyline(vertices: Vec<C64>, nodes: usize) -> Self {
        Self { kind: PathKind::Polyline(vertices), nodes }
    }

    pub fn closed(vertices: Vec<C64>, nodes: usize) -> Self {
        Self { kind: PathKind::ClosedPolyline(vertices), nodes }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 {
            return Err(Error::InvalidArgument(format!("{} path nodes, need at least 8", self.nodes)));
        }
        match &self.kind {
            PathKind::Circle { radius, .. } if !(*radius > 0.0) => {
                Err(Error::InvalidArgument(format!("circle radius {radius} must be positive")))
            }
            PathKind::Polyline(v) | PathKind::ClosedPolyline(v) if v.len() < 2 => {
                Err(Error::InvalidArgument("polyline needs at least 2 vertices".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn is_closed(&self) -> bool {
        !matches!(self.kind, PathKind::Polyline(_))
    }

    /// Endpoints of an open path.
    pub fn endpoints(&self) -> Option<(C64, C64)> {
        match &self.kind {
            PathKind::Polyline(v) => Some((v[0], v[v.len() - 1])),
            _ => None,
        }
    }

    /// Same contour traversed backwards.
    pub fn reversed(&self) -> Self {
        let kind = match &self.kind {
            PathKind::Circle { center, radius, clockwise } => {
                PathKind::Circle { center: *center, radius: *radius, clockwise: !clockwise }
            }
            PathKind::Polyline(v) => PathKind::Polyline(v.iter().rev().copied().collect()),
            PathKind::ClosedPolyline(v) => PathKind::ClosedPolyline(v.iter().rev().copied().collect()),
        };
        Self { kind, nodes: self.nodes }
    }

    /// Quadrature points `(t, w)` with `integral = sum w f(t)`.
    pub fn rule(&self) -> Vec<(C64, C64)> {
        match &self.kind {
            PathKind::Circle { center, radius, clockwise } => {
                let n = self.nodes as f64;
                let sign = if *clockwise { -1.0 } else { 1.0 };
                (0..self.nodes)
                    .map(|j| {
                        let w = C64::from_polar(1.0, TAU * j as f64 / n);
                        let t = center + radius * w;
                        let dt = C64::new(0.0, sign * TAU / n) * radius * w;
                        (t, dt)
                    })
                    .collect()
            }
            PathKind::Polyline(v) => segments_rule(v.windows(2).map(|w| (w[0], w[1])), self.nodes),
            PathKind::ClosedPolyline(v) => {
                let segs = v.windows(2).map(|w| (w[0], w[1])).chain(std::iter::once((v[v.len() - 1], v[0])));
                segments_rule(segs, self.nodes)
            }
        }
    }
}

fn segments_rule(segs: impl Iterator<Item = (C64, C64)>, order: usize) -> Vec<(C64, C64)> {
    let gl = GaussLegendre::new(NonZeroUsize::new(order).expect("order checked by validate"));
    let mut out = Vec::new();
    for (a, b) in segs {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for &(x, w) in gl.as_node_weight_pairs() {
            out.push((mid + half * x, half * w));
        }
    }
    out
}

/// `sum w f(t)` over a precomputed rule.
pub fn integrate_rule<F: FnMut(C64) -> C64>(rule: &[(C64, C64)], mut f: F) -> C64 {
    rule.iter().map(|&(t, w)| w * f(t)).sum()
}

/// Integral of `e` in argument `slot` along `path`, other arguments fixed.
/// The rule is rerun at doubled order; the two results must agree to `tol`.
pub fn path_integrate(e: &dyn Jet, slot: usize, args: &[C64], path: &PathSpec, tol: f64) -> Result<C64> {
    path.validate()?;
    if args.len() != e.arity() || slot >= args.len() {
        return Err(Error::InvalidArgument(format!("slot {slot} out of range for arity {}", e.arity())));
    }
    let eval = |rule: &[(C64, C64)]| {
        let mut y = args.to_vec();
        integrate_rule(rule, |t| {
            y[slot] = t;
            e.value(&y)
        })
    };
    let coarse = eval(&path.rule());
    let finer = PathSpec { kind: path.kind.clone(), nodes: 2 * path.nodes };
    let fine = eval(&finer.rule());
    let diff = (fine - coarse).norm();
    if !(diff <= tol * fine.norm().max(1.0)) {
        return Err(Error::NonConvergence(format!("path rule refinement changed the integral by {diff:e}")));
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::jet::{FnJet, PoleSet};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn segment_and_residue() {
        let id = FnJet::new(1, PoleSet::new(), |x| x[0]);
        let seg = PathSpec::polyline(vec![c(0.0, 0.0), c(1.0, 0.0)], 8);
        let v = path_integrate(&id, 0, &[c(0.0, 0.0)], &seg, 1e-12).unwrap();
        assert!((v - 0.5).norm() < 1e-15);
        let pole = FnJet::new(1, PoleSet::new().point(0, c(2.0, 0.0)), |x| 1.0 / (x[0] - 2.0));
        let circ = PathSpec::circle(c(2.0, 0.0), 0.5, 32);
        let v = path_integrate(&pole, 0, &[c(0.0, 0.0)], &circ, 1e-12).unwrap();
        assert!((v - c(0.0, TAU)).norm() < 1e-13);
    }

    #[test]
    fn exact_differential_on_closed_paths() {
        let id = FnJet::new(1, PoleSet::new(), |x| x[0]);
        let tri = PathSpec::closed(vec![c(0.0, 0.0), c(1.0, 0.3), c(-0.2, 1.0)], 8);
        let v = path_integrate(&id, 0, &[c(0.0, 0.0)], &tri, 1e-12).unwrap();
        assert!(v.norm() < 1e-14);
        let circ = PathSpec::circle(c(0.3, -0.2), 1.5, 16);
        assert!(path_integrate(&id, 0, &[c(0.0, 0.0)], &circ, 1e-12).unwrap().norm() < 1e-14);
    }

    #[test]
    fn reversal_negates() {
        let e = FnJet::new(1, PoleSet::new(), |x| (x[0] * x[0]).sin());
        for p in [
            PathSpec::polyline(vec![c(0.0, 0.0), c(1.0, 0.5), c(2.0, -0.1)], 12),
            PathSpec::circle(c(0.2, 0.1), 0.7, 24),
        ] {
            let a = path_integrate(&e, 0, &[c(0.0, 0.0)], &p, 1e-10).unwrap();
            let b = path_integrate(&e, 0, &[c(0.0, 0.0)], &p.reversed(), 1e-10).unwrap();
            assert!((a + b).norm() < 1e-14 * a.norm().max(1.0));
        }
    }

    #[test]
    fn invalid_paths() {
        assert!(PathSpec::circle(c(0.0, 0.0), 0.0, 16).validate().is_err());
        assert!(PathSpec::polyline(vec![c(0.0, 0.0)], 16).validate().is_err());
        assert!(PathSpec::polyline(vec![c(0.0, 0.0), c(1.0, 0.0)], 4).validate().is_err());
    }
}
