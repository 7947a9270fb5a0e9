//! Potentials obtained by integrating lambda over a contour.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::structure::{draw_samples, EnhancedGt, Potential, VerifyConfig};
use crate::error::{Error, Result};
use crate::kernel::jet::{ppv, FnJet};
use crate::kernel::path::{integrate_rule, PathSpec};
use crate::kernel::C64;

/// A point depending affinely on the fields: `constant + sum coeffs[k] v_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffinePoint {
    pub constant: C64,
    #[serde(default)]
    pub coeffs: Vec<C64>,
}

impl AffinePoint {
    pub fn fixed(constant: C64) -> Self {
        Self { constant, coeffs: Vec::new() }
    }

    pub fn at(&self, v: &[C64]) -> C64 {
        self.constant + self.coeffs.iter().zip(v).map(|(c, x)| c * x).sum::<C64>()
    }

    fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourKind {
    Circle { center: AffinePoint, radius: f64 },
    Polyline(Vec<AffinePoint>),
    ClosedPolyline(Vec<AffinePoint>),
}

/// A contour whose vertices may move with the fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub kind: ContourKind,
    pub nodes: usize,
}

impl Contour {
    pub fn realize(&self, v: &[C64]) -> PathSpec {
        match &self.kind {
            ContourKind::Circle { center, radius } => PathSpec::circle(center.at(v), *radius, self.nodes),
            ContourKind::Polyline(pts) => PathSpec::polyline(pts.iter().map(|p| p.at(v)).collect(), self.nodes),
            ContourKind::ClosedPolyline(pts) => PathSpec::closed(pts.iter().map(|p| p.at(v)).collect(), self.nodes),
        }
    }

    fn ends(&self) -> Option<(&AffinePoint, &AffinePoint)> {
        match &self.kind {
            ContourKind::Polyline(pts) => Some((&pts[0], &pts[pts.len() - 1])),
            _ => None,
        }
    }

    /// Largest rate at which a vertex moves with field `k`.
    fn speed(&self, k: usize) -> f64 {
        match &self.kind {
            ContourKind::Circle { center, .. } => center.coeff(k).norm(),
            ContourKind::Polyline(p) | ContourKind::ClosedPolyline(p) => p.iter().map(|a| a.coeff(k).norm()).fold(0.0, f64::max),
        }
    }
}

/// `[lambda(t, p2) (f(p1, t) - g(p1)(t))]` between the contour's endpoints.
pub fn endpoint_defect(e: &EnhancedGt, c: &Contour, p1: C64, p2: C64, v: &[C64]) -> C64 {
    let Some((a, b)) = c.ends() else { return C64::new(0.0, 0.0) };
    let term = |pt: &AffinePoint| {
        let t = pt.at(v);
        let g = e.base.g_at(p1, v);
        let moved: C64 = g.iter().enumerate().map(|(k, gk)| gk * pt.coeff(k)).sum();
        e.lambda.value(&ppv(t, p2, v)) * (e.base.f_at(p1, t, v) - moved)
    };
    term(b) - term(a)
}

/// `h(p, v) = integral over the contour of lambda(t, p, v) dt`.
///
/// Open contours must satisfy the endpoint condition at sampled points
/// (within `cfg.tol`); closed contours need no check.
pub fn potential_from_contour(e: &EnhancedGt, c: &Contour, cfg: &VerifyConfig) -> Result<Potential> {
    c.realize(&vec![C64::new(0.0, 0.0); e.base.m()]).validate()?;
    if c.ends().is_some() {
        let samples = draw_samples(&e.base.sampler, 2, cfg, |v, pts| e.admissible(pts, v, cfg.min_separation))?;
        let worst = samples
            .par_iter()
            .map(|(v, p)| endpoint_defect(e, c, p[0], p[1], v).norm())
            .reduce(|| 0.0, f64::max);
        if !(worst < cfg.tol) {
            return Err(Error::EndpointCondition(format!("boundary term reaches {worst:e}")));
        }
    }
    let m = e.base.m();
    let (lv, ls) = (e.lambda.clone(), e.lambda.clone());
    let (cv, cs) = (Arc::new(c.clone()), Arc::new(c.clone()));
    let h = FnJet::custom(
        m + 1,
        move |x, slot| {
            let v = &x[1..];
            let rule = cs.realize(v).rule();
            // distance to the nearest singularity seen from any contour node
            let near = |t: C64, lslot: usize| {
                let y = ppv(t, x[0], v);
                ls.clearance(&y, lslot)
            };
            let d_path = rule.iter().map(|&(t, _)| near(t, 1)).fold(f64::INFINITY, f64::min);
            let d = if slot == 0 {
                d_path
            } else {
                let k = slot - 1;
                let own = rule.iter().map(|&(t, _)| near(t, slot + 1)).fold(f64::INFINITY, f64::min);
                let sp = cs.speed(k);
                own.min(if sp > 0.0 { d_path / sp } else { f64::INFINITY })
            };
            if d.is_finite() { vec![x[slot] + d] } else { Vec::new() }
        },
        move |_, x| {
            let v = &x[1..];
            let rule = cv.realize(v).rule();
            let mut y = ppv(x[0], x[0], v);
            integrate_rule(&rule, |t| {
                y[0] = t;
                lv.value(&y)
            })
        },
    );
    let label = match &c.kind {
        ContourKind::Circle { .. } => "contour:circle",
        ContourKind::Polyline(_) => "contour:segment",
        ContourKind::ClosedPolyline(_) => "contour:loop",
    };
    Ok(Potential::new(label, h.into_ref()))
}
