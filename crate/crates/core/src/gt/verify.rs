//! Sampled residuals of the defining identities.

use rayon::prelude::*;

use super::structure::{d1, draw_samples, field_grad, EnhancedGt, GtStructure, Potential, VerifyConfig};
use crate::error::Result;
use crate::kernel::cauchy::{circle_coeff, clearance_excluding};
use crate::kernel::jet::{ppv, pv, CauchyConfig, JetRef};
use crate::kernel::C64;
use crate::report::VerificationReport;

fn finish(identity: &str, label: &str, residuals: Vec<f64>, cfg: &VerifyConfig) -> VerificationReport {
    VerificationReport::from_residuals(identity, label, &residuals, cfg.tol, cfg.seed)
        .with_param("min_separation", cfg.min_separation)
        .with_param("cauchy_nodes", cfg.cauchy.nodes as f64)
        .with_param("radius_fraction", cfg.cauchy.radius_fraction)
}

/// Largest deviation of the diagonal Laurent data of `jet` in `p1` about `p2`
/// from `(p1 - p2)^-1 + O(1)`.
pub fn diagonal_residue_defect(jet: &JetRef, p2: C64, v: &[C64], cfg: &CauchyConfig) -> f64 {
    let args = ppv(p2, p2, v);
    let r = cfg.radius(clearance_excluding(jet.as_ref(), 0, &args, p2));
    let mut y = args.clone();
    let mut coeff = |k: i32| {
        circle_coeff(
            |z| {
                y[0] = z;
                jet.value_from(&args, &y)
            },
            p2,
            r,
            cfg.nodes,
            k,
        )
    };
    let a1 = (coeff(-1) - 1.0).norm();
    let a2 = coeff(-2).norm();
    let a3 = coeff(-3).norm();
    a1.max(a2).max(a3)
}

/// Residual of the pole normalization of `f`.
pub fn verify_pole(s: &GtStructure, cfg: &VerifyConfig) -> Result<VerificationReport> {
    let samples = draw_samples(&s.sampler, 1, cfg, |v, pts| s.admissible(pts, v, cfg.min_separation))?;
    let res = samples.par_iter().map(|(v, pts)| diagonal_residue_defect(&s.f, pts[0], v, &cfg.cauchy)).collect();
    Ok(finish("pole", &s.label, res, cfg))
}

/// Componentwise bracket identity at `(p1, p2, v)`, largest modulus.
pub fn bracket_residual(s: &GtStructure, p1: C64, p2: C64, v: &[C64], c: &CauchyConfig) -> f64 {
    let m = s.m();
    let (x1, x2) = (pv(p1, v), pv(p2, v));
    let g1 = s.g_at(p1, v);
    let g2 = s.g_at(p2, v);
    let f12 = s.f_at(p1, p2, v);
    let f21 = s.f_at(p2, p1, v);
    // derivatives of f in its second slot at (p2, p1) and (p1, p2)
    let df21 = d1(&s.f, &ppv(p2, p1, v), 1, c);
    let df12 = d1(&s.f, &ppv(p1, p2, v), 1, c);
    let mut worst = 0.0f64;
    for i in 0..m {
        let gi = &s.g[i];
        let dv1 = field_grad(gi, &x1, 1, c);
        let dv2 = field_grad(gi, &x2, 1, c);
        let bracket: C64 = (0..m).map(|j| g1[j] * dv2[j] - g2[j] * dv1[j]).sum();
        let gp1 = d1(gi, &x1, 0, c);
        let gp2 = d1(gi, &x2, 0, c);
        let r = bracket - f21 * gp1 + f12 * gp2 - 2.0 * df21 * g1[i] + 2.0 * df12 * g2[i];
        worst = worst.max(r.norm());
    }
    worst
}

pub fn verify_bracket(s: &GtStructure, cfg: &VerifyConfig) -> Result<VerificationReport> {
    let samples = draw_samples(&s.sampler, 2, cfg, |v, pts| s.admissible(pts, v, cfg.min_separation))?;
    let res = samples.par_iter().map(|(v, p)| bracket_residual(s, p[0], p[1], v, &cfg.cauchy)).collect();
    Ok(finish("bracket", &s.label, res, cfg))
}

/// Cocycle identity at `(p1, p2, p3, v)`.
pub fn cocycle_residual(s: &GtStructure, p: [C64; 3], v: &[C64], c: &CauchyConfig) -> f64 {
    let [p1, p2, p3] = p;
    let f = |a: C64, b: C64| s.f_at(a, b, v);
    let d1f = |a: C64, b: C64| d1(&s.f, &ppv(a, b, v), 0, c);
    let d2f = |a: C64, b: C64| d1(&s.f, &ppv(a, b, v), 1, c);
    let lhs = s.apply(p2, v, &field_grad(&s.f, &ppv(p1, p3, v), 2, c))
        - s.apply(p1, v, &field_grad(&s.f, &ppv(p2, p3, v), 2, c));
    let rhs = f(p1, p2) * d1f(p2, p3) - f(p2, p1) * d1f(p1, p3) + f(p1, p3) * d2f(p2, p3)
        - f(p2, p3) * d2f(p1, p3)
        + 2.0 * f(p2, p3) * d2f(p1, p2)
        - 2.0 * f(p1, p3) * d2f(p2, p1);
    (lhs - rhs).norm()
}

pub fn verify_cocycle(s: &GtStructure, cfg: &VerifyConfig) -> Result<VerificationReport> {
    let samples = draw_samples(&s.sampler, 3, cfg, |v, pts| s.admissible(pts, v, cfg.min_separation))?;
    let res = samples.par_iter().map(|(v, p)| cocycle_residual(s, [p[0], p[1], p[2]], v, &cfg.cauchy)).collect();
    Ok(finish("cocycle", &s.label, res, cfg))
}

/// Residual of the lambda identity at `(p1, p2, p3, v)`.
pub fn lambda_residual(e: &EnhancedGt, p: [C64; 3], v: &[C64], c: &CauchyConfig) -> f64 {
    let [p1, p2, p3] = p;
    let s = &e.base;
    let lam = |a: C64, b: C64| e.lambda.value(&ppv(a, b, v));
    let dl = |a: C64, b: C64, slot: usize| d1(&e.lambda, &ppv(a, b, v), slot, c);
    let x23 = ppv(p2, p3, v);
    let lhs = s.apply(p1, v, &field_grad(&e.lambda, &x23, 2, c));
    let r = lhs - lam(p1, p3) * dl(p2, p1, 1)
        + lam(p2, p3) * d1(&s.f, &ppv(p1, p2, v), 1, c)
        + s.f_at(p1, p2, v) * dl(p2, p3, 0)
        + s.f_at(p1, p3, v) * dl(p2, p3, 1);
    r.norm()
}

/// Lambda identity plus the diagonal normalization of lambda.
pub fn verify_lambda(e: &EnhancedGt, cfg: &VerifyConfig) -> Result<VerificationReport> {
    let samples = draw_samples(&e.base.sampler, 3, cfg, |v, pts| e.admissible(pts, v, cfg.min_separation))?;
    let res = samples
        .par_iter()
        .map(|(v, p)| {
            let id = lambda_residual(e, [p[0], p[1], p[2]], v, &cfg.cauchy);
            id.max(diagonal_residue_defect(&e.lambda, p[1], v, &cfg.cauchy))
        })
        .collect();
    Ok(finish("lambda", &e.base.label, res, cfg))
}

/// Potential equation at `(p1, p2, v)`.
pub fn potential_residual(e: &EnhancedGt, h: &Potential, p1: C64, p2: C64, v: &[C64], c: &CauchyConfig) -> f64 {
    let s = &e.base;
    let x2 = pv(p2, v);
    let lhs = s.apply(p1, v, &field_grad(&h.h, &x2, 1, c));
    let r = lhs - e.lambda.value(&ppv(p1, p2, v)) * d1(&h.h, &pv(p1, v), 0, c)
        + s.f_at(p1, p2, v) * d1(&h.h, &x2, 0, c);
    r.norm()
}

pub fn verify_potential(e: &EnhancedGt, h: &Potential, cfg: &VerifyConfig) -> Result<VerificationReport> {
    let samples = draw_samples(&e.base.sampler, 2, cfg, |v, pts| {
        e.admissible(pts, v, cfg.min_separation) && h.admissible(pts, v, cfg.min_separation)
    })?;
    let res = samples.par_iter().map(|(v, p)| potential_residual(e, h, p[0], p[1], v, &cfg.cauchy)).collect();
    Ok(finish(&format!("potential:{}", h.label), &e.base.label, res, cfg))
}

/// Pole, bracket and cocycle reports in that order.
pub fn verify_axioms(s: &GtStructure, cfg: &VerifyConfig) -> Result<Vec<VerificationReport>> {
    Ok(vec![verify_pole(s, cfg)?, verify_bracket(s, cfg)?, verify_cocycle(s, cfg)?])
}
