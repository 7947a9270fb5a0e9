//! Hyperelliptic genus-2 structure over the branch points `(a, b, c)` of
//! `q^2 = p (p - 1) (p - a) (p - b) (p - c)`.
//!
//! A curve point `(p, sheet)` is encoded as one complex coordinate: `p` on
//! sheet `+1` and `p + SHEET_OFFSET` on sheet `-1`. Each chart carries the
//! principal square root times the sheet sign at the anchor, continued by
//! nearest root, so derivative circles never see a cut.

use crate::error::{Error, Result};
use crate::gt::{GtStructure, Sampler};
use crate::kernel::jet::{CauchyConfig, Jet, JetRef};
use crate::kernel::sampling::{sample_points_with, Region, Rng};
use crate::kernel::{c64, C64};
use rand::RngExt;
use std::sync::Arc;

pub const SHEET_OFFSET: f64 = 64.0;
pub const MODULI_REGION: Region = Region::new((-1.5, 2.5), (-1.5, 1.5));
pub const POINT_REGION: Region = Region::new((-2.0, 3.0), (-2.0, 2.0));

const FIXED: [C64; 2] = [c64(0.0, 0.0), c64(1.0, 0.0)];

/// A point on the curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub p: C64,
    pub sheet: i8,
}

impl CurvePoint {
    pub fn new(p: C64, sheet: i8) -> Self {
        Self { p, sheet: if sheet < 0 { -1 } else { 1 } }
    }

    pub fn encode(self) -> C64 {
        if self.sheet < 0 {
            self.p + SHEET_OFFSET
        } else {
            self.p
        }
    }

    pub fn decode(x: C64) -> Self {
        if x.re > 0.5 * SHEET_OFFSET {
            Self { p: x - SHEET_OFFSET, sheet: -1 }
        } else {
            Self { p: x, sheet: 1 }
        }
    }
}

fn shift(sheet: i8) -> f64 {
    if sheet < 0 {
        SHEET_OFFSET
    } else {
        0.0
    }
}

pub fn quintic(p: C64, m: &[C64]) -> C64 {
    p * (p - 1.0) * (p - m[0]) * (p - m[1]) * (p - m[2])
}

fn quintic_dp(p: C64, m: &[C64]) -> C64 {
    let r = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), m[0], m[1], m[2]];
    (0..5).map(|i| (0..5).filter(|&j| j != i).map(|j| p - r[j]).product::<C64>()).sum()
}

/// `q` at a curve point; errors at branch points.
pub fn q_at(pt: CurvePoint, m: &[C64]) -> Result<C64> {
    let qq = quintic(pt.p, m);
    if qq.norm() < 1e-300 {
        return Err(Error::PoleHit(format!("p = {} is a branch point", pt.p)));
    }
    Ok(pt.sheet as f64 * qq.sqrt())
}

/// `q` at `x` continued from `anchor`, both encoded.
fn q_from(anchor_x: C64, anchor_m: &[C64], x: C64, m: &[C64]) -> C64 {
    let a = CurvePoint::decode(anchor_x);
    let pt = CurvePoint::decode(x);
    let root = quintic(pt.p, m).sqrt();
    if a.sheet != pt.sheet {
        return pt.sheet as f64 * root;
    }
    let qa = a.sheet as f64 * quintic(a.p, anchor_m).sqrt();
    if (root - qa).norm() <= (root + qa).norm() {
        root
    } else {
        -root
    }
}

fn branch_points(m: &[C64]) -> [C64; 5] {
    [FIXED[0], FIXED[1], m[0], m[1], m[2]]
}

/// Singular values of a modulus slot `k` (0-based among a, b, c): the
/// other branch points and the base coordinates of the evaluation points.
fn modulus_sing(m: &[C64], k: usize, pts: &[C64]) -> Vec<C64> {
    let mut out: Vec<C64> = branch_points(m).iter().enumerate().filter(|(i, _)| *i != k + 2).map(|(_, z)| *z).collect();
    out.extend(pts.iter().map(|&x| CurvePoint::decode(x).p));
    out
}

fn point_sing(x: C64, m: &[C64]) -> Vec<C64> {
    let s = shift(CurvePoint::decode(x).sheet);
    branch_points(m).iter().map(|z| z + s).collect()
}

/// Component `k` of `G`: `a_k (a_k - 1) / (2 p (p - 1) (p - a_k))`.
struct G {
    k: usize,
}

impl G {
    fn eval(&self, p: C64, m: &[C64]) -> C64 {
        let a = m[self.k];
        a * (a - 1.0) / (2.0 * p * (p - 1.0) * (p - a))
    }
}

impl Jet for G {
    fn arity(&self) -> usize {
        4
    }

    fn value(&self, x: &[C64]) -> C64 {
        self.eval(CurvePoint::decode(x[0]).p, &x[1..])
    }

    fn singularities(&self, x: &[C64], slot: usize) -> Vec<C64> {
        if slot == 0 {
            point_sing(x[0], &x[1..])
        } else {
            modulus_sing(&x[1..], slot - 1, &[x[0]])
        }
    }

    fn partial(&self, x: &[C64], orders: &[u32], cfg: &CauchyConfig) -> C64 {
        let total: u32 = orders.iter().sum();
        if total != 1 {
            return crate::kernel::cauchy::nested_partial(self, x, orders, cfg);
        }
        let p = CurvePoint::decode(x[0]).p;
        let m = &x[1..];
        let a = m[self.k];
        let val = self.eval(p, m);
        let slot = orders.iter().position(|&o| o == 1).unwrap();
        match slot {
            0 => -val * (1.0 / p + 1.0 / (p - 1.0) + 1.0 / (p - a)),
            s if s - 1 == self.k => val * ((2.0 * a - 1.0) / (a * (a - 1.0)) + 1.0 / (p - a)),
            _ => C64::new(0.0, 0.0),
        }
    }
}

/// `F(p1, p2)` with curve points in slots 0 and 1.
struct F {
    /// Multiplies `a` inside `F` only, for fault injection.
    a_scale: f64,
}

struct FParts {
    n: C64,
    d: C64,
}

impl F {
    fn moduli(&self, x: &[C64]) -> [C64; 3] {
        [x[2] * self.a_scale, x[3], x[4]]
    }

    fn parts(&self, p1: C64, p2: C64, q1: C64, q2: C64, m: &[C64]) -> FParts {
        let r1 = (p1 - m[0]) * (p1 - m[1]) * (p1 - m[2]);
        FParts { n: r1 * p2 * (p2 - 1.0) + q1 * q2, d: 2.0 * (p1 - p2) * p1 * (p1 - 1.0) * r1 }
    }
}

impl Jet for F {
    fn arity(&self) -> usize {
        5
    }

    fn value(&self, x: &[C64]) -> C64 {
        self.value_from(x, x)
    }

    fn value_from(&self, anchor: &[C64], x: &[C64]) -> C64 {
        let (ma, m) = (self.moduli(anchor), self.moduli(x));
        let q1 = q_from(anchor[0], &ma, x[0], &m);
        let q2 = q_from(anchor[1], &ma, x[1], &m);
        let (p1, p2) = (CurvePoint::decode(x[0]).p, CurvePoint::decode(x[1]).p);
        let fp = self.parts(p1, p2, q1, q2, &m);
        fp.n / fp.d
    }

    fn singularities(&self, x: &[C64], slot: usize) -> Vec<C64> {
        let m = self.moduli(x);
        match slot {
            0 | 1 => {
                let other = CurvePoint::decode(x[1 - slot]).p;
                let mut out = point_sing(x[slot], &m);
                // the diagonal, and the removable crossing with the other sheet
                let s = shift(CurvePoint::decode(x[slot]).sheet);
                out.push(other + s);
                out
            }
            s => {
                let mut out = modulus_sing(&m, s - 2, &x[..2]);
                if s == 2 && self.a_scale != 1.0 {
                    for z in out.iter_mut() {
                        *z /= self.a_scale;
                    }
                }
                out
            }
        }
    }

    fn partial(&self, x: &[C64], orders: &[u32], cfg: &CauchyConfig) -> C64 {
        let total: u32 = orders.iter().sum();
        if total != 1 {
            return crate::kernel::cauchy::nested_partial(self, x, orders, cfg);
        }
        let m = self.moduli(x);
        let (c1, c2) = (CurvePoint::decode(x[0]), CurvePoint::decode(x[1]));
        let (p1, p2) = (c1.p, c2.p);
        let q1 = c1.sheet as f64 * quintic(p1, &m).sqrt();
        let q2 = c2.sheet as f64 * quintic(p2, &m).sqrt();
        let r1 = (p1 - m[0]) * (p1 - m[1]) * (p1 - m[2]);
        let fp = self.parts(p1, p2, q1, q2, &m);
        let slot = orders.iter().position(|&o| o == 1).unwrap();
        let (dn, dd) = match slot {
            0 => {
                let dr1 = (p1 - m[1]) * (p1 - m[2]) + (p1 - m[0]) * (p1 - m[2]) + (p1 - m[0]) * (p1 - m[1]);
                let dq1 = quintic_dp(p1, &m) / (2.0 * q1);
                let dn = dr1 * p2 * (p2 - 1.0) + dq1 * q2;
                let dd = 2.0 * (p1 * (p1 - 1.0) * r1 + (p1 - p2) * (2.0 * p1 - 1.0) * r1 + (p1 - p2) * p1 * (p1 - 1.0) * dr1);
                (dn, dd)
            }
            1 => {
                let dq2 = quintic_dp(p2, &m) / (2.0 * q2);
                (r1 * (2.0 * p2 - 1.0) + q1 * dq2, -2.0 * p1 * (p1 - 1.0) * r1)
            }
            s => {
                let k = s - 2;
                let others: C64 = (0..3).filter(|&j| j != k).map(|j| p1 - m[j]).product();
                let dr1 = -others;
                let dq = |p: C64, q: C64| -quintic(p, &m) / ((p - m[k]) * 2.0 * q);
                let dn = dr1 * p2 * (p2 - 1.0) + dq(p1, q1) * q2 + q1 * dq(p2, q2);
                let dd = 2.0 * (p1 - p2) * p1 * (p1 - 1.0) * dr1;
                let scale = if k == 0 { self.a_scale } else { 1.0 };
                return scale * (dn * fp.d - fp.n * dd) / (fp.d * fp.d);
            }
        };
        (dn * fp.d - fp.n * dd) / (fp.d * fp.d)
    }
}

/// Check that `{0, 1, a, b, c}` are pairwise at least `sep` apart.
pub fn check_moduli(m: &[C64], sep: f64) -> Result<()> {
    let e = branch_points(m);
    for i in 0..5 {
        for j in i + 1..5 {
            if !((e[i] - e[j]).norm() >= sep) {
                return Err(Error::DomainViolation(format!("branch points {} and {} are {:e} apart", e[i], e[j], (e[i] - e[j]).norm())));
            }
        }
    }
    Ok(())
}

fn draw_moduli(rng: &mut Rng) -> Result<Vec<C64>> {
    sample_points_with(rng, &MODULI_REGION, 3, &FIXED, super::MODULI_SEPARATION)
}

fn draw_curve_points(v: &[C64], n: usize, sep: f64, extra: &[C64], rng: &mut Rng) -> Result<Vec<C64>> {
    let mut out: Vec<C64> = Vec::with_capacity(n);
    let e = branch_points(v);
    for _ in 0..n {
        let mut ex: Vec<C64> = e.to_vec();
        // keep base coordinates apart across sheets too
        ex.extend(extra.iter().chain(&out).map(|&x| CurvePoint::decode(x).p));
        let p = sample_points_with(rng, &POINT_REGION, 1, &ex, sep)?[0];
        let sheet = if rng.random_range(0..2) == 0 { 1 } else { -1 };
        out.push(CurvePoint::new(p, sheet).encode());
    }
    Ok(out)
}

fn build(a_scale: f64) -> Result<GtStructure> {
    let g: Vec<JetRef> = (0..3).map(|k| Arc::new(G { k }) as JetRef).collect();
    let f: JetRef = Arc::new(F { a_scale });
    let sampler = Sampler::new(draw_moduli, draw_curve_points);
    let label = if a_scale == 1.0 { "genus2".to_string() } else { format!("genus2(F with a*{a_scale})") };
    GtStructure::new(label, vec!["a".into(), "b".into(), "c".into()], g, f, sampler)
}

/// Fields `(a, b, c)`; curve points on both sheets.
pub fn structure() -> Result<GtStructure> {
    build(1.0)
}

/// Structure whose `F` sees `a * scale` while `G` sees `a`. Not a GT
/// structure unless `scale == 1`.
pub fn perturbed(scale: f64) -> Result<GtStructure> {
    build(scale)
}

/// Pin the moduli to `(a, b, c)`.
pub fn at_moduli(m: [C64; 3]) -> Result<GtStructure> {
    check_moduli(&m, 1e-12)?;
    let mut s = structure()?;
    s.sampler = s.sampler.fixed(m.to_vec());
    s.label = format!("genus2(a={}, b={}, c={})", m[0], m[1], m[2]);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::cauchy::laurent_coeff;
    use crate::kernel::jet::{pv, ppv, unit};

    const M: [C64; 3] = [c64(-0.7, 0.4), c64(1.8, -0.3), c64(0.6, 1.1)];

    #[test]
    fn residue_of_g_at_branch_point() {
        let s = structure().unwrap();
        let x = pv(M[0] + 0.3, &M);
        let r = laurent_coeff(s.g[0].as_ref(), 0, &x, M[0], -1, Some(0.1), 64, None).unwrap();
        assert!((r - 0.5).norm() < 1e-12);
    }

    #[test]
    fn diagonal_residue_depends_on_sheets() {
        let s = structure().unwrap();
        let p = c64(0.4, -0.6);
        for sheet in [1, -1] {
            let z = CurvePoint::new(p, sheet).encode();
            let x = ppv(z + 0.05, z, &M);
            let same = laurent_coeff(s.f.as_ref(), 0, &x, z, -1, Some(0.1), 64, None).unwrap();
            assert!((same - 1.0).norm() < 1e-10, "{same}");
            let w = CurvePoint::new(p, -sheet).encode();
            let x = ppv(w + 0.05, z, &M);
            let cross = laurent_coeff(s.f.as_ref(), 0, &x, w, -1, Some(0.1), 64, None).unwrap();
            assert!(cross.norm() < 1e-10, "{cross}");
        }
    }

    #[test]
    fn analytic_partials_match_cauchy() {
        let s = structure().unwrap();
        let cfg = CauchyConfig::default();
        for (s1, s2) in [(1, 1), (1, -1), (-1, -1)] {
            let x = ppv(CurvePoint::new(c64(0.3, 0.9), s1).encode(), CurvePoint::new(c64(-0.9, -0.5), s2).encode(), &M);
            for slot in 0..5 {
                let o = unit(5, slot, 1);
                let a = s.f.partial(&x, &o, &cfg);
                let b = crate::kernel::cauchy::nested_partial(s.f.as_ref(), &x, &o, &cfg);
                assert!((a - b).norm() < 1e-9 * a.norm().max(1.0), "slot {slot}: {a} vs {b}");
            }
            let y = pv(x[0], &M);
            for k in 0..3 {
                for slot in 0..4 {
                    let o = unit(4, slot, 1);
                    let a = s.g[k].partial(&y, &o, &cfg);
                    let b = crate::kernel::cauchy::nested_partial(s.g[k].as_ref(), &y, &o, &cfg);
                    assert!((a - b).norm() < 1e-9 * a.norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn branch_point_rejected() {
        assert!(q_at(CurvePoint::new(M[1], 1), &M).is_err());
        assert!(q_at(CurvePoint::new(c64(0.5, 0.5), -1), &M).is_ok());
    }
}
