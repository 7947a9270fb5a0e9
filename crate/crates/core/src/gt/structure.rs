//! Data model: structures, enhanced structures, potentials and samplers.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::jet::{ppv, pv, unit, CauchyConfig, JetRef};
use crate::kernel::sampling::{sample_points_with, Region, Rng};
use crate::kernel::C64;

type FieldDraw = dyn Fn(&mut Rng) -> Result<Vec<C64>> + Send + Sync;
type PointDraw = dyn Fn(&[C64], usize, f64, &[C64], &mut Rng) -> Result<Vec<C64>> + Send + Sync;

/// Draws generic field values and generic points for a structure.
///
/// `points(v, n, min_sep, extra, rng)` returns `n` points away from the
/// structure's own exclusions at `v` and from `extra`.
#[derive(Clone)]
pub struct Sampler {
    fields: Arc<FieldDraw>,
    points: Arc<PointDraw>,
}

impl fmt::Debug for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Sampler")
    }
}

impl Sampler {
    pub fn new<F, P>(fields: F, points: P) -> Self
    where
        F: Fn(&mut Rng) -> Result<Vec<C64>> + Send + Sync + 'static,
        P: Fn(&[C64], usize, f64, &[C64], &mut Rng) -> Result<Vec<C64>> + Send + Sync + 'static,
    {
        Self { fields: Arc::new(fields), points: Arc::new(points) }
    }

    /// Points drawn from a fixed box, avoiding `exclusions(v)`.
    pub fn planar<F, E>(fields: F, region: Region, exclusions: E) -> Self
    where
        F: Fn(&mut Rng) -> Result<Vec<C64>> + Send + Sync + 'static,
        E: Fn(&[C64]) -> Vec<C64> + Send + Sync + 'static,
    {
        Self::new(fields, move |v, n, sep, extra, rng| {
            let mut ex = exclusions(v);
            ex.extend_from_slice(extra);
            sample_points_with(rng, &region, n, &ex, sep)
        })
    }

    pub fn draw_fields(&self, rng: &mut Rng) -> Result<Vec<C64>> {
        (self.fields)(rng)
    }

    pub fn draw_points(&self, v: &[C64], n: usize, min_sep: f64, extra: &[C64], rng: &mut Rng) -> Result<Vec<C64>> {
        (self.points)(v, n, min_sep, extra, rng)
    }

    /// Same point sampler with new field draws.
    pub fn with_fields<F>(&self, fields: F) -> Self
    where
        F: Fn(&mut Rng) -> Result<Vec<C64>> + Send + Sync + 'static,
    {
        Self { fields: Arc::new(fields), points: self.points.clone() }
    }

    /// Same field draws with a new point sampler.
    pub fn with_points<P>(&self, points: P) -> Self
    where
        P: Fn(&[C64], usize, f64, &[C64], &mut Rng) -> Result<Vec<C64>> + Send + Sync + 'static,
    {
        Self { fields: self.fields.clone(), points: Arc::new(points) }
    }

    /// Pin the fields to `v`.
    pub fn fixed(&self, v: Vec<C64>) -> Self {
        self.with_fields(move |_| Ok(v.clone()))
    }
}

/// A local GT structure: vector fields `g(p) = sum g_i(p, v) d/dv_i` on an
/// m-dimensional fiber and a two-point function `f(p1, p2, v)`.
///
/// Jet argument layouts are `[p, v_1..v_m]` for `g_i` and `[p1, p2, v_1..v_m]` for `f`.
#[derive(Clone, Debug)]
pub struct GtStructure {
    pub label: String,
    pub fields: Vec<String>,
    pub g: Vec<JetRef>,
    pub f: JetRef,
    /// Fiber coordinates whose component is `f(p, v_k)`, i.e. added points.
    pub punctures: Vec<usize>,
    pub sampler: Sampler,
}

impl GtStructure {
    pub fn new(label: impl Into<String>, fields: Vec<String>, g: Vec<JetRef>, f: JetRef, sampler: Sampler) -> Result<Self> {
        let m = fields.len();
        if g.len() != m {
            return Err(Error::InvalidArgument(format!("{} vector-field components for {m} fields", g.len())));
        }
        if let Some(bad) = g.iter().position(|gi| gi.arity() != m + 1) {
            return Err(Error::InvalidArgument(format!("component {bad} has arity {}", g[bad].arity())));
        }
        if f.arity() != m + 2 {
            return Err(Error::InvalidArgument(format!("f has arity {} for {m} fields", f.arity())));
        }
        Ok(Self { label: label.into(), fields, g, f, punctures: Vec::new(), sampler })
    }

    pub fn m(&self) -> usize {
        self.fields.len()
    }

    pub fn g_at(&self, p: C64, v: &[C64]) -> Vec<C64> {
        let x = pv(p, v);
        self.g.iter().map(|gi| gi.value(&x)).collect()
    }

    pub fn f_at(&self, p1: C64, p2: C64, v: &[C64]) -> C64 {
        self.f.value(&ppv(p1, p2, v))
    }

    /// `g(p)` applied to a function through its field gradient.
    pub fn apply(&self, p: C64, v: &[C64], grad: &[C64]) -> C64 {
        self.g_at(p, v).iter().zip(grad).map(|(a, b)| a * b).sum()
    }

    pub fn admissible(&self, pts: &[C64], v: &[C64], min_sep: f64) -> bool {
        let m = self.m();
        for &p in pts {
            let x = pv(p, v);
            for gi in &self.g {
                if (0..=m).any(|s| !(gi.clearance(&x, s) >= min_sep)) || !finite(gi.value(&x)) {
                    return false;
                }
            }
        }
        for (a, &p1) in pts.iter().enumerate() {
            for (b, &p2) in pts.iter().enumerate() {
                if a == b {
                    continue;
                }
                let x = ppv(p1, p2, v);
                if (0..m + 2).any(|s| !(self.f.clearance(&x, s) >= min_sep)) || !finite(self.f.value(&x)) {
                    return false;
                }
            }
        }
        true
    }
}

pub(crate) fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Derivative of `jet` once in `slot`.
pub(crate) fn d1(jet: &JetRef, x: &[C64], slot: usize, cfg: &CauchyConfig) -> C64 {
    jet.partial(x, &unit(x.len(), slot, 1), cfg)
}

/// Field gradient of a jet with layout `[leading.., v]`.
pub(crate) fn field_grad(jet: &JetRef, x: &[C64], leading: usize, cfg: &CauchyConfig) -> Vec<C64> {
    (leading..x.len()).map(|s| d1(jet, x, s, cfg)).collect()
}

/// A GT structure together with `lambda(p1, p2, v)`.
#[derive(Clone, Debug)]
pub struct EnhancedGt {
    pub base: GtStructure,
    pub lambda: JetRef,
}

impl EnhancedGt {
    pub fn new(base: GtStructure, lambda: JetRef) -> Result<Self> {
        if lambda.arity() != base.m() + 2 {
            return Err(Error::InvalidArgument(format!("lambda has arity {}", lambda.arity())));
        }
        Ok(Self { base, lambda })
    }

    pub fn admissible(&self, pts: &[C64], v: &[C64], min_sep: f64) -> bool {
        if !self.base.admissible(pts, v, min_sep) {
            return false;
        }
        let n = self.base.m() + 2;
        for (a, &p1) in pts.iter().enumerate() {
            for (b, &p2) in pts.iter().enumerate() {
                if a != b {
                    let x = ppv(p1, p2, v);
                    if (0..n).any(|s| !(self.lambda.clearance(&x, s) >= min_sep)) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// A function `h(p, v)`. `claimed` marks functions asserted to be
/// potentials; raw building blocks carry `false`.
#[derive(Clone, Debug)]
pub struct Potential {
    pub label: String,
    pub h: JetRef,
    pub claimed: bool,
}

impl Potential {
    pub fn new(label: impl Into<String>, h: JetRef) -> Self {
        Self { label: label.into(), h, claimed: true }
    }

    pub fn raw(label: impl Into<String>, h: JetRef) -> Self {
        Self { label: label.into(), h, claimed: false }
    }

    pub fn admissible(&self, pts: &[C64], v: &[C64], min_sep: f64) -> bool {
        pts.iter().all(|&p| {
            let x = pv(p, v);
            (0..x.len()).all(|s| self.h.clearance(&x, s) >= min_sep) && finite(self.h.value(&x))
        })
    }
}

/// Sampling and quadrature settings for a verification run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Minimum distance between sample points and from every singularity.
    pub min_separation: f64,
    pub cauchy: CauchyConfig,
}

impl VerifyConfig {
    pub fn new(samples: usize, seed: u64, tol: f64) -> Self {
        Self { samples, seed, tol, ..Self::default() }
    }
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { samples: 100, seed: 0, tol: 1e-8, min_separation: 0.15, cauchy: CauchyConfig::default() }
    }
}

/// Draw `cfg.samples` admissible `(v, points)` pairs, sequentially so the
/// result depends on the seed only.
pub fn draw_samples<A>(sampler: &Sampler, npoints: usize, cfg: &VerifyConfig, accept: A) -> Result<Vec<(Vec<C64>, Vec<C64>)>>
where
    A: Fn(&[C64], &[C64]) -> bool,
{
    let mut rng = crate::kernel::sampling::rng(cfg.seed);
    let budget = 1000 * (cfg.samples + 1);
    let mut out = Vec::with_capacity(cfg.samples);
    let mut attempts = 0;
    while out.len() < cfg.samples {
        if attempts == budget {
            return Err(Error::Exhausted { draws: attempts, context: format!("{} of {} samples admissible", out.len(), cfg.samples) });
        }
        attempts += 1;
        let Ok(v) = sampler.draw_fields(&mut rng) else { continue };
        let Ok(pts) = sampler.draw_points(&v, npoints, cfg.min_separation, &[], &mut rng) else { continue };
        if accept(&v, &pts) {
            out.push((v, pts));
        }
    }
    Ok(out)
}
