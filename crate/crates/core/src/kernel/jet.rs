//! Holomorphic function handles with declared singular loci.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::cauchy;

/// Circle-quadrature settings shared by every derivative evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyConfig {
    /// Equispaced trapezoid nodes per circle. 32 is past the spectral
    /// threshold for a radius of a quarter of the clearance.
    pub nodes: usize,
    /// Circle radius as a fraction of the distance to the nearest singularity.
    pub radius_fraction: f64,
    /// Upper bound on the radius, relevant for entire functions.
    pub max_radius: f64,
}

impl Default for CauchyConfig {
    fn default() -> Self {
        Self { nodes: 32, radius_fraction: 0.25, max_radius: 0.5 }
    }
}

impl CauchyConfig {
    pub fn radius(&self, clearance: f64) -> f64 {
        (clearance * self.radius_fraction).min(self.max_radius)
    }
}

/// A holomorphic function of `arity` complex arguments.
///
/// `value_from` evaluates at `x` by analytic continuation from `anchor`;
/// single-valued functions ignore the anchor. Derivative circles always
/// pass the circle center as anchor.
pub trait Jet: Send + Sync {
    fn arity(&self) -> usize;

    fn value(&self, x: &[C64]) -> C64;

    fn value_from(&self, _anchor: &[C64], x: &[C64]) -> C64 {
        self.value(x)
    }

    /// Values of argument `slot` near `x[slot]` where the function is singular,
    /// other arguments held fixed. Entire directions return an empty list.
    fn singularities(&self, x: &[C64], slot: usize) -> Vec<C64>;

    fn clearance(&self, x: &[C64], slot: usize) -> f64 {
        self.singularities(x, slot)
            .iter()
            .map(|s| (s - x[slot]).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Mixed partial derivative with multi-index `orders`.
    fn partial(&self, x: &[C64], orders: &[u32], cfg: &CauchyConfig) -> C64 {
        cauchy::nested_partial(self, x, orders, cfg)
    }
}

pub type JetRef = Arc<dyn Jet>;

impl fmt::Debug for dyn Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet(arity {})", self.arity())
    }
}

/// Singular locus of a function of several variables.
#[derive(Clone, Debug, PartialEq)]
pub enum Locus {
    /// `sum c_k x_k + offset = 0`.
    Linear { terms: Vec<(usize, C64)>, offset: C64 },
    /// `sum c_k x_k` lies in the lattice `Z + x_tau Z`. Also marks the real
    /// axis of `x_tau` as a natural boundary.
    Lattice { terms: Vec<(usize, C64)>, tau: usize },
    /// Natural boundary `Im x_slot = 0`.
    Boundary { slot: usize },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PoleSet {
    pub loci: Vec<Locus>,
}

impl PoleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, locus: Locus) -> Self {
        self.loci.push(locus);
        self
    }

    /// `x_slot = c`.
    pub fn point(self, slot: usize, c: C64) -> Self {
        self.with(Locus::Linear { terms: vec![(slot, C64::new(1.0, 0.0))], offset: -c })
    }

    /// `x_a = x_b`.
    pub fn diagonal(self, a: usize, b: usize) -> Self {
        self.with(Locus::Linear {
            terms: vec![(a, C64::new(1.0, 0.0)), (b, C64::new(-1.0, 0.0))],
            offset: C64::new(0.0, 0.0),
        })
    }

    /// `x_a - x_b` in the lattice spanned by 1 and `x_tau`.
    pub fn lattice_diff(self, a: usize, b: usize, tau: usize) -> Self {
        self.with(Locus::Lattice {
            terms: vec![(a, C64::new(1.0, 0.0)), (b, C64::new(-1.0, 0.0))],
            tau,
        })
    }

    /// `x_a` in the lattice spanned by 1 and `x_tau`.
    pub fn lattice_point(self, a: usize, tau: usize) -> Self {
        self.with(Locus::Lattice { terms: vec![(a, C64::new(1.0, 0.0))], tau })
    }

    pub fn singularities(&self, x: &[C64], slot: usize) -> Vec<C64> {
        let mut out = Vec::new();
        for locus in &self.loci {
            match locus {
                Locus::Linear { terms, offset } => {
                    let Some(a) = coeff(terms, slot) else { continue };
                    let rest: C64 = terms
                        .iter()
                        .filter(|(k, _)| *k != slot)
                        .map(|(k, c)| c * x[*k])
                        .sum::<C64>()
                        + offset;
                    out.push(-rest / a);
                }
                Locus::Lattice { terms, tau } => {
                    let t = x[*tau];
                    if slot == *tau {
                        out.push(C64::new(t.re, 0.0));
                        let w: C64 = terms.iter().map(|(k, c)| c * x[*k]).sum();
                        for n in (-3i32..=3).filter(|n| *n != 0) {
                            let nf = n as f64;
                            let m0 = (w - nf * t).re.round();
                            for dm in -1..=1 {
                                out.push((w - (m0 + dm as f64)) / nf);
                            }
                        }
                        continue;
                    }
                    let Some(a) = coeff(terms, slot) else { continue };
                    if t.im <= 0.0 {
                        out.push(x[slot]);
                        continue;
                    }
                    let w: C64 = terms.iter().map(|(k, c)| c * x[*k]).sum();
                    let n0 = (w.im / t.im).round();
                    for dn in -1..=1 {
                        let n = n0 + dn as f64;
                        let m0 = (w - n * t).re.round();
                        for dm in -1..=1 {
                            let lam = (m0 + dm as f64) + n * t;
                            out.push(x[slot] + (lam - w) / a);
                        }
                    }
                }
                Locus::Boundary { slot: s } => {
                    if *s == slot {
                        out.push(C64::new(x[slot].re, 0.0));
                    }
                }
            }
        }
        out
    }
}

fn coeff(terms: &[(usize, C64)], slot: usize) -> Option<C64> {
    let c: C64 = terms.iter().filter(|(k, _)| *k == slot).map(|(_, c)| *c).sum();
    (c.norm() > 0.0).then_some(c)
}

type ValueFn = dyn Fn(&[C64], &[C64]) -> C64 + Send + Sync;
type SingFn = dyn Fn(&[C64], usize) -> Vec<C64> + Send + Sync;

#[derive(Clone)]
enum Singular {
    Poles(PoleSet),
    Custom(Arc<SingFn>),
}

/// Closure-backed jet.
#[derive(Clone)]
pub struct FnJet {
    arity: usize,
    value: Arc<ValueFn>,
    sing: Singular,
}

impl fmt::Debug for FnJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnJet").field("arity", &self.arity).finish_non_exhaustive()
    }
}

impl FnJet {
    /// Single-valued function with declared poles.
    pub fn new<F>(arity: usize, poles: PoleSet, f: F) -> Self
    where
        F: Fn(&[C64]) -> C64 + Send + Sync + 'static,
    {
        Self { arity, value: Arc::new(move |_: &[C64], x: &[C64]| f(x)), sing: Singular::Poles(poles) }
    }

    /// Function given as `f(anchor, x)`, continued from the anchor.
    pub fn continued<F>(arity: usize, poles: PoleSet, f: F) -> Self
    where
        F: Fn(&[C64], &[C64]) -> C64 + Send + Sync + 'static,
    {
        Self { arity, value: Arc::new(f), sing: Singular::Poles(poles) }
    }

    /// Function with a computed singularity census, used by composites.
    pub fn custom<F, S>(arity: usize, sing: S, f: F) -> Self
    where
        F: Fn(&[C64], &[C64]) -> C64 + Send + Sync + 'static,
        S: Fn(&[C64], usize) -> Vec<C64> + Send + Sync + 'static,
    {
        Self { arity, value: Arc::new(f), sing: Singular::Custom(Arc::new(sing)) }
    }

    pub fn constant(arity: usize, c: C64) -> Self {
        Self::new(arity, PoleSet::new(), move |_| c)
    }

    pub fn into_ref(self) -> JetRef {
        Arc::new(self)
    }
}

impl Jet for FnJet {
    fn arity(&self) -> usize {
        self.arity
    }

    fn value(&self, x: &[C64]) -> C64 {
        debug_assert_eq!(x.len(), self.arity);
        (self.value)(x, x)
    }

    fn value_from(&self, anchor: &[C64], x: &[C64]) -> C64 {
        (self.value)(anchor, x)
    }

    fn singularities(&self, x: &[C64], slot: usize) -> Vec<C64> {
        match &self.sing {
            Singular::Poles(p) => p.singularities(x, slot),
            Singular::Custom(s) => s(x, slot),
        }
    }
}

/// Reindexed jet: inner argument `k` is outer argument `map[k]`.
/// The map must be injective, which keeps partials and singularities exact.
#[derive(Clone)]
pub struct Remap {
    inner: JetRef,
    map: Vec<usize>,
    arity: usize,
}

impl Remap {
    pub fn new(inner: JetRef, map: Vec<usize>, arity: usize) -> Self {
        debug_assert_eq!(inner.arity(), map.len());
        debug_assert!(map.iter().all(|&k| k < arity));
        Self { inner, map, arity }
    }

    fn pull(&self, x: &[C64]) -> Vec<C64> {
        self.map.iter().map(|&k| x[k]).collect()
    }
}

impl Jet for Remap {
    fn arity(&self) -> usize {
        self.arity
    }

    fn value(&self, x: &[C64]) -> C64 {
        self.inner.value(&self.pull(x))
    }

    fn value_from(&self, anchor: &[C64], x: &[C64]) -> C64 {
        self.inner.value_from(&self.pull(anchor), &self.pull(x))
    }

    fn singularities(&self, x: &[C64], slot: usize) -> Vec<C64> {
        let y = self.pull(x);
        match self.map.iter().position(|&k| k == slot) {
            Some(k) => self.inner.singularities(&y, k),
            None => Vec::new(),
        }
    }

    fn partial(&self, x: &[C64], orders: &[u32], cfg: &CauchyConfig) -> C64 {
        if orders.iter().enumerate().any(|(slot, &o)| o > 0 && !self.map.contains(&slot)) {
            return C64::new(0.0, 0.0);
        }
        let inner_orders: Vec<u32> = self.map.iter().map(|&k| orders[k]).collect();
        self.inner.partial(&self.pull(x), &inner_orders, cfg)
    }
}

/// Argument vector `[p, v...]`.
pub fn pv(p: C64, v: &[C64]) -> Vec<C64> {
    let mut x = Vec::with_capacity(v.len() + 1);
    x.push(p);
    x.extend_from_slice(v);
    x
}

/// Argument vector `[p1, p2, v...]`.
pub fn ppv(p1: C64, p2: C64, v: &[C64]) -> Vec<C64> {
    let mut x = Vec::with_capacity(v.len() + 2);
    x.push(p1);
    x.push(p2);
    x.extend_from_slice(v);
    x
}

/// Unit multi-index of order `k` in `slot`.
pub fn unit(arity: usize, slot: usize, k: u32) -> Vec<u32> {
    let mut o = vec![0; arity];
    o[slot] = k;
    o
}
