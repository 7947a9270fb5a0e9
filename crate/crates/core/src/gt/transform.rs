//! Adding points and changing the spectral coordinate.

use std::sync::Arc;

use super::structure::{finite, EnhancedGt, GtStructure, Sampler};
use crate::error::{Error, Result};
use crate::kernel::jet::{ppv, pv, unit, CauchyConfig, FnJet, Jet, JetRef, Remap};
use crate::kernel::C64;

/// Separation between newly drawn puncture coordinates.
pub const PUNCTURE_SEPARATION: f64 = 0.2;

/// Adjoin `n` points: `g(p) + sum_j f(p, u_j) d/du_j`, with the same `f`.
/// New coordinates are appended after the existing ones.
pub fn add_points(s: &GtStructure, n: usize) -> Result<GtStructure> {
    if n == 0 {
        return Err(Error::InvalidArgument("add_points needs n >= 1".into()));
    }
    let m = s.m();
    let m2 = m + n;
    let base_map: Vec<usize> = (0..=m).collect();
    let mut g: Vec<JetRef> = s.g.iter().map(|gi| Arc::new(Remap::new(gi.clone(), base_map.clone(), m2 + 1)) as JetRef).collect();
    let mut fields = s.fields.clone();
    let first = 1 + s.fields.iter().filter(|f| f.starts_with('u')).count();
    for j in 0..n {
        let mut map = vec![0, 1 + m + j];
        map.extend(1..=m);
        g.push(Arc::new(Remap::new(s.f.clone(), map, m2 + 1)));
        fields.push(format!("u{}", first + j));
    }
    let fmap: Vec<usize> = (0..m + 2).collect();
    let f: JetRef = Arc::new(Remap::new(s.f.clone(), fmap, m2 + 2));

    let base = s.sampler.clone();
    let base_f = s.sampler.clone();
    let sampler = Sampler::new(
        move |rng| {
            let mut v = base_f.draw_fields(rng)?;
            let u = base_f.draw_points(&v, n, PUNCTURE_SEPARATION, &[], rng)?;
            v.extend(u);
            Ok(v)
        },
        move |v, k, sep, extra, rng| {
            let mut ex = v[m..].to_vec();
            ex.extend_from_slice(extra);
            base.draw_points(&v[..m], k, sep, &ex, rng)
        },
    );
    let label = format!("{}+points({n})", s.label);
    let mut out = GtStructure::new(label, fields, g, f, sampler)?;
    out.punctures = s.punctures.clone();
    out.punctures.extend(m..m2);
    Ok(out)
}

/// Singular values of `x_slot` for a composite `J(x) = F(y(x))`, obtained by
/// linearizing `y` around `x`. `dy[k]` is `dy_k/dx_slot`. Displacements are
/// halved as a safety margin.
pub(crate) fn linearized_singularities(inner: &dyn Jet, y: &[C64], dy: &[C64], x_slot: C64) -> Vec<C64> {
    let mut out = Vec::new();
    for (k, &c) in dy.iter().enumerate() {
        if c.norm() < 1e-14 {
            continue;
        }
        for s in inner.singularities(y, k) {
            out.push(x_slot + 0.5 * (s - y[k]) / c);
        }
    }
    out
}

/// A change of spectral coordinate `p = mu(p~, v)`.
#[derive(Clone, Debug)]
pub struct CoordinateChange {
    pub label: String,
    /// Layout `[p~, v_1..v_m]`.
    pub mu: JetRef,
}

impl CoordinateChange {
    pub fn new(label: impl Into<String>, mu: JetRef) -> Self {
        Self { label: label.into(), mu }
    }

    pub fn identity(m: usize) -> Self {
        Self::new("identity", FnJet::new(m + 1, Default::default(), |x| x[0]).into_ref())
    }

    /// Check that `mu` is locally univalent on the sampled region: `mu' != 0`
    /// and `Re(mu'(p) / mu'(p_0)) > 0` across the points drawn at each field
    /// value, which keeps `mu` injective on their convex hull.
    pub fn check(&self, s: &GtStructure, samples: usize, seed: u64, cfg: &CauchyConfig) -> Result<()> {
        if self.mu.arity() != s.m() + 1 {
            return Err(Error::InvalidArgument(format!("mu has arity {} for {} fields", self.mu.arity(), s.m())));
        }
        let mut rng = crate::kernel::sampling::rng(seed);
        for _ in 0..samples {
            let v = s.sampler.draw_fields(&mut rng)?;
            let pts = s.sampler.draw_points(&v, UNIVALENCE_POINTS, 0.0, &[], &mut rng)?;
            let ds: Vec<C64> = pts.iter().map(|&p| self.mu.partial(&pv(p, &v), &unit(v.len() + 1, 0, 1), cfg)).collect();
            for (&p, &d) in pts.iter().zip(&ds) {
                if !(d.norm() > 1e-6) || !finite(d) {
                    return Err(Error::DomainViolation(format!("mu' = {d} at p = {p}")));
                }
                if !((d / ds[0]).re > 0.0) {
                    return Err(Error::DomainViolation(format!("mu' turns by more than a right angle between {} and {p}", pts[0])));
                }
            }
        }
        Ok(())
    }
}

const UNIVALENCE_POINTS: usize = 8;

struct Mu {
    mu: JetRef,
    cfg: CauchyConfig,
}

impl Mu {
    fn at(&self, anchor: &[C64], x: &[C64]) -> C64 {
        self.mu.value_from(anchor, x)
    }

    fn dp(&self, x: &[C64]) -> C64 {
        self.mu.partial(x, &unit(x.len(), 0, 1), &self.cfg)
    }

    /// `(mu', [d mu / d v_k])` at `[p, v]`.
    fn jet(&self, x: &[C64]) -> (C64, Vec<C64>) {
        let n = x.len();
        let dp = self.mu.partial(x, &unit(n, 0, 1), &self.cfg);
        let dv = (1..n).map(|k| self.mu.partial(x, &unit(n, k, 1), &self.cfg)).collect();
        (dp, dv)
    }
}

/// `g~(p~) = mu'(p~)^2 g(mu(p~))` and the transformed `f~`.
pub fn pushforward(s: &GtStructure, c: &CoordinateChange, cfg: &CauchyConfig) -> Result<GtStructure> {
    c.check(s, 64, 0x5eed, cfg)?;
    let m = s.m();
    let mu = Arc::new(Mu { mu: c.mu.clone(), cfg: *cfg });
    let mut g: Vec<JetRef> = Vec::with_capacity(m);
    for gi in &s.g {
        let (gv, gs, mv, ms) = (gi.clone(), gi.clone(), mu.clone(), mu.clone());
        g.push(
            FnJet::custom(
                m + 1,
                move |x, slot| pushed_sing_pv(&ms, gs.as_ref(), x, slot),
                move |anchor, x| {
                    let big = mv.at(anchor, x);
                    let big_a = mv.at(anchor, anchor);
                    let d = mv.dp(x);
                    d * d * gv.value_from(&pv(big_a, &anchor[1..]), &pv(big, &x[1..]))
                },
            )
            .into_ref(),
        );
    }
    let (sf, sg) = (s.f.clone(), s.g.clone());
    let (sf2, sg2) = (s.f.clone(), s.g.clone());
    let (mv, ms) = (mu.clone(), mu);
    let f = FnJet::custom(
        m + 2,
        move |x, slot| pushed_sing_ppv(&ms, sf2.as_ref(), &sg2, x, slot),
        move |anchor, x| {
            let v = &x[2..];
            let va = &anchor[2..];
            let p1 = pv(x[0], v);
            let p2 = pv(x[1], v);
            let b1 = mv.at(&pv(anchor[0], va), &p1);
            let b2 = mv.at(&pv(anchor[1], va), &p2);
            let a1 = mv.at(&pv(anchor[0], va), &pv(anchor[0], va));
            let a2 = mv.at(&pv(anchor[1], va), &pv(anchor[1], va));
            let d1 = mv.dp(&p1);
            let (d2, dv2) = mv.jet(&p2);
            let inner = sf.value_from(&ppv(a1, a2, va), &ppv(b1, b2, v));
            let corr: C64 = sg
                .iter()
                .zip(&dv2)
                .map(|(gj, dv)| gj.value_from(&pv(a1, va), &pv(b1, v)) * dv)
                .sum();
            d1 * d1 / d2 * (inner - corr)
        },
    )
    .into_ref();
    let label = format!("{}>{}", s.label, c.label);
    GtStructure::new(label, s.fields.clone(), g, f, s.sampler.clone())
}

fn pushed_sing_pv(mu: &Mu, inner: &dyn Jet, x: &[C64], slot: usize) -> Vec<C64> {
    let (dp, dv) = mu.jet(x);
    let big = mu.mu.value(x);
    let y = pv(big, &x[1..]);
    let mut dy = vec![C64::new(0.0, 0.0); x.len()];
    if slot == 0 {
        dy[0] = dp;
    } else {
        dy[0] = dv[slot - 1];
        dy[slot] = C64::new(1.0, 0.0);
    }
    let mut out = linearized_singularities(inner, &y, &dy, x[slot]);
    out.extend(mu.mu.singularities(x, slot));
    out
}

fn pushed_sing_ppv(mu: &Mu, f: &dyn Jet, g: &[JetRef], x: &[C64], slot: usize) -> Vec<C64> {
    let v = &x[2..];
    let q1 = pv(x[0], v);
    let q2 = pv(x[1], v);
    let (d1, dv1) = mu.jet(&q1);
    let (d2, dv2) = mu.jet(&q2);
    let b1 = mu.mu.value(&q1);
    let b2 = mu.mu.value(&q2);
    let y = ppv(b1, b2, v);
    let mut dy = vec![C64::new(0.0, 0.0); x.len()];
    let mut out = Vec::new();
    match slot {
        0 => {
            dy[0] = d1;
            out.extend(mu.mu.singularities(&q1, 0));
        }
        1 => {
            dy[1] = d2;
            out.extend(mu.mu.singularities(&q2, 0));
        }
        k => {
            dy[0] = dv1[k - 2];
            dy[1] = dv2[k - 2];
            dy[k] = C64::new(1.0, 0.0);
            out.extend(mu.mu.singularities(&q1, k - 1));
            out.extend(mu.mu.singularities(&q2, k - 1));
        }
    }
    out.extend(linearized_singularities(f, &y, &dy, x[slot]));
    let yg = pv(b1, v);
    let mut dyg = vec![dy[0]];
    dyg.extend_from_slice(&dy[2..]);
    for gj in g {
        out.extend(linearized_singularities(gj.as_ref(), &yg, &dyg, x[slot]));
    }
    out
}

/// Pushforward of an enhanced structure with `lambda~ = mu'(p~1) lambda(mu(p~1), mu(p~2))`.
pub fn pushforward_lambda(e: &EnhancedGt, c: &CoordinateChange, cfg: &CauchyConfig) -> Result<EnhancedGt> {
    let base = pushforward(&e.base, c, cfg)?;
    let m = e.base.m();
    let mu = Arc::new(Mu { mu: c.mu.clone(), cfg: *cfg });
    let (lv, ls) = (e.lambda.clone(), e.lambda.clone());
    let (mv, ms) = (mu.clone(), mu);
    let lambda = FnJet::custom(
        m + 2,
        move |x, slot| pushed_sing_ppv(&ms, ls.as_ref(), &[], x, slot),
        move |anchor, x| {
            let v = &x[2..];
            let va = &anchor[2..];
            let q1 = pv(x[0], v);
            let b1 = mv.at(&pv(anchor[0], va), &q1);
            let b2 = mv.at(&pv(anchor[1], va), &pv(x[1], v));
            let a1 = mv.at(&pv(anchor[0], va), &pv(anchor[0], va));
            let a2 = mv.at(&pv(anchor[1], va), &pv(anchor[1], va));
            mv.dp(&q1) * lv.value_from(&ppv(a1, a2, va), &ppv(b1, b2, v))
        },
    )
    .into_ref();
    EnhancedGt::new(base, lambda)
}
