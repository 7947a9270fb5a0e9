//! Merging groups of added points into one point with higher-order data.
//!
//! A group `(base, depth)` takes the punctures `u_0 = v[base], .., u_n = v[base + n]`.
//! Under `v_l = sum_k C(l, k) eps^k u_k` the l-th puncture component becomes,
//! after the triangular change of basis and `eps -> 0`,
//! `c_s = d^s/dt^s f(p, u_0 + sum_k u_k t^k / k!)` at `t = 0`.

use std::sync::Arc;

use super::structure::{GtStructure, Sampler};
use super::transform::linearized_singularities;
use crate::error::{Error, Result};
use crate::kernel::jet::{ppv, unit, CauchyConfig, FnJet, Jet, JetRef};
use crate::kernel::sampling::Region;
use crate::kernel::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CollisionGroup {
    pub base: usize,
    pub depth: usize,
}

/// Default extrapolation ladder: six halvings from 0.04.
pub fn default_ladder() -> Vec<f64> {
    (0..6).map(|k| 0.04 * 0.5f64.powi(k)).collect()
}

/// Box for the higher-order coordinates `u_k`, `k >= 1`.
pub const JET_COORD_REGION: Region = Region::new((-0.5, 0.5), (-0.5, 0.5));

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Multi-indices `(i_1..i_s)` with `sum k i_k = s`, paired with the Faa di
/// Bruno weight `s! / prod(i_k! (k!)^i_k)`.
pub fn partitions(s: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(s: usize, k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k > s {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for i in 0..=left / k {
            cur.push(i);
            rec(s, k + 1, left - i * k, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    rec(s, 1, s, &mut Vec::new(), &mut raw);
    raw.into_iter()
        .map(|idx| {
            let denom: f64 = idx.iter().enumerate().map(|(k, &i)| factorial(i) * factorial(k + 1).powi(i as i32)).product();
            (idx, factorial(s) / denom)
        })
        .collect()
}

fn validate(s: &GtStructure, groups: &[CollisionGroup]) -> Result<()> {
    let mut used = vec![false; s.m()];
    for g in groups {
        for l in 0..=g.depth {
            let k = g.base + l;
            if k >= s.m() || !s.punctures.contains(&k) {
                return Err(Error::InvalidArgument(format!("field {k} of group {g:?} is not an added point")));
            }
            if used[k] {
                return Err(Error::InvalidArgument(format!("field {k} appears in two groups")));
            }
            used[k] = true;
        }
    }
    Ok(())
}

/// Singularities of a collided component `c_s`: those of `f(p, u_0)` in
/// the `p` and `u_0` slots. The higher coordinates enter polynomially.
fn collided_sing(f: &dyn Jet, base: usize, depth: usize, shrink: f64, x: &[C64], slot: usize) -> Vec<C64> {
    let y = ppv(x[0], x[1 + base], &x[1..]);
    let mut dy = vec![C64::new(0.0, 0.0); y.len()];
    if slot == 0 {
        dy[0] = C64::new(1.0, 0.0);
    } else if slot == 1 + base {
        dy[1] = C64::new(1.0, 0.0);
    } else if (2 + base..=1 + base + depth).contains(&slot) {
        return Vec::new();
    } else {
        dy[slot + 1] = C64::new(1.0, 0.0);
    }
    linearized_singularities(f, &y, &dy, x[slot]).into_iter().map(|z| x[slot] + shrink * 2.0 * (z - x[slot])).collect()
}

fn collided_sampler(s: &GtStructure, groups: &[CollisionGroup]) -> Sampler {
    let groups = groups.to_vec();
    let base = s.sampler.clone();
    s.sampler.with_fields(move |rng| {
        let mut v = base.draw_fields(rng)?;
        for g in &groups {
            for l in 1..=g.depth {
                v[g.base + l] = JET_COORD_REGION.draw(rng);
            }
        }
        Ok(v)
    })
}

fn collided_label(s: &GtStructure, groups: &[CollisionGroup], kind: &str) -> (String, Vec<String>) {
    let mut fields = s.fields.clone();
    for g in groups {
        let root = s.fields[g.base].clone();
        for l in 0..=g.depth {
            fields[g.base + l] = format!("{root}.{l}");
        }
    }
    let desc: Vec<String> = groups.iter().map(|g| format!("{}:{}", g.base, g.depth)).collect();
    (format!("{}~collide{kind}[{}]", s.label, desc.join(",")), fields)
}

fn assemble(s: &GtStructure, groups: &[CollisionGroup], kind: &str, comp: impl Fn(CollisionGroup, usize) -> JetRef) -> Result<GtStructure> {
    validate(s, groups)?;
    let mut g = s.g.clone();
    for &grp in groups {
        for l in 0..=grp.depth {
            g[grp.base + l] = comp(grp, l);
        }
    }
    let (label, fields) = collided_label(s, groups, kind);
    let mut out = GtStructure::new(label, fields, g, s.f.clone(), collided_sampler(s, groups))?;
    out.punctures = s.punctures.iter().copied().filter(|k| !groups.iter().any(|g| (g.base..=g.base + g.depth).contains(k))).collect();
    out.punctures.extend(groups.iter().filter(|g| g.depth == 0).map(|g| g.base));
    out.punctures.sort_unstable();
    Ok(out)
}

/// Collided structure from the closed multi-index sum.
pub fn collide_points_closed(s: &GtStructure, groups: &[CollisionGroup], cfg: &CauchyConfig) -> Result<GtStructure> {
    let m = s.m();
    let cfg = *cfg;
    assemble(s, groups, "", |grp, order| {
        let (f, fs) = (s.f.clone(), s.f.clone());
        let parts = partitions(order);
        FnJet::custom(
            m + 1,
            move |x, slot| collided_sing(fs.as_ref(), grp.base, grp.depth, 1.0, x, slot),
            move |anchor, x| {
                let y = ppv(x[0], x[1 + grp.base], &x[1..]);
                let ya = ppv(anchor[0], anchor[1 + grp.base], &anchor[1..]);
                let mut derivs = vec![f.value_from(&ya, &y)];
                for n in 1..=order {
                    derivs.push(f.partial(&y, &unit(y.len(), 1, n as u32), &cfg));
                }
                parts
                    .iter()
                    .map(|(idx, w)| {
                        let n: usize = idx.iter().sum();
                        let mono: C64 = idx.iter().enumerate().map(|(k, &i)| x[1 + grp.base + k + 1].powu(i as u32)).product();
                        *w * derivs[n] * mono
                    })
                    .sum()
            },
        )
        .into_ref()
    })
}

/// Neville extrapolation of `(eps_i, y_i)` to `eps = 0`; returns the
/// estimate and the change contributed by the last ladder level.
pub fn neville_at_zero(eps: &[f64], ys: &[C64]) -> (C64, f64) {
    let n = ys.len();
    let mut t = ys.to_vec();
    let mut prev = t[n - 1];
    for j in 1..n {
        for i in 0..n - j {
            t[i] = (eps[i] * t[i + 1] - eps[i + j] * t[i]) / (eps[i] - eps[i + j]);
        }
        if j == n - 2 {
            prev = t[0];
        }
    }
    let est = t[0];
    (est, (est - prev).norm())
}

/// The eps-substituted component `s` of group `grp` at one ladder level.
fn eps_component(f: &dyn Jet, grp: CollisionGroup, order: usize, eps: f64, anchor: &[C64], x: &[C64]) -> C64 {
    let u = |k: usize| x[1 + grp.base + k];
    let mut sum = C64::new(0.0, 0.0);
    for l in 0..=order {
        let vl: C64 = (0..=l).map(|k| binom(l, k) * eps.powi(k as i32) * u(k)).sum();
        let y = ppv(x[0], vl, &x[1..]);
        let ya = ppv(anchor[0], anchor[1 + grp.base], &anchor[1..]);
        let sign = if (order - l) % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom(order, l) * f.value_from(&ya, &y);
    }
    sum / eps.powi(order as i32)
}

/// Collided structure from the eps-substitution, extrapolated to `eps = 0`.
/// Fails if the extrapolation does not settle at the structure's sample points.
pub fn collide_points_limit(s: &GtStructure, groups: &[CollisionGroup], ladder: &[f64], check_tol: f64) -> Result<GtStructure> {
    if ladder.len() < 2 || ladder.windows(2).any(|w| !(w[1] < w[0])) || !(ladder[ladder.len() - 1] > 0.0) {
        return Err(Error::InvalidArgument("eps ladder must be positive and strictly decreasing".into()));
    }
    let m = s.m();
    let ladder: Arc<Vec<f64>> = Arc::new(ladder.to_vec());
    let out = assemble(s, groups, "-limit", |grp, order| {
        let (f, fs, lad) = (s.f.clone(), s.f.clone(), ladder.clone());
        FnJet::custom(
            m + 1,
            move |x, slot| collided_sing(fs.as_ref(), grp.base, grp.depth, 0.8, x, slot),
            move |anchor, x| {
                if order == 0 {
                    let y = ppv(x[0], x[1 + grp.base], &x[1..]);
                    let ya = ppv(anchor[0], anchor[1 + grp.base], &anchor[1..]);
                    return f.value_from(&ya, &y);
                }
                let ys: Vec<C64> = lad.iter().map(|&e| eps_component(f.as_ref(), grp, order, e, anchor, x)).collect();
                neville_at_zero(&lad, &ys).0
            },
        )
        .into_ref()
    })?;
    // convergence audit on a few sampled points
    let mut rng = crate::kernel::sampling::rng(0xc0111de);
    for _ in 0..4 {
        let v = out.sampler.draw_fields(&mut rng)?;
        let p = out.sampler.draw_points(&v, 1, 0.15, &[], &mut rng)?[0];
        let x = crate::kernel::jet::pv(p, &v);
        for grp in groups {
            for order in 1..=grp.depth {
                let ys: Vec<C64> = ladder.iter().map(|&e| eps_component(s.f.as_ref(), *grp, order, e, &x, &x)).collect();
                let (est, change) = neville_at_zero(&ladder, &ys);
                if !(change <= check_tol * est.norm().max(1.0)) {
                    let diffs: Vec<String> = ys.windows(2).map(|w| format!("{:.3e}", (w[1] - w[0]).norm())).collect();
                    return Err(Error::NonConvergence(format!(
                        "eps extrapolation of component {order} of group {grp:?} moved by {change:e}; ladder differences [{}]",
                        diffs.join(", ")
                    )));
                }
            }
        }
    }
    Ok(out)
}
