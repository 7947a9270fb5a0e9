//! Gibbons-Tsarev systems of a structure: the first-order system in the
//! characteristic variables `r_1..r_M`, its compatibility, and a
//! characteristic Goursat integrator for small reductions.
//!
//! With `w_i = d_i v_1`:
//! `d_i p_j = f(p_i, p_j) / g_1(p_i) w_i`, `d_i v_l = g_l(p_i) / g_1(p_i) w_i`,
//! `d_i w_k = q(p_i, p_k) w_i w_k` for `i != j, k`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gt::structure::{draw_samples, finite};
use crate::gt::{GtStructure, VerifyConfig};
use crate::kernel::jet::{ppv, pv, unit, CauchyConfig, JetRef};
use crate::kernel::sampling::{rng, Region};
use crate::kernel::C64;
use crate::report::VerificationReport;

/// Box for the free first-order data `w_i` in random states.
pub const W_REGION: Region = Region::square(1.0);
/// Points closer than this, or `|g_1|` below it, count as blow-up.
pub const BLOWUP_GUARD: f64 = 1e-6;

const CORRECTIONS: usize = 2;

#[derive(Clone, Debug)]
pub struct GtSystem {
    pub structure: GtStructure,
    pub big_m: usize,
    /// Index of the distinguished field `v_1`.
    pub distinguished: usize,
    pub cauchy: CauchyConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionState {
    pub p: Vec<C64>,
    pub v: Vec<C64>,
    pub w: Vec<C64>,
}

/// Derivatives of a two-point or one-point jet at a point, in the order
/// `[d/dp_first, d/dp_second?, d/dv_1..]`.
struct Grad {
    val: C64,
    d: Vec<C64>,
}

fn grad(jet: &JetRef, x: Vec<C64>, cfg: &CauchyConfig) -> Grad {
    let n = x.len();
    let d = (0..n).map(|s| jet.partial(&x, &unit(n, s, 1), cfg)).collect();
    Grad { val: jet.value(&x), d }
}

/// Build the system with `v_distinguished` as `v_1`; fails if `g_1`
/// vanishes at every sampled point.
pub fn build_system(s: &GtStructure, big_m: usize, distinguished: Option<usize>) -> Result<GtSystem> {
    if s.m() == 0 {
        return Err(Error::InvalidArgument("a structure without fields has no Gibbons-Tsarev system".into()));
    }
    if big_m == 0 {
        return Err(Error::InvalidArgument("M must be positive".into()));
    }
    let d = distinguished.unwrap_or(0);
    if d >= s.m() {
        return Err(Error::InvalidArgument(format!("distinguished field {d} out of range")));
    }
    let sys = GtSystem { structure: s.clone(), big_m, distinguished: d, cauchy: CauchyConfig::default() };
    let mut r = rng(0x9e37);
    let mut nonzero = false;
    for _ in 0..16 {
        let v = s.sampler.draw_fields(&mut r)?;
        let p = s.sampler.draw_points(&v, 1, 0.15, &[], &mut r)?[0];
        if sys.g1(p, &v).norm() > BLOWUP_GUARD {
            nonzero = true;
            break;
        }
    }
    if !nonzero {
        return Err(Error::DomainViolation(format!("g_{d} vanishes on the sampled region")));
    }
    Ok(sys)
}

impl GtSystem {
    pub fn m(&self) -> usize {
        self.structure.m()
    }

    fn g1(&self, p: C64, v: &[C64]) -> C64 {
        self.structure.g[self.distinguished].value(&pv(p, v))
    }

    /// `2 d_{p2} f(p1, p2) / g_1(p1) + (f(p1, p2) d_p g_1(p2) + g(p1)(g_1(p2))) / (g_1(p1) g_1(p2))`.
    pub fn q_hat(&self, p1: C64, p2: C64, v: &[C64]) -> C64 {
        let s = &self.structure;
        let c = &self.cauchy;
        let g1 = &s.g[self.distinguished];
        let x2 = pv(p2, v);
        let n = x2.len();
        let df = s.f.partial(&ppv(p1, p2, v), &unit(n + 1, 1, 1), c);
        let dg2 = g1.partial(&x2, &unit(n, 0, 1), c);
        let grad_g2: Vec<C64> = (1..n).map(|k| g1.partial(&x2, &unit(n, k, 1), c)).collect();
        let (a, b) = (self.g1(p1, v), self.g1(p2, v));
        2.0 * df / a + (s.f_at(p1, p2, v) * dg2 + s.apply(p1, v, &grad_g2)) / (a * b)
    }

    pub fn check_state(&self, st: &ReductionState) -> Result<()> {
        if st.p.len() != self.big_m || st.w.len() != self.big_m || st.v.len() != self.m() {
            return Err(Error::InvalidArgument(format!(
                "state has {} points, {} fields, {} first-order data for M = {}, m = {}",
                st.p.len(),
                st.v.len(),
                st.w.len(),
                self.big_m,
                self.m()
            )));
        }
        for i in 0..self.big_m {
            for j in i + 1..self.big_m {
                if (st.p[i] - st.p[j]).norm() < BLOWUP_GUARD {
                    return Err(Error::DomainViolation(format!("p_{i} and p_{j} coincide")));
                }
            }
            if !(self.g1(st.p[i], &st.v).norm() > BLOWUP_GUARD) {
                return Err(Error::DomainViolation(format!("g_1 vanishes at p_{i}")));
            }
        }
        Ok(())
    }

    /// `d_i` of every unknown that has one, as `(dp, dv, dw)` with `None`
    /// in the undetermined slots `dp[i]`, `dw[i]`.
    fn rhs(&self, st: &ReductionState, i: usize) -> (Vec<Option<C64>>, Vec<C64>, Vec<Option<C64>>) {
        let s = &self.structure;
        let (pi, wi) = (st.p[i], st.w[i]);
        let g1 = self.g1(pi, &st.v);
        let dp = (0..self.big_m).map(|k| (k != i).then(|| s.f_at(pi, st.p[k], &st.v) / g1 * wi)).collect();
        let gi = s.g_at(pi, &st.v);
        let dv = gi.iter().map(|gl| gl / g1 * wi).collect();
        let dw = (0..self.big_m).map(|k| (k != i).then(|| self.q_hat(pi, st.p[k], &st.v) * wi * st.w[k])).collect();
        (dp, dv, dw)
    }

    /// `d_i (d_j p_k)` and `d_i (d_j v_l)` by the chain rule.
    fn second(&self, st: &ReductionState, i: usize, j: usize) -> (Vec<Option<C64>>, Vec<C64>) {
        let s = &self.structure;
        let c = &self.cauchy;
        let m = self.m();
        let (dpi, dvi, dwi) = self.rhs(st, i);
        let (pj, wj) = (st.p[j], st.w[j]);
        let g1 = grad(&s.g[self.distinguished], pv(pj, &st.v), c);
        let di_pj = dpi[j].expect("i != j");
        let di_wj = dwi[j].expect("i != j");
        // d_i of u(p_j, v) / g_1(p_j, v) given the gradient of u
        let quotient = |u: &Grad, extra: C64| -> C64 {
            let mut d = (u.d[0] / g1.val - u.val * g1.d[0] / (g1.val * g1.val)) * di_pj + extra;
            for l in 0..m {
                d += (u.d[1 + l] / g1.val - u.val * g1.d[1 + l] / (g1.val * g1.val)) * dvi[l];
            }
            d
        };
        let mut out_p = vec![None; self.big_m];
        for k in 0..self.big_m {
            if k == i || k == j {
                continue;
            }
            let full = grad(&s.f, ppv(pj, st.p[k], &st.v), c);
            let u = Grad { val: full.val, d: std::iter::once(full.d[0]).chain(full.d[2..].iter().copied()).collect() };
            let extra = full.d[1] / g1.val * dpi[k].expect("k != i");
            let coeff = full.val / g1.val;
            out_p[k] = Some(wj * quotient(&u, extra) + coeff * di_wj);
        }
        let out_v = (0..m)
            .map(|l| {
                let u = grad(&s.g[l], pv(pj, &st.v), c);
                let coeff = u.val / g1.val;
                wj * quotient(&u, C64::new(0.0, 0.0)) + coeff * di_wj
            })
            .collect();
        (out_p, out_v)
    }

    /// Largest mismatch of mixed second derivatives over all pairs.
    pub fn mixed_mismatch(&self, st: &ReductionState) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.big_m {
            for j in i + 1..self.big_m {
                let (pij, vij) = self.second(st, i, j);
                let (pji, vji) = self.second(st, j, i);
                for (a, b) in pij.iter().zip(&pji) {
                    if let (Some(a), Some(b)) = (a, b) {
                        worst = worst.max((a - b).norm());
                    }
                }
                for (a, b) in vij.iter().zip(&vji) {
                    worst = worst.max((a - b).norm());
                }
            }
        }
        worst
    }
}

/// Mixed-derivative mismatch at one state.
pub fn compatibility_residual(sys: &GtSystem, st: &ReductionState, tol: f64) -> Result<VerificationReport> {
    if sys.big_m < 3 {
        return Err(Error::InvalidArgument("compatibility needs M >= 3".into()));
    }
    sys.check_state(st)?;
    let r = sys.mixed_mismatch(st);
    Ok(VerificationReport::from_residuals("gibbons-tsarev compatibility", &sys.structure.label, &[r], tol, 0)
        .with_param("M", sys.big_m as f64))
}

/// Random admissible states drawn from the structure's sampler.
pub fn random_states(sys: &GtSystem, cfg: &VerifyConfig) -> Result<Vec<ReductionState>> {
    let s = &sys.structure;
    let samples = draw_samples(&s.sampler, sys.big_m, cfg, |v, pts| {
        s.admissible(pts, v, cfg.min_separation) && pts.iter().all(|&p| sys.g1(p, v).norm() > 1e-3)
    })?;
    let mut r = rng(cfg.seed ^ 0x5747);
    Ok(samples
        .into_iter()
        .map(|(v, p)| {
            let w = (0..sys.big_m).map(|_| W_REGION.draw(&mut r)).collect();
            ReductionState { p, v, w }
        })
        .collect())
}

/// Compatibility over `cfg.samples` random states.
pub fn compatibility_suite(sys: &GtSystem, cfg: &VerifyConfig) -> Result<VerificationReport> {
    if sys.big_m < 3 {
        return Err(Error::InvalidArgument("compatibility needs M >= 3".into()));
    }
    let states = random_states(sys, cfg)?;
    let res: Vec<f64> = states.par_iter().map(|st| sys.mixed_mismatch(st)).collect();
    Ok(VerificationReport::from_residuals("gibbons-tsarev compatibility", &sys.structure.label, &res, cfg.tol, cfg.seed)
        .with_param("M", sys.big_m as f64))
}

/// Goursat data: values at the origin and linear profiles of `p_i`, `w_i`
/// along axis `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisData {
    pub origin: ReductionState,
    pub p_slope: Vec<C64>,
    pub w_slope: Vec<C64>,
}

impl AxisData {
    pub fn constant(origin: ReductionState) -> Self {
        let n = origin.p.len();
        Self { origin, p_slope: vec![C64::new(0.0, 0.0); n], w_slope: vec![C64::new(0.0, 0.0); n] }
    }

    fn p_on_axis(&self, i: usize, r: f64) -> C64 {
        self.origin.p[i] + self.p_slope[i] * r
    }

    fn w_on_axis(&self, i: usize, r: f64) -> C64 {
        self.origin.w[i] + self.w_slope[i] * r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionSolution {
    pub steps: usize,
    pub h: f64,
    /// Grid nodes in lexicographic order of their multi-index.
    pub nodes: Vec<Vec<usize>>,
    pub states: Vec<ReductionState>,
    /// A-posteriori consistency residual.
    pub residual: f64,
}

fn node_index(r: &[usize], n: usize) -> usize {
    r.iter().fold(0, |acc, &x| acc * n + x)
}

fn all_nodes(big_m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(n.pow(big_m as u32));
    let mut r = vec![0; big_m];
    loop {
        out.push(r.clone());
        let mut k = big_m;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            r[k] += 1;
            if r[k] < n {
                break;
            }
            r[k] = 0;
        }
    }
}

impl GtSystem {
    fn blowup(&self, st: &ReductionState, node: &[usize]) -> Result<()> {
        let bad = |reason: String| Err(Error::BlowUp { node: node.to_vec(), reason });
        if st.p.iter().chain(&st.v).chain(&st.w).any(|z| !finite(*z)) {
            return bad("non-finite value".into());
        }
        for i in 0..self.big_m {
            for j in i + 1..self.big_m {
                if (st.p[i] - st.p[j]).norm() < BLOWUP_GUARD {
                    return bad(format!("p_{i} and p_{j} collide"));
                }
            }
            let x = pv(st.p[i], &st.v);
            for g in &self.structure.g {
                if g.clearance(&x, 0) < BLOWUP_GUARD {
                    return bad(format!("p_{i} hits a singularity"));
                }
            }
            if !(self.g1(st.p[i], &st.v).norm() > BLOWUP_GUARD) {
                return bad(format!("g_1 vanishes at p_{i}"));
            }
        }
        Ok(())
    }
}

/// March every unknown from `r - e_i` with `i` the smallest admissible
/// direction, by a trapezoid step with an Euler predictor; free data on the axes. Returns the grid and
/// the a-posteriori residual: edge difference quotients against averaged
/// right-hand sides, and the mixed difference of `v_1` against `q w_i w_j`.
pub fn integrate_reduction(sys: &GtSystem, data: &AxisData, steps: usize, h: f64) -> Result<ReductionSolution> {
    let big_m = sys.big_m;
    if !(2..=3).contains(&big_m) {
        return Err(Error::InvalidArgument("integration supports M = 2 or 3".into()));
    }
    if steps == 0 || !(h > 0.0) {
        return Err(Error::InvalidArgument("steps and h must be positive".into()));
    }
    if data.p_slope.len() != big_m || data.w_slope.len() != big_m {
        return Err(Error::InvalidArgument("axis data has the wrong length".into()));
    }
    sys.check_state(&data.origin)?;
    let n = steps + 1;
    let nodes = all_nodes(big_m, n);
    let mut states: Vec<Option<ReductionState>> = vec![None; nodes.len()];
    let m = sys.m();
    let zero = C64::new(0.0, 0.0);
    for r in &nodes {
        let idx = node_index(r, n);
        if r.iter().all(|&x| x == 0) {
            states[idx] = Some(data.origin.clone());
            continue;
        }
        // source direction of each unknown
        let first_nonzero = |skip: Option<usize>| (0..big_m).find(|&i| r[i] > 0 && Some(i) != skip);
        let src_of = |i: usize| {
            let mut q = r.clone();
            q[i] -= 1;
            states[node_index(&q, n)].as_ref().expect("lexicographic order")
        };
        let on_axis = |k: usize| r.iter().enumerate().all(|(i, &x)| i == k || x == 0);
        let mut rhs_cache: Vec<Option<(Vec<Option<C64>>, Vec<C64>, Vec<Option<C64>>)>> = vec![None; big_m];
        let mut rhs_at = |i: usize| -> (Vec<Option<C64>>, Vec<C64>, Vec<Option<C64>>) {
            if rhs_cache[i].is_none() {
                rhs_cache[i] = Some(sys.rhs(src_of(i), i));
            }
            rhs_cache[i].clone().unwrap()
        };
        let rk = |k: usize| r[k] as f64 * h;
        // predictor
        let mut pred = ReductionState { p: vec![zero; big_m], v: vec![zero; m], w: vec![zero; big_m] };
        let mut dir_p = vec![None; big_m];
        for k in 0..big_m {
            if on_axis(k) {
                pred.p[k] = data.p_on_axis(k, rk(k));
                pred.w[k] = data.w_on_axis(k, rk(k));
                continue;
            }
            let i = first_nonzero(Some(k)).expect("off-axis node");
            let (dp, _, dw) = rhs_at(i);
            pred.p[k] = src_of(i).p[k] + h * dp[k].unwrap();
            pred.w[k] = src_of(i).w[k] + h * dw[k].unwrap();
            dir_p[k] = Some(i);
        }
        let iv = first_nonzero(None).expect("not the origin");
        let (_, dv0, _) = rhs_at(iv);
        for l in 0..m {
            pred.v[l] = src_of(iv).v[l] + h * dv0[l];
        }
        sys.blowup(&pred, r)?;
        // two trapezoid corrections, so the state fed to the second one is
        // accurate enough for the mixed differences to stay second order
        let mut out = pred;
        for _ in 0..CORRECTIONS {
            let cur = out.clone();
            let at_cur: Vec<_> = (0..big_m).map(|i| sys.rhs(&cur, i)).collect();
            for k in 0..big_m {
                if let Some(i) = dir_p[k] {
                    let (dp0, _, dw0) = rhs_at(i);
                    let (dp1, _, dw1) = &at_cur[i];
                    out.p[k] = src_of(i).p[k] + 0.5 * h * (dp0[k].unwrap() + dp1[k].unwrap());
                    out.w[k] = src_of(i).w[k] + 0.5 * h * (dw0[k].unwrap() + dw1[k].unwrap());
                }
            }
            let dv1 = &at_cur[iv].1;
            for l in 0..m {
                out.v[l] = src_of(iv).v[l] + 0.5 * h * (dv0[l] + dv1[l]);
            }
        }
        sys.blowup(&out, r)?;
        states[idx] = Some(out);
    }
    let states: Vec<ReductionState> = states.into_iter().map(|s| s.expect("filled")).collect();
    let residual = a_posteriori(sys, &nodes, &states, n, h);
    Ok(ReductionSolution { steps, h, nodes, states, residual })
}

fn a_posteriori(sys: &GtSystem, nodes: &[Vec<usize>], states: &[ReductionState], n: usize, h: f64) -> f64 {
    let big_m = sys.big_m;
    let rhs: Vec<Vec<_>> = states.par_iter().map(|st| (0..big_m).map(|i| sys.rhs(st, i)).collect()).collect();
    let d = sys.distinguished;
    let mut worst = 0.0f64;
    for r in nodes {
        let a = node_index(r, n);
        for i in 0..big_m {
            if r[i] + 1 >= n {
                continue;
            }
            let mut q = r.clone();
            q[i] += 1;
            let b = node_index(&q, n);
            let (sa, sb) = (&states[a], &states[b]);
            let (ra, rb) = (&rhs[a][i], &rhs[b][i]);
            for k in 0..big_m {
                if k == i {
                    continue;
                }
                let ep = (sb.p[k] - sa.p[k]) / h - 0.5 * (ra.0[k].unwrap() + rb.0[k].unwrap());
                let ew = (sb.w[k] - sa.w[k]) / h - 0.5 * (ra.2[k].unwrap() + rb.2[k].unwrap());
                worst = worst.max(ep.norm()).max(ew.norm());
            }
            for l in 0..sys.m() {
                let ev = (sb.v[l] - sa.v[l]) / h - 0.5 * (ra.1[l] + rb.1[l]);
                worst = worst.max(ev.norm());
            }
            for j in i + 1..big_m {
                if r[j] + 1 >= n {
                    continue;
                }
                let mut qj = r.clone();
                qj[j] += 1;
                let mut qij = q.clone();
                qij[j] += 1;
                let (c, e) = (node_index(&qj, n), node_index(&qij, n));
                let mixed = (states[e].v[d] - states[b].v[d] - states[c].v[d] + states[a].v[d]) / (h * h);
                let avg = 0.25 * [a, b, c, e].iter().map(|&x| rhs[x][i].2[j].unwrap()).sum::<C64>();
                worst = worst.max((mixed - avg).norm());
            }
        }
    }
    worst
}
