//! Period matrices of `y^2 = p (p - 1) (p - a) (p - b) (p - c)` and the
//! Rauch variation of the normalized period matrix in a branch point.
//!
//! Branch points are chained as `0 -> 1 -> a -> b -> c -> infinity`, with cuts
//! `[0, 1]`, `[a, b]` and the ray from `c` continuing the direction `b -> c`.
//! With `I_k` the sheet-consistent integral of `(1, p) dp / y` along the
//! k-th chain segment, the cycles are `a_1 = 2 I_0`, `a_2 = 2 I_2`,
//! `b_1 = 2 (I_1 + I_3)` and `b_2 = 2 I_3`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::{Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::catalog::genus2;
use crate::error::{Error, Result};
use crate::gt::{verify_axioms, VerifyConfig};
use crate::kernel::sampling::{rng, sample_points_with};
use crate::kernel::{c64, C64};
use crate::report::VerificationReport;

/// Gauss-Legendre order on each panel.
pub const PANEL_ORDER: usize = 16;
pub const DEFAULT_PANELS: usize = 8;
pub const DEFAULT_DELTA: f64 = 1e-4;
/// Largest accepted condition number of the A-period matrix.
pub const MAX_CONDITION: f64 = 1e10;

const CONTINUATION_STEPS: usize = 400;
const MAX_PANELS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveModuli {
    pub a: C64,
    pub b: C64,
    pub c: C64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    A,
    B,
    C,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::A, Branch::B, Branch::C];

    fn index(self) -> usize {
        match self {
            Branch::A => 0,
            Branch::B => 1,
            Branch::C => 2,
        }
    }
}

impl CurveModuli {
    pub fn new(a: C64, b: C64, c: C64) -> Result<Self> {
        let m = Self { a, b, c };
        m.validate()?;
        Ok(m)
    }

    pub fn as_array(&self) -> [C64; 3] {
        [self.a, self.b, self.c]
    }

    /// Finite branch points in chain order.
    pub fn branch_points(&self) -> [C64; 5] {
        [c64(0.0, 0.0), c64(1.0, 0.0), self.a, self.b, self.c]
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.branch_points();
        if e.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("branch points must be finite".into()));
        }
        for i in 0..5 {
            for j in i + 1..5 {
                if (e[i] - e[j]).norm() < 1e-12 {
                    return Err(Error::DomainViolation(format!("branch points {} and {} coincide", e[i], e[j])));
                }
            }
        }
        Ok(())
    }

    fn shifted(&self, branch: Branch, d: f64) -> Self {
        let mut m = *self;
        match branch {
            Branch::A => m.a += d,
            Branch::B => m.b += d,
            Branch::C => m.c += d,
        }
        m
    }

    /// Seeded moduli, pairwise separated and with a valid cut system.
    pub fn sample(seed: u64) -> Result<Self> {
        let mut r = rng(seed);
        let fixed = [c64(0.0, 0.0), c64(1.0, 0.0)];
        for _ in 0..10_000 {
            let v = sample_points_with(&mut r, &genus2::MODULI_REGION, 3, &fixed, crate::catalog::MODULI_SEPARATION)?;
            let m = Self { a: v[0], b: v[1], c: v[2] };
            if check_cuts(&m).is_ok() {
                return Ok(m);
            }
        }
        Err(Error::Exhausted { draws: 10_000, context: "moduli with a valid cut system".into() })
    }
}

fn quintic(p: C64, e: &[C64; 5]) -> C64 {
    e.iter().map(|z| p - z).product()
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Proper intersection of segments `[p, q]` and `[r, s]`; `ray` extends the
/// second one to infinity beyond `s`.
fn segments_cross(p: C64, q: C64, r: C64, s: C64, ray: bool) -> bool {
    let d1 = q - p;
    let d2 = s - r;
    let den = cross(d1, d2);
    if den.abs() < 1e-14 {
        return false;
    }
    let t = cross(r - p, d2) / den;
    let u = cross(r - p, d1) / den;
    let eps = 1e-9;
    let in_t = t > eps && t < 1.0 - eps;
    let in_u = u > eps && (ray || u < 1.0 - eps);
    in_t && in_u
}

/// The chain `0 -> 1 -> a -> b -> c` must be simple and avoid the ray cut.
pub fn check_cuts(m: &CurveModuli) -> Result<()> {
    let e = m.branch_points();
    let ray_dir = (e[4] - e[3]) / (e[4] - e[3]).norm();
    for i in 0..4 {
        for j in i + 1..4 {
            if segments_cross(e[i], e[i + 1], e[j], e[j + 1], false) {
                return Err(Error::PathCrossesCut(format!("segments {i} and {j} of the chain intersect")));
            }
        }
        if i < 3 && segments_cross(e[i], e[i + 1], e[4], e[4] + ray_dir, true) {
            return Err(Error::PathCrossesCut(format!("segment {i} meets the cut from c to infinity")));
        }
        // a branch point lying on a segment other than its own
        for (k, &z) in e.iter().enumerate() {
            if k == i || k == i + 1 {
                continue;
            }
            let d = e[i + 1] - e[i];
            let t = ((z - e[i]) * d.conj()).re / d.norm_sqr();
            if (0.0..=1.0).contains(&t) && (e[i] + t * d - z).norm() < 1e-9 {
                return Err(Error::PathCrossesCut(format!("branch point {z} lies on segment {i}")));
            }
        }
    }
    Ok(())
}

/// Periods of `dp/y`, `p dp/y` and the normalized matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodData {
    pub moduli: CurveModuli,
    pub panels: usize,
    /// Row `alpha`: integrals of `(dp/y, p dp/y)` over `a_alpha`.
    pub a_periods: [[C64; 2]; 2],
    pub b_periods: [[C64; 2]; 2],
    /// Coefficients of the normalized differentials: `omega_beta = sum_gamma C[gamma][beta] p^gamma dp / y`.
    pub normalization: [[C64; 2]; 2],
    pub b_matrix: [[C64; 2]; 2],
    pub condition: f64,
}

fn to_mat(a: [[C64; 2]; 2]) -> Matrix2<C64> {
    Matrix2::new(a[0][0], a[0][1], a[1][0], a[1][1])
}

fn from_mat(m: &Matrix2<C64>) -> [[C64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

/// `y` at the midpoints of the chain segments on one sheet, continued
/// around each intermediate branch point by a clockwise arc.
fn midpoint_branches(e: &[C64; 5]) -> [C64; 4] {
    let mids: Vec<C64> = (0..4).map(|k| 0.5 * (e[k] + e[k + 1])).collect();
    let mut y = quintic(mids[0], e).sqrt();
    let mut out = [y; 4];
    let step = |y: &mut C64, x: C64| {
        let r = quintic(x, e).sqrt();
        *y = if (r - *y).norm() <= (r + *y).norm() { r } else { -r };
    };
    for k in 1..4 {
        let ek = e[k];
        let rho = 0.3 * e.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, z)| (z - ek).norm()).fold(f64::INFINITY, f64::min);
        let u_in = (e[k] - e[k - 1]) / (e[k] - e[k - 1]).norm();
        let u_out = (e[k + 1] - e[k]) / (e[k + 1] - e[k]).norm();
        let a = ek - rho * u_in;
        let b = ek + rho * u_out;
        let start = mids[k - 1];
        for s in 1..=CONTINUATION_STEPS {
            step(&mut y, start + (a - start) * (s as f64 / CONTINUATION_STEPS as f64));
        }
        let th_a = (a - ek).arg();
        let th_b = (b - ek).arg();
        let sweep = (th_a - th_b).rem_euclid(2.0 * PI);
        for s in 1..=CONTINUATION_STEPS {
            let th = th_a - sweep * s as f64 / CONTINUATION_STEPS as f64;
            step(&mut y, ek + rho * C64::from_polar(1.0, th));
        }
        for s in 1..=CONTINUATION_STEPS {
            step(&mut y, b + (mids[k] - b) * (s as f64 / CONTINUATION_STEPS as f64));
        }
        out[k] = y;
    }
    out
}

/// Panel count keeping every panel's half-width below the distance, in the
/// theta plane, from the nearest other branch point.
fn panels_needed(mid: C64, half: C64, others: &[C64]) -> usize {
    let d = others
        .iter()
        .map(|z| {
            let t = ((z - mid) / half).asin();
            let dre = (t.re.abs() - FRAC_PI_2).max(0.0);
            t.im.hypot(dre)
        })
        .fold(f64::INFINITY, f64::min);
    ((FRAC_PI_2 / d).ceil() as usize).clamp(1, MAX_PANELS)
}

/// `(int dp/y, int p dp/y)` over chain segment `k`, on the sheet where `y`
/// at the midpoint is `ymid`. Uses `p = mid + half sin(theta)`.
fn segment_integral(e: &[C64; 5], k: usize, ymid: C64, panels: usize) -> [C64; 2] {
    let mid = 0.5 * (e[k] + e[k + 1]);
    let half = 0.5 * (e[k + 1] - e[k]);
    let others: Vec<C64> = (0..5).filter(|&j| j != k && j != k + 1).map(|j| e[j]).collect();
    let dirs: Vec<C64> = others.iter().map(|z| (mid - z) / (mid - z).norm()).collect();
    // each factor's branch is cut away from the segment
    let sqrt_r = |x: C64| -> C64 { others.iter().zip(&dirs).map(|(z, d)| d.sqrt() * ((x - z) / d).sqrt()).product() };
    let i = C64::new(0.0, 1.0);
    let y0 = i * half * sqrt_r(mid);
    let sign = if (ymid - y0).norm() <= (ymid + y0).norm() { 1.0 } else { -1.0 };
    let panels = panels.max(panels_needed(mid, half, &others));
    let gl = GaussLegendre::new(NonZeroUsize::new(PANEL_ORDER).unwrap());
    let width = PI / panels as f64;
    let mut acc = [C64::new(0.0, 0.0); 2];
    for j in 0..panels {
        let lo = -FRAC_PI_2 + j as f64 * width;
        for &(t, w) in gl.as_node_weight_pairs() {
            let th = lo + 0.5 * width * (t + 1.0);
            let x = mid + half * th.sin();
            // dp / y = -i dtheta / (sign sqrt_r)
            let dw = -i * (0.5 * width * w) / (sign * sqrt_r(x));
            acc[0] += dw;
            acc[1] += x * dw;
        }
    }
    acc
}

pub fn periods(m: &CurveModuli, panels: usize) -> Result<PeriodData> {
    m.validate()?;
    if panels == 0 {
        return Err(Error::InvalidArgument("panels must be positive".into()));
    }
    check_cuts(m)?;
    let e = m.branch_points();
    let ymid = midpoint_branches(&e);
    let seg: Vec<[C64; 2]> = (0..4).map(|k| segment_integral(&e, k, ymid[k], panels)).collect();
    let two = |v: [C64; 2]| [2.0 * v[0], 2.0 * v[1]];
    let a_periods = [two(seg[0]), two(seg[2])];
    let b_periods = [two([seg[1][0] + seg[3][0], seg[1][1] + seg[3][1]]), two(seg[3])];
    let am = to_mat(a_periods);
    let sv = am.svd(false, false).singular_values;
    let condition = sv[0].max(sv[1]) / sv[0].min(sv[1]);
    if !(condition < MAX_CONDITION) {
        return Err(Error::IllConditioned(format!("A-period matrix has condition number {condition:e}")));
    }
    let c = am.try_inverse().ok_or_else(|| Error::IllConditioned("A-period matrix is singular".into()))?;
    let b = to_mat(b_periods) * c;
    Ok(PeriodData { moduli: *m, panels, a_periods, b_periods, normalization: from_mat(&c), b_matrix: from_mat(&b), condition })
}

impl PeriodData {
    /// `|B12 - B21| / |B12|`.
    pub fn asymmetry(&self) -> f64 {
        let b = &self.b_matrix;
        (b[0][1] - b[1][0]).norm() / b[0][1].norm().max(f64::MIN_POSITIVE)
    }

    /// Eigenvalues of `Im B` after symmetrization, ascending.
    pub fn im_eigenvalues(&self) -> [f64; 2] {
        let b = &self.b_matrix;
        let off = 0.5 * (b[0][1].im + b[1][0].im);
        let eig = SymmetricEigen::new(Matrix2::new(b[0][0].im, off, off, b[1][1].im)).eigenvalues;
        let (x, y) = (eig[0], eig[1]);
        [x.min(y), x.max(y)]
    }

    /// Largest entry change relative to the largest entry of `self`.
    pub fn relative_change(&self, other: &PeriodData) -> f64 {
        let scale = self.b_matrix.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        let diff = self.b_matrix.iter().flatten().zip(other.b_matrix.iter().flatten()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        diff / scale
    }

    /// Normalized differential `beta` as `w(p)` in `omega = w dp / y`.
    pub fn omega_numerator(&self, beta: usize, p: C64) -> C64 {
        self.normalization[0][beta] + p * self.normalization[1][beta]
    }
}

/// One entry of a Rauch comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RauchEntry {
    pub j: usize,
    pub k: usize,
    pub finite_difference: C64,
    pub half_step_difference: C64,
    pub predicted: C64,
    /// `finite_difference / predicted`.
    pub ratio: C64,
    pub deviation: f64,
    /// `|D(delta) - D(delta/2)|` relative to the prediction.
    pub step_consistency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RauchResult {
    pub branch: Branch,
    pub delta: f64,
    pub entries: Vec<RauchEntry>,
    pub report: VerificationReport,
}

/// Predicted derivative `pi i w_j(e) w_k(e)` with `w` the normalized
/// differentials in the local coordinate `t^2 = p - e`.
pub fn rauch_prediction(pd: &PeriodData, branch: Branch) -> [[C64; 2]; 2] {
    let e = pd.moduli.branch_points();
    let z = e[2 + branch.index()];
    let dq: C64 = e.iter().enumerate().filter(|(i, _)| *i != 2 + branch.index()).map(|(_, w)| z - w).product();
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for (j, row) in out.iter_mut().enumerate() {
        for (k, x) in row.iter_mut().enumerate() {
            *x = C64::new(0.0, PI) * 4.0 * (pd.omega_numerator(j, z) * pd.omega_numerator(k, z)) / dq;
        }
    }
    out
}

/// Central difference of `B` in one branch point against the Rauch
/// prediction, with a second run at `delta / 2`. Passes when every entry
/// deviates by less than `tol` and the two step sizes agree within `tol`.
pub fn rauch_check(m: &CurveModuli, branch: Branch, delta: f64, panels: usize, tol: f64, seed: u64) -> Result<RauchResult> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta = {delta}")));
    }
    let base = periods(m, panels)?;
    let diff = |d: f64| -> Result<[[C64; 2]; 2]> {
        let hi = periods(&m.shifted(branch, d), panels)?;
        let lo = periods(&m.shifted(branch, -d), panels)?;
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for j in 0..2 {
            for k in 0..2 {
                out[j][k] = (hi.b_matrix[j][k] - lo.b_matrix[j][k]) / (2.0 * d);
            }
        }
        Ok(out)
    };
    let d1 = diff(delta)?;
    let d2 = diff(0.5 * delta)?;
    let pred = rauch_prediction(&base, branch);
    let mut entries = Vec::new();
    let mut residuals = Vec::new();
    for (j, k) in [(0, 0), (0, 1), (1, 1)] {
        let scale = pred[j][k].norm();
        let deviation = (d1[j][k] - pred[j][k]).norm() / scale;
        let step_consistency = (d1[j][k] - d2[j][k]).norm() / scale;
        residuals.push(deviation.max(step_consistency));
        entries.push(RauchEntry {
            j,
            k,
            finite_difference: d1[j][k],
            half_step_difference: d2[j][k],
            predicted: pred[j][k],
            ratio: d1[j][k] / pred[j][k],
            deviation,
            step_consistency,
        });
    }
    let report = VerificationReport::from_residuals("rauch", &format!("genus2 branch {branch:?}"), &residuals, tol, seed)
        .with_param("delta", delta)
        .with_param("panels", panels as f64);
    Ok(RauchResult { branch, delta, entries, report })
}

/// Axiom suite of the genus-2 structure at fixed moduli, points on both sheets.
pub fn gt_axioms_on_curve(m: &CurveModuli, samples: usize, seed: u64, tol: f64) -> Result<Vec<VerificationReport>> {
    m.validate()?;
    let s = genus2::at_moduli(m.as_array())?;
    verify_axioms(&s, &VerifyConfig::new(samples, seed, tol))
}
