//! Local frame `e_k` of the Lie algebroid attached to a structure at a point `z`.
//!
//! `e_1 = d/dz` and `e_{k+2}` is the k-th Taylor coefficient of `g` at `z`,
//! i.e. `g^(k)(z) / k!`. `f_{i,j}` are the Taylor coefficients of the regular
//! part `f - 1/(p1 - p2)` at `(z, z)`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::Serialize;

use super::structure::GtStructure;
use crate::error::{Error, Result};
use crate::kernel::cauchy::{circle_coeff, clearance_excluding};
use crate::kernel::jet::{ppv, pv, unit, CauchyConfig};
use crate::kernel::C64;

/// Highest frame index supported; beyond it the Cauchy coefficients of the
/// regular part lose more than about six digits.
pub const MAX_ORDER: usize = 6;

const NODES: usize = 64;

#[derive(Clone, Debug, Serialize)]
pub struct AlgebroidTable {
    pub z: C64,
    pub order: usize,
    /// `f[i][j]` for `0 <= i, j < order`.
    pub f: Vec<Vec<C64>>,
    /// `e[k]` for `2 <= k <= 2 order`; entries 0 and 1 are empty.
    pub e: Vec<Vec<C64>>,
}

impl AlgebroidTable {
    fn fij(&self, i: isize, j: usize) -> C64 {
        if i < 0 {
            C64::new(0.0, 0.0)
        } else {
            self.f[i as usize][j]
        }
    }

    /// Structure constants of `[e_i, e_j]` as `(k, c_k)`, for `1 <= i, j <= order`.
    /// Computed for `i < j` and negated otherwise, so antisymmetry is exact.
    pub fn constants(&self, i: usize, j: usize) -> Vec<(usize, C64)> {
        if i == j {
            return Vec::new();
        }
        if i > j {
            return self.constants(j, i).into_iter().map(|(k, c)| (k, -c)).collect();
        }
        let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
        *acc.entry(i + j).or_default() += (j as f64 - i as f64) * C64::new(1.0, 0.0);
        for r in 0..i {
            *acc.entry(i - r + 1).or_default() += (i + r - 1) as f64 * self.fij(j as isize - 2, r);
        }
        for r in 0..j {
            *acc.entry(j - r + 1).or_default() -= (j + r - 1) as f64 * self.fij(i as isize - 2, r);
        }
        acc.into_iter().collect()
    }

    /// The table contracted with the sampled frame vectors (`e_1` excluded).
    pub fn predicted_bracket(&self, i: usize, j: usize) -> Vec<C64> {
        let m = self.e[2].len();
        let mut out = vec![C64::new(0.0, 0.0); m];
        for (k, c) in self.constants(i, j) {
            for (o, x) in out.iter_mut().zip(&self.e[k]) {
                *o += c * x;
            }
        }
        out
    }
}

fn taylor_g(s: &GtStructure, comp: usize, z: C64, v: &[C64], k: usize, r: f64) -> C64 {
    let g = &s.g[comp];
    let anchor = pv(z, v);
    let mut y = anchor.clone();
    circle_coeff(
        |p| {
            y[0] = p;
            g.value_from(&anchor, &y)
        },
        z,
        r,
        NODES,
        k as i32,
    )
}

fn g_radius(s: &GtStructure, z: C64, v: &[C64]) -> f64 {
    let x = pv(z, v);
    s.g.iter().map(|g| g.clearance(&x, 0)).fold(f64::INFINITY, f64::min).min(2.0) / 4.0
}

/// Frame vectors and regular-part coefficients at `(z, v)`.
pub fn algebroid_constants(s: &GtStructure, z: C64, v: &[C64], order: usize) -> Result<AlgebroidTable> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::InvalidArgument(format!("order {order} outside 1..={MAX_ORDER}")));
    }
    let x = ppv(z, z, v);
    let big = clearance_excluding(s.f.as_ref(), 0, &x, z).min(clearance_excluding(s.f.as_ref(), 1, &x, z)).min(2.0);
    if !(big > 0.0) {
        return Err(Error::DomainViolation(format!("z = {z} is singular")));
    }
    let (r1, r2) = (big / 4.0, big / 8.0);
    let roots: Vec<C64> = (0..NODES).map(|j| C64::from_polar(1.0, TAU * j as f64 / NODES as f64)).collect();
    // regular part sampled on the torus |p1 - z| = r1, |p2 - z| = r2, which misses the diagonal
    let mut grid = vec![vec![C64::new(0.0, 0.0); NODES]; NODES];
    let mut y = x.clone();
    for (a, w1) in roots.iter().enumerate() {
        for (b, w2) in roots.iter().enumerate() {
            let (p1, p2) = (z + r1 * w1, z + r2 * w2);
            y[0] = p1;
            y[1] = p2;
            grid[a][b] = s.f.value_from(&x, &y) - 1.0 / (p1 - p2);
        }
    }
    let n2 = (NODES * NODES) as f64;
    let f: Vec<Vec<C64>> = (0..order)
        .map(|i| {
            (0..order)
                .map(|j| {
                    let mut sum = C64::new(0.0, 0.0);
                    for (a, w1) in roots.iter().enumerate() {
                        for (b, w2) in roots.iter().enumerate() {
                            sum += grid[a][b] * w1.powi(-(i as i32)) * w2.powi(-(j as i32));
                        }
                    }
                    sum / (n2 * r1.powi(i as i32) * r2.powi(j as i32))
                })
                .collect()
        })
        .collect();
    let rg = g_radius(s, z, v);
    let mut e = vec![Vec::new(), Vec::new()];
    for k in 2..=2 * order {
        e.push((0..s.m()).map(|c| taylor_g(s, c, z, v, k - 2, rg)).collect());
    }
    Ok(AlgebroidTable { z, order, f, e })
}

/// Commutator `[e_i, e_j]` of the frame vectors computed from field
/// derivatives of `g`, for `i, j >= 2`.
pub fn numeric_bracket(s: &GtStructure, z: C64, v: &[C64], i: usize, j: usize, cfg: &CauchyConfig) -> Vec<C64> {
    let m = s.m();
    let rg = g_radius(s, z, v);
    let coeff = |comp: usize, k: usize, dv: Option<usize>| {
        let anchor = pv(z, v);
        let mut y = anchor.clone();
        circle_coeff(
            |p| {
                y[0] = p;
                match dv {
                    None => s.g[comp].value_from(&anchor, &y),
                    Some(n) => s.g[comp].partial(&y, &unit(m + 1, n + 1, 1), cfg),
                }
            },
            z,
            rg,
            NODES,
            k as i32,
        )
    };
    (0..m)
        .map(|l| {
            (0..m)
                .map(|n| coeff(n, i - 2, None) * coeff(l, j - 2, Some(n)) - coeff(n, j - 2, None) * coeff(l, i - 2, Some(n)))
                .sum()
        })
        .collect()
}
