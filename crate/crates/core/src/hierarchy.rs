//! Hierarchies defined by families of potentials: the compatibility tensor,
//! its dimension, the induced hydrodynamic-type system, and reconstruction
//! of `f` and `lambda` from potentials.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::Family;
use crate::error::{Error, Result};
use crate::gibbons_tsarev::GtSystem;
use crate::gt::structure::{d1, draw_samples, field_grad, finite};
use crate::gt::{GtStructure, Potential, Sampler, VerifyConfig};
use crate::kernel::jet::{ppv, pv, CauchyConfig, JetRef};
use crate::kernel::sampling::rng;
use crate::kernel::C64;
use crate::report::VerificationReport;

/// Minimum distance of a z sample from every singularity of the potentials.
pub const Z_SEPARATION: f64 = 0.15;

/// Ordered potentials `h_1..h_N` over `m` fields, with a sampler for
/// field values and `z` points, and optionally the structure they belong to.
#[derive(Clone, Debug)]
pub struct PotentialFamily {
    pub m: usize,
    pub potentials: Vec<Potential>,
    pub sampler: Sampler,
    pub structure: Option<GtStructure>,
    pub lambda: Option<JetRef>,
    pub cauchy: CauchyConfig,
}

impl PotentialFamily {
    pub fn new(m: usize, potentials: Vec<Potential>, sampler: Sampler) -> Result<Self> {
        if let Some(bad) = potentials.iter().find(|h| h.h.arity() != m + 1) {
            return Err(Error::InvalidArgument(format!("potential {} has arity {}", bad.label, bad.h.arity())));
        }
        Ok(Self { m, potentials, sampler, structure: None, lambda: None, cauchy: CauchyConfig::default() })
    }

    pub fn from_family(fam: &Family) -> Result<Self> {
        let s = &fam.enhanced.base;
        let mut out = Self::new(s.m(), fam.potentials.clone(), s.sampler.clone())?;
        out.structure = Some(s.clone());
        out.lambda = Some(fam.enhanced.lambda.clone());
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.potentials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.potentials.is_empty()
    }

    fn h(&self, i: usize) -> &JetRef {
        &self.potentials[i].h
    }

    fn dz(&self, i: usize, z: C64, v: &[C64]) -> C64 {
        d1(self.h(i), &pv(z, v), 0, &self.cauchy)
    }

    fn dv(&self, i: usize, z: C64, v: &[C64]) -> Vec<C64> {
        field_grad(self.h(i), &pv(z, v), 1, &self.cauchy)
    }

    fn z_ok(&self, z: C64, v: &[C64]) -> bool {
        self.potentials.iter().all(|h| h.admissible(&[z], v, Z_SEPARATION))
    }

    /// `n` admissible z samples at `v`, avoiding `extra`.
    pub fn z_samples(&self, v: &[C64], n: usize, seed: u64, extra: &[C64]) -> Result<Vec<C64>> {
        let mut r = rng(seed);
        let mut out: Vec<C64> = Vec::with_capacity(n);
        let mut draws = 0;
        while out.len() < n {
            draws += 1;
            if draws > 1000 * (n + 1) {
                return Err(Error::Exhausted { draws, context: format!("{} of {n} z samples admissible", out.len()) });
            }
            let mut ex = extra.to_vec();
            ex.extend_from_slice(&out);
            let Ok(z) = self.sampler.draw_points(v, 1, Z_SEPARATION, &ex, &mut r) else { continue };
            if self.z_ok(z[0], v) {
                out.push(z[0]);
            }
        }
        Ok(out)
    }

    /// Rank of the jets `(h_i', dh_i/dv)` stacked over a few z samples.
    pub fn independence_rank(&self, v: &[C64], seed: u64) -> Result<usize> {
        let zs = self.z_samples(v, 4, seed, &[])?;
        let n = self.len();
        let mut mat = DMatrix::<C64>::zeros(n, zs.len() * (self.m + 1));
        for i in 0..n {
            for (a, &z) in zs.iter().enumerate() {
                mat[(i, a * (self.m + 1))] = self.dz(i, z, v);
                for (l, d) in self.dv(i, z, v).into_iter().enumerate() {
                    mat[(i, a * (self.m + 1) + 1 + l)] = d;
                }
            }
        }
        Ok(numerical_rank(&mat, 1e-8).0)
    }
}

fn numerical_rank(mat: &DMatrix<C64>, rel_tol: f64) -> (usize, Vec<f64>) {
    let sv: Vec<f64> = mat.clone().svd(false, false).singular_values.iter().copied().collect();
    let top = sv.iter().copied().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > rel_tol * top).count();
    (rank, sv)
}

fn distinct(fam: &PotentialFamily, i: usize, j: usize, k: usize) -> Result<()> {
    let n = fam.len();
    if i == j || j == k || i == k {
        return Err(Error::InvalidArgument(format!("indices ({i}, {j}, {k}) must be pairwise distinct")));
    }
    if i.max(j).max(k) >= n {
        return Err(Error::InvalidArgument(format!("index out of range for {n} potentials")));
    }
    Ok(())
}

/// The `3m` coefficient functions `h_a' dh_b/dv_l - h_b' dh_a/dv_l` for the
/// ordered pairs `(i, j)`, `(j, k)`, `(k, i)`, sampled at `zs`.
pub fn compatibility_tensor(fam: &PotentialFamily, i: usize, j: usize, k: usize, v: &[C64], zs: &[C64]) -> Result<DMatrix<C64>> {
    distinct(fam, i, j, k)?;
    let m = fam.m;
    let cols: Vec<Vec<C64>> = zs
        .par_iter()
        .map(|&z| {
            let hp: Vec<C64> = [i, j, k].iter().map(|&a| fam.dz(a, z, v)).collect();
            let hv: Vec<Vec<C64>> = [i, j, k].iter().map(|&a| fam.dv(a, z, v)).collect();
            let mut col = Vec::with_capacity(3 * m);
            for (a, b) in [(0, 1), (1, 2), (2, 0)] {
                for l in 0..m {
                    col.push(hp[a] * hv[b][l] - hp[b] * hv[a][l]);
                }
            }
            col
        })
        .collect();
    let mut mat = DMatrix::<C64>::zeros(3 * m, zs.len());
    for (c, col) in cols.iter().enumerate() {
        if col.iter().any(|x| !finite(*x)) {
            return Err(Error::PoleHit(format!("z = {} hits a pole of a potential", zs[c])));
        }
        for (r, x) in col.iter().enumerate() {
            mat[(r, c)] = *x;
        }
    }
    Ok(mat)
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub d: usize,
    pub d_doubled: usize,
    pub samples: usize,
    pub singular_values: Vec<f64>,
}

/// Numerical rank of the tensor at `nz` samples, confirmed at `2 nz`.
pub fn dimension_d(fam: &PotentialFamily, ijk: [usize; 3], v: &[C64], nz: usize, seed: u64, svd_tol: f64) -> Result<DimensionReport> {
    let [i, j, k] = ijk;
    distinct(fam, i, j, k)?;
    if nz < 3 * fam.m + 5 {
        return Err(Error::InvalidArgument(format!("need at least {} z samples", 3 * fam.m + 5)));
    }
    let zs = fam.z_samples(v, nz, seed, &[])?;
    let more = fam.z_samples(v, nz, seed.wrapping_add(1), &zs)?;
    let (d, singular_values) = numerical_rank(&compatibility_tensor(fam, i, j, k, v, &zs)?, svd_tol);
    let all: Vec<C64> = zs.iter().chain(&more).copied().collect();
    let (d_doubled, _) = numerical_rank(&compatibility_tensor(fam, i, j, k, v, &all)?, svd_tol);
    if d != d_doubled {
        return Err(Error::RankUnstable(format!("rank {d} at {nz} samples but {d_doubled} at {}", 2 * nz)));
    }
    Ok(DimensionReport { d, d_doubled, samples: nz, singular_values })
}

/// Coefficients of the hydrodynamic-type system at one field point: the
/// coefficient functions of the `(ij)`, `(jk)`, `(ki)` blocks expanded in a
/// basis `S_1..S_D` of sampled functions.
#[derive(Clone, Debug, Serialize)]
pub struct HydroSystem {
    pub d: usize,
    pub v: Vec<C64>,
    /// `a[l][r]`: coefficient of `S_r` in the `(ij)` function of field `l`.
    pub a: Vec<Vec<C64>>,
    pub b: Vec<Vec<C64>>,
    pub c: Vec<Vec<C64>>,
    /// Tensor row chosen as `S_r`.
    pub basis_rows: Vec<usize>,
    pub z_samples: Vec<C64>,
    pub basis: Vec<Vec<C64>>,
    pub expansion_residual: f64,
    pub stacked_rank: usize,
}

impl HydroSystem {
    fn coefficients(&self) -> Vec<&Vec<C64>> {
        self.a.iter().chain(&self.b).chain(&self.c).collect()
    }
}

pub fn hydro_coefficients(fam: &PotentialFamily, ijk: [usize; 3], v: &[C64], nz: usize, seed: u64, svd_tol: f64) -> Result<HydroSystem> {
    let dim = dimension_d(fam, ijk, v, nz, seed, svd_tol)?;
    let [i, j, k] = ijk;
    let zs = fam.z_samples(v, nz, seed, &[])?;
    let mat = compatibility_tensor(fam, i, j, k, v, &zs)?;
    let rows = mat.nrows();
    // pivoted QR of the transpose orders the rows by independence
    let (_, _, perm) = mat.transpose().col_piv_qr().unpack();
    let mut order = DMatrix::<C64>::from_fn(1, rows, |_, c| C64::new(c as f64, 0.0));
    perm.permute_columns(&mut order);
    let basis_rows: Vec<usize> = (0..dim.d).map(|r| order[(0, r)].re as usize).collect();
    let s_mat = DMatrix::<C64>::from_fn(zs.len(), dim.d, |z, r| mat[(basis_rows[r], z)]);
    let svd = s_mat.clone().svd(true, true);
    let mut coeffs = Vec::with_capacity(rows);
    let scale = mat.iter().map(|x| x.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for r in 0..rows {
        let rhs = DVector::<C64>::from_fn(zs.len(), |z, _| mat[(r, z)]);
        let x = svd.solve(&rhs, svd_tol * svd.singular_values[0]).map_err(|e| Error::IllConditioned(e.into()))?;
        worst = worst.max((&s_mat * &x - &rhs).norm() / scale);
        coeffs.push(x.iter().copied().collect::<Vec<C64>>());
    }
    if !(worst < svd_tol.max(1e-12) * 10.0) {
        return Err(Error::IllConditioned(format!("basis expansion leaves a residual of {worst:e}")));
    }
    let m = fam.m;
    let stacked = DMatrix::<C64>::from_fn(rows, dim.d, |r, c| coeffs[r][c]);
    let (stacked_rank, _) = numerical_rank(&stacked, svd_tol);
    Ok(HydroSystem {
        d: dim.d,
        v: v.to_vec(),
        a: coeffs[..m].to_vec(),
        b: coeffs[m..2 * m].to_vec(),
        c: coeffs[2 * m..].to_vec(),
        basis: basis_rows.iter().map(|&r| mat.row(r).iter().copied().collect()).collect(),
        basis_rows,
        z_samples: zs,
        expansion_residual: worst,
        stacked_rank,
    })
}

/// Largest relative mismatch between the tensor at `zs` and its
/// recomposition from the system's coefficients and basis rows.
pub fn recomposition_error(fam: &PotentialFamily, ijk: [usize; 3], hs: &HydroSystem, zs: &[C64]) -> Result<f64> {
    let [i, j, k] = ijk;
    let mat = compatibility_tensor(fam, i, j, k, &hs.v, zs)?;
    let scale = mat.iter().map(|x| x.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for (r, coeff) in hs.coefficients().into_iter().enumerate() {
        for z in 0..zs.len() {
            let rec: C64 = coeff.iter().zip(&hs.basis_rows).map(|(c, &b)| c * mat[(b, z)]).sum();
            worst = worst.max((rec - mat[(r, z)]).norm() / scale);
        }
    }
    Ok(worst)
}

fn structure_of(fam: &PotentialFamily) -> Result<&GtStructure> {
    fam.structure.as_ref().ok_or_else(|| Error::InvalidArgument("the family carries no structure".into()))
}

/// `f(p1, p2)` from potentials `i`, `j`.
pub fn reconstruct_f_at(fam: &PotentialFamily, i: usize, j: usize, p1: C64, p2: C64, v: &[C64]) -> Result<C64> {
    let s = structure_of(fam)?;
    let (hi1, hj1) = (fam.dz(i, p1, v), fam.dz(j, p1, v));
    let (hi2, hj2) = (fam.dz(i, p2, v), fam.dz(j, p2, v));
    let (vi2, vj2) = (fam.dv(i, p2, v), fam.dv(j, p2, v));
    let num: C64 = s.g_at(p1, v).iter().enumerate().map(|(k, gk)| (hi1 * vj2[k] - hj1 * vi2[k]) * gk).sum();
    let den = hj1 * hi2 - hj2 * hi1;
    if den.norm() < 1e-12 * (hj1 * hi2).norm().max(1e-300) {
        return Err(Error::IllConditioned(format!("vanishing denominator at p1 = {p1}, p2 = {p2}")));
    }
    Ok(num / den)
}

/// `lambda(p1, p2) = (f h_i'(p2) + g(p1)(h_i(p2))) / h_i'(p1)`.
pub fn reconstruct_lambda_at(fam: &PotentialFamily, i: usize, p1: C64, p2: C64, v: &[C64]) -> Result<C64> {
    let s = structure_of(fam)?;
    let d1 = fam.dz(i, p1, v);
    if d1.norm() < 1e-12 {
        return Err(Error::IllConditioned(format!("h_{i}' vanishes at {p1}")));
    }
    Ok((s.f_at(p1, p2, v) * fam.dz(i, p2, v) + s.apply(p1, v, &fam.dv(i, p2, v))) / d1)
}

fn rel(a: C64, reference: C64) -> f64 {
    (a - reference).norm() / reference.norm().max(1.0)
}

fn two_point_samples(fam: &PotentialFamily, cfg: &VerifyConfig) -> Result<Vec<(Vec<C64>, Vec<C64>)>> {
    let s = structure_of(fam)?;
    draw_samples(&fam.sampler, 2, cfg, |v, p| {
        s.admissible(p, v, cfg.min_separation) && fam.potentials.iter().all(|h| h.admissible(p, v, cfg.min_separation))
    })
}

/// Reconstructed `f` against the structure's, for every pair in `pairs`;
/// each sample's residual also covers the spread between pairs.
pub fn reconstruct_f(fam: &PotentialFamily, pairs: &[(usize, usize)], cfg: &VerifyConfig) -> Result<VerificationReport> {
    let s = structure_of(fam)?;
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no potential pairs".into()));
    }
    let samples = two_point_samples(fam, cfg)?;
    let res: Vec<Result<f64>> = samples
        .par_iter()
        .map(|(v, p)| {
            let truth = s.f_at(p[0], p[1], v);
            let mut worst = 0.0f64;
            let mut first = None;
            for &(i, j) in pairs {
                let rec = reconstruct_f_at(fam, i, j, p[0], p[1], v)?;
                worst = worst.max(rel(rec, truth));
                let base = *first.get_or_insert(rec);
                worst = worst.max(rel(rec, base));
            }
            Ok(worst)
        })
        .collect();
    let res: Vec<f64> = res.into_iter().collect::<Result<_>>()?;
    Ok(VerificationReport::from_residuals("reconstruct f", &s.label, &res, cfg.tol, cfg.seed).with_param("pairs", pairs.len() as f64))
}

/// Reconstructed `lambda` from each potential against the family's.
pub fn reconstruct_lambda(fam: &PotentialFamily, cfg: &VerifyConfig) -> Result<VerificationReport> {
    let s = structure_of(fam)?;
    let lambda = fam.lambda.as_ref().ok_or_else(|| Error::InvalidArgument("the family carries no lambda".into()))?;
    let samples = two_point_samples(fam, cfg)?;
    let res: Vec<Result<f64>> = samples
        .par_iter()
        .map(|(v, p)| {
            let truth = lambda.value(&ppv(p[0], p[1], v));
            let mut worst = 0.0f64;
            for i in 0..fam.len() {
                worst = worst.max(rel(reconstruct_lambda_at(fam, i, p[0], p[1], v)?, truth));
            }
            Ok(worst)
        })
        .collect();
    let res: Vec<f64> = res.into_iter().collect::<Result<_>>()?;
    Ok(VerificationReport::from_residuals("reconstruct lambda", &s.label, &res, cfg.tol, cfg.seed))
}

/// `h_j'(p1) D(h_i)(p2) = h_i'(p1) D(h_j)(p2)` for all pairs, where
/// `D X = (f(p1, p2) X'(p2) + g(p1)(X)(p2)) / g_1(p1)`.
pub fn integrability_criterion(fam: &PotentialFamily, sys: &GtSystem, cfg: &VerifyConfig) -> Result<VerificationReport> {
    let s = &sys.structure;
    if s.m() != fam.m {
        return Err(Error::InvalidArgument("family and system have different field counts".into()));
    }
    let samples = draw_samples(&fam.sampler, 2, cfg, |v, p| {
        s.admissible(p, v, cfg.min_separation) && fam.potentials.iter().all(|h| h.admissible(p, v, cfg.min_separation))
    })?;
    let n = fam.len();
    let res: Vec<f64> = samples
        .par_iter()
        .map(|(v, p)| {
            let (p1, p2) = (p[0], p[1]);
            let g1 = s.g[sys.distinguished].value(&pv(p1, v));
            let f = s.f_at(p1, p2, v);
            let dx: Vec<C64> = (0..n).map(|i| (f * fam.dz(i, p2, v) + s.apply(p1, v, &fam.dv(i, p2, v))) / g1).collect();
            let hp: Vec<C64> = (0..n).map(|i| fam.dz(i, p1, v)).collect();
            let mut worst = 0.0f64;
            for i in 0..n {
                for j in i + 1..n {
                    let a = hp[j] * dx[i];
                    let b = hp[i] * dx[j];
                    worst = worst.max((a - b).norm() / a.norm().max(b.norm()).max(1.0));
                }
            }
            worst
        })
        .collect();
    Ok(VerificationReport::from_residuals("integrability criterion", &s.label, &res, cfg.tol, cfg.seed)
        .with_param("potentials", n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::jet::{FnJet, PoleSet};
    use crate::kernel::sampling::Region;
    use crate::kernel::c64;

    fn affine() -> PotentialFamily {
        let hs = [(1.0, 0.5), (2.0, -1.0), (-0.5, 2.0)]
            .into_iter()
            .enumerate()
            .map(|(n, (alpha, beta))| {
                let h = FnJet::new(2, PoleSet::new(), move |x| alpha * x[0] + beta * x[1] * x[1] + (n as f64) * x[1].exp());
                Potential::new(format!("affine{n}"), h.into_ref())
            })
            .collect();
        let sampler = Sampler::planar(|_| Ok(vec![c64(0.3, 0.2)]), Region::square(2.0), |_| Vec::new());
        PotentialFamily::new(1, hs, sampler).unwrap()
    }

    #[test]
    fn repeated_index_rejected() {
        let fam = affine();
        assert!(compatibility_tensor(&fam, 0, 0, 1, &[c64(0.3, 0.2)], &[c64(0.0, 0.0)]).is_err());
    }

    #[test]
    fn affine_family_has_one_dimension() {
        let fam = affine();
        let r = dimension_d(&fam, [0, 1, 2], &[c64(0.3, 0.2)], 12, 1, 1e-9).unwrap();
        assert_eq!(r.d, 1);
        let hs = hydro_coefficients(&fam, [0, 1, 2], &[c64(0.3, 0.2)], 12, 1, 1e-9).unwrap();
        assert_eq!(hs.d, 1);
        assert_eq!(hs.stacked_rank, 1);
    }

    #[test]
    fn swapping_negates_first_block() {
        let fam = affine();
        let v = [c64(0.3, 0.2)];
        let zs = [c64(0.5, 0.1), c64(-1.0, 0.7)];
        let a = compatibility_tensor(&fam, 0, 1, 2, &v, &zs).unwrap();
        let b = compatibility_tensor(&fam, 1, 0, 2, &v, &zs).unwrap();
        for z in 0..2 {
            assert_eq!(a[(0, z)], -b[(0, z)]);
        }
    }
}
