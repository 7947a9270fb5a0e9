//! One function per command. Each returns the identity reports it produced
//! and command-specific data for the report's `details` object.

use serde::Serialize;
use serde_json::{json, Map, Value};

use whitham_gt::catalog::{Family, FamilyId};
use whitham_gt::gibbons_tsarev::{build_system, compatibility_suite, integrate_reduction};
use whitham_gt::gt::collide::default_ladder;
use whitham_gt::gt::{
    collide_points_closed, collide_points_limit, potential_from_contour, pushforward, pushforward_lambda, verify_axioms, verify_lambda,
    verify_potential, CoordinateChange, GtStructure, VerifyConfig,
};
use whitham_gt::hierarchy::{
    dimension_d, hydro_coefficients, integrability_criterion, recomposition_error, reconstruct_f, reconstruct_lambda, PotentialFamily,
};
use whitham_gt::hyperelliptic::{periods, rauch_check, CurveModuli};
use whitham_gt::kernel::jet::{pv, FnJet, PoleSet};
use whitham_gt::kernel::sampling::{rng, substream};
use whitham_gt::{Result, VerificationReport, C64};

use crate::config::{Command, JobConfig};

/// Reports and details accumulated by a job; kept when a later step fails.
#[derive(Default)]
pub struct Outcome {
    pub reports: Vec<VerificationReport>,
    pub details: Map<String, Value>,
}

impl Outcome {
    fn detail<T: Serialize>(&mut self, key: &str, value: &T) {
        self.details.insert(key.to_string(), serde_json::to_value(value).expect("details serialize"));
    }
}

pub fn run(cfg: &JobConfig, out: &mut Outcome) -> Result<()> {
    match cfg.command {
        Command::Verify => verify(cfg, out),
        Command::Collide => collide(cfg, out),
        Command::Pushforward => push(cfg, out),
        Command::Potentials => potentials(cfg, out),
        Command::Gtsys => gtsys(cfg, out),
        Command::Hydro => hydro(cfg, out),
        Command::Reconstruct => reconstruct(cfg, out),
        Command::Rauch => rauch(cfg, out),
        Command::Report => full(cfg, out),
    }
}

fn verify(cfg: &JobConfig, out: &mut Outcome) -> Result<()> {
    let s = cfg.structure.structure()?;
    out.reports.extend(verify_axioms(&s, &cfg.verify_config())?);
    Ok(())
}

/// Largest relative difference of `g` and `f` between two structures.
fn agreement(a: &GtStructure, b: &GtStructure, vc: &VerifyConfig) -> Result<VerificationReport> {
    let mut r = rng(vc.seed);
    let mut res = Vec::with_capacity(vc.samples);
    for _ in 0..vc.samples {
        let v = a.sampler.draw_fields(&mut r)?;
        let p = a.sampler.draw_points(&v, 2, vc.min_separation, &[], &mut r)?;
        let x = pv(p[0], &v);
        let mut worst = 0.0f64;
        for (ga, gb) in a.g.iter().zip(&b.g) {
            let (u, w) = (ga.value(&x), gb.value(&x));
            worst = worst.max((u - w).norm() / u.norm().max(1.0));
        }
        let (u, w) = (a.f_at(p[0], p[1], &v), b.f_at(p[0], p[1], &v));
        res.push(worst.max((u - w).norm() / u.norm().max(1.0)));
    }
    Ok(VerificationReport::from_residuals("closed form against limit", &a.label, &res, vc.tol, vc.seed))
}

fn collide(cfg: &JobConfig, out: &mut Outcome) -> Result<()> {
    let sec = cfg.collide.as_ref().expect("validated");
    let s = cfg.structure.structure()?;
    let vc = cfg.verify_config();
    let closed = collide_points_closed(&s, &sec.groups, &vc.cauchy)?;
    out.reports.extend(verify_axioms(&closed, &vc)?);
    let ladder = default_ladder();
    let limit = collide_points_limit(&s, &sec.groups, &ladder, sec.agreement_tol)?;
    out.reports.push(agreement(&closed, &limit, &VerifyConfig { tol: sec.agreement_tol, ..vc })?);
    out.detail("collide", &json!({ "groups": sec.groups, "ladder": ladder, "fields": closed.fields }));
    Ok(())
}

fn push(cfg: &JobConfig, out: &mut Outcome) -> Result<()> {
    let sec = cfg.pushforward.as_ref().expect("validated");
    let vc = cfg.verify_config();
    let s = cfg.structure.structure()?;
    let m = s.m();
    let (poly, quad) = (sec.poly.clone(), sec.field_quadratic.clone());
    let mu = FnJet::new(m + 1, PoleSet::new(), move |x| {
        let p = x[0];
        let base = poly.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * p + c);
        base + p * p * quad.iter().zip(&x[1..]).map(|(d, v)| d * v).sum::<C64>()
    });
    let change = CoordinateChange::new("mu", mu.into_ref());
    change.check(&s, cfg.samples, cfg.seed, &vc.cauchy)?;
    let t = pushforward(&s, &change, &vc.cauchy)?;
    out.reports.extend(verify_axioms(&t, &vc)?);
    if cfg.structure.family.enhanced() {
        let e = pushforward_lambda(&cfg.structure.family()?.enhanced, &change, &vc.cauchy)?;
        out.reports.push(verify_lambda(&e, &vc)?);
    }
    out.detail("pushforward", sec);
    Ok(())
}

fn potentials(cfg: &JobConfig, out: &mut Outcome) -> Result<()> {
    let fam = cfg.structure.family()?;
    let vc = cfg.verify_config();
    out.reports.push(verify_lambda(&fam.enhanced, &vc)?);
    let mut labels = Vec::new();
    for h in &fam.potentials {
        out.reports.push(verify_potential(&fam.enhanced, h, &vc)?);
        labels.push(h.label.clone());
    }
    if let Some(sec) = &cfg.potentials {
        for c in &sec.contours {
            let h = potential_from_contour(&fam.enhanced, c, &vc)?;
            out.reports.push(verify_potential(&fam.enhanced, &h, &vc)?);
            labels.push(h.label.clone());
        }
    }
    out.detail("potentials", &labels);
    Ok(())
}

fn gtsys(cfg: &JobConfig, out: &mut Outcome) -> Result<()> {
    let sec = cfg.gtsys.clone().unwrap_or_default();
    let s = cfg.structure.structure()?;
    // compatibility needs three characteristic directions
    let check = build_system(&s, sec.big_m.max(3), sec.distinguished)?;
    let vc = VerifyConfig { samples: sec.states, tol: sec.tol, ..cfg.verify_config() };
    out.reports.push(compatibility_suite(&check, &vc)?);
    let sys = build_system(&s, sec.big_m, sec.distinguished)?;
    let mut detail = json!({ "big_m": sys.big_m, "distinguished": sys.distinguished });
    if let Some(int) = &sec.integrate {
        let coarse = integrate_reduction(&sys, &int.data, int.steps, int.h)?;
        let fine = integrate_reduction(&sys, &int.data, 2 * int.steps, int.h / 2.0)?;
        let ratio = coarse.residual / fine.residual;
        let [lo, hi] = int.ratio_band;
        let mid = 0.5 * (lo + hi);
        out.reports.push(
            VerificationReport::from_residuals("step-halving residual ratio", &s.label, &[(ratio - mid).abs()], 0.5 * (hi - lo), cfg.seed)
                .with_param("ratio", ratio)
                .with_param("coarse_residual", coarse.residual)
                .with_param("fine_residual", fine.residual),
        );
        detail["integration"] = json!({
            "steps": int.steps,
            "h": int.h,
            "coarse_residual": coarse.residual,
            "fine_residual": fine.residual,
            "ratio": ratio,
            "final_state": coarse.states.last(),
        });
    }
    out.detail("gtsys", &detail);
    Ok(())
}

fn family_of(cfg: &JobConfig) -> Result<(Family, PotentialFamily)> {
    let fam = cfg.structure.family()?;
    let pf = PotentialFamily::from_family(&fam)?;
    Ok((fam, pf))
}

fn hydro(cfg: &JobConfig, out: &mut Outcome) -> Result<()> {
    let sec = cfg.hydro.clone().unwrap_or_default();
    let (_, fam) = family_of(cfg)?;
    let label = fam.structure.as_ref().map(|s| s.label.clone()).unwrap_or_default();
    let v = fam.sampler.draw_fields(&mut rng(cfg.seed))?;
    let dim = dimension_d(&fam, sec.triple, &v, sec.z_samples, cfg.seed, sec.svd_tol)?;
    let hs = hydro_coefficients(&fam, sec.triple, &v, sec.z_samples, cfg.seed, sec.svd_tol)?;
    let held = fam.z_samples(&v, sec.held_out, substream(cfg.seed, 1), &hs.z_samples)?;
    let err = recomposition_error(&fam, sec.triple, &hs, &held)?;
    out.reports.push(
        VerificationReport::from_residuals("held-out recomposition", &label, &[err], cfg.tol, cfg.seed)
            .with_param("D", hs.d as f64)
            .with_param("m", fam.m as f64)
            .with_param("expansion_residual", hs.expansion_residual),
    );
    out.reports.push(
        VerificationReport::from_residuals("stacked rank equals D", &label, &[(hs.stacked_rank as f64 - hs.d as f64).abs()], 0.5, cfg.seed)
            .with_param("stacked_rank", hs.stacked_rank as f64),
    );
    out.detail(
        "hydro",
        &json!({
            "triple": sec.triple,
            "dimension": dim,
            "labels": { "a": "a[l][r]: field l, basis function r", "b": "b[l][r]", "c": "c[l][r]", "basis": "basis[r][z]: z sample index" },
            "system": hs,
        }),
    );
    Ok(())
}

fn reconstruct(cfg: &JobConfig, out: &mut Outcome) -> Result<()> {
    let sec = cfg.reconstruct.clone().unwrap_or_default();
    let (fam_data, fam) = family_of(cfg)?;
    let vc = cfg.verify_config();
    let n = fam.len();
    let pairs: Vec<(usize, usize)> = if sec.pairs.is_empty() {
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
    } else {
        sec.pairs.iter().map(|p| (p[0], p[1])).collect()
    };
    if let Some(&(i, j)) = pairs.iter().find(|(i, j)| i == j || *i >= n || *j >= n) {
        return Err(whitham_gt::Error::InvalidArgument(format!("pair ({i}, {j}) invalid for {n} potentials")));
    }
    out.reports.push(reconstruct_f(&fam, &pairs, &vc)?);
    out.reports.push(reconstruct_lambda(&fam, &vc)?);
    let distinguished = cfg.gtsys.as_ref().and_then(|g| g.distinguished);
    let sys = build_system(&fam_data.enhanced.base, 2, distinguished)?;
    out.reports.push(integrability_criterion(&fam, &sys, &vc)?);
    out.detail("reconstruct", &json!({ "pairs": pairs, "potentials": fam.potentials.iter().map(|h| &h.label).collect::<Vec<_>>() }));
    Ok(())
}

fn rauch(cfg: &JobConfig, out: &mut Outcome) -> Result<()> {
    let sec = cfg.rauch.clone().unwrap_or_default();
    let m = match sec.moduli {
        Some(m) => m,
        None => CurveModuli::sample(cfg.seed)?,
    };
    let pd = periods(&m, sec.panels)?;
    let label = "genus2 curve".to_string();
    out.reports.push(VerificationReport::from_residuals("period matrix symmetry", &label, &[pd.asymmetry()], cfg.tol, cfg.seed));
    let eig = pd.im_eigenvalues();
    let min = eig[0].min(eig[1]);
    out.reports.push(
        VerificationReport::from_residuals("Im B positive definite", &label, &[if min > 0.0 { 0.0 } else { 1.0 - min }], 0.5, cfg.seed)
            .with_param("eig0", eig[0])
            .with_param("eig1", eig[1]),
    );
    let mut entries = Vec::new();
    for &b in &sec.branches {
        let r = rauch_check(&m, b, sec.delta, sec.panels, sec.tol, cfg.seed)?;
        out.reports.push(r.report.clone());
        entries.push(r);
    }
    out.detail("rauch", &json!({ "periods": pd, "checks": entries }));
    Ok(())
}

fn full(cfg: &JobConfig, out: &mut Outcome) -> Result<()> {
    verify(cfg, out)?;
    gtsys(cfg, out)?;
    if cfg.structure.family.enhanced() {
        potentials(cfg, out)?;
        reconstruct(cfg, out)?;
        let n = cfg.structure.family()?.potentials.len();
        if n >= 3 {
            hydro(cfg, out)?;
        } else {
            out.detail("hydro", &format!("skipped: {n} potentials, a triple needs 3"));
        }
    }
    if cfg.structure.family == FamilyId::Genus2 {
        rauch(cfg, out)?;
    }
    Ok(())
}
