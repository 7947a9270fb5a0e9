use std::sync::Arc;

use whitham_gt::catalog::{benney, genus0, FamilyId, StructureSpec};
use whitham_gt::gibbons_tsarev::{build_system, compatibility_suite, integrate_reduction, random_states, AxisData, ReductionState};
use whitham_gt::gt::{GtStructure, VerifyConfig};
use whitham_gt::kernel::jet::{FnJet, JetRef};
use whitham_gt::{c64, C64};

fn with_f_defect(s: &GtStructure, eps: f64) -> GtStructure {
    let (f, fs) = (s.f.clone(), s.f.clone());
    let g: JetRef = Arc::new(FnJet::custom(s.f.arity(), move |x, k| fs.singularities(x, k), move |a, x| f.value_from(a, x) + eps * (x[0] - x[1])));
    let mut out = GtStructure::new(format!("{}+defect", s.label), s.fields.clone(), s.g.clone(), g, s.sampler.clone()).unwrap();
    out.punctures = s.punctures.clone();
    out
}

#[test]
fn builtin_systems_are_compatible() {
    for spec in [
        StructureSpec::new(FamilyId::Genus0, 2),
        StructureSpec::new(FamilyId::Genus1, 2),
        StructureSpec::new(FamilyId::Genus2, 0),
        StructureSpec::new(FamilyId::Benney, 2),
    ] {
        let sys = build_system(&spec.structure().unwrap(), 3, None).unwrap();
        let r = compatibility_suite(&sys, &VerifyConfig::new(50, 3, 1e-9)).unwrap();
        println!("{} {:e}", r.structure, r.max_residual);
        assert!(r.passed);
    }
}

#[test]
fn defects_are_detected() {
    let s = with_f_defect(&genus0::structure(2).unwrap(), 1e-2);
    let sys = build_system(&s, 3, None).unwrap();
    let states = random_states(&sys, &VerifyConfig::new(50, 8, 0.0)).unwrap();
    let worst_min = states.iter().map(|st| sys.mixed_mismatch(st)).fold(f64::INFINITY, f64::min);
    println!("smallest detected defect {worst_min:e}");
    assert!(worst_min > 1e-4);
}

fn ratio(s: &GtStructure, origin: ReductionState) -> f64 {
    let sys = build_system(s, 2, None).unwrap();
    let data = AxisData { origin, p_slope: vec![c64(0.3, 0.1), c64(-0.2, 0.25)], w_slope: vec![c64(0.2, 0.0), c64(0.0, -0.3)] };
    let a = integrate_reduction(&sys, &data, 10, 0.02).unwrap();
    let b = integrate_reduction(&sys, &data, 20, 0.01).unwrap();
    println!("{} {:e} {:e} ratio {}", s.label, a.residual, b.residual, a.residual / b.residual);
    a.residual / b.residual
}

#[test]
fn second_order_ratio() {
    let st = |p: [C64; 2], v: Vec<C64>| ReductionState { p: p.to_vec(), v, w: vec![c64(0.5, 0.2), c64(-0.4, 0.3)] };
    let r1 = ratio(&benney::structure(1).unwrap(), st([c64(1.0, 0.5), c64(-0.8, -0.3)], vec![c64(0.1, -0.6)]));
    let r2 = ratio(&genus0::structure(2).unwrap(), st([c64(1.6, 0.9), c64(-0.8, -0.7)], vec![c64(-0.9, 0.5), c64(0.6, -1.2)]));
    assert!((3.5..=4.5).contains(&r1) && (3.5..=4.5).contains(&r2));
}

#[test]
fn q_hat_is_symmetric() {
    for spec in [
        StructureSpec::new(FamilyId::Genus0, 2),
        StructureSpec::new(FamilyId::Genus1, 2),
        StructureSpec::new(FamilyId::Genus2, 0),
        StructureSpec::new(FamilyId::Benney, 2),
    ] {
        let sys = build_system(&spec.structure().unwrap(), 2, None).unwrap();
        for st in random_states(&sys, &VerifyConfig::new(20, 4, 0.0)).unwrap() {
            let (a, b) = (sys.q_hat(st.p[0], st.p[1], &st.v), sys.q_hat(st.p[1], st.p[0], &st.v));
            assert!((a - b).norm() < 1e-9 * a.norm().max(1.0), "{} {a} {b}", sys.structure.label);
        }
    }
}

#[test]
fn genus1_reduction_is_stable() {
    let sys = build_system(&StructureSpec::new(FamilyId::Genus1, 2).structure().unwrap(), 2, None).unwrap();
    for mut origin in random_states(&sys, &VerifyConfig::new(5, 6, 0.0)).unwrap() {
        origin.w.iter_mut().for_each(|w| *w *= 1e-2);
        let data = AxisData { origin, p_slope: vec![c64(1e-2, 0.0), c64(0.0, 1e-2)], w_slope: vec![c64(1e-2, 0.0), c64(-1e-2, 0.0)] };
        let sol = integrate_reduction(&sys, &data, 10, 0.1).unwrap();
        println!("genus1 residual {:e}", sol.residual);
        assert_eq!(sol.states.len(), 121);
        assert!(sol.states.iter().all(|s| s.p.iter().chain(&s.v).all(|z| z.re.is_finite() && z.im.is_finite())));
    }
}
