use whitham_gt::catalog::{genus2, FamilyId, StructureSpec};
use whitham_gt::gt::{verify_axioms, verify_lambda, verify_potential, VerifyConfig};

fn axioms(spec: StructureSpec, tol: f64) {
    let s = spec.structure().unwrap();
    for r in verify_axioms(&s, &VerifyConfig::new(100, 7, tol)).unwrap() {
        println!("{} {} max {:e}", r.structure, r.identity, r.max_residual);
        assert!(r.passed, "{r:?}");
    }
}

#[test]
fn genus0_axioms() {
    axioms(StructureSpec::new(FamilyId::Genus0, 3), 1e-8);
}

#[test]
fn genus1_axioms() {
    axioms(StructureSpec::new(FamilyId::Genus1, 2), 1e-8);
}

#[test]
fn benney_axioms() {
    axioms(StructureSpec::new(FamilyId::Benney, 3), 1e-8);
}

#[test]
fn genus2_axioms() {
    axioms(StructureSpec::new(FamilyId::Genus2, 0), 1e-6);
}

#[test]
fn genus2_fault_is_detected() {
    let s = genus2::perturbed(1.0 + 1e-3).unwrap();
    let r = whitham_gt::gt::verify_bracket(&s, &VerifyConfig::new(20, 3, 1e-6)).unwrap();
    assert!(!r.passed, "{r:?}");
}

#[test]
fn enhanced_families() {
    for spec in [StructureSpec::new(FamilyId::Genus0, 3), StructureSpec::new(FamilyId::Genus1, 2)] {
        let fam = spec.family().unwrap();
        let cfg = VerifyConfig::new(100, 11, 1e-8);
        let r = verify_lambda(&fam.enhanced, &cfg).unwrap();
        println!("{} lambda {:e}", r.structure, r.max_residual);
        assert!(r.passed, "{r:?}");
        for h in &fam.potentials {
            let r = verify_potential(&fam.enhanced, h, &cfg).unwrap();
            println!("{} {} {:e}", r.structure, r.identity, r.max_residual);
            assert!(r.passed, "{r:?}");
        }
    }
}
