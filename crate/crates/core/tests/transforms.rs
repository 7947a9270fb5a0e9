use whitham_gt::catalog::{genus0, genus1, FamilyId, StructureSpec};
use whitham_gt::gt::collide::default_ladder;
use whitham_gt::gt::{
    add_points, collide_points_closed, collide_points_limit, pushforward, pushforward_lambda, verify_axioms, verify_lambda,
    CollisionGroup, CoordinateChange, GtStructure, VerifyConfig,
};
use whitham_gt::kernel::jet::{pv, FnJet, PoleSet};
use whitham_gt::kernel::CauchyConfig;

fn assert_axioms(s: &GtStructure, tol: f64) {
    for r in verify_axioms(s, &VerifyConfig::new(100, 5, tol)).unwrap() {
        println!("{} {} {:e}", r.structure, r.identity, r.max_residual);
        assert!(r.passed, "{r:?}");
    }
}

fn quadratic(m: usize) -> CoordinateChange {
    CoordinateChange::new("p+p^2/10", FnJet::new(m + 1, PoleSet::new(), |x| x[0] + 0.1 * x[0] * x[0]).into_ref())
}

fn field_dependent(m: usize) -> CoordinateChange {
    CoordinateChange::new("p+u1 p^2/20", FnJet::new(m + 1, PoleSet::new(), |x| x[0] + 0.05 * x[1] * x[0] * x[0]).into_ref())
}

#[test]
fn adding_points_preserves_axioms() {
    assert_axioms(&add_points(&genus0::structure(1).unwrap(), 2).unwrap(), 1e-6);
    assert_axioms(&add_points(&genus1::structure(1).unwrap(), 1).unwrap(), 1e-6);
}

#[test]
fn pushforward_preserves_axioms() {
    let s = genus0::structure(2).unwrap();
    let cfg = CauchyConfig::default();
    for c in [quadratic(2), field_dependent(2)] {
        assert_axioms(&pushforward(&s, &c, &cfg).unwrap(), 1e-6);
    }
}

#[test]
fn pushforward_preserves_lambda() {
    let fam = StructureSpec::new(FamilyId::Genus0, 2).family().unwrap();
    let e = pushforward_lambda(&fam.enhanced, &field_dependent(2), &CauchyConfig::default()).unwrap();
    let r = verify_lambda(&e, &VerifyConfig::new(50, 2, 1e-6)).unwrap();
    assert!(r.passed, "{r:?}");
}

#[test]
fn collided_structures_keep_axioms() {
    let s = genus0::structure(3).unwrap();
    let cfg = CauchyConfig::default();
    for depth in 1..=2 {
        let c = collide_points_closed(&s, &[CollisionGroup { base: 0, depth }], &cfg).unwrap();
        assert_axioms(&c, 1e-6);
    }
}

#[test]
fn closed_form_matches_eps_limit() {
    let s = genus0::structure(3).unwrap();
    let groups = [CollisionGroup { base: 0, depth: 2 }];
    let closed = collide_points_closed(&s, &groups, &CauchyConfig::default()).unwrap();
    let limit = collide_points_limit(&s, &groups, &default_ladder(), 1e-6).unwrap();
    let mut rng = whitham_gt::kernel::sampling::rng(9);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let v = closed.sampler.draw_fields(&mut rng).unwrap();
        let p = closed.sampler.draw_points(&v, 1, 0.15, &[], &mut rng).unwrap()[0];
        let x = pv(p, &v);
        for k in 0..3 {
            let (a, b) = (closed.g[k].value(&x), limit.g[k].value(&x));
            worst = worst.max((a - b).norm() / a.norm().max(1.0));
        }
    }
    println!("closed vs limit {worst:e}");
    assert!(worst < 1e-5);
}
