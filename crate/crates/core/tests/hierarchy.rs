use whitham_gt::catalog::{genus0, genus1};
use whitham_gt::gibbons_tsarev::build_system;
use whitham_gt::gt::{verify_potential, Potential, VerifyConfig};
use whitham_gt::hierarchy::{
    dimension_d, hydro_coefficients, integrability_criterion, reconstruct_f, reconstruct_lambda, recomposition_error, PotentialFamily,
};
use whitham_gt::kernel::jet::{FnJet, PoleSet};
use whitham_gt::kernel::sampling::rng;
use whitham_gt::C64;

fn fields(fam: &PotentialFamily, seed: u64) -> Vec<C64> {
    fam.sampler.draw_fields(&mut rng(seed)).unwrap()
}

#[test]
fn genus0_reconstruction() {
    let fam = PotentialFamily::from_family(&genus0::family(2).unwrap()).unwrap();
    let cfg = VerifyConfig::new(100, 11, 1e-8);
    let r = reconstruct_f(&fam, &[(0, 1), (1, 2), (0, 2)], &cfg).unwrap();
    println!("f {:e}", r.max_residual);
    assert!(r.passed);
    let r = reconstruct_lambda(&fam, &cfg).unwrap();
    println!("lambda {:e}", r.max_residual);
    assert!(r.passed);
}

#[test]
fn genus1_reconstruction() {
    let fam = PotentialFamily::from_family(&genus1::family(2).unwrap()).unwrap();
    let cfg = VerifyConfig::new(100, 12, 1e-8);
    let n = fam.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let r = reconstruct_f(&fam, &pairs, &cfg).unwrap();
    println!("f {:e}", r.max_residual);
    assert!(r.passed);
    let r = reconstruct_lambda(&fam, &cfg).unwrap();
    println!("lambda {:e}", r.max_residual);
    assert!(r.passed);
}

#[test]
fn genus0_dimension_and_recomposition() {
    let fam = PotentialFamily::from_family(&genus0::family(2).unwrap()).unwrap();
    assert_eq!(fam.independence_rank(&fields(&fam, 1), 1).unwrap(), fam.len());
    for seed in 0..3 {
        let v = fields(&fam, seed);
        let d = dimension_d(&fam, [0, 1, 2], &v, 24, seed, 1e-9).unwrap();
        println!("D = {} {:?}", d.d, d.singular_values);
        assert!((2..=3).contains(&d.d));
        let hs = hydro_coefficients(&fam, [0, 1, 2], &v, 24, seed, 1e-9).unwrap();
        assert_eq!(hs.stacked_rank, hs.d);
        let held = fam.z_samples(&v, 20, 1000 + seed, &hs.z_samples).unwrap();
        let err = recomposition_error(&fam, [0, 1, 2], &hs, &held).unwrap();
        println!("held-out {err:e}");
        assert!(err < 1e-8);
    }
}

#[test]
fn criterion_accepts_potentials_and_rejects_square() {
    let cfg = VerifyConfig::new(50, 5, 1e-8);
    for family in [genus0::family(2).unwrap(), genus1::family(2).unwrap()] {
        let fam = PotentialFamily::from_family(&family).unwrap();
        let sys = build_system(&family.enhanced.base, 2, None).unwrap();
        let r = integrability_criterion(&fam, &sys, &cfg).unwrap();
        println!("{} {:e}", r.structure, r.max_residual);
        assert!(r.passed);
    }
    let family = genus0::family(2).unwrap();
    let mut fam = PotentialFamily::from_family(&family).unwrap();
    fam.potentials.push(Potential::new("p^2", FnJet::new(fam.m + 1, PoleSet::new(), |x| x[0] * x[0]).into_ref()));
    let sys = build_system(&family.enhanced.base, 2, None).unwrap();
    let r = integrability_criterion(&fam, &sys, &cfg).unwrap();
    println!("faulty {:e}", r.max_residual);
    assert!(!r.passed);
}

#[test]
fn dimension_is_robust() {
    let fam = PotentialFamily::from_family(&genus0::family(2).unwrap()).unwrap();
    let v = fields(&fam, 9);
    let base = dimension_d(&fam, [0, 1, 2], &v, 24, 9, 1e-9).unwrap().d;
    for ijk in [[1, 0, 2], [2, 1, 0], [1, 2, 0], [0, 2, 1]] {
        assert_eq!(dimension_d(&fam, ijk, &v, 24, 9, 1e-9).unwrap().d, base);
    }
    for tol in [1e-10, 1e-8, 1e-6] {
        assert_eq!(dimension_d(&fam, [0, 1, 2], &v, 24, 9, tol).unwrap().d, base);
    }
    assert!(dimension_d(&fam, [0, 1, 2], &v, 10, 9, 1e-9).is_err());
}

#[test]
fn criterion_agrees_with_potential_check() {
    let family = genus1::family(2).unwrap();
    let sys = build_system(&family.enhanced.base, 2, None).unwrap();
    let cfg = VerifyConfig::new(30, 7, 1e-8);
    let square = Potential::new("p^2", FnJet::new(family.enhanced.base.m() + 1, PoleSet::new(), |x| x[0] * x[0]).into_ref());
    for extra in [None, Some(square)] {
        let mut fam = PotentialFamily::from_family(&family).unwrap();
        let mut direct = true;
        for h in fam.potentials.iter().chain(extra.iter()) {
            direct &= verify_potential(&family.enhanced, h, &cfg).unwrap().passed;
        }
        fam.potentials.extend(extra);
        let crit = integrability_criterion(&fam, &sys, &cfg).unwrap().passed;
        assert_eq!(crit, direct);
    }
}
