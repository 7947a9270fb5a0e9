use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use whitham_gt::catalog::{genus0, genus1, FamilyId, StructureSpec};
use whitham_gt::gibbons_tsarev::{build_system, compatibility_residual, random_states};
use whitham_gt::gt::verify::bracket_residual;
use whitham_gt::gt::VerifyConfig;
use whitham_gt::hierarchy::{dimension_d, PotentialFamily};
use whitham_gt::hyperelliptic::{periods, CurveModuli, DEFAULT_PANELS};
use whitham_gt::kernel::jet::{FnJet, PoleSet};
use whitham_gt::kernel::sampling::rng;
use whitham_gt::kernel::{cauchy_derivative, theta, CauchyConfig};
use whitham_gt::c64;

fn kernel(c: &mut Criterion) {
    let e = FnJet::new(1, PoleSet::new().point(0, c64(1.0, 0.0)), |x| x[0].exp() / (x[0] - 1.0));
    c.bench_function("cauchy_derivative order 3", |b| {
        b.iter(|| cauchy_derivative(&e, 0, black_box(&[c64(0.2, 0.1)]), 3, None, 32, None).unwrap())
    });
    c.bench_function("theta", |b| b.iter(|| theta(black_box(c64(0.3, 0.2)), c64(0.1, 1.1), 1e-12).unwrap()));
}

fn axioms(c: &mut Criterion) {
    let cfg = CauchyConfig::default();
    let g0 = genus0::structure(3).unwrap();
    let v0 = [c64(-0.8, 0.5), c64(1.3, -0.6), c64(0.4, 1.2)];
    c.bench_function("bracket residual genus0 n=3", |b| {
        b.iter(|| bracket_residual(&g0, black_box(c64(0.6, -0.9)), c64(-1.4, 0.3), &v0, &cfg))
    });
    let g1 = genus1::structure(1).unwrap();
    let v1 = [c64(0.05, 1.2), c64(0.2, 0.1)];
    c.bench_function("bracket residual genus1 n=1", |b| {
        b.iter(|| bracket_residual(&g1, black_box(c64(0.3, -0.2)), c64(-0.25, 0.15), &v1, &cfg))
    });
}

fn gibbons_tsarev(c: &mut Criterion) {
    let s = StructureSpec::new(FamilyId::Benney, 2).structure().unwrap();
    let sys = build_system(&s, 3, None).unwrap();
    let st = random_states(&sys, &VerifyConfig::new(1, 1, 0.0)).unwrap().remove(0);
    c.bench_function("compatibility residual benney M=3", |b| b.iter(|| compatibility_residual(&sys, black_box(&st), 1e-9).unwrap()));
}

fn geometry(c: &mut Criterion) {
    let m = CurveModuli::sample(3).unwrap();
    c.bench_function("genus2 periods", |b| b.iter(|| periods(black_box(&m), DEFAULT_PANELS).unwrap()));
    let fam = PotentialFamily::from_family(&genus0::family(2).unwrap()).unwrap();
    let v = fam.sampler.draw_fields(&mut rng(1)).unwrap();
    c.bench_function("dimension D genus0 m=2", |b| b.iter(|| dimension_d(&fam, [0, 1, 2], black_box(&v), 24, 1, 1e-9).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = kernel, axioms, gibbons_tsarev, geometry
}
criterion_main!(benches);
