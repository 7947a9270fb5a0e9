use proptest::prelude::*;

use whitham_gt::catalog::{benney, genus0, genus1};
use whitham_gt::gt::algebroid::algebroid_constants;
use whitham_gt::gt::collide::{neville_at_zero, partitions};
use whitham_gt::gt::verify::{bracket_residual, cocycle_residual};
use whitham_gt::kernel::jet::{CauchyConfig, FnJet, PoleSet};
use whitham_gt::kernel::sampling::{sample_points, Region};
use whitham_gt::kernel::{path_integrate, rho, PathSpec};
use whitham_gt::{c64, VerificationReport, C64};

fn point(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| c64(a, b))
}

fn far(pts: &[C64], sep: f64) -> bool {
    pts.iter().enumerate().all(|(i, a)| pts[i + 1..].iter().all(|b| (a - b).norm() > sep))
}

const BELL: [f64; 9] = [1.0, 1.0, 2.0, 5.0, 15.0, 52.0, 203.0, 877.0, 4140.0];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn report_flag_is_max_below_tol(res in prop::collection::vec(0.0..1.0f64, 1..20), tol in 1e-3..1.0f64, nan in any::<bool>()) {
        let mut res = res;
        if nan {
            res.push(f64::NAN);
        }
        let r = VerificationReport::from_residuals("x", "s", &res, tol, 0);
        let expect = !nan && res.iter().all(|&x| x < tol);
        prop_assert_eq!(r.passed, expect);
    }

    #[test]
    fn partition_weights_sum_to_bell(s in 1usize..9) {
        let parts = partitions(s);
        for (idx, _) in &parts {
            prop_assert_eq!(idx.iter().enumerate().map(|(k, i)| (k + 1) * i).sum::<usize>(), s);
        }
        let total: f64 = parts.iter().map(|(_, w)| w).sum();
        prop_assert!((total - BELL[s]).abs() < 1e-9);
    }

    #[test]
    fn neville_is_exact_on_polynomials(coeffs in prop::collection::vec(point(2.0), 1..5)) {
        let eps: Vec<f64> = (0..6).map(|k| 0.04 * 0.5f64.powi(k)).collect();
        let ys: Vec<C64> = eps.iter().map(|&e| coeffs.iter().rev().fold(c64(0.0, 0.0), |acc, c| acc * e + c)).collect();
        let (est, _) = neville_at_zero(&eps, &ys);
        prop_assert!((est - coeffs[0]).norm() < 1e-9);
    }

    #[test]
    fn sampling_is_deterministic_and_separated(seed in any::<u64>(), n in 1usize..8) {
        let ex = [c64(0.0, 0.0), c64(1.0, 0.0)];
        let a = sample_points(&Region::square(2.0), n, seed, &ex, 0.2).unwrap();
        let b = sample_points(&Region::square(2.0), n, seed, &ex, 0.2).unwrap();
        prop_assert_eq!(&a, &b);
        let mut all = a.clone();
        all.extend_from_slice(&ex);
        prop_assert!(far(&all, 0.2 - 1e-15));
    }

    #[test]
    fn rho_periods(p in point(0.4), re in -0.25..0.25f64, im in 0.5..3.0f64) {
        prop_assume!(p.norm() > 0.1);
        let tau = c64(re, im);
        let r = rho(p, tau).unwrap();
        prop_assert!((rho(p + 1.0, tau).unwrap() - r).norm() < 1e-10 * r.norm().max(1.0));
        prop_assert!((rho(p + tau, tau).unwrap() - r + c64(0.0, std::f64::consts::TAU)).norm() < 1e-10 * r.norm().max(1.0));
    }

    #[test]
    fn path_reversal_negates(vs in prop::collection::vec(point(1.5), 2..5)) {
        let e = FnJet::new(1, PoleSet::new(), |x| (x[0] * 0.7).exp() * x[0]);
        let path = PathSpec::polyline(vs, 16);
        let a = path_integrate(&e, 0, &[c64(0.0, 0.0)], &path, 1e-9).unwrap();
        let b = path_integrate(&e, 0, &[c64(0.0, 0.0)], &path.reversed(), 1e-9).unwrap();
        prop_assert!((a + b).norm() < 1e-13 * a.norm().max(1.0));
    }

    #[test]
    fn genus0_axioms_at_arbitrary_points(p1 in point(2.0), p2 in point(2.0), p3 in point(2.0), u in point(1.5)) {
        let s = genus0::structure(1).unwrap();
        let v = [u];
        prop_assume!(far(&[p1, p2, p3, u, c64(0.0, 0.0), c64(1.0, 0.0)], 0.2));
        let c = CauchyConfig::default();
        prop_assert!(bracket_residual(&s, p1, p2, &v, &c) < 1e-8);
        prop_assert!(cocycle_residual(&s, [p1, p2, p3], &v, &c) < 1e-8);
    }

    #[test]
    fn benney_axioms_at_arbitrary_points(p1 in point(2.0), p2 in point(2.0), p3 in point(2.0), u in point(1.5), w in point(1.5)) {
        let s = benney::structure(2).unwrap();
        prop_assume!(far(&[p1, p2, p3, u, w], 0.2));
        let c = CauchyConfig::default();
        prop_assert!(bracket_residual(&s, p1, p2, &[u, w], &c) < 1e-8);
        prop_assert!(cocycle_residual(&s, [p1, p2, p3], &[u, w], &c) < 1e-8);
    }

    #[test]
    fn genus1_f_is_periodic(p1 in point(0.35), p2 in point(0.35), re in -0.25..0.25f64, im in 0.5..3.0f64, u in point(0.3)) {
        let s = genus1::structure(1).unwrap();
        let v = [c64(re, im), u];
        prop_assume!(far(&[p1, p2, u, c64(0.0, 0.0)], 0.15));
        let f = s.f_at(p1, p2, &v);
        prop_assert!((s.f_at(p1 + 1.0, p2, &v) - f).norm() < 1e-9 * f.norm().max(1.0));
        prop_assert!((s.f_at(p1 + v[0], p2, &v) - f).norm() < 1e-9 * f.norm().max(1.0));
    }

    #[test]
    fn algebroid_table_antisymmetric(z in point(1.5), u in point(1.5)) {
        prop_assume!(far(&[z, u, c64(0.0, 0.0), c64(1.0, 0.0)], 0.3));
        let t = algebroid_constants(&genus0::structure(1).unwrap(), z, &[u], 3).unwrap();
        for i in 1..=3 {
            for j in 1..=3 {
                let (a, b) = (t.predicted_bracket(i, j), t.predicted_bracket(j, i));
                prop_assert!(a.iter().zip(&b).all(|(x, y)| *x == -*y));
            }
        }
    }
}
