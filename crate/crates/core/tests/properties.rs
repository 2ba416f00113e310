//! Property tests for the module invariants.

use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use warpgeom::distscal::{pairing_cos, total_scalar_cos};
use warpgeom::geodesics::{systole_lower_bound_cos, GeodesicState, SmoothWarp};
use warpgeom::harmonics::band_limited_random;
use warpgeom::means::{direction, essential_infimum, truncate, weak_pairing, TruncationLevel};
use warpgeom::metrics::{nnsc_check_cos, scalar_curvature_cos, scalar_curvature_soc, volume_cos, CosMetric, SocMetric};
use warpgeom::mina::torus_area;
use warpgeom::sequences::{generate, limit_proxy, FamilyKind};
use warpgeom::spheregrid::{
    integrate, integrate_circle, laplacian, lq_norm, rotate_from_pole, rotate_to_pole, CircleField, CircleGrid,
    PolarGrid, ScalarField,
};
use warpgeom::InequalityReport;

fn grid(n: usize) -> Arc<PolarGrid> {
    PolarGrid::square(n).unwrap()
}

fn sup_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn even_n() -> impl Strategy<Value = usize> {
    (4usize..=24).prop_map(|k| 2 * k)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn quadrature_of_constants(n in even_n(), c in 0.01f64..100.0) {
        let g = grid(n);
        let rel = integrate(&ScalarField::constant(&g, c)) / (4.0 * PI * c) - 1.0;
        prop_assert!(rel.abs() <= 1.0 / (n * n) as f64, "n = {n}, rel = {rel:e}");
        let cg = CircleGrid::new(n).unwrap();
        prop_assert!((integrate_circle(&CircleField::constant(&cg, c)) - 2.0 * PI * c).abs() <= 1e-12 * c);
    }

    #[test]
    fn discrete_stokes(n in even_n(), seed in 0u64..1000) {
        let f = band_limited_random(&grid(n), 3.0, 4, 0.5, seed);
        let total = integrate(&laplacian(&f));
        prop_assert!(total.abs() <= 1e-11 * f.max(), "{total:e}");
    }

    #[test]
    fn rotation_round_trip_refines(seed in 0u64..1000, r in 0.3f64..2.8, t in 0.0f64..(2.0 * PI)) {
        let x = direction(r, t);
        let errs: Vec<f64> = [32, 64]
            .iter()
            .map(|&n| {
                let f = band_limited_random(&grid(n), 0.0, 2, 1.0, seed);
                let back = rotate_from_pole(&rotate_to_pole(&f, x).unwrap(), x).unwrap();
                sup_diff(&f, &back)
            })
            .collect();
        prop_assert!(errs[1] <= errs[0] / 3.0 || errs[1] < 1e-12, "{errs:?}");
    }

    #[test]
    fn curvature_is_scale_invariant(n in even_n(), seed in 0u64..1000, k in -30i32..30) {
        // dyadic factors scale the samples exactly
        let lambda = 2f64.powi(k);
        let f = band_limited_random(&grid(n), 3.0, 3, 0.4, seed);
        let a = scalar_curvature_cos(&CosMetric::new(f.clone()).unwrap());
        let b = scalar_curvature_cos(&CosMetric::new(f.map(|v| lambda * v)).unwrap());
        prop_assert!(sup_diff(&a, &b) <= 1e-12);
    }

    #[test]
    fn constant_warps_have_product_curvature(n in even_n(), c in 0.05f64..20.0) {
        let g = grid(n);
        let s = scalar_curvature_cos(&CosMetric::new(ScalarField::constant(&g, c)).unwrap());
        prop_assert!(s.values().iter().all(|v| (v - 2.0).abs() <= 1e-12));
        let cg = CircleGrid::new(n).unwrap();
        let s = scalar_curvature_soc(&SocMetric::new(CircleField::constant(&cg, c)).unwrap());
        prop_assert!(s.values().iter().all(|v| (v - 2.0 / (c * c)).abs() <= 1e-12 * (1.0 + 2.0 / (c * c))));
    }

    #[test]
    fn nnsc_pass_bounds_curvature(n in even_n(), seed in 0u64..1000, c0 in 0.5f64..6.0) {
        let m = CosMetric::new(band_limited_random(&grid(n), c0, 3, 0.3, seed).map(|v| v.max(0.05))).unwrap();
        let rep = nnsc_check_cos(&m, None);
        let scal = scalar_curvature_cos(&m);
        if rep.pass {
            prop_assert!(scal.min() >= -2.0 * rep.tolerance / m.warp().min() - 1e-12);
        }
        // pointwise form: Scal f / 2 = f - Laplacian f
        let excess = scal.values().iter().zip(m.warp().values()).map(|(s, f)| -0.5 * s * f).fold(f64::NEG_INFINITY, f64::max);
        let margin = 1e-9 * (1.0 + rep.tolerance);
        if excess > rep.tolerance + margin {
            prop_assert!(!rep.pass);
        }
        if excess < rep.tolerance - margin {
            prop_assert!(rep.pass);
        }
    }

    #[test]
    fn volume_is_two_pi_l1(n in even_n(), seed in 0u64..1000) {
        let f = band_limited_random(&grid(n), 3.0, 3, 0.4, seed);
        let v = volume_cos(&CosMetric::new(f.clone()).unwrap());
        prop_assert!((v - 2.0 * PI * lq_norm(&f, 1.0).unwrap()).abs() <= 1e-12 * v);
    }

    #[test]
    fn report_pass_matches_slack(lhs in -10.0f64..10.0, rhs in -10.0f64..10.0, tol in 0.0f64..1.0) {
        let r = InequalityReport::new("p", lhs, rhs, tol);
        prop_assert_eq!(r.pass, r.slack >= -tol);
        prop_assert_eq!(r.slack, rhs - lhs);
    }

    #[test]
    fn truncation_is_idempotent(n in even_n(), seed in 0u64..1000, k in 2.0f64..4.0) {
        let f = band_limited_random(&grid(n), 3.0, 3, 0.5, seed);
        let level = TruncationLevel::new(k).unwrap();
        let once = truncate(&f, level);
        let twice = truncate(&once, level);
        prop_assert_eq!(twice.values(), once.values());
        prop_assert!(once.values().iter().zip(f.values()).all(|(a, b)| a <= b));
    }

    #[test]
    fn weak_pairing_of_truncated_nnsc(seed in 0u64..1000, useed in 0u64..1000, k in 4.8f64..5.3) {
        let g = grid(32);
        let f = band_limited_random(&g, 5.0, 3, 0.05, seed);
        prop_assume!(nnsc_check_cos(&CosMetric::new(f.clone()).unwrap(), None).pass);
        let u = band_limited_random(&g, 2.0, 3, 0.2, useed).map(|v| v.max(0.0));
        let p = weak_pairing(&truncate(&f, TruncationLevel::new(k).unwrap()), &u).unwrap();
        prop_assert!(p >= -1e-9, "{p}");
    }

    #[test]
    fn essential_infimum_brackets_min(n in even_n(), seed in 0u64..1000, delta in 1e-4f64..0.1) {
        let f = band_limited_random(&grid(n), 3.0, 3, 0.5, seed);
        let e = essential_infimum(&f, delta).unwrap();
        prop_assert!(e >= f.min() && e <= f.max());
        let below: f64 = f.grid().weights().iter().zip(f.values()).filter(|(_, &v)| v < e).map(|(w, _)| w).sum();
        prop_assert!(below <= delta * 4.0 * PI + 1e-12);
    }

    #[test]
    fn torus_area_vanishes_at_endpoints(seed in 0u64..1000, r in 0.2f64..2.9, t in 0.0f64..(2.0 * PI)) {
        let g = grid(32);
        let f = band_limited_random(&g, 3.0, 3, 0.4, seed);
        let x = direction(r, t);
        let bound = 4.0 * PI * PI * f.max() * (PI / (2.0 * g.n_r() as f64)).sin();
        let h = g.dr();
        prop_assert!(torus_area(&f, x, 0.5 * h).unwrap() <= bound);
        prop_assert!(torus_area(&f, x, PI - 0.5 * h).unwrap() <= bound);
    }

    #[test]
    fn total_scalar_is_four_pi_mass(n in even_n(), seed in 0u64..1000, lambda in 0.1f64..10.0) {
        let f = band_limited_random(&grid(n), 3.0, 3, 0.4, seed);
        let a = total_scalar_cos(&CosMetric::new(f.clone()).unwrap());
        prop_assert!((a - 4.0 * PI * integrate(&f)).abs() <= 1e-10 * a.abs());
        let b = total_scalar_cos(&CosMetric::new(f.map(|v| lambda * v)).unwrap());
        prop_assert!((b - lambda * a).abs() <= 1e-10 * b.abs());
    }

    #[test]
    fn nnsc_members_pair_nonnegatively(j in 1usize..40, useed in 0u64..1000) {
        let g = grid(64);
        let m = generate(&FamilyKind::LogSpike { floor: 1.0 }, j, &g).unwrap();
        prop_assume!(m.nnsc_verified());
        let ubar = band_limited_random(&g, 2.0, 3, 0.3, useed).map(|v| 2.0 * PI * v.max(0.0));
        let p = pairing_cos(&m.metric(), &ubar).unwrap();
        let tol = nnsc_check_cos(&m.metric(), None).tolerance * 4.0 * PI * ubar.max();
        prop_assert!(p >= -tol, "{p}");
    }

    #[test]
    fn log_spike_l1_bounded_by_limit(j in 1usize..100000) {
        let g = grid(64);
        let kind = FamilyKind::LogSpike { floor: 1.0 };
        let limit = lq_norm(&limit_proxy(&kind, &g).unwrap(), 1.0).unwrap();
        let member = lq_norm(&generate(&kind, j, &g).unwrap().field, 1.0).unwrap();
        prop_assert!(member <= limit + 1e-12);
    }

    #[test]
    fn geodesic_invariants(seed in 0u64..1000, alpha in 0.0f64..(2.0 * PI), psi in -1.5f64..1.5, speed in 0.1f64..3.0) {
        let g = grid(16);
        let f = band_limited_random(&g, 2.0, 3, 0.2, seed);
        let w = SmoothWarp::from_field(&f).unwrap();
        let u = GeodesicState::unit(&w, [PI / 2.0, 1.0, 0.0], alpha, psi);
        prop_assert!((u.energy - 1.0).abs() <= 1e-12);
        let vel = u.velocity.map(|v| speed * v);
        let s = GeodesicState::new(&w, u.position, vel);
        prop_assert!(s.energy > 0.0);
        prop_assert!((s.energy - speed * speed).abs() <= 1e-12 * speed * speed);
        prop_assert!((s.killing_momentum - speed * u.killing_momentum).abs() <= 1e-12 * (1.0 + s.killing_momentum.abs()));
    }

    #[test]
    fn systole_is_min_of_branches(n in even_n(), c in 0.2f64..3.0, seed in 0u64..1000) {
        let m = CosMetric::new(band_limited_random(&grid(n), c, 2, 0.1 * c, seed).map(|v| v.max(0.05))).unwrap();
        let s = systole_lower_bound_cos(&m);
        prop_assert_eq!(s.value, s.base.min(s.fiber));
        prop_assert_eq!(s.fiber, 2.0 * PI * m.warp().min());
    }
}
