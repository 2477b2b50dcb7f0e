mod common;

use common::{rng, state};
use fuelcon::attainable::margin;
use fuelcon::*;
use proptest::prelude::*;
use rand::Rng;

fn reach(x: f64, v: f64, beta: f64, tf: f64) -> ReachSpec {
    ReachSpec::new(state(x, v), beta, tf).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn witness_reaches_target(x in -20.0..20.0f64, v in -5.0..5.0f64, beta in 0.5..8.0f64, tf in 0.1..12.0f64,
                              s in 0.0..1.0f64, q in 0.0..1.0f64) {
        let r = reach(x, v, beta, tf);
        let band = velocity_band(&r);
        let vt = band.v_lo + s * band.width();
        let ext = slice_extent(&r, vt).unwrap();
        let target = state(ext.x_lo + q * ext.width(), vt);
        let c = contains(&r, &target);
        prop_assert!(c.inside, "margin {}", c.margin);
        let p = c.witness.expect("witness");
        prop_assert!(p.fuel() <= beta + 1e-6);
        prop_assert!((p.tf - tf).abs() <= 1e-9 * (1.0 + tf));
        prop_assert!(apply_plan(r.x0, &p).dist(&target) <= 1e-6 * (1.0 + target.scale()));
    }

    #[test]
    fn polyline_vertices_are_members(x in -20.0..20.0f64, v in -5.0..5.0f64, beta in 0.5..8.0f64, tf in 0.1..12.0f64) {
        let r = reach(x, v, beta, tf);
        let poly = boundary_polyline(&r, 48);
        prop_assert_eq!(poly.first(), poly.last());
        for p in &poly {
            prop_assert!(margin(&r, p).abs() <= 1e-6 * (1.0 + p.scale()), "{:?} margin {}", p, margin(&r, p));
        }
    }

    #[test]
    fn sets_grow_with_time(x in -20.0..20.0f64, v in -5.0..5.0f64, beta in 0.5..8.0f64, tf in 0.1..12.0f64,
                           dt in 0.0..5.0f64, s in 0.0..1.0f64, q in 0.0..1.0f64) {
        let r = reach(x, v, beta, tf);
        let band = velocity_band(&r);
        let vt = band.v_lo + s * band.width();
        let ext = slice_extent(&r, vt).unwrap();
        let p = state(ext.x_lo + q * ext.width(), vt);
        // Coasting the point forward stays attainable from the same start.
        let later = reach(x, v, beta, tf + dt);
        prop_assert!(contains(&later, &p.drift(dt)).inside);
    }
}

#[test]
fn oracle_endpoints_lie_in_the_set() {
    let mut r = rng(11);
    for _ in 0..40 {
        let x0 = state(r.random_range(-10.0..10.0), r.random_range(-5.0..5.0));
        let beta = r.random_range(0.5..6.0);
        let tf = r.random_range(0.2..8.0);
        let spec = ReachSpec::new(x0, beta, tf).unwrap();
        for p in oracle_reachable(x0, beta, tf, 0.25) {
            assert!(margin(&spec, &p) >= -1e-9 * (1.0 + p.scale()), "{p:?} outside {spec:?}");
        }
    }
}

#[test]
fn oracle_slice_hulls_match_extents() {
    let x0 = state(1.0, -0.5);
    let (beta, tf, h) = (3.0, 5.0, 0.05);
    let spec = ReachSpec::new(x0, beta, tf).unwrap();
    let pts = oracle_reachable(x0, beta, tf, h);
    let mut checked = 0;
    for k in -60i32..=60 {
        let v = x0.vel + k as f64 * h;
        let at: Vec<f64> = pts.iter().filter(|p| (p.vel - v).abs() < 1e-9).map(|p| p.pos).collect();
        if at.is_empty() {
            continue;
        }
        let lo = at.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = at.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ext = slice_extent(&spec, v).unwrap();
        assert!((lo - ext.x_lo).abs() <= 2.0 * tf * h && (hi - ext.x_hi).abs() <= 2.0 * tf * h, "v {v}: {lo}..{hi} vs {ext:?}");
        checked += 1;
    }
    assert_eq!(checked, 121);
}

#[test]
fn band_edge_slice_matches_oracle() {
    let x0 = state(0.0, 0.0);
    let spec = ReachSpec::new(x0, 50.0, 100.0).unwrap();
    let ext = slice_extent(&spec, 50.0).unwrap();
    let near: Vec<f64> =
        oracle_reachable(x0, 50.0, 100.0, 0.5).into_iter().filter(|p| (p.vel - 50.0).abs() < 0.05).map(|p| p.pos).collect();
    assert!(!near.is_empty());
    let lo = near.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = near.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!((lo - ext.x_lo).abs() <= 2.0 && (hi - ext.x_hi).abs() <= 2.0, "{lo}..{hi} vs {ext:?}");
    assert!((ext.width() - 50.0 * 50.0).abs() < 1e-6);
}

#[test]
fn slices_are_continuous_across_regimes() {
    let mut r = rng(12);
    for _ in 0..200 {
        let x0 = state(r.random_range(-10.0..10.0), r.random_range(-5.0..5.0));
        let beta = r.random_range(0.5..6.0);
        let v = x0.vel + r.random_range(-0.4..0.4) * beta;
        let a = slice_extent(&ReachSpec::new(x0, beta, beta * (1.0 - 1e-9)).unwrap(), v).unwrap();
        let b = slice_extent(&ReachSpec::new(x0, beta, beta * (1.0 + 1e-9)).unwrap(), v).unwrap();
        assert!((a.x_lo - b.x_lo).abs() < 1e-6 && (a.x_hi - b.x_hi).abs() < 1e-6);
    }
}
