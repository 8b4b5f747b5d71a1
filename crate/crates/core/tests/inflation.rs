use std::f64::consts::PI;

use nlsinflate::inflation::{
    critical_index, find_tau, frame_map_check, make_datum, oscillation_integrals, predict_exponent, sobolev_index,
    ScalingParams,
};
use nlsinflate::limit::{LimitConfig, LimitSolver};
use nlsinflate::spectral::homogeneous_norm;
use nlsinflate::{Complex64, Field, Grid};
use proptest::prelude::*;

fn gaussian(g: Grid) -> Field {
    Field::from_fn(g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0))
}

#[test]
fn indices() {
    assert!((critical_index(1, 3) - 1.0 / 6.0).abs() < 1e-15);
    assert!((sobolev_index(3, 3) - 9.0 / 8.0).abs() < 1e-15);
    let p = ScalingParams::new(1, 3, 0.1, 0.25).unwrap();
    assert!((p.eps() - 0.25f64.powf(0.2)).abs() < 1e-15);
    assert!((p.gain() - 1.2).abs() < 1e-14);
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(ScalingParams::new(1, 2, 0.1, 0.5).is_err());
    assert!(ScalingParams::new(1, 3, 0.2, 0.5).is_err());
    assert!(ScalingParams::new(1, 3, 0.0, 0.5).is_err());
    assert!(ScalingParams::new(1, 3, 0.1, 0.0).is_err());
    assert!(ScalingParams::new(1, 3, 0.1, 1.5).is_err());
    let damped = ScalingParams { log_damping: true, ..ScalingParams::new(1, 3, 0.1, 1.0).unwrap() };
    assert!(damped.validate().is_err());
    let g = Grid::new(1, 256, 16.0).unwrap();
    assert!(make_datum(&ScalingParams::new(1, 3, 0.1, 0.3).unwrap(), &gaussian(g)).is_err());
}

#[test]
fn datum_keeps_critical_norm_fixed() {
    let g = Grid::new(1, 1024, 16.0).unwrap();
    let a0 = gaussian(g);
    let p1 = ScalingParams::new(1, 3, 0.1, 1.0).unwrap();
    let same = make_datum(&p1, &a0).unwrap();
    assert_eq!(same.values(), a0.values());
    assert_eq!(same.grid(), a0.grid());
    let reference = homogeneous_norm(&a0, 0.1).unwrap();
    for j in 1..=6 {
        let h = 2f64.powi(-j);
        let d = make_datum(&p1.with_h(h).unwrap(), &a0).unwrap();
        assert!((d.grid().box_length() - 16.0 * h).abs() < 1e-12);
        let n = homogeneous_norm(&d, 0.1).unwrap();
        assert!((n / reference - 1.0).abs() < 1e-12, "h = {h}: {n} vs {reference}");
        let l2 = homogeneous_norm(&d, 0.0).unwrap();
        assert!((l2 / (h.powf(0.1) * homogeneous_norm(&a0, 0.0).unwrap()) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn log_damping_shrinks_the_datum() {
    let g = Grid::new(1, 512, 16.0).unwrap();
    let a0 = gaussian(g);
    let base = ScalingParams { log_damping: true, ..ScalingParams::new(1, 3, 0.1, 0.5).unwrap() };
    let norms: Vec<f64> = (1..=6)
        .map(|j| homogeneous_norm(&make_datum(&base.with_h(2f64.powi(-j)).unwrap(), &a0).unwrap(), 0.1).unwrap())
        .collect();
    assert!(norms.windows(2).all(|w| w[1] < w[0]), "{norms:?}");
    let undamped = homogeneous_norm(&a0, 0.1).unwrap();
    assert!((norms[5] * (64f64).ln() / undamped - 1.0).abs() < 1e-12);
}

#[test]
fn one_step_frame_map_is_exact() {
    let g = Grid::new(1, 1024, 16.0).unwrap();
    let p = ScalingParams::new(1, 3, 0.1, 0.5).unwrap();
    let c = frame_map_check(&p, &gaussian(g), 1e-3, 1).unwrap();
    assert!(c.field_discrepancy < 1e-6, "{c:?}");
    assert!(c.norm_ledger < 1e-6, "{c:?}");
    let c = frame_map_check(&p.with_h(1.0 / 8.0).unwrap(), &gaussian(g), 1e-3, 20).unwrap();
    assert!(c.field_discrepancy < 1e-6, "{c:?}");
}

#[test]
fn oscillation_integral_matches_small_time_expansion() {
    let g = Grid::new(1, 1024, 16.0).unwrap();
    let solver = LimitSolver::new(LimitConfig { dt: Some(1e-3), ..LimitConfig::new(3, 0.6) }, g).unwrap();
    let times: Vec<f64> = (0..=60).map(|j| 0.01 * j as f64).collect();
    let traj = solver.solve(&gaussian(g), &times).unwrap();
    let t = 0.05;
    let state = traj.states.iter().find(|s| (s.t - t).abs() < 1e-12).unwrap();
    // v ≈ 12 t x e^{−6x²}, a ≈ e^{−x²}: ∫v²a² ≈ 144 t² √π / (2·14^{3/2})
    let want = 144.0 * t * t * PI.sqrt() / (2.0 * 14f64.powf(1.5));
    let got = oscillation_integrals(state, &[1.0])[0];
    assert!((got / want - 1.0).abs() < 0.1, "{got} vs {want}");
    assert!((oscillation_integrals(state, &[0.0])[0] - (PI / 2.0).sqrt()).abs() < 1e-8);

    let tau = find_tau(&traj, &[0.5, 1.0], 0.25).unwrap();
    assert!(tau > 0.0 && tau <= traj.t_valid);
    assert!(find_tau(&traj, &[1.5], 0.25).is_err());
}

#[test]
fn sobolev_threshold_is_one() {
    let p = ScalingParams::new(3, 3, 9.0 / 8.0, 0.5).unwrap();
    let (threshold, _) = predict_exponent(&p, 0.0);
    assert!((threshold - 1.0).abs() < 1e-12);
    let (_, e0) = predict_exponent(&ScalingParams::new(1, 3, 0.1, 0.5).unwrap(), 0.0);
    assert_eq!(e0, 0.1);
}

proptest! {
    #[test]
    fn exponent_vanishes_at_threshold(n in 1u32..4, sigma in 1u32..6, frac in 0.01f64..0.99) {
        let sc = critical_index(n, sigma);
        prop_assume!(sc > 0.0);
        let p = ScalingParams::new(n, sigma, frac * sc, 0.5).unwrap();
        let (threshold, _) = predict_exponent(&p, 0.0);
        let (_, e) = predict_exponent(&p, threshold);
        prop_assert!(e.abs() < 1e-12);
        let (_, above) = predict_exponent(&p, threshold + 0.1);
        prop_assert!(above < 0.0);
    }
}
