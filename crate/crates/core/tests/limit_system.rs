use nlsinflate::limit::{
    muk_consistency, phase_consistency, smoothness_monitor, LimitConfig, LimitSolver, LimitState,
};
use nlsinflate::spectral::{curl_2d, real_gradient};
use nlsinflate::{Complex64, Field, Grid, RealField};

fn gaussian(grid: Grid, amp: f64) -> Field {
    Field::from_fn(grid, |x| Complex64::new(amp * (-x.iter().map(|c| c * c).sum::<f64>()).exp(), 0.0))
}

#[test]
fn reference_run_consistency() {
    let g = Grid::new(1, 2048, 16.0).unwrap();
    let a0 = gaussian(g, 1.0);
    let solver = LimitSolver::new(LimitConfig { dt: Some(1e-3), ..LimitConfig::new(3, 0.3) }, g).unwrap();
    let times: Vec<f64> = (0..=30).map(|j| 0.01 * j as f64).collect();
    let traj = solver.solve(&a0, &times).unwrap();
    assert_eq!(traj.states.len(), times.len());
    assert!(muk_consistency(&traj) < 1e-6);
    assert!(phase_consistency(&traj).unwrap() < 1e-8);
    let (m0, e0) = (traj.states[0].mass(), traj.states[0].energy(3));
    for s in &traj.states {
        assert!((s.mass() / m0 - 1.0).abs() < 1e-8);
        assert!((s.energy(3) / e0 - 1.0).abs() < 1e-8);
    }
    let monitor: Vec<f64> = traj.monitor.iter().map(|m| m.1).collect();
    assert!(monitor.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9)), "monitor should grow smoothly");
}

#[test]
fn initial_velocity_rate() {
    let g = Grid::new(1, 512, 16.0).unwrap();
    let a0 = gaussian(g, 1.0);
    let solver = LimitSolver::new(LimitConfig::new(3, 1.0), g).unwrap();
    let rates = solver.rhs(&LimitState::initial(&a0, 3)).unwrap();
    let pressure = RealField::from_fn(g, |x| (-6.0 * x[0] * x[0]).exp());
    let want = real_gradient(&pressure, 1.0).unwrap();
    for (a, b) in rates.v[0].iter().zip(want.component(0)) {
        assert!((a + b).abs() < 1e-12);
    }
}

fn taylor_residual(t: f64) -> f64 {
    let g = Grid::new(1, 1024, 16.0).unwrap();
    let a0 = gaussian(g, 1.0);
    let solver = LimitSolver::new(LimitConfig { dt: Some(t / 40.0), ..LimitConfig::new(3, t) }, g).unwrap();
    let traj = solver.solve(&a0, &[t]).unwrap();
    let v = traj.states[0].v.component(0);
    // v(t) ≈ −t ∂ₓ(a₀⁶) = 12 t x e^{−6x²}
    let nodes = g.axis_nodes();
    v.iter()
        .zip(&nodes)
        .map(|(v, x)| (v - 12.0 * t * x * (-6.0 * x * x).exp()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn small_time_velocity_is_third_order() {
    let r: Vec<f64> = [0.04, 0.02, 0.01].iter().map(|&t| taylor_residual(t) / (t * t * t)).collect();
    assert!((r[1] / r[0] - 1.0).abs() < 0.1, "{r:?}");
    assert!((r[2] / r[1] - 1.0).abs() < 0.05, "{r:?}");
}

#[test]
fn two_dimensional_velocity_stays_irrotational() {
    let g = Grid::new(2, 256, 12.0).unwrap();
    let a0 = gaussian(g, 1.0);
    let solver = LimitSolver::new(LimitConfig::new(2, 0.1), g).unwrap();
    let traj = solver.solve(&a0, &[0.05, 0.1]).unwrap();
    for s in &traj.states {
        let curl = curl_2d(&s.v).unwrap();
        assert!(curl.max_modulus() < 1e-10);
    }
    let d = muk_consistency(&traj);
    assert!(d < 1e-6, "MUK defect {d:e}");
}

#[test]
fn zero_speed_of_propagation() {
    let g = Grid::new(1, 1024, 8.0).unwrap();
    let bump = |x: f64| if x.abs() < 1.0 { (1.0 - 1.0 / (1.0 - x * x)).exp() } else { 0.0 };
    let a0 = Field::from_fn(g, |x| Complex64::new(bump(x[0]), 0.0));
    let cfg = LimitConfig { dealias: false, ..LimitConfig::new(1, 0.2) };
    let solver = LimitSolver::new(cfg, g).unwrap();
    let times: Vec<f64> = (1..=4).map(|j| 0.05 * j as f64).collect();
    let traj = solver.solve(&a0, &times).unwrap();
    let nodes = g.axis_nodes();
    for s in &traj.states {
        for (i, x) in nodes.iter().enumerate() {
            if x.abs() > 1.0 {
                assert!(s.a.values()[i].norm() < 1e-9, "a leaks at x = {x}, t = {}", s.t);
                assert!(s.v.component(0)[i].abs() < 1e-9, "v leaks at x = {x}, t = {}", s.t);
            }
        }
    }
}

fn doubling_time(amp: f64) -> f64 {
    let g = Grid::new(1, 1024, 16.0).unwrap();
    let a0 = gaussian(g, amp);
    let solver = LimitSolver::new(LimitConfig::new(3, 1.0), g).unwrap();
    let traj = solver.solve(&a0, &[]).unwrap();
    let m0 = traj.initial_monitor();
    traj.monitor.iter().find(|m| m.1 > 2.0 * m0).expect("monitor doubles").0
}

#[test]
fn larger_amplitude_degrades_faster() {
    assert!(doubling_time(1.2) < doubling_time(1.0));
}

#[test]
fn vacuum_monitor_is_zero() {
    let g = Grid::new(1, 64, 8.0).unwrap();
    assert_eq!(smoothness_monitor(&LimitState::initial(&Field::zeros(g), 2)).unwrap(), 0.0);
    let solver = LimitSolver::new(LimitConfig::new(2, 0.5), g).unwrap();
    let traj = solver.solve(&Field::zeros(g), &[0.0, 0.5]).unwrap();
    assert!(!traj.tripped);
    assert_eq!(traj.t_valid, 0.5);
    assert_eq!(muk_consistency(&traj), 0.0);
}

#[test]
fn reference_validity_window() {
    let g = Grid::new(1, 2048, 16.0).unwrap();
    let solver = LimitSolver::new(LimitConfig { dt: Some(1e-3), ..LimitConfig::new(3, 0.6) }, g).unwrap();
    let traj = solver.solve(&gaussian(g, 1.0), &[]).unwrap();
    assert!(traj.tripped);
    assert!((traj.t_valid - 0.339).abs() < 0.339 * 0.05, "t_valid = {}", traj.t_valid);
    assert!((traj.initial_monitor() - 1.48565).abs() < 1e-4);
}
