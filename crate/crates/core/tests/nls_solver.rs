use std::f64::consts::PI;

use nlsinflate::nls::{mass, run, NlsConfig, NlsState, Potential};
use nlsinflate::spectral::sobolev_seminorm;
use nlsinflate::{Complex64, Field, Grid};

fn gaussian(grid: Grid) -> Field {
    Field::from_fn(grid, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0))
}

fn rel_l2(a: &Field, b: &Field) -> f64 {
    let d: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm_sqr()).sum();
    let n: f64 = b.values().iter().map(|y| y.norm_sqr()).sum();
    (d / n).sqrt()
}

#[test]
fn gaussian_mass() {
    let g = Grid::new(1, 256, 20.0).unwrap();
    assert!((mass(&gaussian(g)) - (PI / 2.0).sqrt()).abs() < 1e-13);
    assert_eq!(mass(&Field::zeros(g)), 0.0);
}

#[test]
fn gaussian_energy_matches_closed_form() {
    let g = Grid::new(1, 512, 20.0).unwrap();
    let s = NlsState::new(NlsConfig::new(0.1, 3, 1e-3, 1.0), gaussian(g)).unwrap();
    // ½ε²∫|∇e^{−x²}|² + ¼∫e^{−8x²}
    let want = 0.5 * 0.01 * (PI / 2.0).sqrt() + 0.25 * (PI / 8.0).sqrt();
    assert!((s.energy().unwrap() - want).abs() < 1e-13);
}

#[test]
fn plane_wave_is_reproduced_exactly() {
    let g = Grid::new(1, 64, 4.0 * PI).unwrap();
    let (eps, xi0, t) = (0.2, 5.0, 0.3);
    let u0 = Field::from_fn(g, |x| Complex64::from_polar(1.0, xi0 * x[0]));
    let out = run(NlsConfig::new(eps, 2, 0.01, t), u0, &[t]).unwrap();
    let want = Field::from_fn(g, |x| Complex64::from_polar(1.0, xi0 * x[0] - eps * t * xi0 * xi0 / 2.0 - t / eps));
    assert!(rel_l2(out[0].u(), &want) < 1e-12);
}

#[test]
fn sample_zero_returns_initial_state() {
    let g = Grid::new(1, 128, 16.0).unwrap();
    let u0 = gaussian(g);
    let out = run(NlsConfig::new(0.1, 3, 0.01, 1.0), u0.clone(), &[0.0]).unwrap();
    assert_eq!(out[0].t(), 0.0);
    assert_eq!(out[0].u().values(), u0.values());
}

#[test]
fn mass_is_conserved_over_a_thousand_steps() {
    let g = Grid::new(1, 1024, 16.0).unwrap();
    let cfg = NlsConfig::new(0.05, 3, 0.005, 5.0);
    let mut s = NlsState::new(cfg, gaussian(g)).unwrap();
    let m0 = s.mass();
    for _ in 0..1000 {
        s.step().unwrap();
    }
    assert!((s.mass() - m0).abs() / m0 < 1e-10);
}

fn energy_drift(dt: f64) -> f64 {
    let g = Grid::new(1, 512, 16.0).unwrap();
    let mut s = NlsState::new(NlsConfig::new(0.1, 3, dt, 0.5), gaussian(g)).unwrap();
    let e0 = s.energy().unwrap();
    s.advance_to(0.5).unwrap();
    (s.energy().unwrap() - e0).abs() / e0
}

#[test]
fn energy_drift_is_second_order() {
    let a = energy_drift(0.01);
    let b = energy_drift(0.005);
    let ratio = a / b;
    assert!((3.5..=4.5).contains(&ratio), "drift {a:e} → {b:e}, ratio {ratio}");
}

#[test]
fn gauge_covariance() {
    let g = Grid::new(1, 256, 16.0).unwrap();
    let cfg = NlsConfig::new(0.1, 3, 0.005, 0.3);
    let rot = Complex64::from_polar(1.0, 0.7);
    let a = run(cfg, gaussian(g), &[0.3]).unwrap();
    let b = run(cfg, gaussian(g).scale(rot), &[0.3]).unwrap();
    let rotated = a[0].u().scale(rot);
    assert!(rel_l2(b[0].u(), &rotated) < 1e-13);
}

#[test]
fn saturation_gap_shrinks_monotonically() {
    let g = Grid::new(1, 512, 16.0).unwrap();
    let t = 0.2;
    let base = NlsConfig::new(0.1, 2, 2e-3, t);
    let reference = run(base, gaussian(g), &[t]).unwrap().remove(0);
    let mut gaps = Vec::new();
    for delta in [0.8, 0.4, 0.2, 0.1, 0.05] {
        let cfg = NlsConfig { delta, ..base };
        let s = run(cfg, gaussian(g), &[t]).unwrap().remove(0);
        gaps.push(rel_l2(s.u(), reference.u()));
    }
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    // f − f_δ = O(δ^σ) with σ = 2
    let last = gaps[gaps.len() - 2] / gaps[gaps.len() - 1];
    assert!((3.5..4.5).contains(&last), "{gaps:?}");
}

#[test]
fn free_phase_regime() {
    let g = Grid::new(1, 2048, 16.0).unwrap();
    let eps: f64 = 0.01;
    let t = 0.2 * eps.cbrt();
    let a0 = gaussian(g);
    let cfg = NlsConfig::new(eps, 3, 1e-4, t);
    let out = run(cfg, a0.clone(), &[t]).unwrap();
    let w = a0.map(|z: Complex64| z * Complex64::from_polar(1.0, -t * z.norm_sqr().powi(3) / eps));
    let err = rel_l2(out[0].u(), &w);
    assert!(err < 0.05, "free-phase mismatch {err}");
}

#[test]
fn harmonic_linear_benchmark_is_close_at_small_eps() {
    let g = Grid::new(1, 4096, 12.0).unwrap();
    let eps = 1.0 / 64.0;
    let cfg = NlsConfig { potential: Potential::Harmonic, linear: true, ..NlsConfig::new(eps, 1, 0.1 * eps / 18.0, 0.5) };
    let out = run(cfg, gaussian(g), &[0.5]).unwrap();
    let measured = sobolev_seminorm(out[0].u(), 1.0, eps).unwrap();
    let x_a0 = (0.25 * (PI / 2.0).sqrt()).sqrt();
    let quad: f64 = (-4000..=4000)
        .map(|j| {
            let x = j as f64 * 1e-3;
            x * x * (-2.0 * x * x).exp() * 1e-3
        })
        .sum();
    assert!((x_a0 - quad.sqrt()).abs() < 1e-12);
    assert!((x_a0 - 0.5598).abs() < 1e-4);
    assert!((measured - 0.5f64.sin() * x_a0).abs() < eps);
}

#[test]
fn nan_input_is_rejected() {
    let g = Grid::new(1, 16, 4.0).unwrap();
    let mut v = vec![Complex64::new(0.0, 0.0); 16];
    v[3] = Complex64::new(f64::NAN, 0.0);
    assert!(Field::new(g, v).is_err());
}
