//! Strang split-step Fourier integrator for
//!
//! ```text
//! iε ∂ₜu + (ε²/2) Δu = f_δ(|u|²) u + V u,     f_δ(y) = y^σ / (1 + (δy)^σ)
//! ```
//!
//! with `δ = 0` the pure power and `V` either zero or `|x|²/2`. A step is a
//! half phase rotation, an exact kinetic flow in Fourier space, and a second
//! half rotation. Both substeps preserve the discrete `L²` norm.

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::fft;
use crate::grid::{Field, Grid};
use crate::modulated::NonlinearityFns;
use crate::spectral::{integrate, sobolev_seminorm};
use crate::Complex64;

/// Runaway threshold relative to the initial sup norm.
pub const DIVERGENCE_FACTOR: f64 = 1e3;
/// Fraction of `ε / (max phase rate)` allowed as a time step.
pub const DT_SAFETY: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Potential {
    #[default]
    None,
    /// `V(x) = |x|²/2`.
    Harmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlsConfig {
    pub eps: f64,
    pub sigma: u32,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub potential: Potential,
    /// Drops the nonlinear term entirely.
    #[serde(default)]
    pub linear: bool,
    pub dt: f64,
    pub t_final: f64,
}

impl NlsConfig {
    pub fn new(eps: f64, sigma: u32, dt: f64, t_final: f64) -> Self {
        Self { eps, sigma, delta: 0.0, potential: Potential::None, linear: false, dt, t_final }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.eps) {
            return Err(config(format!("ε must be > 0, got {}", self.eps)));
        }
        if !positive(self.dt) {
            return Err(config(format!("dt must be > 0, got {}", self.dt)));
        }
        if !positive(self.t_final) {
            return Err(config(format!("t_final must be > 0, got {}", self.t_final)));
        }
        NonlinearityFns::new(self.sigma, self.delta)?;
        Ok(())
    }

    pub fn nonlinearity(&self) -> Result<NonlinearityFns> {
        NonlinearityFns::new(self.sigma, self.delta)
    }

    /// Largest admissible step for data `u0`: `0.1·ε / max(f_δ(|u|²) + V)`.
    /// Infinite when the phase rate vanishes identically.
    pub fn max_dt(&self, u0: &Field) -> Result<f64> {
        self.validate()?;
        let fns = self.nonlinearity()?;
        let mut rate: f64 = 0.0;
        if !self.linear {
            rate = fns.f(u0.max_modulus().powi(2));
        }
        if self.potential == Potential::Harmonic {
            let g = u0.grid();
            let half = 0.5 * g.box_length();
            rate += 0.5 * g.dim() as f64 * half * half;
        }
        Ok(if rate > 0.0 { DT_SAFETY * self.eps / rate } else { f64::INFINITY })
    }
}

#[derive(Debug, Clone)]
pub struct NlsState {
    t: f64,
    u: Field,
    config: NlsConfig,
    fns: NonlinearityFns,
    threshold: f64,
    potential: Option<Vec<f64>>,
    kinetic: Option<(f64, Vec<Complex64>)>,
}

impl NlsState {
    /// Initial state at `t = 0`. Rejects configurations whose `dt` exceeds
    /// [`NlsConfig::max_dt`] for these data.
    pub fn new(cfg: NlsConfig, u0: Field) -> Result<Self> {
        cfg.validate()?;
        if !u0.is_finite() {
            return Err(config("initial data contain non-finite samples"));
        }
        let limit = cfg.max_dt(&u0)?;
        if cfg.dt > limit * (1.0 + 1e-12) {
            return Err(config(format!(
                "dt = {} exceeds the resolution limit {limit:.3e} for ε = {}",
                cfg.dt, cfg.eps
            )));
        }
        Ok(Self::unchecked(cfg, u0))
    }

    fn unchecked(config: NlsConfig, u0: Field) -> Self {
        let grid = *u0.grid();
        let potential = (config.potential == Potential::Harmonic).then(|| {
            grid.coordinates()
                .chunks(grid.dim())
                .map(|x| 0.5 * x.iter().map(|c| c * c).sum::<f64>())
                .collect()
        });
        Self {
            t: 0.0,
            threshold: DIVERGENCE_FACTOR * u0.max_modulus(),
            u: u0,
            fns: config.nonlinearity().expect("validated"),
            config,
            potential,
            kinetic: None,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn u(&self) -> &Field {
        &self.u
    }

    pub fn into_field(self) -> Field {
        self.u
    }

    pub fn config(&self) -> &NlsConfig {
        &self.config
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    fn phase(&mut self, dt: f64) {
        let eps = self.config.eps;
        let linear = self.config.linear;
        let fns = self.fns;
        let pot = self.potential.as_deref();
        for (i, z) in self.u.values_mut().iter_mut().enumerate() {
            let mut rate = if linear { 0.0 } else { fns.f(z.norm_sqr()) };
            if let Some(v) = pot {
                rate += v[i];
            }
            if rate != 0.0 {
                *z *= Complex64::from_polar(1.0, -dt * rate / eps);
            }
        }
    }

    fn kinetic(&mut self, dt: f64) {
        let grid = *self.u.grid();
        let stale = self.kinetic.as_ref().map_or(true, |(h, _)| *h != dt);
        if stale {
            let eps = self.config.eps;
            let mult = grid
                .frequency_norms_sq()
                .into_iter()
                .map(|x2| Complex64::from_polar(1.0, -0.5 * eps * dt * x2))
                .collect();
            self.kinetic = Some((dt, mult));
        }
        let mult = &self.kinetic.as_ref().expect("just set").1;
        let data = self.u.values_mut();
        fft::forward(&grid, data);
        data.iter_mut().zip(mult).for_each(|(z, m)| *z *= m);
        fft::inverse(&grid, data);
    }

    fn check(&self, stage: &str) -> Result<()> {
        let mut worst: f64 = 0.0;
        for z in self.u.values() {
            let m = z.norm();
            if !m.is_finite() {
                return Err(Error::Divergence { t: self.t, reason: format!("non-finite sample after {stage}") });
            }
            worst = worst.max(m);
        }
        if worst > self.threshold && self.threshold > 0.0 {
            return Err(Error::Divergence {
                t: self.t,
                reason: format!("|u| = {worst:.3e} exceeds {DIVERGENCE_FACTOR}·max|u₀|"),
            });
        }
        Ok(())
    }

    /// One Strang step of the configured size.
    pub fn step(&mut self) -> Result<()> {
        self.step_by(self.config.dt)
    }

    /// One Strang step of size `dt` (at most the configured step).
    pub fn step_by(&mut self, dt: f64) -> Result<()> {
        self.phase(0.5 * dt);
        self.check("phase half-step")?;
        self.kinetic(dt);
        self.check("kinetic step")?;
        self.phase(0.5 * dt);
        self.t += dt;
        self.check("phase half-step")
    }

    /// Advances to `target` with equal steps no larger than the configured one.
    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        let span = target - self.t;
        if span <= 0.0 {
            return Ok(());
        }
        let n = ((span / self.config.dt) - 1e-9).ceil().max(1.0) as usize;
        let dt = span / n as f64;
        let start = self.t;
        for j in 1..=n {
            self.step_by(dt)?;
            self.t = start + j as f64 * dt;
        }
        self.t = target;
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        mass(&self.u)
    }

    /// `½‖ε∇u‖² + ∫F_δ(|u|²) + ∫V|u|²` (the nonlinear term is omitted for
    /// linear runs).
    pub fn energy(&self) -> Result<f64> {
        let kin = sobolev_seminorm(&self.u, 1.0, self.config.eps)?;
        let grid = self.u.grid();
        let dens: Vec<f64> = self
            .u
            .values()
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let r = z.norm_sqr();
                let mut e = if self.config.linear { 0.0 } else { self.fns.big_f(r) };
                if let Some(v) = &self.potential {
                    e += v[i] * r;
                }
                e
            })
            .collect();
        Ok(0.5 * kin * kin + integrate(grid, &dens))
    }
}

/// `∫|u|²`.
pub fn mass(u: &Field) -> f64 {
    integrate(u.grid(), &u.modulus_sq().into_values())
}

fn check_samples(times: &[f64], t_final: f64) -> Result<()> {
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(config("sample times must be sorted"));
    }
    if times.iter().any(|t| !(*t >= 0.0 && *t <= t_final * (1.0 + 1e-12))) {
        return Err(config(format!("sample times must lie in [0, {t_final}]")));
    }
    Ok(())
}

/// Integrates from `u0`, calling `observe` at each sample time.
pub fn run_observed(
    config: NlsConfig,
    u0: Field,
    sample_times: &[f64],
    mut observe: impl FnMut(&NlsState) -> Result<()>,
) -> Result<NlsState> {
    check_samples(sample_times, config.t_final)?;
    let mut state = NlsState::new(config, u0)?;
    for &t in sample_times {
        state.advance_to(t)?;
        observe(&state)?;
    }
    Ok(state)
}

/// States at each requested time.
pub fn run(config: NlsConfig, u0: Field, sample_times: &[f64]) -> Result<Vec<NlsState>> {
    let mut out = Vec::with_capacity(sample_times.len());
    run_observed(config, u0, sample_times, |s| {
        let mut snap = s.clone();
        snap.kinetic = None;
        out.push(snap);
        Ok(())
    })?;
    Ok(out)
}

/// Evenly spaced sample times `0, Δ, 2Δ, …, t_final` (the last one exact).
pub fn uniform_times(t_final: f64, count: usize) -> Vec<f64> {
    let count = count.max(1);
    (0..=count).map(|j| t_final * j as f64 / count as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: Grid) -> Field {
        Field::from_fn(grid, |x| Complex64::new((-x.iter().map(|c| c * c).sum::<f64>()).exp(), 0.0))
    }

    #[test]
    fn constant_data_rotate_in_phase() {
        let g = Grid::new(1, 32, 10.0).unwrap();
        let cfg = NlsConfig::new(0.5, 3, 0.025, 0.25);
        let u0 = Field::from_fn(g, |_| Complex64::new(1.0, 0.0));
        let out = run(cfg, u0, &[0.25]).unwrap();
        let want = Complex64::from_polar(1.0, -0.5);
        for z in out[0].u().values() {
            assert!((z - want).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_stays_zero() {
        let g = Grid::new(1, 32, 10.0).unwrap();
        let cfg = NlsConfig::new(0.1, 2, 0.01, 0.1);
        let out = run(cfg, Field::zeros(g), &[0.1]).unwrap();
        assert!(out[0].u().values().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn energy_of_constant() {
        let g = Grid::new(1, 64, 10.0).unwrap();
        let cfg = NlsConfig::new(0.1, 3, 0.001, 1.0);
        let s = NlsState::new(cfg, Field::from_fn(g, |_| Complex64::new(1.0, 0.0))).unwrap();
        assert!((s.energy().unwrap() - 2.5).abs() < 1e-13);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let g = Grid::new(1, 64, 16.0).unwrap();
        let cfg = NlsConfig::new(0.1, 3, 0.1, 1.0);
        assert!(matches!(NlsState::new(cfg, gaussian(g)), Err(Error::Config(_))));
    }

    #[test]
    fn saturated_energy_uses_primitive() {
        let g = Grid::new(1, 64, 10.0).unwrap();
        let mut cfg = NlsConfig::new(0.1, 1, 0.001, 1.0);
        cfg.delta = 1.0;
        let s = NlsState::new(cfg, Field::from_fn(g, |_| Complex64::new(1.0, 0.0))).unwrap();
        // ∫₀¹ y/(1+y) dy = 1 − ln 2
        assert!((s.energy().unwrap() - 10.0 * (1.0 - 2f64.ln())).abs() < 1e-11);
    }
}
