//! The dispersionless limit of the semiclassical equation.
//!
//! With `v = ∇φ` and `u = a^σ` the WKB system becomes the symmetrizable
//! hyperbolic system
//!
//! ```text
//! ∂ₜv + v·∇v + ∇|u|² = 0,
//! ∂ₜu + v·∇u + (σ/2) u div v = 0,
//! ```
//!
//! solved here with spectral derivatives and classical RK4. The amplitude `a`
//! is carried along by `∂ₜa + v·∇a + ½ a div v = 0` and the phase by the
//! pointwise Hamilton–Jacobi law `∂ₜφ = −½|v|² − |u|²`, so that `u = a^σ` and
//! `∇φ = v` become independent consistency checks.
//!
//! Integration stops at the first step where the smoothness monitor
//! `max|∂v| + max|∂u|` exceeds a fixed multiple of its initial value; the last
//! time before that is reported as `t_valid`.

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::grid::{Field, Grid, RealField, VectorField};
use crate::spectral::{dealias_mask, from_spectrum, gradient, integrate, real_gradient, spectrum};
use crate::Complex64;

pub const DEFAULT_MONITOR_FACTOR: f64 = 5.0;
pub const CFL_NUMBER: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct LimitState {
    pub t: f64,
    pub v: VectorField,
    pub u: Field,
    pub a: Field,
    pub phi: RealField,
}

impl LimitState {
    /// `v = 0`, `φ = 0`, `a = a₀`, `u = a₀^σ`.
    pub fn initial(a0: &Field, sigma: u32) -> Self {
        let grid = *a0.grid();
        LimitState {
            t: 0.0,
            v: VectorField::zeros(grid),
            u: a0.map(|z: Complex64| z.powu(sigma)),
            a: a0.clone(),
            phi: RealField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.a.grid()
    }

    /// `∫|a|²`.
    pub fn mass(&self) -> f64 {
        integrate(self.grid(), &self.a.modulus_sq().into_values())
    }

    /// `½∫|v|²|a|² + (1/(σ+1))∫|a|^{2σ+2}`.
    pub fn energy(&self, sigma: u32) -> f64 {
        let v2 = self.v.magnitude();
        let dens: Vec<f64> = self
            .a
            .values()
            .iter()
            .zip(v2.values())
            .map(|(a, m)| {
                let r = a.norm_sqr();
                0.5 * m * m * r + r.powi(sigma as i32 + 1) / f64::from(sigma + 1)
            })
            .collect();
        integrate(self.grid(), &dens)
    }
}

/// Time derivatives of every unknown.
#[derive(Debug, Clone)]
pub struct LimitRates {
    pub v: Vec<Vec<f64>>,
    pub u: Vec<Complex64>,
    pub a: Vec<Complex64>,
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitConfig {
    pub sigma: u32,
    /// Fixed step; `None` picks 80 % of the CFL bound at every step.
    #[serde(default)]
    pub dt: Option<f64>,
    pub t_max: f64,
    #[serde(default = "default_factor")]
    pub monitor_factor: f64,
    #[serde(default = "default_true")]
    pub dealias: bool,
}

fn default_factor() -> f64 {
    DEFAULT_MONITOR_FACTOR
}

fn default_true() -> bool {
    true
}

impl LimitConfig {
    pub fn new(sigma: u32, t_max: f64) -> Self {
        Self { sigma, dt: None, t_max, monitor_factor: DEFAULT_MONITOR_FACTOR, dealias: true }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma == 0 {
            return Err(config("σ must be ≥ 1"));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(config(format!("t_max must be > 0, got {}", self.t_max)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(config(format!("dt must be > 0, got {dt}")));
            }
        }
        if !(self.monitor_factor > 1.0) {
            return Err(config("monitor factor must exceed 1"));
        }
        Ok(())
    }
}

/// Samples of a limit solution together with its validity window.
#[derive(Debug, Clone)]
pub struct LimitTrajectory {
    pub sigma: u32,
    pub states: Vec<LimitState>,
    /// Last integration time at which the monitor was within bounds.
    pub t_valid: f64,
    /// Whether the monitor actually tripped (otherwise `t_valid = t_max`).
    pub tripped: bool,
    /// `(t, monitor)` after every accepted step, starting at `t = 0`.
    pub monitor: Vec<(f64, f64)>,
}

impl LimitTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    /// The retained state at time `t` (matched to 1e-12).
    pub fn state_at(&self, t: f64) -> Result<&LimitState> {
        if t > self.t_valid * (1.0 + 1e-12) + 1e-14 {
            return Err(Error::Horizon { t, reason: format!("beyond t_valid = {}", self.t_valid) });
        }
        self.states
            .iter()
            .find(|s| (s.t - t).abs() <= 1e-12 * (1.0 + t.abs()))
            .ok_or_else(|| config(format!("no retained limit state at t = {t}")))
    }

    pub fn initial_monitor(&self) -> f64 {
        self.monitor.first().map_or(0.0, |m| m.1)
    }
}

pub struct LimitSolver {
    cfg: LimitConfig,
    mask: Option<Vec<bool>>,
    grid: Grid,
}

fn cfl_bound(state: &LimitState) -> f64 {
    let speed = state.v.max_magnitude() + 2.0 * state.u.max_modulus();
    if speed > 0.0 {
        CFL_NUMBER * state.grid().spacing() / speed
    } else {
        f64::INFINITY
    }
}

impl LimitSolver {
    pub fn new(cfg: LimitConfig, grid: Grid) -> Result<Self> {
        cfg.validate()?;
        let mask = cfg.dealias.then(|| dealias_mask(&grid));
        Ok(Self { cfg, mask, grid })
    }

    pub fn config(&self) -> &LimitConfig {
        &self.cfg
    }

    fn project_complex(&self, data: Vec<Complex64>) -> Vec<Complex64> {
        match &self.mask {
            None => data,
            Some(mask) => {
                let f = Field::from_parts(self.grid, data);
                let mut spec = spectrum(&f);
                spec.iter_mut().zip(mask).for_each(|(z, keep)| {
                    if !keep {
                        *z = Complex64::default();
                    }
                });
                from_spectrum(&self.grid, spec).into_values()
            }
        }
    }

    fn project_real(&self, data: Vec<f64>) -> Vec<f64> {
        if self.mask.is_none() {
            return data;
        }
        let c = data.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        self.project_complex(c).into_iter().map(|z| z.re).collect()
    }

    /// `(∂ₜv, ∂ₜu, ∂ₜa, ∂ₜφ)` at a state, derivatives spectral, products
    /// projected onto the 2/3-rule band when dealiasing is on.
    pub fn rhs(&self, state: &LimitState) -> Result<LimitRates> {
        let grid = self.grid;
        grid.ensure_same(state.grid(), "limit state")?;
        let dim = grid.dim();
        let n = grid.len();
        let sigma = f64::from(self.cfg.sigma);
        let v = state.v.components();

        let dv: Vec<VectorField> = v
            .iter()
            .map(|c| real_gradient(&RealField::from_parts(grid, c.clone()), 1.0))
            .collect::<Result<_>>()?;
        let du = gradient(&state.u, 1.0)?;
        let da = gradient(&state.a, 1.0)?;
        let rho_u = state.u.modulus_sq();
        let d_rho_u = real_gradient(&rho_u, 1.0)?;

        let mut div = vec![0.0; n];
        for (j, g) in dv.iter().enumerate() {
            div.iter_mut().zip(g.component(j)).for_each(|(d, x)| *d += x);
        }

        let mut rv = Vec::with_capacity(dim);
        for k in 0..dim {
            let mut r: Vec<f64> = d_rho_u.component(k).iter().map(|x| -x).collect();
            for j in 0..dim {
                let dkj = dv[k].component(j);
                r.iter_mut().zip(&v[j]).zip(dkj).for_each(|((r, vj), d)| *r -= vj * d);
            }
            rv.push(self.project_real(r));
        }

        let transport = |w: &Field, dw: &[Field], weight: f64| -> Vec<Complex64> {
            let mut r: Vec<Complex64> = w
                .values()
                .iter()
                .zip(&div)
                .map(|(z, d)| -weight * d * z)
                .collect();
            for j in 0..dim {
                r.iter_mut()
                    .zip(&v[j])
                    .zip(dw[j].values())
                    .for_each(|((r, vj), d)| *r -= vj * d);
            }
            r
        };
        let ru = self.project_complex(transport(&state.u, &du, 0.5 * sigma));
        let ra = self.project_complex(transport(&state.a, &da, 0.5));

        let speed2 = state.v.magnitude();
        let rphi: Vec<f64> = speed2
            .values()
            .iter()
            .zip(rho_u.values())
            .map(|(s, r)| -0.5 * s * s - r)
            .collect();
        Ok(LimitRates { v: rv, u: ru, a: ra, phi: self.project_real(rphi) })
    }

    fn shifted(&self, base: &LimitState, k: &LimitRates, h: f64) -> LimitState {
        let v = base
            .v
            .components()
            .iter()
            .zip(&k.v)
            .map(|(c, r)| c.iter().zip(r).map(|(x, y)| x + h * y).collect())
            .collect();
        let cz = |f: &Field, r: &[Complex64]| {
            Field::from_parts(self.grid, f.values().iter().zip(r).map(|(x, y)| x + h * y).collect())
        };
        LimitState {
            t: base.t + h,
            v: VectorField::from_parts(self.grid, v),
            u: cz(&base.u, &k.u),
            a: cz(&base.a, &k.a),
            phi: RealField::from_parts(
                self.grid,
                base.phi.values().iter().zip(&k.phi).map(|(x, y)| x + h * y).collect(),
            ),
        }
    }

    /// `max_{j,k}‖∂_j v_k‖_∞ + max_j‖∂_j u‖_∞`.
    pub fn smoothness_monitor(&self, state: &LimitState) -> Result<f64> {
        smoothness_monitor(state)
    }

    /// Largest step allowed by the advective CFL rule at this state.
    pub fn cfl_limit(&self, state: &LimitState) -> f64 {
        cfl_bound(state)
    }

    /// One RK4 step. Rejects steps above the CFL bound and non-finite results.
    pub fn advance(&self, state: &LimitState, dt: f64) -> Result<LimitState> {
        let bound = cfl_bound(state);
        if dt > bound * (1.0 + 1e-12) {
            return Err(config(format!(
                "limit step dt = {dt:.3e} violates the CFL bound {bound:.3e} at t = {}",
                state.t
            )));
        }
        let k1 = self.rhs(state)?;
        let s2 = self.shifted(state, &k1, 0.5 * dt);
        let k2 = self.rhs(&s2)?;
        let s3 = self.shifted(state, &k2, 0.5 * dt);
        let k3 = self.rhs(&s3)?;
        let s4 = self.shifted(state, &k3, dt);
        let k4 = self.rhs(&s4)?;
        let w = |a: f64, b: f64, c: f64, d: f64| (a + 2.0 * (b + c) + d) / 6.0;
        let comb = LimitRates {
            v: (0..k1.v.len())
                .map(|j| {
                    (0..k1.v[j].len())
                        .map(|i| w(k1.v[j][i], k2.v[j][i], k3.v[j][i], k4.v[j][i]))
                        .collect()
                })
                .collect(),
            u: (0..k1.u.len())
                .map(|i| (k1.u[i] + 2.0 * (k2.u[i] + k3.u[i]) + k4.u[i]) / 6.0)
                .collect(),
            a: (0..k1.a.len())
                .map(|i| (k1.a[i] + 2.0 * (k2.a[i] + k3.a[i]) + k4.a[i]) / 6.0)
                .collect(),
            phi: (0..k1.phi.len()).map(|i| w(k1.phi[i], k2.phi[i], k3.phi[i], k4.phi[i])).collect(),
        };
        let next = self.shifted(state, &comb, dt);
        let finite = next.u.is_finite()
            && next.a.is_finite()
            && next.phi.is_finite()
            && next.v.components().iter().flatten().all(|x| x.is_finite());
        if !finite {
            return Err(Error::Divergence { t: next.t, reason: "non-finite limit state".into() });
        }
        Ok(next)
    }

    /// Integrates from `a₀` up to `t_max` or the first monitor trip, keeping
    /// the states at `sample_times` (sorted, within `[0, t_max]`) that fall
    /// inside the validity window.
    pub fn solve(&self, a0: &Field, sample_times: &[f64]) -> Result<LimitTrajectory> {
        self.grid.ensure_same(a0.grid(), "initial amplitude")?;
        if !a0.is_finite() {
            return Err(config("initial amplitude contains non-finite samples"));
        }
        if sample_times.windows(2).any(|w| w[1] < w[0])
            || sample_times.iter().any(|t| !(*t >= 0.0 && *t <= self.cfg.t_max * (1.0 + 1e-12)))
        {
            return Err(config(format!("sample times must be sorted and lie in [0, {}]", self.cfg.t_max)));
        }
        let sigma = self.cfg.sigma;
        let mut state = LimitState::initial(a0, sigma);
        let m0 = smoothness_monitor(&state)?;
        let bound = self.cfg.monitor_factor * m0;
        let mut monitor = vec![(0.0, m0)];
        let mut states = Vec::new();
        let mut pending = sample_times.iter().copied().peekable();
        while let Some(&t) = pending.peek() {
            if t <= 0.0 {
                states.push(state.clone());
                pending.next();
            } else {
                break;
            }
        }
        let t_end = self.cfg.t_max;
        let mut tripped = false;
        while state.t < t_end * (1.0 - 1e-14) {
            let mut dt = self.cfg.dt.unwrap_or_else(|| 0.8 * cfl_bound(&state)).min(t_end - state.t);
            let mut landing = None;
            if let Some(&ts) = pending.peek() {
                if ts - state.t <= dt * (1.0 + 1e-9) {
                    dt = ts - state.t;
                    landing = Some(ts);
                }
            }
            if !dt.is_finite() {
                // no dynamics at all: jump straight to the next target
                dt = pending.peek().copied().unwrap_or(t_end) - state.t;
                landing = pending.peek().copied();
            }
            let mut next = self.advance(&state, dt)?;
            if let Some(ts) = landing {
                next.t = ts;
            }
            let m = smoothness_monitor(&next)?;
            if m0 > 0.0 && m > bound {
                tripped = true;
                break;
            }
            monitor.push((next.t, m));
            state = next;
            while let Some(&ts) = pending.peek() {
                if (ts - state.t).abs() <= 1e-12 * (1.0 + ts) {
                    states.push(state.clone());
                    pending.next();
                } else {
                    break;
                }
            }
        }
        Ok(LimitTrajectory { sigma, states, t_valid: state.t, tripped, monitor })
    }
}

/// `max_{j,k}‖∂_j v_k‖_∞ + max_j‖∂_j u‖_∞`.
pub fn smoothness_monitor(state: &LimitState) -> Result<f64> {
    let grid = *state.grid();
    let mut dv_max: f64 = 0.0;
    for c in state.v.components() {
        let g = real_gradient(&RealField::from_parts(grid, c.clone()), 1.0)?;
        for comp in g.components() {
            dv_max = comp.iter().fold(dv_max, |m, x| m.max(x.abs()));
        }
    }
    let du_max = gradient(&state.u, 1.0)?
        .iter()
        .map(|f| f.max_modulus())
        .fold(0.0, f64::max);
    Ok(dv_max + du_max)
}

/// `max_t ‖u − a^σ‖/‖u‖` over the retained states (0 where `u ≡ 0`).
pub fn muk_consistency(traj: &LimitTrajectory) -> f64 {
    traj.states
        .iter()
        .map(|s| {
            let nu = s.u.l2_norm();
            if nu == 0.0 {
                return 0.0;
            }
            let diff = Field::from_parts(
                *s.grid(),
                s.u.values()
                    .iter()
                    .zip(s.a.values())
                    .map(|(u, a)| u - a.powu(traj.sigma))
                    .collect(),
            );
            diff.l2_norm() / nu
        })
        .fold(0.0, f64::max)
}

/// `max_t ‖∇φ − v‖/‖v‖` over retained states with `v ≠ 0`.
pub fn phase_consistency(traj: &LimitTrajectory) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in &traj.states {
        let nv = s.v.magnitude().l2_norm();
        if nv == 0.0 {
            continue;
        }
        let g = real_gradient(&s.phi, 1.0)?;
        let diff: Vec<f64> = (0..s.grid().len())
            .map(|i| {
                g.components()
                    .iter()
                    .zip(s.v.components())
                    .map(|(a, b)| (a[i] - b[i]).powi(2))
                    .sum::<f64>()
            })
            .collect();
        let err = integrate(s.grid(), &diff).sqrt();
        worst = worst.max(err / nv);
    }
    Ok(worst)
}
