//! Norm inflation through semiclassical rescaling.
//!
//! For `s_c = n/2 − 1/σ > 0`, `0 < s < s_c` and `h ∈ (0, 1]`, set
//! `ε = h^{σ(s_c − s)}`. The datum `φ^h(x) = h^{s−n/2} a₀(x/h)` has
//! `h`-independent `Ḣ^s` norm, and the solution `ψ^h` of the `ε = 1` equation
//! is related to the semiclassical solution `u^ε` with `u^ε(0) = a₀` by
//!
//! ```text
//! u^ε(t, x) = h^{n/2−s} ψ^h(h²ε t, h x).
//! ```
//!
//! Hence `‖ψ^h(τh²ε)‖_{Ḣ^k} = h^{s−k} ε^{−k} ‖|εD|^k u^ε(τ)‖`, which grows like
//! `h^{s − k(1 + σ(s_c − s))}` once `‖|εD|^k u^ε(τ)‖` stays bounded below.
//!
//! On the lattice, the ψ-frame uses the same `N` on a box shrunk by `h`. With
//! `h` a power of two the two discrete problems coincide exactly, and all
//! production norms are computed in the `u^ε` frame.

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::fit::{local_slopes, loglog_fit, PowerFit};
use crate::grid::Field;
use crate::limit::LimitTrajectory;
use crate::nls::{run_observed, NlsConfig, NlsState};
use crate::par;
use crate::spectral::{homogeneous_norm, integrate, sobolev_norm, sobolev_seminorm};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub n: u32,
    pub sigma: u32,
    pub s: f64,
    pub h: f64,
    #[serde(default)]
    pub log_damping: bool,
}

/// `s_c = n/2 − 1/σ`.
pub fn critical_index(n: u32, sigma: u32) -> f64 {
    0.5 * f64::from(n) - 1.0 / f64::from(sigma)
}

/// `s_sob = (n/2)·σ/(σ+1)`.
pub fn sobolev_index(n: u32, sigma: u32) -> f64 {
    0.5 * f64::from(n) * f64::from(sigma) / f64::from(sigma + 1)
}

impl ScalingParams {
    pub fn new(n: u32, sigma: u32, s: f64, h: f64) -> Result<Self> {
        let p = Self { n, sigma, s, h, log_damping: false };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.sigma == 0 {
            return Err(config("need n ≥ 1 and σ ≥ 1"));
        }
        let sc = self.s_c();
        if !(sc > 0.0) {
            return Err(config(format!(
                "s_c = n/2 − 1/σ = {sc} violates s_c > 0 (n = {}, σ = {})",
                self.n, self.sigma
            )));
        }
        if !(self.s > 0.0 && self.s < sc) {
            return Err(config(format!("s = {} violates 0 < s < s_c = {sc}", self.s)));
        }
        if !(self.h > 0.0 && self.h <= 1.0) {
            return Err(config(format!("h = {} violates 0 < h ≤ 1", self.h)));
        }
        if self.log_damping && self.h == 1.0 {
            return Err(config("log damping needs h < 1 (|log h|⁻¹ is infinite at h = 1)"));
        }
        Ok(())
    }

    pub fn s_c(&self) -> f64 {
        critical_index(self.n, self.sigma)
    }

    pub fn s_sob(&self) -> f64 {
        sobolev_index(self.n, self.sigma)
    }

    /// `1 + σ(s_c − s)`.
    pub fn gain(&self) -> f64 {
        1.0 + f64::from(self.sigma) * (self.s_c() - self.s)
    }

    /// `ε = h^{σ(s_c − s)}`.
    pub fn eps(&self) -> f64 {
        self.h.powf(f64::from(self.sigma) * (self.s_c() - self.s))
    }

    /// Amplitude factor applied to `a₀`: `|log h|⁻¹` with damping, else 1.
    pub fn damping(&self) -> f64 {
        if self.log_damping {
            1.0 / self.h.ln().abs()
        } else {
            1.0
        }
    }

    pub fn with_h(&self, h: f64) -> Result<Self> {
        let p = Self { h, ..*self };
        p.validate()?;
        Ok(p)
    }

    fn check_power_of_two(&self) -> Result<u32> {
        let j = -self.h.log2();
        let r = j.round();
        if (j - r).abs() > 1e-12 || r < 0.0 {
            return Err(config(format!(
                "h = {} is not grid compatible; admissible values are 1, 1/2, 1/4, 1/8, …",
                self.h
            )));
        }
        Ok(r as u32)
    }
}

/// `(threshold, exponent) = (s/(1+σ(s_c−s)), s − k(1+σ(s_c−s)))`.
pub fn predict_exponent(p: &ScalingParams, k: f64) -> (f64, f64) {
    let g = p.gain();
    (p.s / g, p.s - k * g)
}

/// `φ^h(x) = h^{s−n/2} a₀(x/h)` (times `|log h|⁻¹` with damping), sampled on
/// the box shrunk by `h`. `a₀` lives on the unit-scale grid.
pub fn make_datum(p: &ScalingParams, a0: &Field) -> Result<Field> {
    p.validate()?;
    p.check_power_of_two()?;
    let grid = a0.grid().dilated(p.h)?;
    let amp = p.h.powf(p.s - 0.5 * f64::from(p.n)) * p.damping();
    Field::new(grid, a0.values().iter().map(|z| z * amp).collect())
}

/// Relative `L²` discrepancies between the two frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameComparison {
    pub h: f64,
    pub eps: f64,
    pub steps: usize,
    /// `‖h^{n/2−s}ψ − u‖/‖u‖` at the final time.
    pub field_discrepancy: f64,
    /// Worst relative mismatch of `‖ψ‖_{Ḣ^m} = h^{s−m}‖u‖_{Ḣ^m}` over `m ∈ {0, ½, 1}`.
    pub norm_ledger: f64,
}

/// Pulls the ψ-frame field back to the `u^ε` lattice: `h^{n/2−s}ψ(h·)`.
pub fn pull_back(p: &ScalingParams, psi: &Field, unit_grid: &crate::grid::Grid) -> Result<Field> {
    let amp = p.h.powf(0.5 * f64::from(p.n) - p.s);
    Field::new(*unit_grid, psi.values().iter().map(|z| z * amp).collect())
}

/// Advances both frames by `steps` Strang steps of matched size (`dt` in the
/// `u^ε` frame, `h²ε·dt` in the ψ frame) and compares the results.
pub fn frame_map_check(p: &ScalingParams, a0: &Field, dt: f64, steps: usize) -> Result<FrameComparison> {
    if p.log_damping {
        return Err(config("the frame check uses undamped data"));
    }
    let psi0 = make_datum(p, a0)?;
    let eps = p.eps();
    let dt_psi = p.h * p.h * eps * dt;
    let t_final = dt * steps.max(1) as f64;
    let mut u = NlsState::new(NlsConfig::new(eps, p.sigma, dt, t_final), a0.clone())?;
    let mut psi = NlsState::new(NlsConfig::new(1.0, p.sigma, dt_psi, dt_psi * steps.max(1) as f64), psi0)
        .map_err(|e| e.annotate("ψ frame"))?;
    for _ in 0..steps {
        u.step()?;
        psi.step()?;
    }
    let back = pull_back(p, psi.u(), a0.grid())?;
    let diff = Field::new(
        *a0.grid(),
        back.values().iter().zip(u.u().values()).map(|(a, b)| a - b).collect(),
    )?;
    let nu = u.u().l2_norm();
    let field_discrepancy = if nu > 0.0 { diff.l2_norm() / nu } else { diff.l2_norm() };
    let mut ledger: f64 = 0.0;
    for m in [0.0, 0.5, 1.0] {
        let lhs = homogeneous_norm(psi.u(), m)?;
        let rhs = p.h.powf(p.s - m) * homogeneous_norm(u.u(), m)?;
        if rhs > 0.0 {
            ledger = ledger.max((lhs - rhs).abs() / rhs);
        }
    }
    Ok(FrameComparison { h: p.h, eps, steps, field_discrepancy, norm_ledger: ledger })
}

/// First retained time `t ≤ t_valid` at which
/// `g(t) = min_k ∫|v|^{2k}|a|²` exceeds `fraction · max g`.
pub fn find_tau(traj: &LimitTrajectory, k_list: &[f64], fraction: f64) -> Result<f64> {
    if k_list.is_empty() || k_list.iter().any(|k| !(0.0..=1.0).contains(k)) {
        return Err(config("find_tau needs orders k in [0, 1]"));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(config("find_tau fraction must lie in (0, 1)"));
    }
    let g: Vec<(f64, f64)> = traj
        .states
        .iter()
        .filter(|s| s.t <= traj.t_valid)
        .map(|s| (s.t, oscillation_integrals(s, k_list).into_iter().fold(f64::INFINITY, f64::min)))
        .collect();
    let gmax = g.iter().map(|x| x.1).fold(0.0, f64::max);
    g.iter()
        .find(|(_, val)| gmax > 0.0 && *val > fraction * gmax)
        .map(|x| x.0)
        .ok_or(Error::Horizon {
            t: traj.t_valid,
            reason: "no retained time where ∫|v|^{2k}|a|² is bounded away from 0; raise t_max or the amplitude"
                .into(),
        })
}

/// `∫|v|^{2k}|a|²` for each `k`.
pub fn oscillation_integrals(state: &crate::limit::LimitState, k_list: &[f64]) -> Vec<f64> {
    let speed = state.v.magnitude();
    k_list
        .iter()
        .map(|&k| {
            let d: Vec<f64> = speed
                .values()
                .iter()
                .zip(state.a.values())
                .map(|(m, a)| if k == 0.0 { a.norm_sqr() } else { m.powf(2.0 * k) * a.norm_sqr() })
                .collect();
            integrate(state.grid(), &d)
        })
        .collect()
}

/// Numerical controls for [`run_inflation`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InflationNumerics {
    /// Time step as a fraction of the resolution limit.
    pub dt_fraction: f64,
    /// Minimum number of steps to reach `τ`.
    pub min_steps: usize,
}

impl Default for InflationNumerics {
    fn default() -> Self {
        Self { dt_fraction: 1.0, min_steps: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflationRow {
    pub h: f64,
    pub eps: f64,
    pub k: f64,
    /// `‖ψ^h(τh²ε)‖_{Ḣ^k}`.
    pub norm: f64,
    /// `‖|εD|^k u^ε(τ)‖`.
    pub semiclassical: f64,
    pub predicted_exp: f64,
    /// Slope to the previous `h` (NaN on the first row of each `k`).
    pub local_slope: f64,
    pub inflation_expected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub k: f64,
    pub predicted: f64,
    pub fit: PowerFit,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HRun {
    pub h: f64,
    pub eps: f64,
    pub t_h: f64,
    pub datum_hs_norm: f64,
    pub kinetic_initial: f64,
    pub kinetic_tau: f64,
    pub mass_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflationReport {
    pub tau: f64,
    pub base: ScalingParams,
    pub rows: Vec<InflationRow>,
    pub runs: Vec<HRun>,
    pub fits: Vec<ExponentFit>,
}

impl InflationReport {
    pub fn fit_for(&self, k: f64) -> Option<&ExponentFit> {
        self.fits.iter().find(|f| (f.k - k).abs() < 1e-12)
    }
}

/// For each `h`, solves the semiclassical problem with `ε = h^{σ(s_c−s)}` up
/// to `τ` and converts `‖|εD|^k u^ε(τ)‖` into `‖ψ^h(t^h)‖_{Ḣ^k}`.
pub fn run_inflation(
    base: &ScalingParams,
    h_list: &[f64],
    k_list: &[f64],
    tau: f64,
    a0: &Field,
    numerics: &InflationNumerics,
) -> Result<InflationReport> {
    if h_list.len() < 2 {
        return Err(config("the exponent fit needs at least two values of h"));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(config("τ must be > 0"));
    }
    if k_list.iter().any(|k| !(0.0..=1.0).contains(k)) {
        return Err(config("orders k must lie in [0, 1]"));
    }
    let params = h_list.iter().map(|&h| base.with_h(h)).collect::<Result<Vec<_>>>()?;
    let runs = par::map(&params, |p| -> Result<(HRun, Vec<f64>)> {
        let eps = p.eps();
        let datum = make_datum(p, a0)?;
        let u0 = a0.scale(crate::Complex64::new(p.damping(), 0.0));
        let mut cfg = NlsConfig::new(eps, p.sigma, 1.0, tau);
        cfg.dt = (numerics.dt_fraction * cfg.max_dt(&u0)?).min(tau / numerics.min_steps as f64);
        let m0 = crate::nls::mass(&u0);
        let k0 = 0.5 * sobolev_seminorm(&u0, 1.0, eps)?.powi(2);
        let mut out = None;
        run_observed(cfg, u0, &[tau], |s| {
            out = Some(s.clone());
            Ok(())
        })
        .map_err(|e| e.annotate(format!("h = {}", p.h)))?;
        let s = out.expect("observed once");
        let semi = k_list.iter().map(|&k| sobolev_seminorm(s.u(), k, eps)).collect::<Result<Vec<_>>>()?;
        Ok((
            HRun {
                h: p.h,
                eps,
                t_h: tau * p.h * p.h * eps,
                datum_hs_norm: sobolev_norm(&datum, p.s)?,
                kinetic_initial: k0,
                kinetic_tau: 0.5 * sobolev_seminorm(s.u(), 1.0, eps)?.powi(2),
                mass_drift: (s.mass() - m0).abs() / m0,
            },
            semi,
        ))
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for (j, &k) in k_list.iter().enumerate() {
        let (threshold, predicted) = predict_exponent(base, k);
        let hs: Vec<f64> = runs.iter().map(|r| r.0.h).collect();
        let norms: Vec<f64> = runs
            .iter()
            .map(|(r, semi)| r.h.powf(base.s - k) * r.eps.powf(-k) * semi[j])
            .collect();
        let slopes = local_slopes(&hs, &norms);
        for (i, (r, semi)) in runs.iter().enumerate() {
            rows.push(InflationRow {
                h: r.h,
                eps: r.eps,
                k,
                norm: norms[i],
                semiclassical: semi[j],
                predicted_exp: predicted,
                local_slope: if i == 0 { f64::NAN } else { slopes[i - 1] },
                inflation_expected: k > threshold,
            });
        }
        fits.push(ExponentFit { k, predicted, fit: loglog_fit(&hs, &norms)?, threshold });
    }
    Ok(InflationReport {
        tau,
        base: *base,
        rows,
        runs: runs.into_iter().map(|r| r.0).collect(),
        fits,
    })
}
