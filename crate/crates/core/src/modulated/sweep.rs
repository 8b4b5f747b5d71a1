//! ε-sweeps of the modulated energy against a shared limit trajectory.

use serde::{Deserialize, Serialize};

use super::{modulated_energy, NonlinearityFns};
use crate::error::{config, Error, Result};
use crate::fit::loglog_fit;
use crate::grid::{Field, VectorField};
use crate::limit::LimitTrajectory;
use crate::nls::{mass, run_observed, NlsConfig};
use crate::par;
use crate::spectral::{divergence, integrate, sobolev_seminorm};
use crate::wavepacket::microlocal_lower_bound;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub eps_list: Vec<f64>,
    pub sigma: u32,
    #[serde(default)]
    pub delta: f64,
    pub t_final: f64,
    /// Spacing of the sample times at which the energy is evaluated.
    pub sample_dt: f64,
    /// Lower bound on the number of time steps per run.
    pub min_steps: usize,
    /// Optional time at which oscillation diagnostics are recorded; must be
    /// one of the sample times.
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "default_k")]
    pub k_list: Vec<f64>,
}

fn default_k() -> Vec<f64> {
    vec![0.5, 1.0]
}

impl SweepConfig {
    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.t_final / self.sample_dt).round().max(1.0) as usize;
        (0..=n).map(|j| self.t_final * j as f64 / n as f64).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.eps_list.len() < 2 {
            return Err(config("the ε sweep needs at least two values"));
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(config("every ε must be > 0"));
        }
        if !(self.t_final > 0.0 && self.sample_dt > 0.0 && self.sample_dt <= self.t_final) {
            return Err(config("need 0 < sample_dt ≤ t_final"));
        }
        if self.k_list.iter().any(|k| !(*k > 0.0 && *k <= 1.0)) {
            return Err(config("oscillation orders k must lie in (0, 1]"));
        }
        NonlinearityFns::new(self.sigma, self.delta)?;
        Ok(())
    }
}

/// One CSV row: the energy split at one `(ε, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub t: f64,
    pub h: f64,
    pub k: f64,
    pub p: f64,
    pub lower_bound: f64,
    pub thm41_component1: f64,
    pub thm41_component2: f64,
}

/// Quantities at the selected time `τ` for one `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationRecord {
    pub tau: f64,
    /// `½‖ε∇u(0)‖²`.
    pub kinetic_initial: f64,
    /// `½‖ε∇u(τ)‖²`.
    pub kinetic_tau: f64,
    /// `½‖v(τ)a(τ)‖²`.
    pub limit_kinetic: f64,
    /// `(k, ‖|εD|^k u(τ)‖, ‖|v(τ)|^k a(τ)‖, measured lower-bound constant)`.
    pub frac: Vec<(f64, f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsSummary {
    pub eps: f64,
    pub dt: f64,
    pub steps: usize,
    pub sup_h: f64,
    /// `sup_t (K + ∫(ρ^ε−ρ)²((ρ^ε)^{σ−1}+ρ^{σ−1}))`.
    pub sup_k_plus_defect: f64,
    /// `sup_t ‖(ε∇−iv)u‖² + sup_t ∫(ρ^ε−ρ)²(…)`.
    pub sup_thm41: f64,
    pub max_mass_drift: f64,
    pub min_lower_bound_gap: f64,
    pub oscillation: Option<OscillationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    /// Fitted exponent of `sup(K + density defect)` against `ε`.
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub slope_h: f64,
    pub slope_thm41: f64,
    pub eps_range: (f64, f64),
    pub t_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub per_eps: Vec<EpsSummary>,
    pub summary: SweepSummary,
    pub gronwall: GronwallFit,
}

/// Runs the Schrödinger equation for every `ε` from the WKB data of `limit`
/// and evaluates the modulated energy at each sample time.
pub fn theorem_og_sweep(cfg: &SweepConfig, a0: &Field, limit: &LimitTrajectory) -> Result<SweepReport> {
    cfg.validate()?;
    if cfg.t_final > limit.t_valid * (1.0 + 1e-12) {
        return Err(Error::Horizon {
            t: cfg.t_final,
            reason: format!("sweep horizon exceeds the limit validity window {}", limit.t_valid),
        });
    }
    let times = cfg.sample_times();
    let refs = times.iter().map(|&t| limit.state_at(t)).collect::<Result<Vec<_>>>()?;
    let fns = NonlinearityFns::new(cfg.sigma, cfg.delta)?;
    let tau = cfg.tau.map(|t| limit.state_at(t).map(|s| s.t)).transpose()?;

    let results = par::map(&cfg.eps_list, |&eps| -> Result<(Vec<SweepRow>, EpsSummary)> {
        let mut nls = NlsConfig::new(eps, cfg.sigma, 1.0, cfg.t_final);
        nls.delta = cfg.delta;
        let dt = nls.max_dt(a0)?.min(cfg.t_final / cfg.min_steps as f64);
        nls.dt = dt;
        let m0 = mass(a0);
        let k0 = 0.5 * sobolev_seminorm(a0, 1.0, eps)?.powi(2);
        let mut rows = Vec::with_capacity(times.len());
        let mut drift: f64 = 0.0;
        let mut gap = f64::INFINITY;
        let mut osc = None;
        let mut idx = 0;
        run_observed(nls, a0.clone(), &times, |state| {
            let lim = refs[idx];
            idx += 1;
            let rep = modulated_energy(state.u(), &lim.v, &lim.a, eps, &fns)?.at(state.t());
            drift = drift.max((state.mass() - m0).abs() / m0);
            gap = gap.min(rep.h - rep.lower_bound);
            rows.push(SweepRow {
                eps,
                t: state.t(),
                h: rep.h,
                k: rep.k,
                p: rep.p,
                lower_bound: rep.lower_bound,
                thm41_component1: rep.covariant_sq,
                thm41_component2: rep.density_defect,
            });
            if tau.is_some_and(|t| (t - state.t()).abs() <= 1e-12 * (1.0 + t)) {
                osc = Some(oscillation(state.u(), &lim.v, &lim.a, eps, cfg, k0, state.t())?);
            }
            Ok(())
        })
        .map_err(|e| e.annotate(format!("ε = {eps}")))?;
        let sup = |f: &dyn Fn(&SweepRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
        let summary = EpsSummary {
            eps,
            dt,
            steps: (cfg.t_final / dt).ceil() as usize,
            sup_h: sup(&|r| r.h),
            sup_k_plus_defect: sup(&|r| r.k + r.thm41_component2),
            sup_thm41: sup(&|r| r.thm41_component1) + sup(&|r| r.thm41_component2),
            max_mass_drift: drift,
            min_lower_bound_gap: gap,
            oscillation: osc,
        };
        Ok((rows, summary))
    });

    let mut rows = Vec::new();
    let mut per_eps = Vec::new();
    for r in results {
        let (r, s) = r?;
        rows.extend(r);
        per_eps.push(s);
    }
    let eps: Vec<f64> = per_eps.iter().map(|s| s.eps).collect();
    let pick = |f: fn(&EpsSummary) -> f64| per_eps.iter().map(f).collect::<Vec<_>>();
    let main = loglog_fit(&eps, &pick(|s| s.sup_k_plus_defect))?;
    let (lo, hi) = eps.iter().fold((f64::INFINITY, 0.0f64), |(a, b), e| (a.min(*e), b.max(*e)));
    let summary = SweepSummary {
        slope: main.slope,
        intercept: main.intercept,
        rms_residual: main.rms_residual,
        slope_h: loglog_fit(&eps, &pick(|s| s.sup_h))?.slope,
        slope_thm41: loglog_fit(&eps, &pick(|s| s.sup_thm41))?.slope,
        eps_range: (lo, hi),
        t_final: cfg.t_final,
    };
    let gronwall = fit_gronwall(&rows);
    Ok(SweepReport { rows, per_eps, summary, gronwall })
}

fn oscillation(
    u: &Field,
    v: &VectorField,
    a: &Field,
    eps: f64,
    cfg: &SweepConfig,
    kinetic_initial: f64,
    tau: f64,
) -> Result<OscillationRecord> {
    let grid = *u.grid();
    let speed = v.magnitude();
    let va: Vec<f64> = a.values().iter().zip(speed.values()).map(|(z, m)| m * m * z.norm_sqr()).collect();
    let frac = cfg
        .k_list
        .iter()
        .map(|&k| {
            let rep = microlocal_lower_bound(u, v, a, k, eps, cfg.sigma)?;
            Ok((k, rep.frac, rep.target, rep.measured_constant()))
        })
        .collect::<Result<_>>()?;
    Ok(OscillationRecord {
        tau,
        kinetic_initial,
        kinetic_tau: 0.5 * sobolev_seminorm(u, 1.0, eps)?.powi(2),
        limit_kinetic: 0.5 * integrate(&grid, &va),
        frac,
    })
}

/// Smallest single `C` with `H(t) ≤ (H(0) + C t ε²) e^{Ct}` on every row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GronwallFit {
    pub c: f64,
    /// `(ε, t)` of the row that determines `C`.
    pub binding: (f64, f64),
}

/// Fits the Gronwall constant over rows grouped by `ε` (each group's first
/// row is taken as `t = 0`).
pub fn fit_gronwall(rows: &[SweepRow]) -> GronwallFit {
    let mut best = GronwallFit { c: 0.0, binding: (f64::NAN, f64::NAN) };
    let mut h0 = None;
    let mut current_eps = f64::NAN;
    for r in rows {
        if r.eps != current_eps {
            current_eps = r.eps;
            h0 = Some(r.h);
        }
        let h0 = h0.unwrap_or(r.h);
        if r.t <= 0.0 {
            continue;
        }
        let e2 = r.eps * r.eps;
        let holds = |c: f64| r.h <= (h0 + c * r.t * e2) * (c * r.t).exp();
        if holds(best.c) {
            continue;
        }
        let (mut lo, mut hi) = (best.c, best.c.max(1.0));
        while !holds(hi) {
            hi *= 2.0;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if holds(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        best = GronwallFit { c: hi, binding: (r.eps, r.t) };
    }
    best
}

/// `‖(ρ(t+dt) − ρ(t−dt))/(2dt) + div J(t)‖_{L¹}` from three consecutive
/// snapshots spaced by `dt`.
pub fn continuity_defect(prev: &Field, mid: &Field, next: &Field, dt: f64, eps: f64) -> Result<f64> {
    mid.grid().ensure_same(prev.grid(), "previous snapshot")?;
    mid.grid().ensure_same(next.grid(), "next snapshot")?;
    let hydro = super::hydro(mid, eps)?;
    let div = divergence(&hydro.current);
    let grid = *mid.grid();
    let r: Vec<f64> = prev
        .values()
        .iter()
        .zip(next.values())
        .zip(div.values())
        .map(|((p, n), d)| ((n.norm_sqr() - p.norm_sqr()) / (2.0 * dt) + d).abs())
        .collect();
    Ok(integrate(&grid, &r))
}
