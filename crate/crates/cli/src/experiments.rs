use nlsinflate::error::Error;
use nlsinflate::fit::loglog_fit;
use nlsinflate::inflation::{
    find_tau, frame_map_check, make_datum, run_inflation, InflationNumerics, InflationReport, ScalingParams,
};
use nlsinflate::io::{encode_phase_space, encode_real_field, encode_vector_field, write_atomic, write_field, Table};
use nlsinflate::limit::{
    muk_consistency, phase_consistency, smoothness_monitor, LimitConfig, LimitSolver, LimitTrajectory,
};
use nlsinflate::modulated::{theorem_og_sweep, SweepConfig};
use nlsinflate::nls::{mass, run_observed, NlsConfig, Potential};
use nlsinflate::spectral::{integrate, sobolev_seminorm};
use nlsinflate::wavepacket::{
    commutator_residuals, elementary_inequality_sweep, isometry_defect, wp_transform, WavePacketConfig,
};
use nlsinflate::{Complex64, Field, Grid, RealField, Result};
use serde_json::json;

use crate::config::{Experiment, RunConfig};
use crate::report::{Assertion, Outcome, Run};

pub fn dispatch(cfg: &RunConfig, run: &mut Run) -> Result<Outcome> {
    match cfg.experiment {
        Experiment::SolveNls => solve_nls(cfg, run),
        Experiment::SolveLimit => solve_limit(cfg, run),
        Experiment::ModenergySweep => modenergy_sweep(cfg, run),
        Experiment::WavepacketCheck => wavepacket_check(cfg, run),
        Experiment::OscillatorCheck => oscillator_check(cfg, run),
        Experiment::Inflation => inflation(cfg, run),
    }
}

fn grid(cfg: &RunConfig) -> Result<Grid> {
    Grid::new(cfg.n as usize, cfg.points, cfg.length)
}

fn initial_amplitude(cfg: &RunConfig, g: Grid) -> Field {
    let amp = cfg.amplitude;
    Field::from_fn(g, |x| Complex64::new(amp * (-x.iter().map(|c| c * c).sum::<f64>()).exp(), 0.0))
}

fn uniform(t_final: f64, step: f64) -> Vec<f64> {
    let n = (t_final / step).round().max(1.0) as usize;
    (0..=n).map(|j| t_final * j as f64 / n as f64).collect()
}

fn on_lattice(t: f64, step: f64) -> bool {
    let j = (t / step).round();
    (t - j * step).abs() <= 1e-9 * step
}

fn stamp(t: f64) -> String {
    format!("{t:.4}")
}

fn limit_run(cfg: &RunConfig, a0: &Field, t_max: f64, step: f64) -> Result<LimitTrajectory> {
    let lc = LimitConfig { dt: cfg.dt, ..LimitConfig::new(cfg.sigma, t_max) };
    LimitSolver::new(lc, *a0.grid())?.solve(a0, &uniform(t_max, step))
}

fn positive_orders(cfg: &RunConfig) -> Vec<f64> {
    cfg.k_list.iter().copied().filter(|k| *k > 0.0).collect()
}

fn pick_tau(cfg: &RunConfig, limit: &LimitTrajectory) -> Result<f64> {
    match cfg.tau {
        Some(t) => Ok(t),
        None => {
            let ks = positive_orders(cfg);
            find_tau(limit, if ks.is_empty() { &[1.0] } else { &ks }, cfg.tau_fraction)
        }
    }
}

fn solve_nls(cfg: &RunConfig, run: &mut Run) -> Result<Outcome> {
    let g = grid(cfg)?;
    let u0 = initial_amplitude(cfg, g);
    let mut nc = NlsConfig {
        delta: cfg.delta,
        potential: cfg.potential,
        linear: cfg.linear,
        ..NlsConfig::new(cfg.eps, cfg.sigma, 1.0, cfg.t_final)
    };
    nc.dt = match cfg.dt {
        Some(dt) => dt,
        None => nc.max_dt(&u0)?.min(cfg.t_final / cfg.min_steps as f64),
    };
    run.stage("solve");
    let mut table = Table::new(["t", "mass", "energy", "mass_drift", "energy_drift"]);
    let (mut m0, mut e0) = (None, None);
    let mut worst: f64 = 0.0;
    let dir = run.fields_dir();
    let final_state = run_observed(nc, u0, &uniform(cfg.t_final, cfg.sample_dt), |s| {
        let (m, e) = (s.mass(), s.energy()?);
        let m0 = *m0.get_or_insert(m);
        let e0 = *e0.get_or_insert(e);
        let dm = if m0 > 0.0 { (m - m0).abs() / m0 } else { 0.0 };
        let de = if e0 != 0.0 { (e - e0).abs() / e0.abs() } else { 0.0 };
        worst = worst.max(dm);
        table.push(vec![s.t(), m, e, dm, de])?;
        if on_lattice(s.t(), cfg.field_dt) {
            write_field(&dir.join(format!("u_t{}.nlsf", stamp(s.t()))), s.u())?;
        }
        Ok(())
    })?;
    let last = table.rows.last().cloned().unwrap_or_default();
    Ok(Outcome {
        summary: json!({
            "eps": cfg.eps,
            "dt": nc.dt,
            "t_final": final_state.t(),
            "max_mass_drift": worst,
            "final_energy_drift": last.get(4),
            "max_modulus": final_state.u().max_modulus(),
        }),
        assertions: vec![Assertion::below("mass_drift", worst, 1e-10)],
        table,
    })
}

fn solve_limit(cfg: &RunConfig, run: &mut Run) -> Result<Outcome> {
    let g = grid(cfg)?;
    let a0 = initial_amplitude(cfg, g);
    run.stage("solve");
    let traj = limit_run(cfg, &a0, cfg.t_final, cfg.sample_dt)?;
    run.stage("diagnostics");
    let mut table = Table::new(["t", "monitor", "mass", "energy"]);
    let (m0, e0) = (traj.states[0].mass(), traj.states[0].energy(cfg.sigma));
    let (mut dm, mut de): (f64, f64) = (0.0, 0.0);
    let dir = run.fields_dir();
    for s in &traj.states {
        let (m, e) = (s.mass(), s.energy(cfg.sigma));
        if m0 > 0.0 {
            dm = dm.max((m / m0 - 1.0).abs());
        }
        if e0 > 0.0 {
            de = de.max((e / e0 - 1.0).abs());
        }
        table.push(vec![s.t, smoothness_monitor(s)?, m, e])?;
        if on_lattice(s.t, cfg.field_dt) {
            let t = stamp(s.t);
            write_atomic(&dir.join(format!("v_t{t}.nlsf")), &encode_vector_field(&s.v))?;
            write_field(&dir.join(format!("a_t{t}.nlsf")), &s.a)?;
            write_atomic(&dir.join(format!("phi_t{t}.nlsf")), &encode_real_field(&s.phi))?;
        }
    }
    let muk = muk_consistency(&traj);
    let phase = phase_consistency(&traj)?;
    Ok(Outcome {
        summary: json!({
            "t_valid": traj.t_valid,
            "tripped": traj.tripped,
            "initial_monitor": traj.initial_monitor(),
            "muk_consistency": muk,
            "phase_consistency": phase,
            "max_mass_drift": dm,
            "max_energy_drift": de,
            "samples": traj.states.len(),
        }),
        assertions: vec![
            Assertion::below("muk_consistency", muk, 1e-6),
            Assertion::below("phase_consistency", phase, 1e-8),
            Assertion::below("limit_mass_drift", dm, 1e-8),
            Assertion::below("limit_energy_drift", de, 1e-8),
        ],
        table,
    })
}

fn modenergy_sweep(cfg: &RunConfig, run: &mut Run) -> Result<Outcome> {
    let g = grid(cfg)?;
    let a0 = initial_amplitude(cfg, g);
    run.stage("limit");
    let limit = limit_run(cfg, &a0, cfg.limit_horizon.max(cfg.t_final), cfg.sample_dt)?;
    let tau = pick_tau(cfg, &limit)?;
    let tau_in_window = tau <= cfg.t_final * (1.0 + 1e-12);
    let sc = SweepConfig {
        eps_list: cfg.eps_list.clone(),
        sigma: cfg.sigma,
        delta: cfg.delta,
        t_final: cfg.t_final,
        sample_dt: cfg.sample_dt,
        min_steps: cfg.min_steps,
        tau: tau_in_window.then_some(tau),
        k_list: positive_orders(cfg),
    };
    run.stage("sweep");
    let rep = theorem_og_sweep(&sc, &a0, &limit)?;
    if let Ok(s) = limit.state_at(tau) {
        let dir = run.fields_dir();
        write_field(&dir.join(format!("a_tau{}.nlsf", stamp(tau))), &s.a)?;
        write_atomic(&dir.join(format!("v_tau{}.nlsf", stamp(tau))), &encode_vector_field(&s.v))?;
    }

    let mut table =
        Table::new(["eps", "t", "h", "k", "p", "lower_bound", "thm41_component1", "thm41_component2"]);
    for r in &rep.rows {
        table.push(vec![r.eps, r.t, r.h, r.k, r.p, r.lower_bound, r.thm41_component1, r.thm41_component2])?;
    }
    let drift = rep.per_eps.iter().map(|e| e.max_mass_drift).fold(0.0, f64::max);
    let gap = rep.per_eps.iter().map(|e| e.min_lower_bound_gap).fold(f64::INFINITY, f64::min);
    let mut assertions = vec![
        Assertion::within("energy_rate_slope", rep.summary.slope, 1.7, 2.3),
        Assertion::above("energy_dominates_lower_bound", gap, -1e-12),
        Assertion::below("mass_drift", drift, 1e-10),
    ];
    let n = rep.per_eps.len();
    if let (Some(prev), Some(last)) = (
        rep.per_eps.get(n.wrapping_sub(2)).and_then(|e| e.oscillation.as_ref()),
        rep.per_eps.last().and_then(|e| e.oscillation.as_ref()),
    ) {
        for (p, l) in prev.frac.iter().zip(&last.frac) {
            assertions.push(Assertion::below(&format!("floor_pair_k{}", l.0), (l.1 / p.1 - 1.0).abs(), 0.2));
            assertions.push(Assertion::below(&format!("floor_limit_k{}", l.0), (l.1 / l.2 - 1.0).abs(), 0.25));
        }
        assertions.push(Assertion::above("kinetic_ratio", last.kinetic_tau / last.kinetic_initial, 100.0));
        assertions.push(Assertion::below(
            "kinetic_vs_limit",
            (last.kinetic_tau / last.limit_kinetic - 1.0).abs(),
            0.1,
        ));
    }
    Ok(Outcome {
        summary: json!({
            "tau": tau,
            "t_valid": limit.t_valid,
            "summary": rep.summary,
            "gronwall": rep.gronwall,
            "per_eps": rep.per_eps,
        }),
        assertions,
        table,
    })
}

fn wavepacket_check(cfg: &RunConfig, run: &mut Run) -> Result<Outcome> {
    let g = grid(cfg)?;
    run.stage("isometry");
    let amp = cfg.amplitude;
    let u = Field::from_fn(g, |x| Complex64::from_polar(amp * (-x[0] * x[0]).exp(), x[0].sin()));
    let wcfg = WavePacketConfig::auto(&u, cfg.eps, 1.0)?;
    let coarse = isometry_defect(&u, &wcfg)?;
    let fine = isometry_defect(&u, &wcfg.refined())?;
    write_atomic(&run.fields_dir().join("wu.nlsw"), &encode_phase_space(&wp_transform(&u, &wcfg)?))?;

    run.stage("commutators");
    let s = cfg.commutator_order;
    let v = RealField::from_fn(g, |x| x[0] * (-x[0] * x[0] / 2.0).exp());
    let mut table = Table::new(["eps", "residual_1", "residual_2", "residual_3", "constant_1", "constant_2", "constant_3"]);
    let mut res = [vec![], vec![], vec![]];
    for &e in &cfg.eps_list {
        let coherent = Field::from_fn(g, |x| Complex64::new((-x[0] * x[0] / (2.0 * e)).exp(), 0.0));
        let c = WavePacketConfig::auto(&coherent, e, 0.0)?;
        let r = commutator_residuals(&coherent, &v, s, &c)?;
        let k = r.constants();
        let nu = coherent.l2_norm();
        for j in 0..3 {
            res[j].push(r.residuals[j] / nu);
        }
        table.push(vec![e, r.residuals[0], r.residuals[1], r.residuals[2], k[0], k[1], k[2]])?;
    }
    let mut slopes = [0.0; 3];
    for j in 0..3 {
        slopes[j] = loglog_fit(&cfg.eps_list, &res[j])?.slope;
    }

    run.stage("elementary inequality");
    let violations: usize =
        [0.25, 0.5, 0.75].iter().map(|&s| elementary_inequality_sweep(cfg.samples, s, cfg.seed)).sum();

    let refinement = if fine.max(coarse) < 1e-12 { 4.0 } else { coarse / fine };
    let targets = [0.5 * s, 0.5 * s, 0.5];
    let mut assertions = vec![
        Assertion::below("isometry_defect", coarse, 1e-3),
        Assertion::above("refinement_gain_or_saturated", refinement, 4.0 - 1e-12),
        Assertion::below("elementary_violations", violations as f64, 0.5),
    ];
    for j in 0..3 {
        assertions.push(Assertion::within(
            &format!("commutator_slope_{}", j + 1),
            slopes[j],
            targets[j] - 0.15,
            targets[j] + 0.15,
        ));
    }
    Ok(Outcome {
        summary: json!({
            "eps": cfg.eps,
            "transform": wcfg,
            "isometry_defect": coarse,
            "isometry_defect_refined": fine,
            "commutator_order": s,
            "commutator_slopes": slopes,
            "violations": violations,
            "samples_per_order": cfg.samples,
            "seed": cfg.seed,
        }),
        assertions,
        table,
    })
}

fn oscillator_check(cfg: &RunConfig, run: &mut Run) -> Result<Outcome> {
    if cfg.potential != Potential::Harmonic || !cfg.linear {
        return Err(Error::Config("oscillator-check needs potential = \"harmonic\" and linear = true".into()));
    }
    let g = grid(cfg)?;
    let a0 = initial_amplitude(cfg, g);
    let x2: Vec<f64> =
        g.axis_nodes().iter().zip(a0.values()).map(|(x, z)| x * x * z.norm_sqr()).collect();
    let x_a0 = integrate(&g, &x2).sqrt();
    let mut table = Table::new(["eps", "t", "measured", "predicted", "error"]);
    let (mut finals, mut ratio, mut drift) = (Vec::new(), 0.0f64, 0.0f64);
    for &eps in &cfg.eps_list {
        run.stage(&format!("eps = {eps}"));
        let mut nc = NlsConfig {
            potential: cfg.potential,
            linear: true,
            ..NlsConfig::new(eps, cfg.sigma, 1.0, cfg.t_final)
        };
        nc.dt = match cfg.dt {
            Some(dt) => dt,
            None => nc.max_dt(&a0)?,
        };
        let m0 = mass(&a0);
        let mut last = 0.0;
        let end = run_observed(nc, a0.clone(), &uniform(cfg.t_final, cfg.sample_dt), |s| {
            let measured = sobolev_seminorm(s.u(), 1.0, eps)?;
            let predicted = s.t().sin() * x_a0;
            last = (measured - predicted).abs();
            ratio = ratio.max(last / eps);
            table.push(vec![eps, s.t(), measured, predicted, last])
        })?;
        drift = drift.max((end.mass() - m0).abs() / m0);
        finals.push(last);
    }
    let slope = loglog_fit(&cfg.eps_list, &finals)?.slope;
    Ok(Outcome {
        summary: json!({
            "x_a0": x_a0,
            "t_final": cfg.t_final,
            "final_errors": finals,
            "error_slope": slope,
            "max_error_over_eps": ratio,
            "max_mass_drift": drift,
        }),
        assertions: vec![
            Assertion::within("error_slope", slope, 0.7, 1.3),
            Assertion::below("error_over_eps", ratio, 1.0),
            Assertion::below("mass_drift", drift, 1e-10),
        ],
        table,
    })
}

fn inflation(cfg: &RunConfig, run: &mut Run) -> Result<Outcome> {
    let g = grid(cfg)?;
    let a0 = initial_amplitude(cfg, g);
    let s = cfg.s.expect("validated");
    let h0 = cfg.h_list.first().copied().unwrap_or(0.5);
    let base = ScalingParams { n: cfg.n, sigma: cfg.sigma, s, h: h0, log_damping: cfg.log_damping };
    base.validate()?;
    let mut ks = cfg.k_list.clone();
    if !ks.contains(&0.0) {
        ks.insert(0, 0.0);
    }
    run.stage("limit");
    let limit = limit_run(cfg, &a0, cfg.limit_horizon, cfg.sample_dt)?;
    let tau = pick_tau(cfg, &limit)?;
    let numerics = InflationNumerics { dt_fraction: 1.0, min_steps: cfg.min_steps };

    run.stage("inflation");
    let rep = run_inflation(&base, &cfg.h_list, &ks, tau, &a0, &numerics)?;
    let dir = run.fields_dir();
    for &h in &cfg.h_list {
        write_field(&dir.join(format!("datum_h{h}.nlsf")), &make_datum(&base.with_h(h)?, &a0)?)?;
    }

    run.stage("tau sensitivity");
    let mut sensitivity = Vec::new();
    for t in [0.5 * tau, 2.0 * tau] {
        let r: InflationReport = run_inflation(&base, &cfg.h_list, &ks, t, &a0, &numerics)?;
        for f in &r.fits {
            sensitivity.push(json!({"tau": t, "k": f.k, "slope": f.fit.slope, "predicted": f.predicted}));
        }
    }

    run.stage("frame map");
    let frame = if cfg.log_damping { None } else { Some(frame_map_check(&base, &a0, 1e-3, 1)?) };

    let mut table = Table::new(["h", "eps", "k", "norm", "predicted_exp", "local_slope"]);
    for r in &rep.rows {
        table.push(vec![r.h, r.eps, r.k, r.norm, r.predicted_exp, r.local_slope])?;
    }
    let mut assertions = Vec::new();
    for f in &rep.fits {
        let tol = if f.k == 0.0 { 0.02 } else { 0.15 };
        assertions.push(Assertion::within(
            &format!("exponent_k{}", f.k),
            f.fit.slope,
            f.predicted - tol,
            f.predicted + tol,
        ));
    }
    let drift = rep.runs.iter().map(|r| r.mass_drift).fold(0.0, f64::max);
    assertions.push(Assertion::below("mass_drift", drift, 1e-10));
    if let Some(f) = &frame {
        assertions.push(Assertion::below("frame_map_one_step", f.field_discrepancy, 1e-6));
    }
    Ok(Outcome {
        summary: json!({
            "tau": tau,
            "t_valid": limit.t_valid,
            "s_c": base.s_c(),
            "gain": base.gain(),
            "fits": rep.fits,
            "runs": rep.runs,
            "tau_sensitivity": sensitivity,
            "frame_map": frame,
        }),
        assertions,
        table,
    })
}
