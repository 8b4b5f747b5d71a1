//! Run configuration: per-experiment defaults, overlaid by a TOML file (or a
//! previously written `manifest.json`), overlaid by `--set key=value` flags.

use std::fmt;
use std::path::Path;

use clap::ValueEnum;
use nlsinflate::inflation::ScalingParams;
use nlsinflate::nls::Potential;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    SolveNls,
    SolveLimit,
    ModenergySweep,
    WavepacketCheck,
    OscillatorCheck,
    Inflation,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        write!(f, "{}", v.as_str().unwrap_or("?"))
    }
}

/// Fully resolved parameters. Every field has a value after merging with
/// the defaults, so the manifest echo is a complete, replayable input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub n: u32,
    pub sigma: u32,
    pub delta: f64,
    pub potential: Potential,
    pub linear: bool,
    /// `a₀ = amplitude · exp(−|x|²)`.
    pub amplitude: f64,
    pub eps: f64,
    pub eps_list: Vec<f64>,
    pub s: Option<f64>,
    pub h_list: Vec<f64>,
    pub k_list: Vec<f64>,
    pub log_damping: bool,
    pub t_final: f64,
    /// Fixed `τ`; `None` selects it from the limit trajectory.
    pub tau: Option<f64>,
    pub tau_fraction: f64,
    pub points: usize,
    pub length: f64,
    /// Fixed step; `None` picks the step from the stability rule.
    pub dt: Option<f64>,
    pub sample_dt: f64,
    pub field_dt: f64,
    pub min_steps: usize,
    /// End of the limit run used to choose `τ`.
    pub limit_horizon: f64,
    pub commutator_order: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn powers(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|j| 2f64.powi(-j)).collect()
}

fn defaults(exp: Experiment) -> Map<String, Value> {
    let mut d = json!({
        "experiment": exp,
        "n": 1,
        "sigma": 3,
        "delta": 0.0,
        "potential": "none",
        "linear": false,
        "amplitude": 1.0,
        "eps": 0.1,
        "eps_list": powers(4, 9),
        "s": null,
        "h_list": powers(1, 6),
        "k_list": [0.5, 1.0],
        "log_damping": false,
        "t_final": 0.2,
        "tau": null,
        "tau_fraction": 0.25,
        "points": 2048,
        "length": 16.0,
        "dt": null,
        "sample_dt": 1e-3,
        "field_dt": 0.05,
        "min_steps": 200,
        "limit_horizon": 0.6,
        "commutator_order": 0.5,
        "samples": 1_000_000,
        "seed": 20240601u64,
    });
    let patch = match exp {
        Experiment::SolveNls => json!({"t_final": 1.0, "sample_dt": 0.01, "field_dt": 0.25}),
        Experiment::SolveLimit => json!({"t_final": 0.3, "dt": 1e-3, "sample_dt": 0.01}),
        Experiment::ModenergySweep => json!({"points": 4096}),
        Experiment::WavepacketCheck => json!({"eps": 1.0 / 64.0}),
        Experiment::OscillatorCheck => json!({
            "sigma": 1, "linear": true, "potential": "harmonic", "points": 4096, "length": 12.0,
            "eps_list": powers(4, 8), "t_final": 0.5, "sample_dt": 0.05
        }),
        Experiment::Inflation => json!({"points": 1024, "s": 0.1}),
    };
    let obj = d.as_object_mut().expect("object literal");
    for (k, v) in patch.as_object().expect("object literal") {
        obj.insert(k.clone(), v.clone());
    }
    obj.clone()
}

/// Reads a TOML config, or the `config` entry of a JSON manifest.
pub fn read_file(path: &Path) -> Result<Map<String, Value>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = if path.extension().is_some_and(|e| e == "json") {
        let v: Value = serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        v.get("config").cloned().unwrap_or(v)
    } else {
        let t: toml::Table = toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        serde_json::to_value(t).map_err(|e| ConfigError(e.to_string()))?
    };
    match value {
        Value::Object(m) => Ok(m),
        _ => Err(ConfigError(format!("{}: expected a table of key = value pairs", path.display()))),
    }
}

/// Parses one `key=value` override; the value uses TOML syntax, with bare
/// words taken as strings.
pub fn parse_override(raw: &str) -> Result<(String, Value), ConfigError> {
    let (key, val) = raw
        .split_once('=')
        .ok_or_else(|| ConfigError(format!("override `{raw}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(ConfigError(format!("override `{raw}` has an empty key")));
    }
    let val = val.trim();
    let parsed = toml::from_str::<toml::Table>(&format!("v = {val}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .map(|v| serde_json::to_value(v).expect("TOML values map to JSON"))
        .unwrap_or_else(|| Value::String(val.to_string()));
    Ok((key.to_string(), parsed))
}

pub fn resolve(
    exp: Experiment,
    file: Option<Map<String, Value>>,
    overrides: &[(String, Value)],
) -> Result<RunConfig, ConfigError> {
    let mut merged = defaults(exp);
    let known: Vec<String> = merged.keys().cloned().collect();
    let mut layer = |k: &str, v: &Value| -> Result<(), ConfigError> {
        if !known.iter().any(|x| x == k) {
            return Err(ConfigError(format!("unknown configuration key `{k}`")));
        }
        merged.insert(k.to_string(), v.clone());
        Ok(())
    };
    for (k, v) in file.iter().flatten() {
        layer(k, v)?;
    }
    for (k, v) in overrides {
        layer(k, v)?;
    }
    let cfg: RunConfig =
        serde_json::from_value(Value::Object(merged)).map_err(|e| ConfigError(format!("invalid configuration: {e}")))?;
    if cfg.experiment != exp {
        return Err(ConfigError(format!(
            "configuration is for experiment `{}` but `{exp}` was requested",
            cfg.experiment
        )));
    }
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError(m));
        if !(1..=3).contains(&self.n) {
            return fail(format!("n = {} violates 1 ≤ n ≤ 3", self.n));
        }
        if self.sigma == 0 {
            return fail("σ = 0 violates σ ≥ 1".into());
        }
        if !(self.delta >= 0.0) {
            return fail(format!("δ = {} violates δ ≥ 0", self.delta));
        }
        if !self.points.is_power_of_two() || self.points < 8 {
            return fail(format!("points = {} must be a power of two ≥ 8", self.points));
        }
        if !(self.length > 0.0) {
            return fail(format!("length = {} violates L > 0", self.length));
        }
        if !(self.eps > 0.0) || self.eps_list.iter().any(|e| !(*e > 0.0)) {
            return fail("every ε must be > 0".into());
        }
        if !(self.t_final > 0.0) || !(self.sample_dt > 0.0) || !(self.field_dt > 0.0) {
            return fail("t_final, sample_dt and field_dt must be > 0".into());
        }
        if self.dt.is_some_and(|d| !(d > 0.0)) {
            return fail("dt must be > 0".into());
        }
        if self.k_list.iter().any(|k| !(0.0..=1.0).contains(k)) {
            return fail("orders k must lie in [0, 1]".into());
        }
        if !(self.tau_fraction > 0.0 && self.tau_fraction < 1.0) {
            return fail(format!("tau_fraction = {} violates 0 < fraction < 1", self.tau_fraction));
        }
        if self.tau.is_some_and(|t| !(t > 0.0)) {
            return fail("τ must be > 0".into());
        }
        if matches!(self.experiment, Experiment::WavepacketCheck | Experiment::OscillatorCheck) && self.n != 1 {
            return fail(format!("{} is implemented for n = 1", self.experiment));
        }
        if let Some(s) = self.s {
            let p = ScalingParams { n: self.n, sigma: self.sigma, s, h: 0.5, log_damping: self.log_damping };
            p.validate().map_err(|e| ConfigError(e.to_string()))?;
        } else if self.experiment == Experiment::Inflation {
            return fail("inflation needs the regularity index s".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_is_filled_with_defaults() {
        let file = serde_json::from_value(json!({"n": 1, "sigma": 3, "eps": 0.1})).unwrap();
        let cfg = resolve(Experiment::SolveNls, Some(file), &[]).unwrap();
        assert_eq!(cfg.points, 2048);
        assert_eq!(cfg.eps, 0.1);
        assert_eq!(cfg.s, None);
    }

    #[test]
    fn scaling_constraints_are_named() {
        let o = [parse_override("sigma=2").unwrap(), parse_override("s=0.1").unwrap()];
        let e = resolve(Experiment::SolveNls, None, &o).unwrap_err();
        assert!(e.0.contains("s_c > 0"), "{e}");
        let o = [parse_override("s=0.2").unwrap()];
        let e = resolve(Experiment::Inflation, None, &o).unwrap_err();
        assert!(e.0.contains("s < s_c"), "{e}");
    }

    #[test]
    fn overrides_win_and_parse_toml_values() {
        let file = serde_json::from_value(json!({"eps": 0.1})).unwrap();
        let o = [parse_override("eps=0.05").unwrap(), parse_override("eps_list=[0.1, 0.05]").unwrap()];
        let cfg = resolve(Experiment::SolveNls, Some(file), &o).unwrap();
        assert_eq!(cfg.eps, 0.05);
        assert_eq!(cfg.eps_list, vec![0.1, 0.05]);
        assert_eq!(parse_override("potential=harmonic").unwrap().1, json!("harmonic"));
        assert!(parse_override("novalue").is_err());
        assert!(resolve(Experiment::SolveNls, None, &[parse_override("bogus=1").unwrap()]).is_err());
    }
}
