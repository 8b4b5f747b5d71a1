use std::path::{Path, PathBuf};
use std::time::Instant;

use nlsinflate::io::{write_json, Table};
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

/// One pass/fail check attached to an experiment.
#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub target: String,
}

impl Assertion {
    pub fn within(name: &str, measured: f64, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), pass: (lo..=hi).contains(&measured), measured, target: format!("[{lo}, {hi}]") }
    }

    pub fn below(name: &str, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), pass: measured < bound, measured, target: format!("< {bound:e}") }
    }

    pub fn above(name: &str, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), pass: measured > bound, measured, target: format!("> {bound}") }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

/// What an experiment hands back for writing.
pub struct Outcome {
    pub table: Table,
    pub summary: Value,
    pub assertions: Vec<Assertion>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    status: &'a str,
    error: Option<String>,
    config: &'a RunConfig,
    stages: &'a [Stage],
    assertions: &'a [Assertion],
}

/// Output directory plus the stage timer.
pub struct Run {
    pub out: PathBuf,
    stages: Vec<Stage>,
    current: Option<(String, Instant)>,
}

impl Run {
    pub fn new(out: &Path) -> Self {
        Self { out: out.to_path_buf(), stages: Vec::new(), current: None }
    }

    pub fn stage(&mut self, name: &str) {
        self.finish_stage();
        eprintln!("[{name}]");
        self.current = Some((name.to_string(), Instant::now()));
    }

    fn finish_stage(&mut self) {
        if let Some((name, t0)) = self.current.take() {
            self.stages.push(Stage { name, seconds: t0.elapsed().as_secs_f64() });
        }
    }

    pub fn fields_dir(&self) -> PathBuf {
        self.out.join("fields")
    }

    pub fn finish(
        mut self,
        cfg: &RunConfig,
        result: &Result<Outcome, nlsinflate::Error>,
    ) -> nlsinflate::Result<()> {
        self.finish_stage();
        let (status, error, assertions): (&str, Option<String>, &[Assertion]) = match result {
            Ok(o) => {
                write_json(&self.out.join("summary.json"), &o.summary)?;
                o.table.write(&self.out.join("report.csv"))?;
                let pass = o.assertions.iter().all(|a| a.pass);
                (if pass { "pass" } else { "fail" }, None, &o.assertions)
            }
            Err(e) => ("failed", Some(e.to_string()), &[]),
        };
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            status,
            error,
            config: cfg,
            stages: &self.stages,
            assertions,
        };
        write_json(&self.out.join("manifest.json"), &manifest)
    }
}
