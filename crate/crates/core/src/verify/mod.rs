//! Batch checks behind `cloneforge run`, and the report they produce.
//!
//! Each check draws from its own ChaCha stream of the configured seed, so a
//! check's result does not depend on which other checks run. Reports hold
//! no timings; those are returned separately so identical configurations
//! give byte-identical reports.

mod filter_checks;
mod semilattice_checks;
mod shift_checks;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dot::DotError;
use crate::engine::CloneError;
use crate::filter::FilterError;
use crate::semilattice::SemilatticeError;
use crate::shift::{ShiftError, Window};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Op(#[from] crate::ops::OpError),
    #[error(transparent)]
    Clone(#[from] CloneError),
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error(transparent)]
    Semilattice(#[from] SemilatticeError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Dot(#[from] DotError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Shift,
    Semilattice,
    Filters,
    All,
}

impl Scenario {
    fn includes(self, other: Scenario) -> bool {
        self == Scenario::All || self == other
    }
}

impl FromStr for Scenario {
    type Err = RunError;
    fn from_str(s: &str) -> Result<Self, RunError> {
        match s {
            "shift" => Ok(Scenario::Shift),
            "semilattice" => Ok(Scenario::Semilattice),
            "filters" => Ok(Scenario::Filters),
            "all" => Ok(Scenario::All),
            other => Err(RunError::InvalidConfig(format!(
                "unknown scenario {other:?} (expected shift, semilattice, filters or all)"
            ))),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Shift => "shift",
            Scenario::Semilattice => "semilattice",
            Scenario::Filters => "filters",
            Scenario::All => "all",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShiftConfig {
    pub y_count: u32,
    pub window: Window,
    /// Steps `n, m` range over `1..=max_step`.
    pub max_step: u64,
    /// Samples per `(n, m)` pair.
    pub samples: usize,
    pub theorem_instances: usize,
    pub max_tuples: usize,
    pub reduction_samples: usize,
}

impl Default for ShiftConfig {
    fn default() -> Self {
        ShiftConfig {
            y_count: 2,
            window: Window::new(-24, 24).expect("non-empty"),
            max_step: 8,
            samples: 200,
            theorem_instances: 100,
            max_tuples: 4,
            reduction_samples: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemilatticeConfig {
    /// Largest corpus semilattice for the congruence/order bijection.
    pub max_size: usize,
    /// Random semilattices added to the corpus.
    pub random: usize,
    /// Largest semilattice for unary recovery and interpolation.
    pub recovery_max_size: usize,
    pub interpolation_instances: usize,
    /// `N` for the chain cut-set round trips.
    pub chain_n: usize,
    /// `N` for the exported Con(chain) diagram.
    pub dot_chain: usize,
}

impl Default for SemilatticeConfig {
    fn default() -> Self {
        SemilatticeConfig {
            max_size: 6,
            random: 50,
            recovery_max_size: 5,
            interpolation_instances: 500,
            chain_n: 8,
            dot_chain: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// Base size of the exhaustive closure cross-check.
    pub q: usize,
    /// Base size of the certificate and ideal checks.
    pub certificate_q: usize,
    pub binary_samples: usize,
    pub ideal_samples: usize,
    pub lattice_max_q: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            q: 2,
            certificate_q: 3,
            binary_samples: 500,
            ideal_samples: 50,
            lattice_max_q: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Formats {
    pub json: bool,
    pub dot: bool,
    pub text: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Formats {
            json: true,
            dot: true,
            text: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub arity_bound: usize,
    pub size_bound: usize,
    pub formats: Formats,
    pub shift: ShiftConfig,
    pub semilattice: SemilatticeConfig,
    pub filters: FilterConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: Scenario::All,
            seed: 0,
            arity_bound: 3,
            size_bound: 2_000_000,
            formats: Formats::default(),
            shift: ShiftConfig::default(),
            semilattice: SemilatticeConfig::default(),
            filters: FilterConfig::default(),
        }
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), RunError> {
    if ok {
        Ok(())
    } else {
        Err(RunError::InvalidConfig(msg()))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), RunError> {
        let s = &self.shift;
        ensure((1..=16).contains(&s.y_count), || "shift.y_count must be in 1..=16".into())?;
        ensure(s.window.span() >= 8, || "shift.window must span at least 8 levels".into())?;
        ensure((1..=32).contains(&s.max_step), || "shift.max_step must be in 1..=32".into())?;
        ensure(
            s.window.span() as u64 >= 2 * s.max_step,
            || "shift.window must span at least twice shift.max_step".into(),
        )?;
        ensure(s.max_tuples >= 1, || "shift.max_tuples must be positive".into())?;
        let l = &self.semilattice;
        ensure((2..=8).contains(&l.max_size), || "semilattice.max_size must be in 2..=8".into())?;
        ensure(
            (2..=6).contains(&l.recovery_max_size),
            || "semilattice.recovery_max_size must be in 2..=6".into(),
        )?;
        ensure((1..=16).contains(&l.chain_n), || "semilattice.chain_n must be in 1..=16".into())?;
        ensure((1..=8).contains(&l.dot_chain), || "semilattice.dot_chain must be in 1..=8".into())?;
        let f = &self.filters;
        ensure(
            (1..=2).contains(&f.q),
            || "filters.q must be 1 or 2; the closure of the idempotent ternary tables is unmaterializable beyond".into(),
        )?;
        ensure(
            (1..=4).contains(&f.certificate_q),
            || "filters.certificate_q must be in 1..=4".into(),
        )?;
        ensure(
            (1..=6).contains(&f.lattice_max_q),
            || "filters.lattice_max_q must be in 1..=6".into(),
        )?;
        ensure(self.arity_bound >= 3, || {
            "arity_bound must be at least 3 for the filter cross-check".into()
        })?;
        ensure(self.size_bound > 0, || "size_bound must be positive".into())?;
        Ok(())
    }
}

/// One pass/fail line of a report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub id: String,
    pub description: String,
    pub passed: bool,
    pub cases: u64,
    pub failures: u64,
    /// Cases not run because the configured scale cannot express them.
    pub skipped: u64,
    pub first_failure: Option<String>,
}

/// A measured quantity that is reported but not judged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    pub id: String,
    pub description: String,
    pub value: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: Scenario,
    pub seed: u64,
    pub config: RunConfig,
    pub passed: bool,
    /// Sorted by id.
    pub checks: Vec<Check>,
    pub observations: Vec<Observation>,
    /// File names of the artifacts written next to the report.
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub id: String,
    pub millis: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub artifacts: Vec<Artifact>,
    pub timings: Vec<Timing>,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed {
            0
        } else {
            1
        }
    }

    /// Plain-text summary: one line per check, then the timings.
    pub fn summary(&self) -> String {
        let r = &self.report;
        let mut out = format!("cloneforge {} scenario={} seed={}\n", r.version, r.scenario, r.seed);
        for c in &r.checks {
            out.push_str(&format!(
                "{} {:<32} cases={} failures={} skipped={}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.id,
                c.cases,
                c.failures,
                c.skipped
            ));
            if let Some(f) = &c.first_failure {
                out.push_str(&format!("     first failure: {f}\n"));
            }
        }
        for o in &r.observations {
            out.push_str(&format!("NOTE {:<32} {}\n", o.id, o.value));
        }
        for t in &self.timings {
            out.push_str(&format!("TIME {:<32} {:.1} ms\n", t.id, t.millis));
        }
        out.push_str(if r.passed { "result: PASS\n" } else { "result: FAIL\n" });
        out
    }
}

/// Accumulates case results for one check.
#[derive(Debug, Default)]
pub(crate) struct Tally {
    cases: u64,
    failures: u64,
    skipped: u64,
    first_failure: Option<String>,
}

impl Tally {
    pub(crate) fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(detail());
            }
        }
    }

    pub(crate) fn skip(&mut self, n: u64) {
        self.skipped += n;
    }

    pub(crate) fn finish(self, id: &str, description: &str) -> Check {
        Check {
            id: id.to_string(),
            description: description.to_string(),
            passed: self.failures == 0 && self.cases > 0,
            cases: self.cases,
            failures: self.failures,
            skipped: self.skipped,
            first_failure: self.first_failure,
        }
    }
}

/// Collects checks, observations, artifacts and timings during a run.
pub(crate) struct Sink {
    seed: u64,
    checks: Vec<Check>,
    observations: Vec<Observation>,
    artifacts: Vec<Artifact>,
    timings: Vec<Timing>,
}

impl Sink {
    /// An independent generator for the named check.
    pub(crate) fn rng(&self, id: &str) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        // FNV-1a of the id selects the stream
        let stream = id
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
        rng.set_stream(stream);
        rng
    }

    pub(crate) fn run(
        &mut self,
        id: &str,
        f: impl FnOnce(&mut Self, &mut ChaCha8Rng) -> Result<Check, RunError>,
    ) -> Result<(), RunError> {
        let mut rng = self.rng(id);
        let start = Instant::now();
        let check = f(self, &mut rng)?;
        debug_assert_eq!(check.id, id);
        self.timings.push(Timing {
            id: id.to_string(),
            millis: start.elapsed().as_secs_f64() * 1e3,
        });
        self.checks.push(check);
        Ok(())
    }

    pub(crate) fn observe(&mut self, id: &str, description: &str, value: serde_json::Value) {
        self.observations.push(Observation {
            id: id.to_string(),
            description: description.to_string(),
            value,
        });
    }

    pub(crate) fn artifact(&mut self, name: String, contents: String) {
        self.artifacts.push(Artifact { name, contents });
    }
}

/// Runs every check of the configured scenario.
pub fn run_scenario(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    cfg.validate()?;
    let mut sink = Sink {
        seed: cfg.seed,
        checks: Vec::new(),
        observations: Vec::new(),
        artifacts: Vec::new(),
        timings: Vec::new(),
    };
    if cfg.scenario.includes(Scenario::Shift) {
        shift_checks::run(cfg, &mut sink)?;
    }
    if cfg.scenario.includes(Scenario::Semilattice) {
        semilattice_checks::run(cfg, &mut sink)?;
    }
    if cfg.scenario.includes(Scenario::Filters) {
        filter_checks::run(cfg, &mut sink)?;
    }
    let Sink {
        mut checks,
        mut observations,
        mut artifacts,
        timings,
        ..
    } = sink;
    checks.sort_by(|a, b| a.id.cmp(&b.id));
    observations.sort_by(|a, b| a.id.cmp(&b.id));
    if !cfg.formats.dot {
        artifacts.retain(|a| !a.name.ends_with(".dot"));
    }
    if !cfg.formats.json {
        artifacts.retain(|a| !a.name.ends_with(".json"));
    }
    artifacts.sort_by(|a, b| a.name.cmp(&b.name));
    let report = Report {
        tool: "cloneforge",
        version: env!("CARGO_PKG_VERSION"),
        scenario: cfg.scenario,
        seed: cfg.seed,
        config: cfg.clone(),
        passed: checks.iter().all(|c| c.passed),
        checks,
        observations,
        artifacts: artifacts.iter().map(|a| a.name.clone()).collect(),
    };
    Ok(RunOutput {
        report,
        artifacts,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.shift.samples = 10;
        cfg.shift.theorem_instances = 10;
        cfg.shift.max_step = 4;
        cfg.semilattice.random = 5;
        cfg.semilattice.max_size = 5;
        cfg.semilattice.recovery_max_size = 4;
        cfg.semilattice.interpolation_instances = 30;
        cfg.filters.binary_samples = 30;
        cfg.filters.ideal_samples = 5;
        cfg.filters.lattice_max_q = 4;
        cfg
    }

    #[test]
    fn small_run_passes_and_is_deterministic() {
        let cfg = small();
        let a = run_scenario(&cfg).unwrap();
        for c in &a.report.checks {
            assert!(c.passed, "{c:?}");
        }
        assert_eq!(a.exit_code(), 0);
        let b = run_scenario(&cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a.report).unwrap(),
            serde_json::to_string(&b.report).unwrap()
        );
        let ids: Vec<&str> = a.report.checks.iter().map(|c| c.id.as_str()).collect();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn one_failed_case_fails_the_run() {
        let mut out = run_scenario(&RunConfig {
            scenario: Scenario::Semilattice,
            ..small()
        })
        .unwrap();
        let mut t = Tally::default();
        t.record(true, String::new);
        t.record(false, || "broken".into());
        let check = t.finish("x.y", "");
        assert!(!check.passed);
        assert_eq!(check.first_failure.as_deref(), Some("broken"));
        out.report.checks.push(check);
        out.report.passed = out.report.checks.iter().all(|c| c.passed);
        assert_eq!(out.exit_code(), 1);
        assert!(out.summary().contains("FAIL x.y"));
        assert!(!Tally::default().finish("empty", "").passed);
    }

    #[test]
    fn scenario_names() {
        assert_eq!("filters".parse::<Scenario>().unwrap(), Scenario::Filters);
        assert!("nope".parse::<Scenario>().is_err());
        assert_eq!(Scenario::Semilattice.to_string(), "semilattice");
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = RunConfig::default();
        cfg.filters.q = 3;
        assert!(matches!(run_scenario(&cfg), Err(RunError::InvalidConfig(_))));
        let mut cfg = RunConfig::default();
        cfg.shift.window = Window::new(0, 4).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn chain_four_diagram() {
        let mut cfg = small();
        cfg.scenario = Scenario::Semilattice;
        let out = run_scenario(&cfg).unwrap();
        let dot = out
            .artifacts
            .iter()
            .find(|a| a.name == "con_chain4.dot")
            .expect("Con(chain 4) diagram");
        assert_eq!(crate::dot::dot_size(&dot.contents).0, 8);
    }
}
