//! JSON run configuration and its translation into a ready-to-run experiment.
//!
//! ```json
//! {
//!   "system": { "kind": "lti-sf-tabuada" },
//!   "certificate": { "source": "auto", "eps1": 0.0, "eps2": 0.68 },
//!   "trigger": { "mode": "state-feedback", "T": 0.075, "sigma": 0.5 },
//!   "sim": { "step": 0.001, "horizon": 10.0 },
//!   "batch": { "n_runs": 200, "radius": 100.0, "seed": 1 },
//!   "output_dir": "out/run"
//! }
//! ```

use std::path::{Path, PathBuf};

use etc_lab_core::linalg::LinalgError;
use etc_lab_core::lti_design::{
    assemble, design_certificate, extract_assumption, ClosedLoopMatrices, DesignError, LmiCertificate, LtiController,
    LtiPlant,
};
use etc_lab_core::montecarlo::BatchSpec;
use etc_lab_core::systems::{lorenz_loop, lti_loop, tabuada_example, SystemError};
use etc_lab_core::trigger::{TriggerError, ZetaParams};
use etc_lab_core::{Certificate, ClosedLoop, HybridState, Matrix, SimSettings, TriggerConfig, TriggerMode};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config field `{field}`: {message}")]
    Parse { field: String, message: String },
    #[error("config field `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
    #[error(transparent)]
    Trigger(#[from] TriggerError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Sim(#[from] etc_lab_core::SimError),
}

pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    #[serde(default)]
    pub certificate: CertificateSpec,
    pub trigger: TriggerSpec,
    #[serde(default)]
    pub sim: SimSpec,
    #[serde(default)]
    pub batch: BatchSection,
    /// Initial state for `simulate`; run 0 of the batch sampler when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialState>,
    #[serde(default)]
    pub r_monitor: ZetaSection,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    Lorenz {
        #[serde(default = "lorenz_a")]
        a: f64,
        #[serde(default = "lorenz_b")]
        b: f64,
        #[serde(default = "lorenz_c")]
        c: f64,
        #[serde(default = "lorenz_p1")]
        p1: f64,
        #[serde(default = "lorenz_p2")]
        p2: f64,
    },
    /// `A = [[0, 1], [-2, 3]]`, `B = [0; 1]`, `u = [1, -4] x`.
    LtiSfTabuada,
    LtiCustom {
        a: Rows,
        b: Rows,
        /// Identity (state feedback) when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<Rows>,
        controller: ControllerSpec,
    },
}

fn lorenz_a() -> f64 {
    10.0
}
fn lorenz_b() -> f64 {
    28.0
}
fn lorenz_c() -> f64 {
    8.0 / 3.0
}
fn lorenz_p1() -> f64 {
    2.0
}
fn lorenz_p2() -> f64 {
    30.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ControllerSpec {
    Static { dc: Rows },
    Dynamic { ac: Rows, bc: Rows, cc: Rows, dc: Rows },
}

/// Where the certificate comes from. `auto` runs the LMI design for linear
/// loops and uses the analytic certificate for Lorenz; `inline` keeps the
/// structural functions of `auto` but replaces the gains `γ` and `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CertificateSpec {
    Auto {
        #[serde(default = "default_eps")]
        eps1: f64,
        #[serde(default = "default_eps")]
        eps2: f64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        slack_grid: Vec<f64>,
    },
    Inline {
        gamma: f64,
        #[serde(rename = "L")]
        l: f64,
    },
}

fn default_eps() -> f64 {
    1e-2
}

impl Default for CertificateSpec {
    fn default() -> Self {
        CertificateSpec::Auto {
            eps1: default_eps(),
            eps2: default_eps(),
            slack_grid: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSpec {
    OutputFeedback,
    StateFeedback,
    PureEvent,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriggerSpec {
    pub mode: ModeSpec,
    /// Dwell time (or sampling period for `periodic`); `0` for `pure-event`.
    #[serde(rename = "T", default)]
    pub dwell: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

impl TriggerSpec {
    pub fn to_config(&self) -> Result<TriggerConfig, ConfigError> {
        let sigma = || {
            self.sigma.ok_or(ConfigError::Invalid {
                field: "trigger.sigma",
                message: "required for state-feedback and pure-event modes".into(),
            })
        };
        Ok(match self.mode {
            ModeSpec::OutputFeedback => TriggerConfig::output_feedback(self.dwell),
            ModeSpec::StateFeedback => TriggerConfig::state_feedback(self.dwell, sigma()?),
            ModeSpec::PureEvent => TriggerConfig {
                dwell: self.dwell,
                ..TriggerConfig::pure_event(sigma()?)
            },
            ModeSpec::Periodic => TriggerConfig::periodic(self.dwell),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSpec {
    pub step: f64,
    pub horizon: f64,
    pub max_jumps: usize,
    pub event_tol: f64,
    pub blowup_norm: f64,
}

impl Default for SimSpec {
    fn default() -> Self {
        let d = SimSettings::default();
        SimSpec {
            step: d.step,
            horizon: d.horizon_t,
            max_jumps: d.max_jumps,
            event_tol: d.event_tol,
            blowup_norm: d.blowup_norm,
        }
    }
}

impl SimSpec {
    pub fn to_settings(&self) -> SimSettings {
        SimSettings {
            step: self.step,
            horizon_t: self.horizon,
            max_jumps: self.max_jumps,
            event_tol: self.event_tol,
            blowup_norm: self.blowup_norm,
            record_states: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatchSection {
    pub n_runs: usize,
    pub radius: f64,
    pub seed: u64,
}

impl Default for BatchSection {
    fn default() -> Self {
        BatchSection {
            n_runs: 200,
            radius: 100.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub x: Vec<f64>,
    pub e: Vec<f64>,
}

/// `(θ, η)` of the ζ-ODE used by the R-monitor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZetaSection {
    pub theta: f64,
    pub eta: f64,
}

impl Default for ZetaSection {
    fn default() -> Self {
        ZetaSection { theta: 0.1, eta: 0.1 }
    }
}

/// Parses a configuration, reporting the offending field path and position.
pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|err| {
        let field = err.path().to_string();
        ConfigError::Parse {
            field,
            message: err.into_inner().to_string(),
        }
    })
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text)
}

pub fn to_json(cfg: &RunConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("configuration is always serializable")
}

/// Built-in configurations for the named systems.
pub fn builtin(name: &str) -> Result<RunConfig, ConfigError> {
    match name {
        "lorenz" => Ok(RunConfig {
            system: SystemSpec::Lorenz {
                a: lorenz_a(),
                b: lorenz_b(),
                c: lorenz_c(),
                p1: lorenz_p1(),
                p2: lorenz_p2(),
            },
            certificate: CertificateSpec::default(),
            trigger: TriggerSpec {
                mode: ModeSpec::OutputFeedback,
                dwell: 0.01,
                sigma: None,
            },
            sim: SimSpec {
                horizon: 20.0,
                ..SimSpec::default()
            },
            batch: BatchSection {
                n_runs: 50,
                radius: 10.0,
                seed: 0,
            },
            initial_state: None,
            r_monitor: ZetaSection::default(),
            output_dir: default_output_dir(),
        }),
        "lti-sf-tabuada" => Ok(RunConfig {
            system: SystemSpec::LtiSfTabuada,
            certificate: CertificateSpec::Auto {
                eps1: 0.0,
                eps2: 0.68,
                slack_grid: Vec::new(),
            },
            trigger: TriggerSpec {
                mode: ModeSpec::StateFeedback,
                dwell: 0.075,
                sigma: Some(0.5),
            },
            sim: SimSpec::default(),
            batch: BatchSection::default(),
            initial_state: None,
            r_monitor: ZetaSection::default(),
            output_dir: default_output_dir(),
        }),
        "lti-custom" => Err(ConfigError::Invalid {
            field: "system",
            message: "lti-custom needs matrices; pass --config".into(),
        }),
        other => Err(ConfigError::Invalid {
            field: "system",
            message: format!("unknown system `{other}` (expected lorenz, lti-sf-tabuada or lti-custom)"),
        }),
    }
}

/// Replaces the gains of another certificate.
pub struct GainOverride {
    pub inner: Box<dyn Certificate>,
    pub gamma: f64,
    pub l: f64,
}

impl Certificate for GainOverride {
    fn v(&self, x: &[f64]) -> f64 {
        self.inner.v(x)
    }
    fn w(&self, e: &[f64]) -> f64 {
        self.inner.w(e)
    }
    fn h(&self, x: &[f64]) -> f64 {
        self.inner.h(x)
    }
    fn delta(&self, y: &[f64]) -> f64 {
        self.inner.delta(y)
    }
    fn alpha(&self, s: f64) -> f64 {
        self.inner.alpha(s)
    }
    fn alpha_lower(&self, s: f64) -> f64 {
        self.inner.alpha_lower(s)
    }
    fn alpha_upper(&self, s: f64) -> f64 {
        self.inner.alpha_upper(s)
    }
    fn gamma(&self) -> f64 {
        self.gamma
    }
    fn lipschitz(&self) -> f64 {
        self.l
    }
    fn locality(&self) -> Option<(f64, f64)> {
        self.inner.locality()
    }
}

/// Everything a subcommand needs, resolved from a [`RunConfig`].
pub struct Experiment {
    pub sys: Box<dyn ClosedLoop>,
    pub cert: Box<dyn Certificate>,
    /// The LMI solution when the certificate was designed here.
    pub design: Option<LmiCertificate>,
    pub trigger: TriggerConfig,
    pub sim: SimSettings,
    pub batch: BatchSpec,
    pub zeta: ZetaParams,
    pub initial_state: Option<HybridState>,
    pub output_dir: PathBuf,
}

impl std::fmt::Debug for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Experiment")
            .field("nx", &self.sys.nx())
            .field("ne", &self.sys.ne())
            .field("gamma", &self.cert.gamma())
            .field("L", &self.cert.lipschitz())
            .field("trigger", &self.trigger)
            .field("sim", &self.sim)
            .finish()
    }
}

impl Experiment {
    /// Swaps in new gains and keeps everything else.
    pub fn override_gains(&mut self, gamma: Option<f64>, l: Option<f64>) {
        if gamma.is_none() && l.is_none() {
            return;
        }
        let g = gamma.unwrap_or_else(|| self.cert.gamma());
        let l = l.unwrap_or_else(|| self.cert.lipschitz());
        let inner = std::mem::replace(&mut self.cert, Box::new(NullCertificate));
        self.cert = Box::new(GainOverride { inner, gamma: g, l });
    }

    /// Trigger, simulation and batch settings against the certificate.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.sim.validate(&self.trigger)?;
        self.trigger.validate(self.sys.as_ref(), self.cert.as_ref())?;
        if self.batch.n_runs < 1 {
            return Err(ConfigError::Invalid {
                field: "batch.n_runs",
                message: "must be at least 1".into(),
            });
        }
        if self.batch.radius.is_nan() || self.batch.radius <= 0.0 || !self.batch.radius.is_finite() {
            return Err(ConfigError::Invalid {
                field: "batch.radius",
                message: "must be positive".into(),
            });
        }
        if let Some(q) = &self.initial_state {
            if q.x.len() != self.sys.nx() || q.e.len() != self.sys.ne() {
                return Err(ConfigError::Invalid {
                    field: "initial_state",
                    message: format!("expected {} x and {} e components", self.sys.nx(), self.sys.ne()),
                });
            }
        }
        Ok(())
    }
}

/// Placeholder used only while swapping certificates.
struct NullCertificate;

impl Certificate for NullCertificate {
    fn v(&self, _: &[f64]) -> f64 {
        0.0
    }
    fn w(&self, _: &[f64]) -> f64 {
        0.0
    }
    fn h(&self, _: &[f64]) -> f64 {
        0.0
    }
    fn delta(&self, _: &[f64]) -> f64 {
        0.0
    }
    fn alpha(&self, _: f64) -> f64 {
        0.0
    }
    fn alpha_lower(&self, _: f64) -> f64 {
        0.0
    }
    fn alpha_upper(&self, _: f64) -> f64 {
        0.0
    }
    fn gamma(&self) -> f64 {
        0.0
    }
    fn lipschitz(&self) -> f64 {
        0.0
    }
}

fn matrix(field: &'static str, rows: &Rows) -> Result<Matrix, ConfigError> {
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(ConfigError::Invalid {
            field,
            message: "rows have different lengths".into(),
        });
    }
    Matrix::from_rows(rows).map_err(|e: LinalgError| ConfigError::Invalid {
        field,
        message: e.to_string(),
    })
}

fn lti_parts(spec: &SystemSpec) -> Result<Option<(LtiPlant, LtiController)>, ConfigError> {
    match spec {
        SystemSpec::Lorenz { .. } => Ok(None),
        SystemSpec::LtiSfTabuada => Ok(Some(tabuada_example())),
        SystemSpec::LtiCustom { a, b, c, controller } => {
            let a = matrix("system.a", a)?;
            let b = matrix("system.b", b)?;
            let plant = match c {
                Some(c) => LtiPlant::new(a, b, matrix("system.c", c)?)?,
                None => LtiPlant::state_feedback(a, b)?,
            };
            let ctrl = match controller {
                ControllerSpec::Static { dc } => LtiController::static_gain(matrix("system.controller.dc", dc)?),
                ControllerSpec::Dynamic { ac, bc, cc, dc } => LtiController::new(
                    matrix("system.controller.ac", ac)?,
                    matrix("system.controller.bc", bc)?,
                    matrix("system.controller.cc", cc)?,
                    matrix("system.controller.dc", dc)?,
                ),
            };
            Ok(Some((plant, ctrl)))
        }
    }
}

/// Closed-loop matrices of a linear system configuration.
pub fn closed_loop_matrices(spec: &SystemSpec) -> Result<Option<ClosedLoopMatrices>, ConfigError> {
    match lti_parts(spec)? {
        Some((plant, ctrl)) => Ok(Some(assemble(&plant, &ctrl)?)),
        None => Ok(None),
    }
}

/// Resolves the configuration without checking the trigger against the
/// certificate (see [`Experiment::validate`]).
pub fn build_unchecked(cfg: &RunConfig) -> Result<Experiment, ConfigError> {
    let (eps1, eps2, grid) = match &cfg.certificate {
        CertificateSpec::Auto { eps1, eps2, slack_grid } => (*eps1, *eps2, slack_grid.clone()),
        CertificateSpec::Inline { .. } => (default_eps(), default_eps(), Vec::new()),
    };
    let (sys, cert, design): (Box<dyn ClosedLoop>, Box<dyn Certificate>, _) = match &cfg.system {
        SystemSpec::Lorenz { a, b, c, p1, p2 } => {
            let (sys, cert) = lorenz_loop(*a, *b, *c, *p1, *p2)?;
            (Box::new(sys), Box::new(cert), None)
        }
        spec => {
            let (plant, ctrl) = lti_parts(spec)?.expect("linear system");
            let clm = assemble(&plant, &ctrl)?;
            let lmi = design_certificate(&clm, eps1, eps2, &grid)?;
            let quad = extract_assumption(&clm, &lmi)?;
            let sys = lti_loop(&plant, &ctrl, &quad)?;
            (Box::new(sys), Box::new(quad), Some(lmi))
        }
    };
    let trigger = cfg.trigger.to_config()?;
    let sim = cfg.sim.to_settings();
    let zeta = ZetaParams::new(cfg.r_monitor.theta, cfg.r_monitor.eta, cert.gamma().max(1e-12))?;
    let mut exp = Experiment {
        sys,
        cert,
        design,
        trigger,
        sim,
        batch: BatchSpec {
            n_runs: cfg.batch.n_runs,
            radius: cfg.batch.radius,
            seed: cfg.batch.seed,
            trigger,
            sim,
        },
        zeta,
        initial_state: cfg
            .initial_state
            .as_ref()
            .map(|s| HybridState::new(s.x.clone(), s.e.clone(), 0.0)),
        output_dir: cfg.output_dir.clone(),
    };
    if let CertificateSpec::Inline { gamma, l } = cfg.certificate {
        exp.override_gains(Some(gamma), Some(l));
    }
    exp.refresh_zeta(cfg)?;
    Ok(exp)
}

impl Experiment {
    /// Recomputes the ζ parameters after a gain change.
    pub fn refresh_zeta(&mut self, cfg: &RunConfig) -> Result<(), ConfigError> {
        self.zeta = ZetaParams::new(cfg.r_monitor.theta, cfg.r_monitor.eta, self.cert.gamma().max(1e-12))?;
        Ok(())
    }
}

/// Resolves and validates; `T` must lie below the certificate's MASP.
pub fn build(cfg: &RunConfig) -> Result<Experiment, ConfigError> {
    let exp = build_unchecked(cfg)?;
    exp.validate()?;
    Ok(exp)
}

impl From<TriggerMode> for ModeSpec {
    fn from(m: TriggerMode) -> Self {
        match m {
            TriggerMode::OutputFeedback => ModeSpec::OutputFeedback,
            TriggerMode::StateFeedback => ModeSpec::StateFeedback,
            TriggerMode::PureEvent => ModeSpec::PureEvent,
            TriggerMode::Periodic => ModeSpec::Periodic,
        }
    }
}
