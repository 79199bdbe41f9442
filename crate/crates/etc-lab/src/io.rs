//! CSV and JSON artifacts. CSV floats carry 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use etc_lab_core::hybrid_sim::RSample;
use etc_lab_core::lti_design::LmiCertificate;
use etc_lab_core::montecarlo::{BatchReport, EventRecord};
use etc_lab_core::HybridSolution;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

fn write(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|source| IoError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
        }
    }
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `t,j,x1..xn,e1..em,tau`, one row per recorded sample.
pub fn states_csv(sol: &HybridSolution) -> String {
    let (nx, ne) = (sol.final_state.x.len(), sol.final_state.e.len());
    let mut out = String::from("t,j");
    for i in 1..=nx {
        let _ = write!(out, ",x{i}");
    }
    for i in 1..=ne {
        let _ = write!(out, ",e{i}");
    }
    out.push_str(",tau\n");
    for seg in &sol.segments {
        for (t, q) in &seg.samples {
            let _ = write!(out, "{},{}", f(*t), seg.j);
            for v in q.x.iter().chain(&q.e) {
                let _ = write!(out, ",{}", f(*v));
            }
            let _ = writeln!(out, ",{}", f(q.tau));
        }
    }
    out
}

/// Event rows of a single run, numbered like a batch with one run.
pub fn solution_events(sol: &HybridSolution, run: usize) -> Vec<EventRecord> {
    sol.jump_times
        .iter()
        .zip(&sol.clock_at_jump)
        .enumerate()
        .map(|(i, (t, gap))| EventRecord {
            run,
            j: i + 1,
            t_j: *t,
            gap: *gap,
        })
        .collect()
}

/// `run,j,t_j,gap` sorted by `(run, j)`.
pub fn events_csv(events: &[EventRecord]) -> String {
    let mut sorted: Vec<&EventRecord> = events.iter().collect();
    sorted.sort_by_key(|e| (e.run, e.j));
    let mut out = String::from("run,j,t_j,gap\n");
    for e in sorted {
        let _ = writeln!(out, "{},{},{},{}", e.run, e.j, f(e.t_j), f(e.gap));
    }
    out
}

pub fn parse_events_csv(text: &str) -> Result<Vec<EventRecord>, String> {
    let mut lines = text.lines();
    if lines.next() != Some("run,j,t_j,gap") {
        return Err("missing header `run,j,t_j,gap`".into());
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split(',').collect();
            let bad = |what: &str| format!("line {}: {what}", i + 2);
            if cols.len() != 4 {
                return Err(bad("expected 4 columns"));
            }
            Ok(EventRecord {
                run: cols[0].parse().map_err(|_| bad("bad run"))?,
                j: cols[1].parse().map_err(|_| bad("bad j"))?,
                t_j: cols[2].parse().map_err(|_| bad("bad t_j"))?,
                gap: cols[3].parse().map_err(|_| bad("bad gap"))?,
            })
        })
        .collect()
}

/// `t,j,R`.
pub fn r_monitor_csv(samples: &[RSample]) -> String {
    let mut out = String::from("t,j,R\n");
    for s in samples {
        let _ = writeln!(out, "{},{},{}", f(s.t), s.j, f(s.value));
    }
    out
}

/// `event_index,t_j,gap,T_ref`: inter-transmission times against the dwell line.
pub fn plot_csv(sol: &HybridSolution, t_ref: f64) -> String {
    let mut out = String::from("event_index,t_j,gap,T_ref\n");
    for (i, (t, gap)) in sol.jump_times.iter().zip(&sol.clock_at_jump).enumerate() {
        let _ = writeln!(out, "{},{},{},{}", i + 1, f(*t), f(*gap), f(t_ref));
    }
    out
}

pub fn emit_plot_data(sol: &HybridSolution, t_ref: f64, path: &Path) -> Result<(), IoError> {
    write(path, &plot_csv(sol, t_ref))
}

/// Files written by `simulate`.
pub fn emit_solution(sol: &HybridSolution, r: &[RSample], t_ref: f64, dir: &Path) -> Result<(), IoError> {
    write(&dir.join("states.csv"), &states_csv(sol))?;
    write(&dir.join("events.csv"), &events_csv(&solution_events(sol, 0)))?;
    write(&dir.join("r_monitor.csv"), &r_monitor_csv(r))?;
    emit_plot_data(sol, t_ref, &dir.join("plot.csv"))
}

/// The JSON summary of a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub tau_min: Option<f64>,
    pub tau_avg: Option<f64>,
    pub n_events_total: usize,
    pub n_runs: usize,
    pub failures: Vec<usize>,
}

impl From<&BatchReport> for BatchSummary {
    fn from(r: &BatchReport) -> Self {
        BatchSummary {
            tau_min: r.tau_min,
            tau_avg: r.tau_avg,
            n_events_total: r.n_events_total,
            n_runs: r.n_runs,
            failures: r.failures.clone(),
        }
    }
}

/// `run,n_events,min_gap,mean_gap`; empty cells for runs without gaps.
pub fn per_run_csv(rep: &BatchReport) -> String {
    let opt = |v: Option<f64>| v.map(f).unwrap_or_default();
    let mut out = String::from("run,n_events,min_gap,mean_gap\n");
    for r in &rep.per_run {
        let _ = writeln!(out, "{},{},{},{}", r.run, r.n_events, opt(r.min_gap), opt(r.mean_gap));
    }
    out
}

/// Writes `summary.json`, `events.csv` and `per_run.csv` into `dir`,
/// overwriting earlier files.
pub fn emit_report(rep: &BatchReport, dir: &Path) -> Result<(), IoError> {
    let summary = serde_json::to_string_pretty(&BatchSummary::from(rep)).expect("summary is serializable");
    write(&dir.join("summary.json"), &(summary + "\n"))?;
    write(&dir.join("events.csv"), &events_csv(&rep.events))?;
    write(&dir.join("per_run.csv"), &per_run_csv(rep))
}

pub fn read_summary(path: &Path) -> Result<BatchSummary, IoError> {
    serde_json::from_str(&read(path)?).map_err(|e| IoError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn read_events(path: &Path) -> Result<Vec<EventRecord>, IoError> {
    parse_events_csv(&read(path)?).map_err(|message| IoError::Format {
        path: path.to_path_buf(),
        message,
    })
}

/// `certificate.json` produced by `design`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    pub eps1: f64,
    pub eps2: f64,
    pub mu: f64,
    pub gamma: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "T_max")]
    pub t_max: f64,
}

impl CertificateFile {
    pub fn new(lmi: &LmiCertificate, l: f64, t_max: f64) -> Self {
        CertificateFile {
            p: lmi.p.to_rows(),
            eps1: lmi.eps1,
            eps2: lmi.eps2,
            mu: lmi.mu,
            gamma: lmi.gamma(),
            l,
            t_max,
        }
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value).expect("value is serializable");
    write(path, &(text + "\n"))
}

pub fn read_certificate(path: &Path) -> Result<CertificateFile, IoError> {
    serde_json::from_str(&read(path)?).map_err(|e| IoError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
