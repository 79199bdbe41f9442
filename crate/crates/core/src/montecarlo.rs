//! Seeded batches of simulations and inter-transmission statistics.

use alloc::vec::Vec;

use thiserror::Error;

use crate::hybrid_sim::{simulate, HybridState, SimError, SimSettings};
use crate::sampling::{stream_rng, uniform_in_ball};
use crate::systems::{Certificate, ClosedLoop};
use crate::trigger::{TriggerConfig, TriggerError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BatchError {
    #[error("invalid batch: {0}")]
    Spec(&'static str),
    #[error(transparent)]
    Trigger(#[from] TriggerError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Initial conditions are drawn uniformly from `|(x, e)| ≤ radius` with `τ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchSpec {
    pub n_runs: usize,
    pub radius: f64,
    pub seed: u64,
    pub trigger: TriggerConfig,
    pub sim: SimSettings,
}

impl BatchSpec {
    pub fn validate(&self, sys: &dyn ClosedLoop, cert: &dyn Certificate) -> Result<(), BatchError> {
        if self.n_runs < 1 {
            return Err(BatchError::Spec("n_runs must be at least 1"));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(BatchError::Spec("radius must be positive"));
        }
        self.sim.validate(&self.trigger)?;
        self.trigger.validate(sys, cert)?;
        Ok(())
    }
}

/// Initial state of run `k`: a deterministic function of `(seed, k)`.
pub fn sample_initial(spec: &BatchSpec, nx: usize, ne: usize, k: usize) -> HybridState {
    let mut rng = stream_rng(spec.seed, k as u64);
    let z = uniform_in_ball(&mut rng, nx + ne, spec.radius);
    let (x, e) = z.split_at(nx);
    HybridState::new(x.to_vec(), e.to_vec(), 0.0)
}

/// One transmission of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub run: usize,
    /// Jump counter after the transmission (1 for the first).
    pub j: usize,
    pub t_j: f64,
    /// Clock value at the transmission: the gap to the previous one, or to
    /// the start of the run for `j = 1`.
    pub gap: f64,
}

/// Outcome of a single batch run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub run: usize,
    pub jump_times: Vec<f64>,
    pub clock_at_jump: Vec<f64>,
    pub gaps: Vec<f64>,
    pub final_norm: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub run: usize,
    pub n_events: usize,
    pub min_gap: Option<f64>,
    pub mean_gap: Option<f64>,
}

/// Pooled statistics over every completed run. `tau_avg` is the mean of all
/// inter-transmission gaps pooled across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    pub tau_min: Option<f64>,
    pub tau_avg: Option<f64>,
    pub n_events_total: usize,
    pub n_runs: usize,
    pub per_run: Vec<RunStats>,
    pub failures: Vec<usize>,
    pub events: Vec<EventRecord>,
}

/// Simulates run `k` of the batch without recording states.
pub fn simulate_run(
    sys: &dyn ClosedLoop,
    cert: &dyn Certificate,
    spec: &BatchSpec,
    k: usize,
) -> Result<RunOutcome, BatchError> {
    let q0 = sample_initial(spec, sys.nx(), sys.ne(), k);
    let settings = SimSettings {
        record_states: false,
        ..spec.sim
    };
    match simulate(sys, cert, &spec.trigger, &q0, &settings) {
        Ok(sol) => Ok(RunOutcome {
            run: k,
            final_norm: sol.final_state.norm(),
            jump_times: sol.jump_times,
            clock_at_jump: sol.clock_at_jump,
            gaps: sol.inter_event_gaps,
            diverged: false,
        }),
        Err(SimError::Divergence { partial, .. }) => Ok(RunOutcome {
            run: k,
            final_norm: f64::INFINITY,
            jump_times: partial.jump_times,
            clock_at_jump: partial.clock_at_jump,
            gaps: partial.inter_event_gaps,
            diverged: true,
        }),
        Err(SimError::NonFinite { .. }) => Ok(RunOutcome {
            run: k,
            final_norm: f64::INFINITY,
            jump_times: Vec::new(),
            clock_at_jump: Vec::new(),
            gaps: Vec::new(),
            diverged: true,
        }),
        Err(e) => Err(e.into()),
    }
}

/// Builds the report from run outcomes given in any order.
pub fn aggregate(mut outcomes: Vec<RunOutcome>) -> BatchReport {
    outcomes.sort_by_key(|o| o.run);
    let mut report = BatchReport {
        tau_min: None,
        tau_avg: None,
        n_events_total: 0,
        n_runs: outcomes.len(),
        per_run: Vec::new(),
        failures: Vec::new(),
        events: Vec::new(),
    };
    let mut sum = 0.0;
    let mut count = 0usize;
    for o in &outcomes {
        if o.diverged {
            report.failures.push(o.run);
            continue;
        }
        for (idx, (t, gap)) in o.jump_times.iter().zip(&o.clock_at_jump).enumerate() {
            report.events.push(EventRecord {
                run: o.run,
                j: idx + 1,
                t_j: *t,
                gap: *gap,
            });
        }
        report.n_events_total += o.jump_times.len();
        let min_gap = o.gaps.iter().copied().reduce(f64::min);
        let mean_gap = if o.gaps.is_empty() {
            None
        } else {
            Some(o.gaps.iter().sum::<f64>() / o.gaps.len() as f64)
        };
        report.per_run.push(RunStats {
            run: o.run,
            n_events: o.jump_times.len(),
            min_gap,
            mean_gap,
        });
        for g in &o.gaps {
            sum += g;
            count += 1;
        }
        if let Some(m) = min_gap {
            report.tau_min = Some(report.tau_min.map_or(m, |cur: f64| cur.min(m)));
        }
    }
    if count > 0 {
        report.tau_avg = Some(sum / count as f64);
    }
    report
}

/// Runs every simulation of the batch in order. Divergent runs are listed in
/// `failures` and excluded from the statistics.
pub fn run_batch(sys: &dyn ClosedLoop, cert: &dyn Certificate, spec: &BatchSpec) -> Result<BatchReport, BatchError> {
    spec.validate(sys, cert)?;
    let outcomes = (0..spec.n_runs)
        .map(|k| simulate_run(sys, cert, spec, k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate(outcomes))
}
