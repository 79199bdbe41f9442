//! Hybrid closed-loop simulation.
//!
//! Flows `(ẋ, ė, τ̇) = (f(x, e), g(x, e), 1)` with fixed-step RK4 and applies
//! the transmission jump `(x, e, τ) ↦ (x, 0, 0)`. The jump policy selects one
//! solution of the set-valued hybrid system: flow until `τ = T` (landing on
//! it exactly), jump there if the event value `γ²W²(e) - threshold` is
//! already nonnegative, otherwise keep flowing and jump at the first instant
//! the event value reaches zero, located by bisection on the RK4 sub-step.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::systems::{Certificate, ClosedLoop};
use crate::trigger::{self, TriggerConfig, TriggerError, TriggerMode, ZetaFlow, ZetaParams};

/// `q = (x, e, τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    pub x: Vec<f64>,
    pub e: Vec<f64>,
    pub tau: f64,
}

impl HybridState {
    pub fn new(x: Vec<f64>, e: Vec<f64>, tau: f64) -> Self {
        HybridState { x, e, tau }
    }

    /// `x = 0`, `e = 0`, `τ = 0`.
    pub fn origin(nx: usize, ne: usize) -> Self {
        HybridState {
            x: vec![0.0; nx],
            e: vec![0.0; ne],
            tau: 0.0,
        }
    }

    /// `|(x, e)|`.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.x.iter().chain(&self.e).map(|v| v * v).sum::<f64>())
    }

    fn is_finite(&self) -> bool {
        self.tau.is_finite() && self.x.iter().chain(&self.e).all(|v| v.is_finite())
    }

    /// Transmission: `e ← 0`, `τ ← 0`.
    pub fn jumped(&self) -> HybridState {
        HybridState {
            x: self.x.clone(),
            e: vec![0.0; self.e.len()],
            tau: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub step: f64,
    pub horizon_t: f64,
    pub max_jumps: usize,
    pub event_tol: f64,
    pub blowup_norm: f64,
    /// Keep every integration sample; batch runs switch this off.
    pub record_states: bool,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            step: 1e-3,
            horizon_t: 10.0,
            max_jumps: 10_000_000,
            event_tol: 1e-6,
            blowup_norm: 1e9,
            record_states: true,
        }
    }
}

impl SimSettings {
    pub fn validate(&self, cfg: &TriggerConfig) -> Result<(), SimError> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(SimError::Settings("step must be positive"));
        }
        if !(self.horizon_t > 0.0) || !self.horizon_t.is_finite() {
            return Err(SimError::Settings("horizon must be positive"));
        }
        if self.max_jumps < 1 {
            return Err(SimError::Settings("max_jumps must be at least 1"));
        }
        if !(self.event_tol > 0.0 && self.event_tol < self.step) {
            return Err(SimError::Settings("event_tol must lie in (0, step)"));
        }
        if !(self.blowup_norm > 0.0) {
            return Err(SimError::Settings("blowup_norm must be positive"));
        }
        if cfg.mode.uses_dwell() && self.step > cfg.dwell / 10.0 * (1.0 + 1e-12) {
            return Err(SimError::Settings("step must not exceed T/10"));
        }
        Ok(())
    }
}

/// Samples of one flow interval `[t_j, t_{j+1}]` at jump count `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub j: usize,
    pub samples: Vec<(f64, HybridState)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Horizon,
    MaxJumps,
    Diverged,
}

/// A solution on a hybrid time domain.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridSolution {
    pub segments: Vec<Segment>,
    /// `t_1, t_2, ...`: the instants of each jump.
    pub jump_times: Vec<f64>,
    /// Clock value `τ` just before each jump (time since the previous
    /// transmission, or since the clock started for the first jump).
    pub clock_at_jump: Vec<f64>,
    /// `t_{k+1} - t_k` between consecutive jumps.
    pub inter_event_gaps: Vec<f64>,
    pub final_time: f64,
    pub final_state: HybridState,
    pub termination: Termination,
}

impl HybridSolution {
    pub fn n_jumps(&self) -> usize {
        self.jump_times.len()
    }

    pub fn min_gap(&self) -> Option<f64> {
        self.inter_event_gaps.iter().copied().reduce(f64::min)
    }

    pub fn mean_gap(&self) -> Option<f64> {
        if self.inter_event_gaps.is_empty() {
            None
        } else {
            Some(self.inter_event_gaps.iter().sum::<f64>() / self.inter_event_gaps.len() as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation settings: {0}")]
    Settings(&'static str),
    #[error("initial state is outside the domain: {0}")]
    Domain(&'static str),
    #[error(transparent)]
    Trigger(#[from] TriggerError),
    #[error("non-finite derivative at tau = {}", state.tau)]
    NonFinite { state: HybridState },
    #[error("solution diverged at t = {t}: |(x, e)| exceeded the blow-up guard")]
    Divergence { t: f64, partial: Box<HybridSolution> },
}

/// Classical RK4 on the stacked `(x, e)` system plus the clock.
pub struct Integrator<'a> {
    sys: &'a dyn ClosedLoop,
    nx: usize,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl<'a> Integrator<'a> {
    pub fn new(sys: &'a dyn ClosedLoop) -> Self {
        let n = sys.nx() + sys.ne();
        Integrator {
            sys,
            nx: sys.nx(),
            k: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            tmp: vec![0.0; n],
        }
    }

    fn eval(sys: &dyn ClosedLoop, nx: usize, z: &[f64], out: &mut [f64]) {
        let (x, e) = z.split_at(nx);
        let (dx, de) = out.split_at_mut(nx);
        sys.flow(x, e, dx, de);
    }

    /// One RK4 step of length `h`.
    pub fn step(&mut self, q: &HybridState, h: f64) -> Result<HybridState, SimError> {
        let nx = self.nx;
        let z: Vec<f64> = q.x.iter().chain(&q.e).copied().collect();
        let n = z.len();
        let [k1, k2, k3, k4] = &mut self.k;
        Self::eval(self.sys, nx, &z, k1);
        for i in 0..n {
            self.tmp[i] = z[i] + 0.5 * h * k1[i];
        }
        Self::eval(self.sys, nx, &self.tmp, k2);
        for i in 0..n {
            self.tmp[i] = z[i] + 0.5 * h * k2[i];
        }
        Self::eval(self.sys, nx, &self.tmp, k3);
        for i in 0..n {
            self.tmp[i] = z[i] + h * k3[i];
        }
        Self::eval(self.sys, nx, &self.tmp, k4);
        if k1
            .iter()
            .chain(k2.iter())
            .chain(k3.iter())
            .chain(k4.iter())
            .any(|v| !v.is_finite())
        {
            return Err(SimError::NonFinite { state: q.clone() });
        }
        let next: Vec<f64> = (0..n)
            .map(|i| z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        let (x, e) = next.split_at(nx);
        Ok(HybridState {
            x: x.to_vec(),
            e: e.to_vec(),
            tau: q.tau + h,
        })
    }
}

/// One RK4 flow step of length `h`; `τ` advances by exactly `h`.
pub fn flow_step(sys: &dyn ClosedLoop, q: &HybridState, h: f64) -> Result<HybridState, SimError> {
    if !(h > 0.0) {
        return Err(SimError::Settings("step must be positive"));
    }
    Integrator::new(sys).step(q, h)
}

struct Recorder {
    record: bool,
    segments: Vec<Segment>,
}

impl Recorder {
    fn push(&mut self, t: f64, q: &HybridState) {
        if self.record {
            if let Some(seg) = self.segments.last_mut() {
                seg.samples.push((t, q.clone()));
            }
        }
    }

    fn open(&mut self, j: usize) {
        if self.record {
            self.segments.push(Segment { j, samples: Vec::new() });
        }
    }
}

/// Simulates the closed loop from `q0` under the jump-first policy.
pub fn simulate(
    sys: &dyn ClosedLoop,
    cert: &dyn Certificate,
    cfg: &TriggerConfig,
    q0: &HybridState,
    settings: &SimSettings,
) -> Result<HybridSolution, SimError> {
    settings.validate(cfg)?;
    cfg.validate(sys, cert)?;
    if q0.x.len() != sys.nx() || q0.e.len() != sys.ne() {
        return Err(SimError::Domain("state dimensions do not match the loop"));
    }
    if !q0.is_finite() || q0.tau < 0.0 {
        return Err(SimError::Domain("state must be finite with tau >= 0"));
    }
    if !(trigger::in_flow(sys, cert, cfg, q0)? || trigger::in_jump(sys, cert, cfg, q0)?) {
        return Err(SimError::Domain("initial state lies outside C ∪ D"));
    }

    let dwell = cfg.dwell;
    let fires = |q: &HybridState| -> bool {
        match cfg.mode {
            TriggerMode::Periodic => false,
            // a jump with e = 0 is the identity; without a dwell time it would repeat forever
            TriggerMode::PureEvent if q.e.iter().all(|v| *v == 0.0) => false,
            _ => trigger::event_value(sys, cert, cfg, &q.x, &q.e) >= 0.0,
        }
    };

    let mut integ = Integrator::new(sys);
    let mut rec = Recorder {
        record: settings.record_states,
        segments: Vec::new(),
    };
    let mut jump_times = Vec::new();
    let mut clock_at_jump = Vec::new();
    let mut t = 0.0;
    let mut j = 0usize;
    let mut q = q0.clone();
    rec.open(0);
    rec.push(t, &q);

    let horizon = settings.horizon_t;
    let end_slack = 1e-12 * horizon.max(1.0);

    let finish = |rec: Recorder, jump_times: Vec<f64>, clock_at_jump: Vec<f64>, t: f64, q: HybridState, why| {
        let inter_event_gaps = jump_times.windows(2).map(|w: &[f64]| w[1] - w[0]).collect();
        HybridSolution {
            segments: rec.segments,
            jump_times,
            clock_at_jump,
            inter_event_gaps,
            final_time: t,
            final_state: q,
            termination: why,
        }
    };

    // q0 may already sit in D
    let mut pending_jump = q.tau >= dwell && (cfg.mode == TriggerMode::Periodic || fires(&q));

    loop {
        if pending_jump {
            jump_times.push(t);
            clock_at_jump.push(q.tau);
            q = q.jumped();
            j += 1;
            rec.open(j);
            rec.push(t, &q);
            pending_jump = false;
            if jump_times.len() >= settings.max_jumps {
                return Ok(finish(rec, jump_times, clock_at_jump, t, q, Termination::MaxJumps));
            }
        }
        if t >= horizon - end_slack {
            return Ok(finish(rec, jump_times, clock_at_jump, t, q, Termination::Horizon));
        }

        let remaining = horizon - t;
        let before_dwell = cfg.mode.uses_dwell() && q.tau < dwell;
        let mut h = settings.step.min(remaining);
        let mut lands_on_dwell = false;
        if before_dwell && dwell - q.tau <= h {
            h = dwell - q.tau;
            lands_on_dwell = true;
        }

        let mut next = integ.step(&q, h)?;
        let mut t_next = t + h;
        if lands_on_dwell {
            next.tau = dwell;
            pending_jump = cfg.mode == TriggerMode::Periodic || fires(&next);
        } else if !before_dwell && fires(&next) {
            let (mut lo, mut hi) = (0.0, h);
            while hi - lo > settings.event_tol {
                let mid = 0.5 * (lo + hi);
                if fires(&integ.step(&q, mid)?) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if hi < h {
                next = integ.step(&q, hi)?;
                t_next = t + hi;
            }
            pending_jump = true;
        }

        if !next.is_finite() || next.norm() > settings.blowup_norm {
            rec.push(t_next, &next);
            let partial = finish(rec, jump_times, clock_at_jump, t_next, next, Termination::Diverged);
            return Err(SimError::Divergence {
                t: t_next,
                partial: Box::new(partial),
            });
        }
        t = t_next;
        q = next;
        rec.push(t, &q);
    }
}

/// One sample of the hybrid Lyapunov function `R(q) = V(x) + max(0, λζ(τ)W²(e))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RSample {
    pub t: f64,
    pub j: usize,
    pub value: f64,
}

/// Largest sub-step used to integrate ζ between samples.
const ZETA_SUBSTEP: f64 = 1e-4;

/// Evaluates `R` along every recorded sample of the solution.
pub fn r_monitor(sol: &HybridSolution, cert: &dyn Certificate, zp: &ZetaParams) -> Vec<RSample> {
    let flow = ZetaFlow::new(zp, cert.lipschitz());
    let lambda = zp.lambda();
    let mut out = Vec::new();
    for seg in &sol.segments {
        let mut phi = ZetaFlow::initial_angle(zp);
        let mut tau = 0.0;
        for (t, q) in &seg.samples {
            if phi > 0.0 && q.tau > tau {
                phi = flow.advance(phi, q.tau - tau, ZETA_SUBSTEP);
            }
            tau = tau.max(q.tau);
            let w = cert.w(&q.e);
            let zeta = if phi > 0.0 { ZetaFlow::zeta(phi) } else { 0.0 };
            let value = cert.v(&q.x) + (lambda * zeta * w * w).max(0.0);
            out.push(RSample { t: *t, j: seg.j, value });
        }
    }
    out
}

/// First place where `R` grows by more than `tol`, as `(index, increase)`.
pub fn r_increase(samples: &[RSample], tol: f64) -> Option<(usize, f64)> {
    samples
        .windows(2)
        .enumerate()
        .map(|(i, w)| (i + 1, w[1].value - w[0].value))
        .find(|(_, inc)| *inc > tol)
}
