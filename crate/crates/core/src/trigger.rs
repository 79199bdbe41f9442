//! Transmission scheduling: the dwell-time bound, the ζ transit time and the
//! flow/jump set predicates for every triggering mode.

use core::f64::consts::FRAC_PI_2;

use thiserror::Error;

use crate::hybrid_sim::HybridState;
use crate::systems::{Certificate, ClosedLoop};

/// Relative width of the `γ = L` seam inside which the `1/L` branch is used.
const SEAM_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TriggerError {
    #[error("gamma = L = 0 carries no stabilizing information; the dwell bound is undefined")]
    UndefinedBound,
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("dwell time exceeds MASP: T = {t} but the bound is {bound}")]
    DwellExceedsMasp { t: f64, bound: f64 },
    #[error("configuration error: {0}")]
    Config(&'static str),
}

/// Maximum allowable sampling period for the gains `(gamma, L)`.
///
/// With `r = sqrt(|(γ/L)² - 1|)` this is `arctan(r)/(L r)` above the seam,
/// `1/L` on it and `arctanh(r)/(L r)` below it. The `L = 0` limit is
/// `π/(2γ)`; `γ = 0` gives `+∞`.
pub fn masp(gamma: f64, l: f64) -> Result<f64, TriggerError> {
    if !(gamma >= 0.0 && l >= 0.0) || !gamma.is_finite() || !l.is_finite() {
        return Err(TriggerError::InvalidArgument(
            "gamma and L must be finite and nonnegative",
        ));
    }
    if gamma == 0.0 && l == 0.0 {
        return Err(TriggerError::UndefinedBound);
    }
    if l == 0.0 {
        return Ok(FRAC_PI_2 / gamma);
    }
    if gamma == 0.0 {
        return Ok(f64::INFINITY);
    }
    let ratio = gamma / l;
    if (ratio - 1.0).abs() <= SEAM_REL {
        return Ok(1.0 / l);
    }
    if ratio > 1.0 {
        // L r = sqrt(γ² - L²), which stays accurate for L ≪ γ
        let lr = libm::sqrt((gamma - l) * (gamma + l));
        Ok(libm::atan(lr / l) / lr)
    } else {
        let lr = libm::sqrt((l - gamma) * (l + gamma));
        Ok(libm::atanh(lr / l) / lr)
    }
}

/// Parameters of the auxiliary scalar ODE `ζ' = -2Lζ - λ(ζ² + 1)`, `ζ(0) = 1/θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaParams {
    theta: f64,
    eta: f64,
    lambda: f64,
}

impl ZetaParams {
    pub fn new(theta: f64, eta: f64, gamma: f64) -> Result<Self, TriggerError> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(TriggerError::InvalidArgument("theta must lie in (0, 1)"));
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(TriggerError::InvalidArgument("eta must be positive"));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(TriggerError::InvalidArgument("gamma must be nonnegative"));
        }
        Ok(ZetaParams {
            theta,
            eta,
            lambda: libm::sqrt(gamma * gamma + eta),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Integrates ζ through its angle `φ = atan ζ`.
///
/// In that coordinate the Riccati equation becomes `φ' = -λ - L sin 2φ`,
/// which is bounded and smooth, so fixed-step RK4 stays accurate even when
/// `ζ(0) = 1/θ` is huge. `ζ` is strictly decreasing while `φ ∈ (0, π/2)`.
#[derive(Debug, Clone, Copy)]
pub struct ZetaFlow {
    lambda: f64,
    l: f64,
}

impl ZetaFlow {
    pub fn new(zp: &ZetaParams, l: f64) -> Self {
        ZetaFlow { lambda: zp.lambda, l }
    }

    #[inline]
    fn rate(&self, phi: f64) -> f64 {
        -self.lambda - self.l * libm::sin(2.0 * phi)
    }

    /// One RK4 step of the angle ODE.
    pub fn step(&self, phi: f64, h: f64) -> f64 {
        let k1 = self.rate(phi);
        let k2 = self.rate(phi + 0.5 * h * k1);
        let k3 = self.rate(phi + 0.5 * h * k2);
        let k4 = self.rate(phi + h * k3);
        phi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    }

    /// Advances `phi` by `dt` using steps no longer than `max_step`.
    pub fn advance(&self, mut phi: f64, dt: f64, max_step: f64) -> f64 {
        if dt <= 0.0 {
            return phi;
        }
        let n = libm::ceil(dt / max_step).max(1.0) as usize;
        let h = dt / n as f64;
        for _ in 0..n {
            phi = self.step(phi, h);
        }
        phi
    }

    /// Angle corresponding to `ζ(0) = 1/θ`.
    pub fn initial_angle(zp: &ZetaParams) -> f64 {
        libm::atan(1.0 / zp.theta)
    }

    /// `ζ` for an angle on the decreasing branch; negative once φ ≤ 0.
    pub fn zeta(phi: f64) -> f64 {
        libm::tan(phi)
    }
}

/// Time for ζ to fall from `1/θ` to `θ`.
///
/// The crossing is bracketed on the RK4 grid of size `step`, then refined by
/// bisection over the partial step until the bracket is below `step·1e-3`.
pub fn zeta_time(gamma: f64, l: f64, zp: &ZetaParams, step: f64) -> Result<f64, TriggerError> {
    if !(step > 0.0) {
        return Err(TriggerError::InvalidArgument("step must be positive"));
    }
    if !(l >= 0.0) || !l.is_finite() {
        return Err(TriggerError::InvalidArgument("L must be finite and nonnegative"));
    }
    let zp = ZetaParams::new(zp.theta, zp.eta, gamma)?;
    let flow = ZetaFlow::new(&zp, l);
    let target = libm::atan(zp.theta);
    let mut phi = ZetaFlow::initial_angle(&zp);
    if phi <= target {
        return Ok(0.0);
    }
    let mut t = 0.0;
    loop {
        let next = flow.step(phi, step);
        if next <= target {
            let (mut lo, mut hi) = (0.0, step);
            let tol = step * 1e-3;
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if flow.step(phi, mid) <= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(t + 0.5 * (lo + hi));
        }
        phi = next;
        t += step;
    }
}

/// Which flow/jump set pair drives transmissions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TriggerMode {
    /// `γ²W²(e) ≤ δ(y)` once `τ ≥ T`.
    OutputFeedback,
    /// `γ²W²(e) ≤ σ(α(|x|) + H²(x) + δ(x))` once `τ ≥ T`; requires `y = x`.
    StateFeedback,
    /// The state-feedback condition with no dwell time (`T = 0`).
    PureEvent,
    /// Transmit exactly every `T`.
    Periodic,
}

impl TriggerMode {
    pub fn uses_dwell(self) -> bool {
        !matches!(self, TriggerMode::PureEvent)
    }

    pub fn uses_sigma(self) -> bool {
        matches!(self, TriggerMode::StateFeedback | TriggerMode::PureEvent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerConfig {
    pub mode: TriggerMode,
    pub dwell: f64,
    pub sigma: f64,
}

impl TriggerConfig {
    pub fn output_feedback(dwell: f64) -> Self {
        TriggerConfig {
            mode: TriggerMode::OutputFeedback,
            dwell,
            sigma: 1.0,
        }
    }

    pub fn state_feedback(dwell: f64, sigma: f64) -> Self {
        TriggerConfig {
            mode: TriggerMode::StateFeedback,
            dwell,
            sigma,
        }
    }

    pub fn pure_event(sigma: f64) -> Self {
        TriggerConfig {
            mode: TriggerMode::PureEvent,
            dwell: 0.0,
            sigma,
        }
    }

    pub fn periodic(period: f64) -> Self {
        TriggerConfig {
            mode: TriggerMode::Periodic,
            dwell: period,
            sigma: 1.0,
        }
    }

    /// Checks the configuration against the certificate gains and the loop.
    pub fn validate(&self, sys: &dyn ClosedLoop, cert: &dyn Certificate) -> Result<(), TriggerError> {
        if self.mode.uses_sigma() && !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(TriggerError::Config("sigma must lie in (0, 1)"));
        }
        if (self.mode == TriggerMode::StateFeedback || self.mode == TriggerMode::PureEvent) && !sys.full_state_output()
        {
            return Err(TriggerError::Config(
                "state-feedback triggering needs y = x; this loop only measures an output",
            ));
        }
        if self.mode.uses_dwell() {
            if !(self.dwell > 0.0) || !self.dwell.is_finite() {
                return Err(TriggerError::Config("dwell time T must be positive"));
            }
            let bound = masp(cert.gamma(), cert.lipschitz())?;
            if self.dwell >= bound {
                return Err(TriggerError::DwellExceedsMasp { t: self.dwell, bound });
            }
        } else if self.dwell != 0.0 {
            return Err(TriggerError::Config("pure event triggering has T = 0"));
        }
        Ok(())
    }
}

/// Right-hand side of the triggering inequality for the configured mode.
pub fn threshold(sys: &dyn ClosedLoop, cert: &dyn Certificate, cfg: &TriggerConfig, x: &[f64]) -> f64 {
    match cfg.mode {
        TriggerMode::OutputFeedback => {
            let y = sys.output(x);
            cert.delta(&y)
        }
        TriggerMode::StateFeedback | TriggerMode::PureEvent => {
            let nx = crate::linalg::norm(x);
            let h = cert.h(x);
            cfg.sigma * (cert.alpha(nx) + h * h + cert.delta(x))
        }
        TriggerMode::Periodic => f64::INFINITY,
    }
}

/// `γ²W²(e) - threshold`; the event fires when this is nonnegative.
pub fn event_value(sys: &dyn ClosedLoop, cert: &dyn Certificate, cfg: &TriggerConfig, x: &[f64], e: &[f64]) -> f64 {
    if cfg.mode == TriggerMode::Periodic {
        return f64::NEG_INFINITY;
    }
    let gw = cert.gamma() * cert.w(e);
    gw * gw - threshold(sys, cert, cfg, x)
}

fn check_dims(sys: &dyn ClosedLoop, q: &HybridState, cfg: &TriggerConfig) -> Result<(), TriggerError> {
    if q.x.len() != sys.nx() || q.e.len() != sys.ne() {
        return Err(TriggerError::Config("state dimensions do not match the loop"));
    }
    if cfg.mode.uses_sigma() && !sys.full_state_output() {
        return Err(TriggerError::Config(
            "state-feedback triggering needs y = x; this loop only measures an output",
        ));
    }
    Ok(())
}

/// Membership in the flow set C.
pub fn in_flow(
    sys: &dyn ClosedLoop,
    cert: &dyn Certificate,
    cfg: &TriggerConfig,
    q: &HybridState,
) -> Result<bool, TriggerError> {
    check_dims(sys, q, cfg)?;
    let within_dwell = q.tau <= cfg.dwell;
    Ok(match cfg.mode {
        TriggerMode::Periodic => within_dwell,
        TriggerMode::PureEvent => event_value(sys, cert, cfg, &q.x, &q.e) <= 0.0,
        _ => within_dwell || event_value(sys, cert, cfg, &q.x, &q.e) <= 0.0,
    })
}

/// Membership in the jump set D (for τ ≥ T: `γ²W²(e) ≥ threshold`).
pub fn in_jump(
    sys: &dyn ClosedLoop,
    cert: &dyn Certificate,
    cfg: &TriggerConfig,
    q: &HybridState,
) -> Result<bool, TriggerError> {
    check_dims(sys, q, cfg)?;
    if q.tau < cfg.dwell {
        return Ok(false);
    }
    if cfg.mode == TriggerMode::Periodic {
        return Ok(true);
    }
    // Closed sets: the equality case belongs to both C and D. States with
    // τ > T and a strictly positive event value are unreachable under the
    // jump-first policy; they are counted in D so that C ∪ D covers all τ ≥ 0.
    Ok(event_value(sys, cert, cfg, &q.x, &q.e) >= 0.0)
}
