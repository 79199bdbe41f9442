//! Closed loops, their Lyapunov-type certificates, and a sampled checker for
//! the certificate inequalities.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::linalg::{norm, Matrix};
use crate::lti_design::{ClosedLoopMatrices, LtiController, LtiPlant, QuadraticCertificate};
use crate::sampling::{stream_rng, uniform_in_ball};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("invalid Lorenz parameters: {0}")]
    LorenzParameters(&'static str),
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error(transparent)]
    Design(#[from] crate::lti_design::DesignError),
}

/// Plant, controller and network error dynamics on flows:
/// `ẋ = f(x, e)`, `ė = g(x, e)`, with measured output `y = y(x)`.
///
/// The origin must be an equilibrium: `f(0, 0) = 0` and `g(0, 0) = 0`.
pub trait ClosedLoop: Send + Sync {
    fn nx(&self) -> usize;
    fn ne(&self) -> usize;
    fn ny(&self) -> usize;
    /// Writes `f(x, e)` into `dx` and `g(x, e)` into `de`.
    fn flow(&self, x: &[f64], e: &[f64], dx: &mut [f64], de: &mut [f64]);
    fn output(&self, x: &[f64]) -> Vec<f64>;
    /// True when the whole state is measured (`y = x`).
    fn full_state_output(&self) -> bool {
        false
    }
}

/// The functions and gains of the Lyapunov/L2-gain assumption:
///
/// ```text
/// α̲(|x|) ≤ V(x) ≤ ᾱ(|x|)
/// ⟨∇V(x), f(x,e)⟩ ≤ -α(|x|) - H²(x) - δ(y) + γ²W²(e)
/// ⟨∇W(e), g(x,e)⟩ ≤ L W(e) + H(x)
/// ```
pub trait Certificate: Send + Sync {
    fn v(&self, x: &[f64]) -> f64;
    fn w(&self, e: &[f64]) -> f64;
    fn h(&self, x: &[f64]) -> f64;
    fn delta(&self, y: &[f64]) -> f64;
    fn alpha(&self, s: f64) -> f64;
    fn alpha_lower(&self, s: f64) -> f64;
    fn alpha_upper(&self, s: f64) -> f64;
    fn gamma(&self) -> f64;
    fn lipschitz(&self) -> f64;
    /// `(Δ_x, Δ_e)` when the inequalities only hold locally.
    fn locality(&self) -> Option<(f64, f64)> {
        None
    }
}

/// A certificate with its gain `γ` replaced.
pub struct WithGamma<'a> {
    pub inner: &'a dyn Certificate,
    pub gamma: f64,
}

impl Certificate for WithGamma<'_> {
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
        self.inner.lipschitz()
    }
    fn locality(&self) -> Option<(f64, f64)> {
        self.inner.locality()
    }
}

/// Controlled Lorenz equations with static output feedback
/// `u = -(p1/p2·a + b)·ŷ` and a scalar network error `e = ŷ - y`, `y = x1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzLoop {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gain: f64,
}

impl ClosedLoop for LorenzLoop {
    fn nx(&self) -> usize {
        3
    }
    fn ne(&self) -> usize {
        1
    }
    fn ny(&self) -> usize {
        1
    }

    fn flow(&self, x: &[f64], e: &[f64], dx: &mut [f64], de: &mut [f64]) {
        let (x1, x2, x3) = (x[0], x[1], x[2]);
        let u = -self.gain * (x1 + e[0]);
        dx[0] = -self.a * x1 + self.a * x2;
        dx[1] = self.b * x1 - x2 - x1 * x3 + u;
        dx[2] = x1 * x2 - self.c * x3;
        // ŷ is held, so ė = -ẏ
        de[0] = -dx[0];
    }

    fn output(&self, x: &[f64]) -> Vec<f64> {
        vec![x[0]]
    }
}

/// Analytic certificate of the Lorenz loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzCertificate {
    pub a: f64,
    pub c: f64,
    pub p1: f64,
    pub p2: f64,
}

impl LorenzCertificate {
    /// Coefficient of `|x|²` in `α`.
    pub fn alpha_coefficient(&self) -> f64 {
        let a = self.a;
        (a * (self.p1 - 1.0)).min(self.p2 - 2.0 * a).min(2.0 * self.p2 * self.c)
    }

    pub fn delta_coefficient(&self) -> f64 {
        self.a * (self.p1 - 1.0)
    }

    pub fn gamma_squared(&self) -> f64 {
        let k = self.p1 / self.p2 * self.a + self.c;
        self.p2 * k * k
    }
}

impl Certificate for LorenzCertificate {
    fn v(&self, x: &[f64]) -> f64 {
        self.p1 * x[0] * x[0] + self.p2 * x[1] * x[1] + self.p2 * x[2] * x[2]
    }
    fn w(&self, e: &[f64]) -> f64 {
        norm(e)
    }
    fn h(&self, x: &[f64]) -> f64 {
        self.a * (x[0].abs() + x[1].abs())
    }
    fn delta(&self, y: &[f64]) -> f64 {
        self.delta_coefficient() * y[0] * y[0]
    }
    fn alpha(&self, s: f64) -> f64 {
        self.alpha_coefficient() * s * s
    }
    fn alpha_lower(&self, s: f64) -> f64 {
        self.p1.min(self.p2) * s * s
    }
    fn alpha_upper(&self, s: f64) -> f64 {
        self.p1.max(self.p2) * s * s
    }
    fn gamma(&self) -> f64 {
        libm::sqrt(self.gamma_squared())
    }
    fn lipschitz(&self) -> f64 {
        0.0
    }
}

/// Builds the Lorenz loop and its certificate. Requires `a, b, c > 0`,
/// `p1 > 1` and `p2 > 2a`.
pub fn lorenz_loop(a: f64, b: f64, c: f64, p1: f64, p2: f64) -> Result<(LorenzLoop, LorenzCertificate), SystemError> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(SystemError::LorenzParameters("a, b, c must be positive"));
    }
    if !(p1 > 1.0) {
        return Err(SystemError::LorenzParameters("p1 > 1 is violated"));
    }
    if !(p2 > 2.0 * a) {
        return Err(SystemError::LorenzParameters("p2 > 2a is violated"));
    }
    let gain = p1 / p2 * a + b;
    Ok((LorenzLoop { a, b, c, gain }, LorenzCertificate { a, c, p1, p2 }))
}

/// `(a, b, c, p1, p2) = (10, 28, 8/3, 2, 3a)`.
pub fn lorenz_default() -> (LorenzLoop, LorenzCertificate) {
    lorenz_loop(10.0, 28.0, 8.0 / 3.0, 2.0, 30.0).expect("default Lorenz parameters are valid")
}

/// Linear closed loop `ẋ = A1 x + B1 e`, `ė = A2 x + B2 e`, `y = C̄ x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearLoop {
    pub matrices: ClosedLoopMatrices,
    full_state: bool,
}

impl LinearLoop {
    pub fn new(matrices: ClosedLoopMatrices) -> Self {
        let full_state = matrices.cbar == Matrix::identity(matrices.a1.rows());
        LinearLoop { matrices, full_state }
    }
}

impl ClosedLoop for LinearLoop {
    fn nx(&self) -> usize {
        self.matrices.a1.rows()
    }
    fn ne(&self) -> usize {
        self.matrices.b1.cols()
    }
    fn ny(&self) -> usize {
        self.matrices.cbar.rows()
    }

    fn flow(&self, x: &[f64], e: &[f64], dx: &mut [f64], de: &mut [f64]) {
        let m = &self.matrices;
        m.a1.mul_vec_into(x, dx);
        for (i, d) in dx.iter_mut().enumerate() {
            *d += m.b1.row(i).iter().zip(e).map(|(a, b)| a * b).sum::<f64>();
        }
        m.a2.mul_vec_into(x, de);
        for (i, d) in de.iter_mut().enumerate() {
            *d += m.b2.row(i).iter().zip(e).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    fn output(&self, x: &[f64]) -> Vec<f64> {
        self.matrices.cbar.mul_vec(x)
    }

    fn full_state_output(&self) -> bool {
        self.full_state
    }
}

/// Linear loop for `plant` and `ctrl`; `cert` must match its dimensions.
pub fn lti_loop(
    plant: &LtiPlant,
    ctrl: &LtiController,
    cert: &QuadraticCertificate,
) -> Result<LinearLoop, SystemError> {
    let clm = crate::lti_design::assemble(plant, ctrl)?;
    if cert.p.shape() != clm.a1.shape() || cert.a2 != clm.a2 {
        return Err(SystemError::Dimension(
            "certificate was not extracted from these plant/controller matrices",
        ));
    }
    Ok(LinearLoop::new(clm))
}

/// Plant `A = [[0, 1], [-2, 3]]`, `B = [0; 1]` under `u = Kx`, `K = [1, -4]`.
pub fn tabuada_example() -> (LtiPlant, LtiController) {
    let a = Matrix::from_rows(&[[0.0, 1.0], [-2.0, 3.0]]).expect("finite");
    let b = Matrix::from_rows(&[[0.0], [1.0]]).expect("finite");
    let k = Matrix::from_rows(&[[1.0, -4.0]]).expect("finite");
    (
        LtiPlant::state_feedback(a, b).expect("consistent"),
        LtiController::static_gain(k),
    )
}

/// Outcome of [`check_assumption_sampled`]. Violations are normalized by
/// `max(1, Σ|terms|)` of each inequality at the sample.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub samples: usize,
    pub radius: f64,
    pub tolerance: f64,
    pub bounds_violation: f64,
    pub v_dot_violation: f64,
    pub w_dot_violation: f64,
    /// Samples excluded from the `W` derivative check near `e = 0`.
    pub skipped: usize,
    pub worst_v_dot_point: Option<(Vec<f64>, Vec<f64>)>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.bounds_violation <= self.tolerance
            && self.v_dot_violation <= self.tolerance
            && self.w_dot_violation <= self.tolerance
    }
}

pub const ASSUMPTION_TOL: f64 = 1e-5;

/// Directional derivative of `phi` at `z` along `dir` by central differences.
fn directional_derivative(phi: impl Fn(&[f64]) -> f64, z: &[f64], dir: &[f64]) -> f64 {
    let dn = norm(dir);
    if dn == 0.0 {
        return 0.0;
    }
    let h = 1e-6 * norm(z).max(1.0);
    let plus: Vec<f64> = z.iter().zip(dir).map(|(a, d)| a + h * d / dn).collect();
    let minus: Vec<f64> = z.iter().zip(dir).map(|(a, d)| a - h * d / dn).collect();
    dn * (phi(&plus) - phi(&minus)) / (2.0 * h)
}

/// Samples `(x, e)` uniformly in the ball of `radius` and evaluates the three
/// certificate inequalities with finite-difference derivatives.
pub fn check_assumption_sampled(
    sys: &dyn ClosedLoop,
    cert: &dyn Certificate,
    n_samples: usize,
    radius: f64,
    seed: u64,
) -> AssumptionReport {
    let radius = match cert.locality() {
        Some((dx, de)) => radius.min(dx).min(de),
        None => radius,
    };
    let (nx, ne) = (sys.nx(), sys.ne());
    let mut rng = stream_rng(seed, 0);
    let mut report = AssumptionReport {
        samples: n_samples,
        radius,
        tolerance: ASSUMPTION_TOL,
        bounds_violation: f64::NEG_INFINITY,
        v_dot_violation: f64::NEG_INFINITY,
        w_dot_violation: f64::NEG_INFINITY,
        skipped: 0,
        worst_v_dot_point: None,
    };
    let mut dx = vec![0.0; nx];
    let mut de = vec![0.0; ne];
    for _ in 0..n_samples {
        let z = uniform_in_ball(&mut rng, nx + ne, radius);
        let (x, e) = z.split_at(nx);
        let xn = norm(x);
        sys.flow(x, e, &mut dx, &mut de);

        let v = cert.v(x);
        let (lo, hi) = (cert.alpha_lower(xn), cert.alpha_upper(xn));
        let scale = 1.0f64.max(v.abs() + lo.abs() + hi.abs());
        let viol = (lo - v).max(v - hi) / scale;
        report.bounds_violation = report.bounds_violation.max(viol);

        let vdot = directional_derivative(|p| cert.v(p), x, &dx);
        let y = sys.output(x);
        let hx = cert.h(x);
        let w = cert.w(e);
        let gw2 = cert.gamma() * cert.gamma() * w * w;
        let terms = [cert.alpha(xn), hx * hx, cert.delta(&y), gw2];
        let rhs = -terms[0] - terms[1] - terms[2] + terms[3];
        let scale = 1.0f64.max(vdot.abs() + terms.iter().map(|t| t.abs()).sum::<f64>());
        let viol = (vdot - rhs) / scale;
        if viol > report.v_dot_violation {
            report.v_dot_violation = viol;
            report.worst_v_dot_point = Some((x.to_vec(), e.to_vec()));
        }

        if norm(e) <= 1e-6 * norm(&z).max(1.0) {
            report.skipped += 1;
        } else {
            let wdot = directional_derivative(|p| cert.w(p), e, &de);
            let rhs = cert.lipschitz() * w + hx;
            let scale = 1.0f64.max(wdot.abs() + rhs.abs());
            report.w_dot_violation = report.w_dot_violation.max((wdot - rhs) / scale);
        }
    }
    report
}
