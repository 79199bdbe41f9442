//! Emulation design for linear plants and controllers.
//!
//! [`assemble`] builds the closed-loop/network-error matrices, [`lmi_residual`]
//! evaluates the block LMI
//!
//! ```text
//! [ A1ᵀP + PA1 + A2ᵀA2 + ε1 C̄ᵀC̄ + ε2 I    P B1 ]
//! [ B1ᵀP                                  -μ I  ]  ≤ 0
//! ```
//!
//! and [`design_certificate`] produces a feasible `(P, ε1, ε2, μ)` without an
//! SDP solver: fix the (1,1) block to `-ρI` through a Lyapunov solve, then the
//! Schur complement holds as soon as `μ ≥ |B1ᵀP|²/ρ`.

use alloc::vec::Vec;

use thiserror::Error;

use crate::linalg::{self, LinalgError, Matrix};
use crate::systems::Certificate;

/// Feasibility tolerance on `λ_max` of the LMI block matrix, relative to its scale.
pub const LMI_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("block {block} has shape {got:?}, expected {expected:?}")]
    Dimension {
        block: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("closed-loop matrix A1 is not Hurwitz; emulation design is infeasible")]
    NotHurwitz,
    #[error("certificate is infeasible: LMI residual {residual:e} exceeds tolerance {tol:e}")]
    Infeasible { residual: f64, tol: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn expect_shape(block: &'static str, m: &Matrix, expected: (usize, usize)) -> Result<(), DesignError> {
    if m.shape() == expected {
        Ok(())
    } else {
        Err(DesignError::Dimension {
            block,
            expected,
            got: m.shape(),
        })
    }
}

/// `ẋp = A xp + B u`, `y = C xp`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiPlant {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
}

impl LtiPlant {
    pub fn new(a: Matrix, b: Matrix, c: Matrix) -> Result<Self, DesignError> {
        let np = a.rows();
        expect_shape("A_p", &a, (np, np))?;
        expect_shape("B_p", &b, (np, b.cols()))?;
        expect_shape("C_p", &c, (c.rows(), np))?;
        Ok(LtiPlant { a, b, c })
    }

    /// Plant with full state measurement, `C = I`.
    pub fn state_feedback(a: Matrix, b: Matrix) -> Result<Self, DesignError> {
        let n = a.rows();
        LtiPlant::new(a, b, Matrix::identity(n))
    }

    pub fn np(&self) -> usize {
        self.a.rows()
    }
    pub fn nu(&self) -> usize {
        self.b.cols()
    }
    pub fn ny(&self) -> usize {
        self.c.rows()
    }
}

/// `ẋc = Ac xc + Bc ŷ`, `u = Cc xc + Dc ŷ`. With no controller state
/// (`n_c = 0`) only `Dc` matters.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiController {
    pub ac: Matrix,
    pub bc: Matrix,
    pub cc: Matrix,
    pub dc: Matrix,
}

impl LtiController {
    pub fn new(ac: Matrix, bc: Matrix, cc: Matrix, dc: Matrix) -> Self {
        LtiController { ac, bc, cc, dc }
    }

    /// Static output feedback `u = Dc ŷ`.
    pub fn static_gain(dc: Matrix) -> Self {
        let (nu, ny) = dc.shape();
        LtiController {
            ac: Matrix::zeros(0, 0),
            bc: Matrix::zeros(0, ny),
            cc: Matrix::zeros(nu, 0),
            dc,
        }
    }

    pub fn nc(&self) -> usize {
        self.ac.rows()
    }

    pub fn is_static(&self) -> bool {
        self.nc() == 0
    }
}

/// `ẋ = A1 x + B1 e`, `ė = A2 x + B2 e`, and `C̄ = [C_p 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopMatrices {
    pub a1: Matrix,
    pub b1: Matrix,
    pub a2: Matrix,
    pub b2: Matrix,
    pub cbar: Matrix,
}

impl ClosedLoopMatrices {
    pub fn nx(&self) -> usize {
        self.a1.rows()
    }

    pub fn ne(&self) -> usize {
        self.b1.cols()
    }

    pub fn validate(&self) -> Result<(), DesignError> {
        let nx = self.a1.rows();
        let ne = self.b1.cols();
        expect_shape("A1", &self.a1, (nx, nx))?;
        expect_shape("B1", &self.b1, (nx, ne))?;
        expect_shape("A2", &self.a2, (ne, nx))?;
        expect_shape("B2", &self.b2, (ne, ne))?;
        expect_shape("Cbar", &self.cbar, (self.cbar.rows(), nx))?;
        Ok(())
    }
}

/// Closed-loop matrices for the plant/controller pair.
///
/// A static controller sits with the plant, so only the output error
/// `e = ŷ - y` is transmitted: `A1 = A + B Dc C`, `B1 = B Dc`,
/// `A2 = -C A1`, `B2 = -C B Dc`. A dynamic controller carries both
/// `e = (e_y, e_u)` and the full block structure.
pub fn assemble(plant: &LtiPlant, ctrl: &LtiController) -> Result<ClosedLoopMatrices, DesignError> {
    let (np, nu, ny, nc) = (plant.np(), plant.nu(), plant.ny(), ctrl.nc());
    expect_shape("A_p", &plant.a, (np, np))?;
    expect_shape("B_p", &plant.b, (np, nu))?;
    expect_shape("C_p", &plant.c, (ny, np))?;
    expect_shape("A_c", &ctrl.ac, (nc, nc))?;
    expect_shape("B_c", &ctrl.bc, (nc, ny))?;
    expect_shape("C_c", &ctrl.cc, (nu, nc))?;
    expect_shape("D_c", &ctrl.dc, (nu, ny))?;

    let (a, b, c) = (&plant.a, &plant.b, &plant.c);
    let bd = b.matmul(&ctrl.dc)?;
    let a_cl = a.add(&bd.matmul(c)?)?;
    let neg_c = c.scale(-1.0);

    if ctrl.is_static() {
        let clm = ClosedLoopMatrices {
            a2: neg_c.matmul(&a_cl)?,
            b2: neg_c.matmul(&bd)?,
            a1: a_cl,
            b1: bd,
            cbar: c.clone(),
        };
        return Ok(clm);
    }

    let (ac, bc, cc) = (&ctrl.ac, &ctrl.bc, &ctrl.cc);
    let neg_cc = cc.scale(-1.0);
    let a1 = Matrix::block2x2(&a_cl, &b.matmul(cc)?, &bc.matmul(c)?, ac)?;
    let b1 = Matrix::block2x2(&bd, b, bc, &Matrix::zeros(nc, nu))?;
    let a2 = Matrix::block2x2(
        &neg_c.matmul(&a_cl)?,
        &neg_c.matmul(b)?.matmul(cc)?,
        &neg_cc.matmul(bc)?.matmul(c)?,
        &neg_cc.matmul(ac)?,
    )?;
    let b2 = Matrix::block2x2(
        &neg_c.matmul(&bd)?,
        &neg_c.matmul(b)?,
        &neg_cc.matmul(bc)?,
        &Matrix::zeros(nu, nu),
    )?;
    let cbar = Matrix::block2x2(c, &Matrix::zeros(ny, nc), &Matrix::zeros(0, np), &Matrix::zeros(0, nc))?;
    Ok(ClosedLoopMatrices { a1, b1, a2, b2, cbar })
}

/// Candidate solution of the block LMI.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiCertificate {
    pub p: Matrix,
    pub eps1: f64,
    pub eps2: f64,
    pub mu: f64,
}

impl LmiCertificate {
    pub fn gamma(&self) -> f64 {
        libm::sqrt(self.mu)
    }
}

/// `A1ᵀP + PA1 + A2ᵀA2 + ε1 C̄ᵀC̄ + ε2 I`.
fn upper_left_block(clm: &ClosedLoopMatrices, p: &Matrix, eps1: f64, eps2: f64) -> Result<Matrix, DesignError> {
    let at = clm.a1.transpose();
    let ul = at
        .matmul(p)?
        .add(&p.matmul(&clm.a1)?)?
        .add(&base_weight(clm, eps1, eps2)?)?;
    Ok(ul)
}

/// `A2ᵀA2 + ε1 C̄ᵀC̄ + ε2 I`.
fn base_weight(clm: &ClosedLoopMatrices, eps1: f64, eps2: f64) -> Result<Matrix, DesignError> {
    let nx = clm.nx();
    let w = clm
        .a2
        .transpose()
        .matmul(&clm.a2)?
        .add(&clm.cbar.transpose().matmul(&clm.cbar)?.scale(eps1))?
        .add(&Matrix::identity(nx).scale(eps2))?;
    Ok(w)
}

/// The full symmetric block matrix of the LMI.
pub fn lmi_matrix(clm: &ClosedLoopMatrices, cand: &LmiCertificate) -> Result<Matrix, DesignError> {
    clm.validate()?;
    let nx = clm.nx();
    let ne = clm.ne();
    expect_shape("P", &cand.p, (nx, nx))?;
    let ul = upper_left_block(clm, &cand.p, cand.eps1, cand.eps2)?;
    let pb = cand.p.matmul(&clm.b1)?;
    let m = Matrix::block2x2(&ul, &pb, &pb.transpose(), &Matrix::identity(ne).scale(-cand.mu))?;
    Ok(m.symmetrized())
}

/// `λ_max` of the LMI block matrix; the candidate is feasible when this is
/// at most [`LMI_TOL`] times the matrix scale.
pub fn lmi_residual(clm: &ClosedLoopMatrices, cand: &LmiCertificate) -> Result<f64, DesignError> {
    let m = lmi_matrix(clm, cand)?;
    Ok(linalg::lambda_max(&m, linalg::DEFAULT_TOL)?)
}

/// Feasibility test with the default relative tolerance.
pub fn is_feasible(clm: &ClosedLoopMatrices, cand: &LmiCertificate) -> Result<bool, DesignError> {
    let m = lmi_matrix(clm, cand)?;
    let residual = linalg::lambda_max(&m, linalg::DEFAULT_TOL)?;
    Ok(residual <= LMI_TOL * m.max_abs().max(1.0) && linalg::is_positive_definite(&cand.p, 0.0)?)
}

/// Twenty log-spaced slack values spanning `[1e-3, 1e3]·scale`.
pub fn default_slack_grid(scale: f64) -> Vec<f64> {
    let n = 20;
    (0..n)
        .map(|i| {
            let expo = -3.0 + 6.0 * i as f64 / (n - 1) as f64;
            scale * libm::pow(10.0, expo)
        })
        .collect()
}

/// Slack scale used by the default grid: `|A2ᵀA2 + ε1 C̄ᵀC̄ + ε2 I|`.
pub fn slack_scale(clm: &ClosedLoopMatrices, eps1: f64, eps2: f64) -> Result<f64, DesignError> {
    Ok(linalg::spectral_norm(&base_weight(clm, eps1, eps2)?).max(1e-12))
}

/// Constructive certificate: for each slack `ρ`, solve
/// `A1ᵀP + PA1 = -(A2ᵀA2 + ε1 C̄ᵀC̄ + ε2 I + ρI)` and take
/// `μ = |B1ᵀP|²/ρ`; keep the smallest `μ`. An empty grid selects
/// [`default_slack_grid`].
pub fn design_certificate(
    clm: &ClosedLoopMatrices,
    eps1: f64,
    eps2: f64,
    slack_grid: &[f64],
) -> Result<LmiCertificate, DesignError> {
    clm.validate()?;
    if !(eps1 >= 0.0) || !eps1.is_finite() {
        return Err(DesignError::InvalidArgument("eps1 must be nonnegative"));
    }
    if !(eps2 > 0.0) || !eps2.is_finite() {
        return Err(DesignError::InvalidArgument("eps2 must be positive"));
    }
    if !linalg::is_hurwitz(&clm.a1)? {
        return Err(DesignError::NotHurwitz);
    }
    let grid: Vec<f64> = if slack_grid.is_empty() {
        default_slack_grid(slack_scale(clm, eps1, eps2)?)
    } else {
        slack_grid.to_vec()
    };
    if grid.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(DesignError::InvalidArgument("slack values must be positive"));
    }
    let nx = clm.nx();
    let weight = base_weight(clm, eps1, eps2)?;
    let mut best: Option<LmiCertificate> = None;
    for &rho in &grid {
        let q = weight.add(&Matrix::identity(nx).scale(rho))?;
        let p = linalg::solve_lyapunov(&clm.a1, &q)?.symmetrized();
        let bp = clm.b1.transpose().matmul(&p)?;
        let norm = linalg::spectral_norm(&bp);
        // small margin so the Schur complement is strictly negative
        let mu = (norm * norm / rho * (1.0 + 1e-9)).max(1e-12);
        if best.as_ref().is_none_or(|b| mu < b.mu) {
            best = Some(LmiCertificate { p, eps1, eps2, mu });
        }
    }
    let cert = best.ok_or(DesignError::InvalidArgument("slack grid is empty"))?;
    if !is_feasible(clm, &cert)? {
        let residual = lmi_residual(clm, &cert)?;
        return Err(DesignError::Infeasible { residual, tol: LMI_TOL });
    }
    Ok(cert)
}

/// Quadratic certificate of a linear loop: `V = xᵀPx`, `W = |e|`,
/// `H = |A2 x|`, `L = |B2|`, `γ = sqrt(μ)`, `α(s) = ε2 s²`, `δ(y) = ε1|y|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticCertificate {
    pub p: Matrix,
    pub a2: Matrix,
    pub eps1: f64,
    pub eps2: f64,
    pub gamma: f64,
    pub l: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Reads the certificate functions off a feasible LMI solution.
pub fn extract_assumption(
    clm: &ClosedLoopMatrices,
    cert: &LmiCertificate,
) -> Result<QuadraticCertificate, DesignError> {
    if !is_feasible(clm, cert)? {
        return Err(DesignError::Infeasible {
            residual: lmi_residual(clm, cert)?,
            tol: LMI_TOL,
        });
    }
    let eig = linalg::sym_eigenvalues(&cert.p, linalg::DEFAULT_TOL)?;
    Ok(QuadraticCertificate {
        p: cert.p.clone(),
        a2: clm.a2.clone(),
        eps1: cert.eps1,
        eps2: cert.eps2,
        gamma: cert.gamma(),
        l: linalg::spectral_norm(&clm.b2),
        lambda_min: eig[0],
        lambda_max: eig[eig.len() - 1],
    })
}

impl Certificate for QuadraticCertificate {
    fn v(&self, x: &[f64]) -> f64 {
        let px = self.p.mul_vec(x);
        x.iter().zip(&px).map(|(a, b)| a * b).sum()
    }
    fn w(&self, e: &[f64]) -> f64 {
        linalg::norm(e)
    }
    fn h(&self, x: &[f64]) -> f64 {
        linalg::norm(&self.a2.mul_vec(x))
    }
    fn delta(&self, y: &[f64]) -> f64 {
        self.eps1 * y.iter().map(|v| v * v).sum::<f64>()
    }
    fn alpha(&self, s: f64) -> f64 {
        self.eps2 * s * s
    }
    fn alpha_lower(&self, s: f64) -> f64 {
        self.lambda_min * s * s
    }
    fn alpha_upper(&self, s: f64) -> f64 {
        self.lambda_max * s * s
    }
    fn gamma(&self) -> f64 {
        self.gamma
    }
    fn lipschitz(&self) -> f64 {
        self.l
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::tabuada_example;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn tabuada_assembly() {
        let (plant, ctrl) = tabuada_example();
        let clm = assemble(&plant, &ctrl).unwrap();
        assert_eq!(clm.a1, m(&[&[0.0, 1.0], &[-1.0, -1.0]]));
        assert_eq!(clm.b1, m(&[&[0.0, 0.0], &[1.0, -4.0]]));
        assert_eq!(clm.a2, clm.a1.scale(-1.0));
        assert_eq!(clm.b2, clm.b1.scale(-1.0));
        assert_eq!(clm.cbar, Matrix::identity(2));
        assert!((linalg::spectral_norm(&clm.b2) - 4.1231).abs() < 1e-4);
    }

    #[test]
    fn dynamic_controller_shapes() {
        let plant = LtiPlant::new(
            Matrix::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-1.0, -2.0, -3.0]]).unwrap(),
            Matrix::from_rows(&[[0.0], [0.0], [1.0]]).unwrap(),
            Matrix::from_rows(&[[1.0, 0.0, 0.0]]).unwrap(),
        )
        .unwrap();
        let ctrl = LtiController::new(
            Matrix::from_rows(&[[-1.0, 0.0], [0.0, -2.0]]).unwrap(),
            Matrix::from_rows(&[[1.0], [1.0]]).unwrap(),
            Matrix::zeros(1, 2),
            Matrix::zeros(1, 1),
        );
        let clm = assemble(&plant, &ctrl).unwrap();
        assert_eq!(clm.a1.shape(), (5, 5));
        assert_eq!(clm.b1.shape(), (5, 2));
        assert_eq!(clm.a2.shape(), (2, 5));
        assert_eq!(clm.b2.shape(), (2, 2));
        assert_eq!(clm.cbar.shape(), (1, 5));
        // B_p D_c vanishes when D_c = 0
        for i in 0..3 {
            assert_eq!(clm.b1[(i, 0)], 0.0);
        }
        clm.validate().unwrap();
    }

    #[test]
    fn assemble_names_offending_block() {
        let (plant, _) = tabuada_example();
        let bad = LtiController::new(
            Matrix::zeros(0, 0),
            Matrix::zeros(0, 2),
            Matrix::zeros(1, 0),
            Matrix::zeros(1, 3),
        );
        match assemble(&plant, &bad) {
            Err(DesignError::Dimension { block, .. }) => assert_eq!(block, "D_c"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scalar_residual_by_hand() {
        let clm = ClosedLoopMatrices {
            a1: m(&[&[-1.0]]),
            b1: m(&[&[0.0]]),
            a2: m(&[&[0.0]]),
            b2: m(&[&[0.0]]),
            cbar: m(&[&[0.0]]),
        };
        let cand = LmiCertificate {
            p: Matrix::identity(1),
            eps1: 0.0,
            eps2: 1.0,
            mu: 1.0,
        };
        // diag(-2 + 1, -1)
        assert!((lmi_residual(&clm, &cand).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_p_with_tiny_mu_is_infeasible() {
        let (plant, ctrl) = tabuada_example();
        let clm = assemble(&plant, &ctrl).unwrap();
        let cand = LmiCertificate {
            p: Matrix::identity(2),
            eps1: 0.0,
            eps2: 0.68,
            mu: 1e-6,
        };
        assert!(lmi_residual(&clm, &cand).unwrap() > 0.0);
        assert!(extract_assumption(&clm, &cand).is_err());
    }

    #[test]
    fn design_rejects_unstable_loop() {
        let clm = ClosedLoopMatrices {
            a1: m(&[&[0.0, 1.0], &[-2.0, 3.0]]),
            b1: Matrix::identity(2),
            a2: Matrix::identity(2),
            b2: Matrix::identity(2),
            cbar: Matrix::identity(2),
        };
        assert_eq!(design_certificate(&clm, 0.0, 0.1, &[]), Err(DesignError::NotHurwitz));
        let stable = ClosedLoopMatrices {
            a1: Matrix::identity(2).scale(-1.0),
            ..clm
        };
        assert!(design_certificate(&stable, 0.0, 0.0, &[]).is_err());
        assert!(design_certificate(&stable, 0.0, 0.1, &[-1.0]).is_err());
    }

    #[test]
    fn tabuada_design_is_feasible_and_admits_dwell() {
        let (plant, ctrl) = tabuada_example();
        let clm = assemble(&plant, &ctrl).unwrap();
        let cert = design_certificate(&clm, 0.0, 0.68, &[]).unwrap();
        assert!(linalg::is_positive_definite(&cert.p, linalg::DEFAULT_TOL).unwrap());
        let q = extract_assumption(&clm, &cert).unwrap();
        let bound = crate::trigger::masp(q.gamma, q.l).unwrap();
        assert!(bound > 0.075, "gamma {} bound {}", q.gamma, bound);
    }

    #[test]
    fn slack_grid_shape() {
        let g = default_slack_grid(2.0);
        assert_eq!(g.len(), 20);
        assert!((g[0] - 2e-3).abs() < 1e-15);
        assert!((g[19] - 2e3).abs() < 1e-9);
    }
}
