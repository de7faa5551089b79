//! Matrices of the linearized system, its symmetrized form and Fourier
//! symbols, plus pointwise coefficient matrices of the nonlinear system.
//!
//! State ordering is fixed everywhere: `(r, u1, u2, u3, T, e_r, b1, b2, b3)`.

use std::fmt;

use num_complex::Complex64;

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::linalg::{asymmetry_defect, sym_min_eigenvalue, CMat9, Mat9, Vec9, DIM};
use crate::model::{derive_coefficients, validate_equilibrium, EquationOfState, Equilibrium, LinCoeffs, PhysParams};

pub const IDX_R: usize = 0;
pub const IDX_U: usize = 1;
pub const IDX_T: usize = 4;
pub const IDX_ER: usize = 5;
pub const IDX_B: usize = 6;

/// A state perturbation in the global ordering.
pub type StateVector = [f64; DIM];

/// Every matrix of the linearized and symmetrized systems.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub a: [Mat9; 3],
    pub d: Mat9,
    pub b_relax: Mat9,
    pub a0: Mat9,
    pub a0_diag: [f64; DIM],
    pub at: [Mat9; 3],
    pub dt: Mat9,
    pub bt: Mat9,
    pub params: PhysParams,
    pub equilibrium: Equilibrium,
    pub coeffs: LinCoeffs,
}

pub fn build_system(coeffs: &LinCoeffs, eq: &Equilibrium, params: &PhysParams) -> Result<SystemMatrices> {
    let eq = validate_equilibrium(params, *eq)?;
    if !coeffs.all_positive() {
        return Err(Error::InvalidParameter {
            name: "coeffs",
            reason: format!("linearization coefficients must all be > 0: {coeffs:?}"),
        });
    }
    let c = coeffs;
    let mu = params.mu;
    let b = eq.b_bar;

    let mut a = [Mat9::zeros(); 3];
    for (j, aj) in a.iter_mut().enumerate() {
        let uj = IDX_U + j;
        aj[(IDX_R, uj)] = eq.rho_bar;
        aj[(uj, IDX_R)] = c.alpha_p;
        aj[(uj, IDX_T)] = c.beta_p;
        aj[(uj, IDX_ER)] = c.beta_pp;
        aj[(IDX_T, uj)] = c.gamma_p;
        aj[(IDX_ER, uj)] = c.gamma_pp;
        for i in 0..3 {
            for k in 0..3 {
                // induction: b_k row, d_j u_i column
                let induction = b[k] * delta(i, j) - b[j] * delta(k, i);
                aj[(IDX_B + k, IDX_U + i)] = induction;
                // Lorentz force B x curl b: u_i row, d_j b_k column
                aj[(IDX_U + i, IDX_B + k)] = (delta(i, j) * b[k] - delta(i, k) * b[j]) / mu;
            }
        }
    }

    let mut d = Mat9::zeros();
    d[(IDX_T, IDX_T)] = c.delta_p;
    d[(IDX_ER, IDX_ER)] = c.delta_pp;
    for k in 0..3 {
        d[(IDX_B + k, IDX_B + k)] = params.lambda;
    }

    let mut b_relax = Mat9::zeros();
    for i in 0..3 {
        b_relax[(IDX_U + i, IDX_U + i)] = params.nu;
    }
    b_relax[(IDX_T, IDX_T)] = c.zeta;
    b_relax[(IDX_T, IDX_ER)] = -c.eta;
    b_relax[(IDX_ER, IDX_T)] = -c.pi;
    b_relax[(IDX_ER, IDX_ER)] = params.sigma_a;

    let a0_diag = [
        mu * c.alpha_p / eq.rho_bar,
        mu,
        mu,
        mu,
        mu * c.beta_p / c.gamma_p,
        mu * c.beta_pp / c.gamma_pp,
        1.0,
        1.0,
        1.0,
    ];
    let a0 = Mat9::from_diagonal(&Vec9::from_row_slice(&a0_diag));
    let at = a.map(|aj| a0 * aj);

    Ok(SystemMatrices {
        a,
        d,
        b_relax,
        a0,
        a0_diag,
        at,
        dt: a0 * d,
        bt: a0 * b_relax,
        params: *params,
        equilibrium: eq,
        coeffs: *coeffs,
    })
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

impl SystemMatrices {
    /// Coefficients, validation and matrices for an ideal-gas model.
    pub fn from_model(model: &ModelConfig) -> Result<Self> {
        let coeffs = derive_coefficients(&model.params, &model.eos, &model.equilibrium)?;
        build_system(&coeffs, &model.equilibrium, &model.params)
    }

    /// `A(xi) = sum_j xi_j At_j`.
    pub fn a_symbol(&self, xi: [f64; 3]) -> Mat9 {
        self.at[0] * xi[0] + self.at[1] * xi[1] + self.at[2] * xi[2]
    }

    /// `B(xi) = Bt + |xi|^2 Dt`.
    pub fn b_symbol(&self, xi: [f64; 3]) -> Mat9 {
        let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        self.bt + self.dt * k2
    }

    /// Generator `A0^{-1} E(xi)` of the per-mode evolution.
    pub fn generator(&self, xi: [f64; 3]) -> CMat9 {
        let a = self.a_symbol(xi);
        let b = self.b_symbol(xi);
        CMat9::from_fn(|i, j| Complex64::new(-b[(i, j)], -a[(i, j)]) / self.a0_diag[i])
    }

    pub fn matrices(&self) -> Vec<(String, Mat9)> {
        let mut out = Vec::new();
        for j in 0..3 {
            out.push((format!("A{}", j + 1), self.a[j]));
        }
        out.push(("D".into(), self.d));
        out.push(("B".into(), self.b_relax));
        out.push(("A0".into(), self.a0));
        for j in 0..3 {
            out.push((format!("At{}", j + 1), self.at[j]));
        }
        out.push(("Dt".into(), self.dt));
        out.push(("Bt".into(), self.bt));
        out
    }
}

/// Symbols of the symmetrized system at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSymbol {
    pub xi: [f64; 3],
    pub a_xi: Mat9,
    pub b_xi: Mat9,
    /// `E(xi) = -B(xi) - i A(xi)`.
    pub e_xi: CMat9,
}

pub fn fourier_symbol(sys: &SystemMatrices, xi: [f64; 3]) -> FourierSymbol {
    let a_xi = sys.a_symbol(xi);
    let b_xi = sys.b_symbol(xi);
    let e_xi = CMat9::from_fn(|i, j| Complex64::new(-b_xi[(i, j)], -a_xi[(i, j)]));
    FourierSymbol { xi, a_xi, b_xi, e_xi }
}

/// Asymmetry and positivity measurements of one dissipation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationAudit {
    pub xi_norm: Option<f64>,
    pub asymmetry_defect: f64,
    pub sym_min_eigenvalue: f64,
    pub symmetric: bool,
    pub positive_semidefinite: bool,
}

fn audit_matrix(m: &Mat9, xi_norm: Option<f64>) -> DissipationAudit {
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let defect = asymmetry_defect(m);
    let min_eig = sym_min_eigenvalue(m);
    DissipationAudit {
        xi_norm,
        asymmetry_defect: defect,
        sym_min_eigenvalue: min_eig,
        symmetric: defect <= 1e-12 * scale,
        positive_semidefinite: min_eig >= -1e-12 * scale,
    }
}

/// Numerical check of the claims that `Bt` is symmetric and that
/// `X^T Bt X >= 0`, for `Bt` itself and for `B(xi)` at `|xi| = 0, 1, 10`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub bt: DissipationAudit,
    pub symbols: Vec<DissipationAudit>,
    /// `max_j ||At_j - At_j^T||_F / ||At_j||_F`.
    pub hyperbolic_relative_asymmetry: f64,
}

impl AuditReport {
    pub fn bt_symmetric(&self) -> bool {
        self.bt.symmetric
    }
    pub fn bt_positive(&self) -> bool {
        self.bt.positive_semidefinite
    }
}

pub const AUDIT_XI_NORMS: [f64; 3] = [0.0, 1.0, 10.0];

pub fn consistency_audit(sys: &SystemMatrices) -> AuditReport {
    let symbols = AUDIT_XI_NORMS
        .iter()
        .map(|&k| audit_matrix(&sys.b_symbol([k, 0.0, 0.0]), Some(k)))
        .collect();
    let hyperbolic_relative_asymmetry = sys
        .at
        .iter()
        .map(|m| (m - m.transpose()).norm() / m.norm())
        .fold(0.0, f64::max);
    AuditReport {
        bt: audit_matrix(&sys.bt, None),
        symbols,
        hyperbolic_relative_asymmetry,
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |f: &mut fmt::Formatter<'_>, label: &str, a: &DissipationAudit| {
            writeln!(f, "{label}.asymmetry_defect: {:.17e}", a.asymmetry_defect)?;
            writeln!(f, "{label}.sym_min_eigenvalue: {:.17e}", a.sym_min_eigenvalue)?;
            writeln!(f, "{label}.symmetric: {}", a.symmetric)?;
            writeln!(f, "{label}.positive_semidefinite: {}", a.positive_semidefinite)
        };
        row(f, "Bt", &self.bt)?;
        for a in &self.symbols {
            let label = format!("B(|xi|={})", a.xi_norm.unwrap_or(f64::NAN));
            row(f, &label, a)?;
        }
        writeln!(
            f,
            "At.max_relative_asymmetry: {:.17e}",
            self.hyperbolic_relative_asymmetry
        )
    }
}

/// Full nonlinear state `(rho, u, theta, E_r, B)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullState {
    pub rho: f64,
    pub u: [f64; 3],
    pub theta: f64,
    pub er: f64,
    pub b: [f64; 3],
}

impl FullState {
    pub fn equilibrium(eq: &Equilibrium) -> Self {
        Self {
            rho: eq.rho_bar,
            u: [0.0; 3],
            theta: eq.theta_bar,
            er: eq.er_bar,
            b: eq.b_bar,
        }
    }

    /// `V_bar + U` for a perturbation `U` in the global ordering.
    pub fn from_perturbation(eq: &Equilibrium, p: &StateVector) -> Self {
        Self {
            rho: eq.rho_bar + p[IDX_R],
            u: [p[IDX_U], p[IDX_U + 1], p[IDX_U + 2]],
            theta: eq.theta_bar + p[IDX_T],
            er: eq.er_bar + p[IDX_ER],
            b: [
                eq.b_bar[0] + p[IDX_B],
                eq.b_bar[1] + p[IDX_B + 1],
                eq.b_bar[2] + p[IDX_B + 2],
            ],
        }
    }
}

/// Coefficient matrices of the quasilinear form
/// `d_t V + sum_j Ahat_j(V) d_j V = Dhat(V) Lap V - Bhat(V)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearCoefficients {
    pub a_hat: [Mat9; 3],
    pub d_hat: Mat9,
    pub b_hat: Vec9,
}

/// Evaluates the nonlinear coefficient matrices at a pointwise state; the
/// curl of `B` at that point is supplied by the caller. The convective `u_j`
/// entries sit on the diagonal of rows 5..8 only, as in the displayed system.
pub fn nonlinear_coefficients<E: EquationOfState + ?Sized>(
    v: &FullState,
    curl_b: [f64; 3],
    params: &PhysParams,
    eos: &E,
) -> Result<NonlinearCoefficients> {
    if !(v.rho > 0.0) {
        return Err(Error::NonPositiveState(format!("rho = {}", v.rho)));
    }
    if !(v.theta > 0.0) {
        return Err(Error::NonPositiveState(format!("theta = {}", v.theta)));
    }
    let (rho, theta) = (v.rho, v.theta);
    let cv = eos.e_theta(rho, theta);
    let p_theta = eos.p_theta(rho, theta);
    let alpha = eos.p_rho(rho, theta) / rho;
    let beta = p_theta / rho;
    let beta2 = 1.0 / (3.0 * rho);
    let gamma = 3.0 * rho * p_theta / (3.0 * rho * cv);
    let gamma2 = 4.0 / 3.0 * v.er;
    let mu = params.mu;
    let b = v.b;

    let mut a_hat = [Mat9::zeros(); 3];
    for (j, aj) in a_hat.iter_mut().enumerate() {
        let uj = IDX_U + j;
        aj[(IDX_R, uj)] = rho;
        aj[(uj, IDX_R)] = alpha;
        aj[(uj, IDX_T)] = beta;
        aj[(uj, IDX_ER)] = beta2;
        aj[(IDX_T, uj)] = gamma;
        aj[(IDX_ER, uj)] = gamma2;
        for i in 0..3 {
            for k in 0..3 {
                aj[(IDX_B + k, IDX_U + i)] = b[k] * delta(i, j) - b[j] * delta(k, i);
                aj[(IDX_U + i, IDX_B + k)] = (delta(i, j) * b[k] - delta(i, k) * b[j]) / (rho * mu);
            }
        }
        for d in IDX_ER..DIM {
            aj[(d, d)] = v.u[j];
        }
    }

    let mut d_hat = Mat9::zeros();
    d_hat[(IDX_T, IDX_T)] = params.kappa / (rho * cv);
    d_hat[(IDX_ER, IDX_ER)] = 1.0 / (3.0 * params.sigma_s);
    for k in 0..3 {
        d_hat[(IDX_B + k, IDX_B + k)] = params.lambda;
    }

    let exchange = params.a * theta.powi(4) - v.er;
    let curl2 = curl_b.iter().map(|c| c * c).sum::<f64>();
    let u2 = v.u.iter().map(|c| c * c).sum::<f64>();
    let mut b_hat = Vec9::zeros();
    for i in 0..3 {
        b_hat[IDX_U + i] = -params.nu * v.u[i] / rho;
    }
    b_hat[IDX_T] = -params.sigma_a / (rho * cv) * exchange
        + params.lambda / mu * curl2 / (rho * cv)
        + params.nu * u2 / (rho * cv);
    b_hat[IDX_ER] = params.sigma_a * exchange;

    Ok(NonlinearCoefficients { a_hat, d_hat, b_hat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_ideal_gas_eos, IdealGas};

    fn ones() -> SystemMatrices {
        SystemMatrices::from_model(&ModelConfig::all_ones()).unwrap()
    }

    /// Literal transcription of the displayed A1 (row-major).
    fn displayed_a1(c: &LinCoeffs, rho: f64, b: [f64; 3], mu: f64) -> Mat9 {
        let (b1, b2, b3) = (b[0], b[1], b[2]);
        #[rustfmt::skip]
        let rows = [
            0.0, rho, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            c.alpha_p, 0.0, 0.0, 0.0, c.beta_p, c.beta_pp, 0.0, b2 / mu, b3 / mu,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -b1 / mu, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -b1 / mu,
            0.0, c.gamma_p, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, c.gamma_pp, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, b2, -b1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, b3, 0.0, -b1, 0.0, 0.0, 0.0, 0.0, 0.0,
        ];
        Mat9::from_row_slice(&rows)
    }

    /// Literal transcription of the displayed A2.
    fn displayed_a2(c: &LinCoeffs, rho: f64, b: [f64; 3], mu: f64) -> Mat9 {
        let (b1, b2, b3) = (b[0], b[1], b[2]);
        #[rustfmt::skip]
        let rows = [
            0.0, 0.0, rho, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -b2 / mu, 0.0, 0.0,
            c.alpha_p, 0.0, 0.0, 0.0, c.beta_p, c.beta_pp, b1 / mu, 0.0, b3 / mu,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -b2 / mu,
            0.0, 0.0, c.gamma_p, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, c.gamma_pp, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, -b2, b1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, b3, -b2, 0.0, 0.0, 0.0, 0.0, 0.0,
        ];
        Mat9::from_row_slice(&rows)
    }

    /// Literal transcription of the displayed A3.
    fn displayed_a3(c: &LinCoeffs, rho: f64, b: [f64; 3], mu: f64) -> Mat9 {
        let (b1, b2, b3) = (b[0], b[1], b[2]);
        #[rustfmt::skip]
        let rows = [
            0.0, 0.0, 0.0, rho, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -b3 / mu, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -b3 / mu, 0.0,
            c.alpha_p, 0.0, 0.0, 0.0, c.beta_p, c.beta_pp, b1 / mu, b2 / mu, 0.0,
            0.0, 0.0, 0.0, c.gamma_p, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, c.gamma_pp, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, -b3, 0.0, b1, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, -b3, b2, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        ];
        Mat9::from_row_slice(&rows)
    }

    fn skewed_model() -> ModelConfig {
        let params = PhysParams::new(1.7, 0.6, 0.8, 1.3, 0.9, 1.1, 0.4).unwrap();
        ModelConfig {
            params,
            eos: IdealGas { r: 0.7, cv: 1.9 },
            equilibrium: Equilibrium::compatible(&params, 1.4, 0.8, [0.3, -1.2, 0.5]).unwrap(),
        }
    }

    #[test]
    fn flux_matrices_match_displays() {
        let m = skewed_model();
        let sys = SystemMatrices::from_model(&m).unwrap();
        let (c, rho, b, mu) = (&sys.coeffs, m.equilibrium.rho_bar, m.equilibrium.b_bar, m.params.mu);
        assert_eq!(sys.a[0], displayed_a1(c, rho, b, mu));
        assert_eq!(sys.a[1], displayed_a2(c, rho, b, mu));
        assert_eq!(sys.a[2], displayed_a3(c, rho, b, mu));
    }

    #[test]
    fn all_ones_entries() {
        let sys = ones();
        assert_eq!(sys.a[0][(0, 1)], 1.0);
        assert_eq!(sys.a[0][(1, 8)], 0.0);
        // oracle: explicit product of row 0 of A1 with A0[0][0]
        let a00 = sys.params.mu * sys.coeffs.alpha_p / sys.equilibrium.rho_bar;
        assert_eq!(a00 * sys.a[0][(0, 1)], sys.at[0][(0, 1)]);
        assert_eq!(sys.at[0][(1, 0)], 1.0);
        assert_eq!(sys.at[0][(0, 1)], 1.0);
    }

    #[test]
    fn zero_field_decouples_magnetic_block() {
        let params = PhysParams::all_ones();
        let mut m = ModelConfig::all_ones();
        m.equilibrium = Equilibrium::compatible(&params, 1.0, 1.0, [0.0; 3]).unwrap();
        let sys = SystemMatrices::from_model(&m).unwrap();
        for aj in &sys.a {
            for i in 0..DIM {
                for k in IDX_B..DIM {
                    assert_eq!(aj[(i, k)], 0.0);
                    assert_eq!(aj[(k, i)], 0.0);
                }
            }
        }
    }

    #[test]
    fn symmetrized_fluxes_are_symmetric() {
        let sys = SystemMatrices::from_model(&skewed_model()).unwrap();
        for m in &sys.at {
            assert!((m - m.transpose()).norm() <= 1e-13 * m.norm());
        }
        assert!(sys.a0_diag.iter().all(|d| *d > 0.0));
    }

    #[test]
    fn dissipation_diagonals() {
        let sys = SystemMatrices::from_model(&skewed_model()).unwrap();
        let (c, p) = (&sys.coeffs, &sys.params);
        for i in 0..4 {
            assert_eq!(sys.dt[(i, i)], 0.0);
        }
        assert!((sys.dt[(4, 4)] - p.mu * c.beta_p * c.delta_p / c.gamma_p).abs() < 1e-14);
        assert!((sys.dt[(5, 5)] - p.mu * c.beta_pp * c.delta_pp / c.gamma_pp).abs() < 1e-14);
        for k in 6..9 {
            assert_eq!(sys.dt[(k, k)], p.lambda);
        }
        for i in 1..4 {
            assert_eq!(sys.bt[(i, i)], p.mu * p.nu);
        }
    }

    #[test]
    fn fourier_symbol_cases() {
        let sys = ones();
        let s = fourier_symbol(&sys, [1.0, 0.0, 0.0]);
        assert_eq!(s.a_xi, sys.at[0]);
        let s0 = fourier_symbol(&sys, [0.0; 3]);
        assert_eq!(s0.e_xi, sys.bt.map(|x| Complex64::new(-x, 0.0)));
        let s2 = fourier_symbol(&sys, [0.0, 1.0, 0.0]);
        assert_eq!(s2.a_xi[(6, 1)], 0.0);
        assert_eq!(s2.a_xi[(6, 2)], 1.0);
    }

    #[test]
    fn symbol_matches_displayed_a_of_xi() {
        let m = skewed_model();
        let sys = SystemMatrices::from_model(&m).unwrap();
        let xi = [0.3, -0.7, 1.1];
        let a = sys.a_symbol(xi);
        let (c, mu) = (&sys.coeffs, m.params.mu);
        let [b1, b2, b3] = m.equilibrium.b_bar;
        let [x1, x2, x3] = xi;
        let tol = 1e-14;
        assert!((a[(0, 2)] - mu * c.alpha_p * x2).abs() < tol);
        assert!((a[(1, 6)] - (-b2 * x2 - b3 * x3)).abs() < tol);
        assert!((a[(2, 7)] - (-b1 * x1 - b3 * x3)).abs() < tol);
        assert!((a[(3, 8)] - (-b1 * x1 - b2 * x2)).abs() < tol);
        assert!((a[(7, 1)] - b2 * x1).abs() < tol);
        assert!((a[(8, 2)] - b3 * x2).abs() < tol);
        assert!((a[(5, 3)] - mu * c.beta_pp * x3).abs() < tol);
    }

    #[test]
    fn audit_all_ones_is_clean() {
        let report = consistency_audit(&ones());
        assert_eq!(report.bt.asymmetry_defect, 0.0);
        assert!(report.bt_symmetric());
        // 2x2 block [[4, -1], [-1, 1/4]] has eigenvalues 0 and 17/4
        let block_min = {
            let (a, b, d) = (4.0, -1.0, 0.25);
            let tr: f64 = a + d;
            let det: f64 = a * d - b * b;
            0.5 * (tr - (tr * tr - 4.0 * det).sqrt())
        };
        assert!(block_min.abs() < 1e-15);
        assert!(report.bt.sym_min_eigenvalue.abs() < 1e-12);
        assert!(report.bt_positive());
    }

    #[test]
    fn audit_detects_asymmetry_when_rho_differs_from_theta() {
        let params = PhysParams::all_ones();
        let mut m = ModelConfig::all_ones();
        m.equilibrium = Equilibrium::compatible(&params, 1.0, 2.0, [1.0, 0.0, 0.0]).unwrap();
        let sys = SystemMatrices::from_model(&m).unwrap();
        assert!((sys.bt[(4, 5)] + 1.0).abs() < 1e-15);
        assert!((sys.bt[(5, 4)] + 0.5).abs() < 1e-15);
        let report = consistency_audit(&sys);
        assert!((report.bt.asymmetry_defect - 0.5).abs() < 1e-15);
        assert!(!report.bt_symmetric());
    }

    #[test]
    fn nonlinear_at_equilibrium_reduces_to_linear_structure() {
        let m = skewed_model();
        let sys = SystemMatrices::from_model(&m).unwrap();
        let v = FullState::equilibrium(&m.equilibrium);
        let nl = nonlinear_coefficients(&v, [0.0; 3], &m.params, &m.eos).unwrap();
        assert!(nl.b_hat.norm() < 1e-15);
        for j in 0..3 {
            let mut a = nl.a_hat[j];
            // Lorentz entries carry an extra 1/rho
            for i in 0..3 {
                for k in 0..3 {
                    a[(IDX_U + i, IDX_B + k)] *= m.equilibrium.rho_bar;
                }
            }
            assert!((a - sys.a[j]).norm() < 1e-14, "j = {j}");
        }
        assert_eq!(nl.d_hat, sys.d);
    }

    #[test]
    fn nonlinear_convective_entries() {
        let params = PhysParams::all_ones();
        let eos = make_ideal_gas_eos(1.0, 1.0).unwrap();
        let v = FullState {
            rho: 2.0,
            u: [1.0, 0.0, 0.0],
            theta: 1.0,
            er: 1.0,
            b: [1.0, 0.0, 0.0],
        };
        let nl = nonlinear_coefficients(&v, [0.0; 3], &params, &eos).unwrap();
        assert_eq!(nl.a_hat[0][(6, 6)], 1.0);
        assert_eq!(nl.a_hat[0][(0, 1)], 2.0);
        assert_eq!(nl.a_hat[1][(6, 6)], 0.0);
    }

    #[test]
    fn nonlinear_source_column() {
        let params = PhysParams::all_ones();
        let eos = make_ideal_gas_eos(1.0, 1.0).unwrap();
        let v = FullState {
            rho: 1.0,
            u: [0.0; 3],
            theta: 1.0,
            er: 2.0,
            b: [0.0; 3],
        };
        let nl = nonlinear_coefficients(&v, [0.0; 3], &params, &eos).unwrap();
        assert_eq!(nl.b_hat[IDX_T], 1.0);
        assert_eq!(nl.b_hat[IDX_ER], -1.0);
        let bad = FullState { rho: 0.0, ..v };
        assert!(matches!(
            nonlinear_coefficients(&bad, [0.0; 3], &params, &eos),
            Err(Error::NonPositiveState(_))
        ));
    }
}
