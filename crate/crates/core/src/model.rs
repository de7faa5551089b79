//! Physical parameters, equation of state, equilibrium state and the
//! linearization coefficients derived from them.
//!
//! Everything here is dimensionless. The equation of state is abstract
//! ([`EquationOfState`]); the ideal gas `p = R rho theta`, `e = C_v theta`
//! is the closure used by default.

use std::fmt;

use crate::error::{Error, Result};

/// Transport and material constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    /// Magnetic permeability.
    pub mu: f64,
    /// Electrical conductivity.
    pub sigma: f64,
    /// Absorption coefficient.
    pub sigma_a: f64,
    /// Scattering coefficient.
    pub sigma_s: f64,
    /// Planck coefficient, `E_r = a T_r^4`.
    pub a: f64,
    /// Heat conductivity.
    pub kappa: f64,
    /// Darcy damping coefficient. Zero is admissible.
    pub nu: f64,
    /// Magnetic diffusivity `1 / (mu sigma)`, derived.
    pub lambda: f64,
}

impl PhysParams {
    pub fn new(
        mu: f64,
        sigma: f64,
        sigma_a: f64,
        sigma_s: f64,
        a: f64,
        kappa: f64,
        nu: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("mu", mu),
            ("sigma", sigma),
            ("sigma_a", sigma_a),
            ("sigma_s", sigma_s),
            ("a", a),
            ("kappa", kappa),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "nu",
                reason: format!("must be finite and >= 0, got {nu}"),
            });
        }
        Ok(Self {
            mu,
            sigma,
            sigma_a,
            sigma_s,
            a,
            kappa,
            nu,
            lambda: 1.0 / (mu * sigma),
        })
    }

    /// Every constant equal to one, including `nu`.
    pub fn all_ones() -> Self {
        Self::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).expect("unit parameters are admissible")
    }

    /// Same parameters with a different damping coefficient.
    pub fn with_nu(self, nu: f64) -> Result<Self> {
        Self::new(
            self.mu,
            self.sigma,
            self.sigma_a,
            self.sigma_s,
            self.a,
            self.kappa,
            nu,
        )
    }
}

/// Pressure/energy closure with exact partial derivatives.
///
/// Implementations must be Gibbs-consistent: `theta ds = de + p d(1/rho)`.
pub trait EquationOfState: fmt::Debug + Send + Sync {
    fn pressure(&self, rho: f64, theta: f64) -> f64;
    fn energy(&self, rho: f64, theta: f64) -> f64;
    /// Specific entropy.
    fn entropy(&self, rho: f64, theta: f64) -> f64;
    fn p_rho(&self, rho: f64, theta: f64) -> f64;
    fn p_theta(&self, rho: f64, theta: f64) -> f64;
    /// Specific heat `C_v`.
    fn e_theta(&self, rho: f64, theta: f64) -> f64;

    /// `d e / d rho`, from the Maxwell relation unless overridden.
    fn e_rho(&self, rho: f64, theta: f64) -> f64 {
        (self.pressure(rho, theta) - theta * self.p_theta(rho, theta)) / (rho * rho)
    }

    /// Closed form of `d/d rho [rho (e - theta_ref s)]`, if the closure has one.
    fn helmholtz_drho(&self, _rho: f64, _theta: f64, _theta_ref: f64) -> Option<f64> {
        None
    }
}

/// `p = R rho theta`, `e = C_v theta`, `s = C_v ln theta - R ln rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealGas {
    pub r: f64,
    pub cv: f64,
}

pub fn make_ideal_gas_eos(r: f64, cv: f64) -> Result<IdealGas> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter {
            name: "R",
            reason: format!("must be finite and > 0, got {r}"),
        });
    }
    if !(cv.is_finite() && cv > 0.0) {
        return Err(Error::InvalidParameter {
            name: "C_v",
            reason: format!("must be finite and > 0, got {cv}"),
        });
    }
    Ok(IdealGas { r, cv })
}

impl EquationOfState for IdealGas {
    fn pressure(&self, rho: f64, theta: f64) -> f64 {
        self.r * rho * theta
    }
    fn energy(&self, _rho: f64, theta: f64) -> f64 {
        self.cv * theta
    }
    fn entropy(&self, rho: f64, theta: f64) -> f64 {
        self.cv * theta.ln() - self.r * rho.ln()
    }
    fn p_rho(&self, _rho: f64, theta: f64) -> f64 {
        self.r * theta
    }
    fn p_theta(&self, rho: f64, _theta: f64) -> f64 {
        self.r * rho
    }
    fn e_theta(&self, _rho: f64, _theta: f64) -> f64 {
        self.cv
    }
    fn e_rho(&self, _rho: f64, _theta: f64) -> f64 {
        0.0
    }
    fn helmholtz_drho(&self, rho: f64, theta: f64, theta_ref: f64) -> Option<f64> {
        // e - theta_ref s + rho (e_rho - theta_ref s_rho), with s_rho = -R / rho
        Some(self.energy(rho, theta) - theta_ref * self.entropy(rho, theta) + theta_ref * self.r)
    }
}

/// Constant background state `(rho_bar, 0, theta_bar, Er_bar, B_bar)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub rho_bar: f64,
    pub theta_bar: f64,
    pub er_bar: f64,
    pub b_bar: [f64; 3],
}

impl Equilibrium {
    /// Builds an equilibrium with `Er_bar = a theta_bar^4`.
    pub fn compatible(params: &PhysParams, rho_bar: f64, theta_bar: f64, b_bar: [f64; 3]) -> Result<Self> {
        validate_equilibrium(
            params,
            Self {
                rho_bar,
                theta_bar,
                er_bar: params.a * theta_bar.powi(4),
                b_bar,
            },
        )
    }

    pub fn b_dot(&self, v: [f64; 3]) -> f64 {
        self.b_bar[0] * v[0] + self.b_bar[1] * v[1] + self.b_bar[2] * v[2]
    }
}

pub fn validate_equilibrium(params: &PhysParams, eq: Equilibrium) -> Result<Equilibrium> {
    if !(eq.rho_bar > 0.0 && eq.rho_bar.is_finite()) {
        return Err(Error::NonPositiveState(format!("rho_bar = {}", eq.rho_bar)));
    }
    if !(eq.theta_bar > 0.0 && eq.theta_bar.is_finite()) {
        return Err(Error::NonPositiveState(format!("theta_bar = {}", eq.theta_bar)));
    }
    let expected = params.a * eq.theta_bar.powi(4);
    if !((eq.er_bar - expected).abs() <= 1e-12 * expected) {
        return Err(Error::CompatibilityViolation {
            er_bar: eq.er_bar,
            expected,
        });
    }
    if eq.b_bar.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "B_bar",
            reason: format!("{:?} is not finite", eq.b_bar),
        });
    }
    Ok(eq)
}

/// Checks the monotonicity assumptions `p_rho > 0`, `e_theta > 0` on
/// `[rho_bar/2, 2 rho_bar] x [theta_bar/2, 2 theta_bar]` and the supplied
/// derivatives against central differences (relative tolerance 1e-6).
pub fn validate_eos<E: EquationOfState + ?Sized>(eos: &E, eq: &Equilibrium, grid: usize) -> Result<()> {
    let grid = grid.max(2);
    let fd_tol = 1e-6;
    for i in 0..grid {
        for j in 0..grid {
            let rho = eq.rho_bar * (0.5 + 1.5 * i as f64 / (grid - 1) as f64);
            let theta = eq.theta_bar * (0.5 + 1.5 * j as f64 / (grid - 1) as f64);
            let p_rho = eos.p_rho(rho, theta);
            let e_theta = eos.e_theta(rho, theta);
            if !(p_rho > 0.0) {
                return Err(Error::EosViolation(format!("p_rho({rho}, {theta}) = {p_rho}")));
            }
            if !(e_theta > 0.0) {
                return Err(Error::EosViolation(format!("e_theta({rho}, {theta}) = {e_theta}")));
            }
            let hr = 1e-5 * rho;
            let ht = 1e-5 * theta;
            let checks = [
                (
                    "p_rho",
                    p_rho,
                    (eos.pressure(rho + hr, theta) - eos.pressure(rho - hr, theta)) / (2.0 * hr),
                ),
                (
                    "p_theta",
                    eos.p_theta(rho, theta),
                    (eos.pressure(rho, theta + ht) - eos.pressure(rho, theta - ht)) / (2.0 * ht),
                ),
                (
                    "e_theta",
                    e_theta,
                    (eos.energy(rho, theta + ht) - eos.energy(rho, theta - ht)) / (2.0 * ht),
                ),
            ];
            for (name, exact, fd) in checks {
                let scale = exact.abs().max(fd.abs()).max(f64::MIN_POSITIVE);
                if (exact - fd).abs() > fd_tol * scale {
                    return Err(Error::EosViolation(format!(
                        "{name}({rho}, {theta}) = {exact} but central difference gives {fd}"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Coefficients of the linearized system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinCoeffs {
    pub alpha_p: f64,
    pub beta_p: f64,
    pub beta_pp: f64,
    pub gamma_p: f64,
    pub gamma_pp: f64,
    pub delta_p: f64,
    pub delta_pp: f64,
    pub zeta: f64,
    pub eta: f64,
    pub pi: f64,
}

impl LinCoeffs {
    pub fn all_positive(&self) -> bool {
        self.as_array().iter().all(|(_, v)| *v > 0.0)
    }

    pub fn as_array(&self) -> [(&'static str, f64); 10] {
        [
            ("alpha_p", self.alpha_p),
            ("beta_p", self.beta_p),
            ("beta_pp", self.beta_pp),
            ("gamma_p", self.gamma_p),
            ("gamma_pp", self.gamma_pp),
            ("delta_p", self.delta_p),
            ("delta_pp", self.delta_pp),
            ("zeta", self.zeta),
            ("eta", self.eta),
            ("pi", self.pi),
        ]
    }
}

pub fn derive_coefficients<E: EquationOfState + ?Sized>(
    params: &PhysParams,
    eos: &E,
    eq: &Equilibrium,
) -> Result<LinCoeffs> {
    let (rho, theta) = (eq.rho_bar, eq.theta_bar);
    let p_rho = eos.p_rho(rho, theta);
    let p_theta = eos.p_theta(rho, theta);
    let cv = eos.e_theta(rho, theta);
    for (name, v) in [("p_rho", p_rho), ("p_theta", p_theta), ("e_theta", cv)] {
        if !v.is_finite() {
            return Err(Error::EosViolation(format!("{name} at equilibrium is {v}")));
        }
    }
    if cv == 0.0 {
        return Err(Error::EosViolation("C_v vanishes at equilibrium".into()));
    }
    let theta3 = theta.powi(3);
    Ok(LinCoeffs {
        alpha_p: p_rho / rho,
        beta_p: p_theta / rho,
        beta_pp: 1.0 / (3.0 * rho),
        gamma_p: p_theta / cv,
        gamma_pp: 4.0 / 3.0 * eq.er_bar,
        delta_p: params.kappa / (rho * cv),
        delta_pp: 1.0 / (3.0 * params.sigma_s),
        zeta: 4.0 * params.a * params.sigma_a * theta3 / (rho * cv),
        eta: params.sigma_a / (rho * cv),
        pi: 4.0 * params.a * params.sigma_a * theta3,
    })
}
