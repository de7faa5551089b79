//! Helmholtz functionals, coercivity constants, relative entropy and the
//! entropy production terms.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{EquationOfState, Equilibrium, PhysParams};
use crate::propagator::{spectral_curl, spectral_gradient, Field};
use crate::symbols::{IDX_B, IDX_ER, IDX_R, IDX_T, IDX_U};

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveState(format!("{name} = {x}")))
    }
}

/// `H(rho, theta) = rho (e - theta_bar s)`.
pub fn helmholtz_matter<E: EquationOfState + ?Sized>(eos: &E, rho: f64, theta: f64, theta_bar: f64) -> f64 {
    rho * (eos.energy(rho, theta) - theta_bar * eos.entropy(rho, theta))
}

/// `d H / d rho` at `(rho, theta)`: closed form when available, else central
/// differences with `h = 1e-6 rho`.
pub fn helmholtz_matter_drho<E: EquationOfState + ?Sized>(eos: &E, rho: f64, theta: f64, theta_bar: f64) -> f64 {
    eos.helmholtz_drho(rho, theta, theta_bar).unwrap_or_else(|| {
        let h = 1e-6 * rho;
        (helmholtz_matter(eos, rho + h, theta, theta_bar) - helmholtz_matter(eos, rho - h, theta, theta_bar)) / (2.0 * h)
    })
}

/// `H(rho, theta) - (rho - rho_bar) d_rho H(rho_bar, theta_bar) - H(rho_bar, theta_bar)`.
pub fn relative_helmholtz_matter<E: EquationOfState + ?Sized>(
    rho: f64,
    theta: f64,
    eos: &E,
    eq: &Equilibrium,
) -> Result<f64> {
    positive("rho", rho)?;
    positive("theta", theta)?;
    let (rb, tb) = (eq.rho_bar, eq.theta_bar);
    let slope = helmholtz_matter_drho(eos, rb, tb, tb);
    Ok(helmholtz_matter(eos, rho, theta, tb) - (rho - rb) * slope - helmholtz_matter(eos, rb, tb, tb))
}

/// `E_r - theta_bar S_r` with `E_r = a T^4`, `S_r = 4/3 a T^3`.
pub fn helmholtz_radiation(tr: f64, a: f64, theta_bar: f64) -> f64 {
    let er = a * tr.powi(4);
    let sr = 4.0 / 3.0 * a * tr.powi(3);
    er - theta_bar * sr
}

/// `a T^4 - theta_bar (4/3) a T^3 + (a/3) theta_bar^4`, evaluated in the
/// factored form `a (T - theta_bar)^2 (T^2 + 2 theta_bar T / 3 + theta_bar^2 / 3)`.
pub fn relative_helmholtz_radiation(tr: f64, a: f64, theta_bar: f64) -> Result<f64> {
    positive("T_r", tr)?;
    let d = tr - theta_bar;
    Ok(a * d * d * (tr * tr + 2.0 * theta_bar * tr / 3.0 + theta_bar * theta_bar / 3.0))
}

/// Same quantity as a difference of Helmholtz values around `T_r = theta_bar`.
pub fn relative_helmholtz_radiation_diff(tr: f64, a: f64, theta_bar: f64) -> Result<f64> {
    positive("T_r", tr)?;
    Ok(helmholtz_radiation(tr, a, theta_bar) - helmholtz_radiation(theta_bar, a, theta_bar))
}

/// Second-order limits of `relative / distance^2` at the anchors: the
/// matter Hessian is `diag(p_rho / rho_bar, rho_bar C_v / theta_bar)`, the
/// radiation one `12 a theta^2 - 8 a theta theta_bar` at `theta = theta_bar`.
pub fn matter_anchor_limits<E: EquationOfState + ?Sized>(eos: &E, eq: &Equilibrium) -> (f64, f64) {
    let (rb, tb) = (eq.rho_bar, eq.theta_bar);
    let h1 = eos.p_rho(rb, tb) / rb;
    let h2 = rb * eos.e_theta(rb, tb) / tb;
    (0.5 * h1.min(h2), 0.5 * h1.max(h2))
}

pub fn radiation_anchor_limit(a: f64, theta_bar: f64) -> f64 {
    0.5 * (12.0 * a * theta_bar * theta_bar - 8.0 * a * theta_bar * theta_bar)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoercivityConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub grid_n: usize,
    pub o1: String,
    pub o2: String,
}

/// Midpoints of `grid_n` equal cells of `(lo, hi)`.
pub fn inset_grid(lo: f64, hi: f64, grid_n: usize) -> Vec<f64> {
    let h = (hi - lo) / grid_n as f64;
    (0..grid_n).map(|i| lo + (i as f64 + 0.5) * h).collect()
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn matter_ratios<E: EquationOfState + ?Sized>(eos: &E, eq: &Equilibrium, grid_n: usize) -> Result<Vec<f64>> {
    let rhos = inset_grid(0.5 * eq.rho_bar, 2.0 * eq.rho_bar, grid_n);
    let thetas = inset_grid(0.5 * eq.theta_bar, 2.0 * eq.theta_bar, grid_n);
    let rows = rhos
        .par_iter()
        .map(|&r| {
            thetas
                .iter()
                .map(|&t| {
                    let d2 = (r - eq.rho_bar).powi(2) + (t - eq.theta_bar).powi(2);
                    Ok(relative_helmholtz_matter(r, t, eos, eq)? / d2)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

fn radiation_ratios(a: f64, theta_bar: f64, grid_n: usize) -> Result<Vec<f64>> {
    inset_grid(0.5 * theta_bar, 2.0 * theta_bar, grid_n)
        .into_iter()
        .map(|x| Ok(relative_helmholtz_radiation(x, a, theta_bar)? / (x - theta_bar).powi(2)))
        .collect()
}

/// Grid certificates for the quadratic sandwich bounds on
/// `O1 = (rho_bar/2, 2 rho_bar) x (theta_bar/2, 2 theta_bar)` and
/// `O2 = (theta_bar/2, 2 theta_bar)`, including the anchor limits.
pub fn coercivity_constants<E: EquationOfState + ?Sized>(
    eos: &E,
    eq: &Equilibrium,
    a: f64,
    grid_n: usize,
) -> Result<CoercivityConstants> {
    if grid_n < 16 {
        return Err(Error::InvalidParameter {
            name: "grid_n",
            reason: format!("need at least 16 points per axis, got {grid_n}"),
        });
    }
    let (g1, g2) = min_max(matter_ratios(eos, eq, grid_n)?.into_iter());
    let (m1, m2) = matter_anchor_limits(eos, eq);
    let (c1, c2) = (g1.min(m1), g2.max(m2));
    let (g3, g4) = min_max(radiation_ratios(a, eq.theta_bar, grid_n)?.into_iter());
    let r = radiation_anchor_limit(a, eq.theta_bar);
    let (c3, c4) = (g3.min(r), g4.max(r));
    if !(c1 > 0.0) {
        return Err(Error::NonCoercive { domain: "O1", infimum: c1 });
    }
    if !(c3 > 0.0) {
        return Err(Error::NonCoercive { domain: "O2", infimum: c3 });
    }
    Ok(CoercivityConstants {
        c1,
        c2,
        c3,
        c4,
        grid_n,
        o1: format!(
            "({}, {}) x ({}, {})",
            0.5 * eq.rho_bar,
            2.0 * eq.rho_bar,
            0.5 * eq.theta_bar,
            2.0 * eq.theta_bar
        ),
        o2: format!("({}, {})", 0.5 * eq.theta_bar, 2.0 * eq.theta_bar),
    })
}

/// Number of grid points violating either sandwich inequality; the bounds
/// are compared with a four-ulp allowance for the final multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SandwichReport {
    pub matter_points: usize,
    pub matter_violations: usize,
    pub radiation_points: usize,
    pub radiation_violations: usize,
}

pub fn sandwich_check<E: EquationOfState + ?Sized>(
    eos: &E,
    eq: &Equilibrium,
    a: f64,
    c: &CoercivityConstants,
) -> Result<SandwichReport> {
    let slack = 4.0 * f64::EPSILON;
    let within = |lo: f64, hi: f64, f: f64, d2: f64| lo * d2 <= f * (1.0 + slack) && f <= hi * d2 * (1.0 + slack);
    let rhos = inset_grid(0.5 * eq.rho_bar, 2.0 * eq.rho_bar, c.grid_n);
    let thetas = inset_grid(0.5 * eq.theta_bar, 2.0 * eq.theta_bar, c.grid_n);
    let mut matter_violations = 0;
    for &r in &rhos {
        for &t in &thetas {
            let d2 = (r - eq.rho_bar).powi(2) + (t - eq.theta_bar).powi(2);
            if !within(c.c1, c.c2, relative_helmholtz_matter(r, t, eos, eq)?, d2) {
                matter_violations += 1;
            }
        }
    }
    let xs = inset_grid(0.5 * eq.theta_bar, 2.0 * eq.theta_bar, c.grid_n);
    let mut radiation_violations = 0;
    for &x in &xs {
        let d2 = (x - eq.theta_bar).powi(2);
        if !within(c.c3, c.c4, relative_helmholtz_radiation(x, a, eq.theta_bar)?, d2) {
            radiation_violations += 1;
        }
    }
    Ok(SandwichReport {
        matter_points: rhos.len() * thetas.len(),
        matter_violations,
        radiation_points: xs.len(),
        radiation_violations,
    })
}

/// Sum with a fixed binary splitting, independent of thread count.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2..=8 => v.iter().sum(),
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// Full state at a grid point of a perturbation field.
#[derive(Debug, Clone, Copy)]
struct PointState {
    rho: f64,
    u: [f64; 3],
    theta: f64,
    er: f64,
    tr: f64,
    b: [f64; 3],
}

fn point_state(v: &[f64; 9], eq: &Equilibrium, a: f64) -> Result<PointState> {
    let rho = eq.rho_bar + v[IDX_R];
    let theta = eq.theta_bar + v[IDX_T];
    let er = eq.er_bar + v[IDX_ER];
    positive("rho", rho)?;
    positive("theta", theta)?;
    positive("E_r", er)?;
    Ok(PointState {
        rho,
        u: [v[IDX_U], v[IDX_U + 1], v[IDX_U + 2]],
        theta,
        er,
        tr: (er / a).powf(0.25),
        b: [eq.b_bar[0] + v[IDX_B], eq.b_bar[1] + v[IDX_B + 1], eq.b_bar[2] + v[IDX_B + 2]],
    })
}

fn states(field: &Field, eq: &Equilibrium, a: f64) -> Result<Vec<PointState>> {
    field.data.iter().map(|v| point_state(v, eq, a)).collect()
}

fn norm2(v: [f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

/// Box integral of `eta` for the state `V_bar + U`; with `extended` the
/// kinetic `rho |u|^2 / 2` and magnetic `|B|^2 / (2 mu)` densities are added.
pub fn relative_entropy_eta<E: EquationOfState + ?Sized>(
    field: &Field,
    eos: &E,
    eq: &Equilibrium,
    params: &PhysParams,
    extended: bool,
) -> Result<f64> {
    let pts = states(field, eq, params.a)?;
    let dens = pts
        .par_iter()
        .map(|p| {
            let mut d = relative_helmholtz_matter(p.rho, p.theta, eos, eq)?
                + relative_helmholtz_radiation(p.tr, params.a, eq.theta_bar)?;
            if extended {
                d += 0.5 * p.rho * norm2(p.u) + norm2(p.b) / (2.0 * params.mu);
            }
            Ok(d)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&dens) * field.cell_volume())
}

/// Spectral derivatives needed by the production terms.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub theta: [Vec<f64>; 3],
    pub tr: [Vec<f64>; 3],
    pub er: [Vec<f64>; 3],
    pub curl_b: [Vec<f64>; 3],
}

impl Gradients {
    pub fn spectral(field: &Field, eq: &Equilibrium, a: f64) -> Result<Self> {
        let pts = states(field, eq, a)?;
        let (n, l) = (field.n, field.l);
        let theta: Vec<f64> = pts.iter().map(|p| p.theta).collect();
        let tr: Vec<f64> = pts.iter().map(|p| p.tr).collect();
        let er: Vec<f64> = pts.iter().map(|p| p.er).collect();
        let b: Vec<Vec<f64>> = (0..3).map(|k| pts.iter().map(|p| p.b[k]).collect()).collect();
        Ok(Self {
            theta: spectral_gradient(&theta, n, l),
            tr: spectral_gradient(&tr, n, l),
            er: spectral_gradient(&er, n, l),
            curl_b: spectral_curl([&b[0], &b[1], &b[2]], n, l),
        })
    }
}

/// Pointwise production densities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProductionDensity {
    pub heat: f64,
    pub radiative: f64,
    pub radiative_er_form: f64,
    pub relaxation: f64,
    pub ohmic: f64,
    pub damping: f64,
}

/// `a sigma_a (theta - T_r)^2 (theta + T_r)(theta^2 + T_r^2) / (theta T_r)`.
pub fn relaxation_density(theta: f64, tr: f64, a: f64, sigma_a: f64) -> f64 {
    a * sigma_a * (theta - tr).powi(2) * (theta + tr) * (theta * theta + tr * tr) / (theta * tr)
}

#[allow(clippy::too_many_arguments)]
pub fn production_density(
    theta: f64,
    tr: f64,
    u: [f64; 3],
    grad_theta: [f64; 3],
    grad_tr: [f64; 3],
    grad_er: [f64; 3],
    curl_b: [f64; 3],
    params: &PhysParams,
) -> ProductionDensity {
    let rad = 4.0 * params.a / (3.0 * params.sigma_s) * tr;
    ProductionDensity {
        heat: params.kappa * norm2(grad_theta) / (theta * theta),
        radiative: rad * norm2(grad_tr),
        radiative_er_form: rad * norm2(grad_er),
        relaxation: relaxation_density(theta, tr, params.a, params.sigma_a),
        ohmic: norm2(curl_b) / (params.sigma * params.mu * params.mu * theta),
        damping: params.nu * norm2(u) / theta,
    }
}

/// Box integrals of the production terms (midpoint rule).
pub type ProductionBreakdown = ProductionDensity;

impl ProductionDensity {
    pub fn as_array(&self) -> [(&'static str, f64); 6] {
        [
            ("heat", self.heat),
            ("radiative", self.radiative),
            ("radiative_er_form", self.radiative_er_form),
            ("relaxation", self.relaxation),
            ("ohmic", self.ohmic),
            ("damping", self.damping),
        ]
    }

    /// The five terms entering the balance (radiative in `T_r`-gradient form).
    pub fn five(&self) -> [f64; 5] {
        [self.heat, self.radiative, self.relaxation, self.ohmic, self.damping]
    }
}

pub fn entropy_production(
    field: &Field,
    grads: &Gradients,
    eq: &Equilibrium,
    params: &PhysParams,
) -> Result<ProductionBreakdown> {
    let pts = states(field, eq, params.a)?;
    let at = |g: &[Vec<f64>; 3], i: usize| [g[0][i], g[1][i], g[2][i]];
    let dens: Vec<ProductionDensity> = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let p = &pts[i];
            production_density(
                p.theta,
                p.tr,
                p.u,
                at(&grads.theta, i),
                at(&grads.tr, i),
                at(&grads.er, i),
                at(&grads.curl_b, i),
                params,
            )
        })
        .collect();
    let dv = field.cell_volume();
    let total = |f: fn(&ProductionDensity) -> f64| pairwise_sum(&dens.iter().map(f).collect::<Vec<_>>()) * dv;
    Ok(ProductionDensity {
        heat: total(|d| d.heat),
        radiative: total(|d| d.radiative),
        radiative_er_form: total(|d| d.radiative_er_form),
        relaxation: total(|d| d.relaxation),
        ohmic: total(|d| d.ohmic),
        damping: total(|d| d.damping),
    })
}

/// Fourth-order central difference.
fn d5(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Relative defects of `theta s_theta = e_theta` and the Maxwell relation
/// `e_rho = (p - theta p_theta) / rho^2`, by finite differences.
pub fn gibbs_defects<E: EquationOfState + ?Sized>(eos: &E, rho: f64, theta: f64) -> (f64, f64) {
    let s_theta = d5(|t| eos.entropy(rho, t), theta, 1e-3 * theta);
    let e_theta = d5(|t| eos.energy(rho, t), theta, 1e-3 * theta);
    let e_rho = d5(|r| eos.energy(r, theta), rho, 1e-3 * rho);
    let p_theta = d5(|t| eos.pressure(rho, t), theta, 1e-3 * theta);
    let maxwell = (eos.pressure(rho, theta) - theta * p_theta) / (rho * rho);
    let gibbs = (theta * s_theta - e_theta).abs() / e_theta.abs().max(1.0);
    let maxwell_defect = (e_rho - maxwell).abs() / maxwell.abs().max(eos.pressure(rho, theta) / (rho * rho)).max(1.0);
    (gibbs, maxwell_defect)
}
