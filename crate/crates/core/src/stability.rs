//! Shizuta-Kawashima and Kalman rank checks, spectral decay maps and a
//! numerical search for compensating matrices.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    complex_eigen, generalized_symmetric_eigen, min_principal_angle, null_space, numerical_rank,
    orthonormalize, sym_min_eigenvalue, Mat9, Vec9, DIM,
};
use crate::sphere;
use crate::symbols::{SystemMatrices, IDX_U};

pub const ANGLE_TOL: f64 = 1e-8;
pub const CLUSTER_TOL: f64 = 1e-8;
pub const KERNEL_TOL: f64 = 1e-10;
pub const KALMAN_TOL: f64 = 1e-10;
/// Directions added on the great circle orthogonal to `B_bar` when `nu = 0`.
pub const ADVERSARIAL_DIRS: usize = 16;
/// Rotation of the verification lattice relative to the training lattice.
pub const TEST_OFFSET: f64 = 0.5;

/// Outcome of the eigenspace/kernel intersection test at one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SKReport {
    pub xi: [f64; 3],
    pub holds: bool,
    pub witness: Option<(f64, Vec9)>,
    pub min_angle: f64,
}

fn check_unit(xi: [f64; 3]) -> Result<()> {
    let n = sphere::norm(xi);
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter {
            name: "xi",
            reason: format!("expected a unit vector, |xi| = {n}"),
        });
    }
    Ok(())
}

fn columns(m: &Mat9, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(DIM, idx.len(), |r, c| m[(r, idx[c])])
}

/// Eigenvalue groups of `A(xi) X = lambda A0 X`, ascending, with eigenvector columns.
pub fn eigenspaces(sys: &SystemMatrices, xi: [f64; 3]) -> Result<Vec<(f64, DMatrix<f64>)>> {
    let a = sys.a_symbol(xi);
    let (vals, vecs) = generalized_symmetric_eigen(&a, &sys.a0_diag)?;
    let radius = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = CLUSTER_TOL * radius.max(f64::MIN_POSITIVE);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..DIM {
        match groups.last_mut() {
            Some(g) if vals[i] - vals[*g.last().unwrap()] <= tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    Ok(groups
        .into_iter()
        .map(|g| {
            let mean = g.iter().map(|&i| vals[i]).sum::<f64>() / g.len() as f64;
            (mean, columns(&vecs, &g))
        })
        .collect())
}

pub fn sk_check(sys: &SystemMatrices, xi: [f64; 3]) -> Result<SKReport> {
    check_unit(xi)?;
    let b = sys.b_symbol(xi);
    let kernel = null_space(&b, KERNEL_TOL);
    let mut best = (std::f64::consts::FRAC_PI_2, 0.0);
    for (lambda, vecs) in eigenspaces(sys, xi)? {
        let q = orthonormalize(&vecs);
        let (angle, _) = min_principal_angle(&q, &kernel);
        if angle < best.0 {
            best = (angle, lambda);
        }
    }
    let holds = best.0 > ANGLE_TOL;
    let witness = (!holds).then(|| (best.1, intersection_vector(sys, xi, best.1)));
    Ok(SKReport {
        xi,
        holds,
        witness,
        min_angle: best.0,
    })
}

/// Unit vector minimizing `|(A(xi) - lambda A0) X|^2 + |B(xi) X|^2`.
fn intersection_vector(sys: &SystemMatrices, xi: [f64; 3], lambda: f64) -> Vec9 {
    let a = sys.a_symbol(xi) - sys.a0 * lambda;
    let b = sys.b_symbol(xi);
    let stacked = DMatrix::from_fn(2 * DIM, DIM, |r, c| if r < DIM { a[(r, c)] } else { b[(r - DIM, c)] });
    let svd = stacked.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty");
    let mut x = Vec9::from_fn(|r, _| v_t[(k, r)]);
    // sign convention: largest entry positive
    let imax = x.iamax();
    if x[imax] < 0.0 {
        x = -x;
    }
    x
}

/// Aggregate of `sk_check` over a direction sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub checks: Vec<SKReport>,
    pub holds_everywhere: bool,
    pub worst_min_angle: f64,
}

impl SweepReport {
    pub fn failures(&self) -> impl Iterator<Item = &SKReport> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

/// Fibonacci lattice, the six axes and, for `nu = 0`, directions orthogonal to `B_bar`.
pub fn sweep_directions(sys: &SystemMatrices, n_dirs: usize) -> Vec<[f64; 3]> {
    let mut dirs = sphere::fibonacci(n_dirs, 0.0);
    dirs.extend(sphere::axes());
    if sys.params.nu == 0.0 {
        dirs.extend(sphere::great_circle(sys.equilibrium.b_bar, ADVERSARIAL_DIRS));
    }
    dirs
}

pub fn sk_sweep(sys: &SystemMatrices, n_dirs: usize) -> Result<SweepReport> {
    if n_dirs == 0 {
        return Err(Error::InvalidParameter {
            name: "n_dirs",
            reason: "must be >= 1".into(),
        });
    }
    let checks = sweep_directions(sys, n_dirs)
        .into_par_iter()
        .map(|xi| sk_check(sys, xi))
        .collect::<Result<Vec<_>>>()?;
    let holds_everywhere = checks.iter().all(|c| c.holds);
    let worst_min_angle = checks.iter().map(|c| c.min_angle).fold(f64::INFINITY, f64::min);
    Ok(SweepReport {
        checks,
        holds_everywhere,
        worst_min_angle,
    })
}

/// Undamped eigenpairs `(0, (0, x, 0, ..))` with `x` orthogonal to `xi`,
/// present exactly when `xi` is orthogonal to `B_bar`.
pub fn kernel_eigenpairs_nu0(sys: &SystemMatrices, xi: [f64; 3]) -> Result<Vec<(f64, Vec9)>> {
    if sys.params.nu != 0.0 {
        return Err(Error::DampingPresent { nu: sys.params.nu });
    }
    if sys.equilibrium.b_dot(xi).abs() > 1e-12 {
        return Ok(Vec::new());
    }
    let Some((e1, e2)) = sphere::orthonormal_complement(xi) else {
        return Ok(Vec::new());
    };
    Ok([e1, e2]
        .iter()
        .map(|x| {
            let mut v = Vec9::zeros();
            for i in 0..3 {
                v[IDX_U + i] = x[i];
            }
            (0.0, v)
        })
        .collect())
}

/// Rank of the stacked observability matrix `[B; B M; ..; B M^8]` with
/// `M = A0^{-1} A(xi)`, rescaled to unit norm before stacking.
pub fn kalman_rank(sys: &SystemMatrices, xi: [f64; 3]) -> usize {
    let a = sys.a_symbol(xi);
    let m = Mat9::from_fn(|i, j| a[(i, j)] / sys.a0_diag[i]);
    kalman_rank_of(&sys.b_symbol(xi), &m)
}

pub fn kalman_rank_of(b: &Mat9, m: &Mat9) -> usize {
    let nm = m.norm();
    let m = if nm > 0.0 { m / nm } else { *m };
    let mut stacked = DMatrix::zeros(DIM * DIM, DIM);
    let mut block = *b;
    for p in 0..DIM {
        stacked.view_mut((p * DIM, 0), (DIM, DIM)).copy_from(&block);
        block *= m;
    }
    numerical_rank(&stacked, KALMAN_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayPoint {
    pub xi: [f64; 3],
    pub abscissa: f64,
    pub cond: f64,
}

impl DecayPoint {
    pub fn xi_norm(&self) -> f64 {
        sphere::norm(self.xi)
    }
}

pub fn spectral_abscissa(sys: &SystemMatrices, xi: [f64; 3]) -> Result<DecayPoint> {
    let eig = complex_eigen(&sys.generator(xi))?;
    let abscissa = eig.values.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayPoint {
        xi,
        abscissa,
        cond: eig.cond,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayMap {
    /// Direction-major, magnitudes ascending.
    pub points: Vec<DecayPoint>,
    pub n_dirs: usize,
    pub magnitudes: Vec<f64>,
    /// Log-log slope of `|abscissa|` against `|xi|` over the lowest decade, all directions pooled.
    pub low_slope: Option<f64>,
    /// Largest abscissa among the points at the largest magnitude.
    pub plateau: Option<f64>,
}

pub fn decay_map(sys: &SystemMatrices, magnitudes: &[f64], directions: &[[f64; 3]]) -> Result<DecayMap> {
    if let Some(m) = magnitudes.iter().find(|m| !(**m > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "magnitudes",
            reason: format!("must be > 0, got {m}"),
        });
    }
    let mut mags = magnitudes.to_vec();
    mags.sort_by(f64::total_cmp);
    let dirs: Vec<[f64; 3]> = directions
        .iter()
        .map(|d| sphere::scale(*d, 1.0 / sphere::norm(*d)))
        .collect();
    let xis: Vec<[f64; 3]> = dirs
        .iter()
        .flat_map(|d| mags.iter().map(move |m| sphere::scale(*d, *m)))
        .collect();
    let points = xis
        .into_par_iter()
        .map(|xi| spectral_abscissa(sys, xi))
        .collect::<Result<Vec<_>>>()?;

    let (low_slope, plateau) = match (mags.first(), mags.last()) {
        (Some(&lo), Some(&hi)) => {
            let decade: Vec<(f64, f64)> = points
                .iter()
                .filter(|p| p.xi_norm() <= lo * 10.0 * (1.0 + 1e-12))
                .map(|p| (p.xi_norm(), p.abscissa))
                .collect();
            let plateau = points
                .iter()
                .filter(|p| (p.xi_norm() - hi).abs() <= 1e-12 * hi)
                .map(|p| p.abscissa)
                .fold(f64::NEG_INFINITY, f64::max);
            (fit_loglog_slope(&decade), Some(plateau))
        }
        _ => (None, None),
    };
    Ok(DecayMap {
        points,
        n_dirs: dirs.len(),
        magnitudes: mags,
        low_slope,
        plateau,
    })
}

/// Least-squares slope of `ln|y|` against `ln x`; `None` with fewer than two
/// distinct abscissas or any zero value.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|(x, y)| *x <= 0.0 || *y == 0.0) {
        return None;
    }
    let lx: Vec<f64> = points.iter().map(|(x, _)| x.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|(_, y)| y.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// `K(omega) = sum_j omega_j K_j` with each `K_j A0` skew-symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct Compensator {
    pub k: [Mat9; 3],
    pub margin: f64,
}

/// Strictly-lower-triangular entries of each skew block `S_j`.
pub const SKEW_PARAMS: usize = DIM * (DIM - 1) / 2;

impl Compensator {
    pub fn zero() -> Self {
        Self {
            k: [Mat9::zeros(); 3],
            margin: 0.0,
        }
    }

    /// Builds `K_j = S_j A0^{-1}` from the `3 * 36` lower-triangular entries of the `S_j`.
    pub fn from_params(theta: &[f64], a0_diag: &[f64; DIM]) -> Self {
        assert_eq!(theta.len(), 3 * SKEW_PARAMS);
        let mut k = [Mat9::zeros(); 3];
        for (j, kj) in k.iter_mut().enumerate() {
            let mut idx = j * SKEW_PARAMS;
            for p in 1..DIM {
                for q in 0..p {
                    let s = theta[idx];
                    kj[(p, q)] = s / a0_diag[q];
                    kj[(q, p)] = -s / a0_diag[p];
                    idx += 1;
                }
            }
        }
        Self { k, margin: 0.0 }
    }

    pub fn at(&self, omega: [f64; 3]) -> Mat9 {
        self.k[0] * omega[0] + self.k[1] * omega[1] + self.k[2] * omega[2]
    }

    /// `||K(omega) A0 + (K(omega) A0)^T||_F`.
    pub fn skew_defect(&self, sys: &SystemMatrices, omega: [f64; 3]) -> f64 {
        let ka = self.at(omega) * sys.a0;
        (ka + ka.transpose()).norm()
    }

    /// `max |K(-omega) + K(omega)|` entrywise.
    pub fn odd_defect(&self, omega: [f64; 3]) -> f64 {
        let neg = [-omega[0], -omega[1], -omega[2]];
        (self.at(neg) + self.at(omega)).amax()
    }
}

/// `lambda_min` of the symmetric part of `K(omega) A(omega) + B(omega)`.
pub fn compensated_min_eig(sys: &SystemMatrices, k: &Compensator, omega: [f64; 3]) -> f64 {
    sym_min_eigenvalue(&(k.at(omega) * sys.a_symbol(omega) + sys.b_symbol(omega)))
}

fn sample_margin(sys: &SystemMatrices, k: &Compensator, omegas: &[[f64; 3]]) -> f64 {
    omegas
        .par_iter()
        .map(|w| compensated_min_eig(sys, k, *w))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

struct Search<'a> {
    sys: &'a SystemMatrices,
    omegas: Vec<[f64; 3]>,
    evals: usize,
    budget: usize,
}

impl Search<'_> {
    fn eval(&mut self, theta: &[f64]) -> f64 {
        self.evals += 1;
        let k = Compensator::from_params(theta, &self.sys.a0_diag);
        sample_margin(self.sys, &k, &self.omegas)
    }

    fn exhausted(&self) -> bool {
        self.evals >= self.budget
    }

    /// Best multiple `s * theta` over a geometric ladder of factors.
    fn rescale(&mut self, theta: &mut [f64], value: f64, factors: &[f64]) -> f64 {
        let mut best = (value, 1.0);
        for &s in factors {
            if self.exhausted() {
                break;
            }
            let trial: Vec<f64> = theta.iter().map(|t| t * s).collect();
            let v = self.eval(&trial);
            if v > best.0 {
                best = (v, s);
            }
        }
        if best.1 != 1.0 {
            theta.iter_mut().for_each(|t| *t *= best.1);
        }
        best.0
    }
}

/// Maximizes the sampled margin over the skew-constrained linear ansatz by
/// coordinate search with a halving step schedule, starting from the
/// density-velocity coupling `S_j = c (e_0 e_{j+1}^T - e_{j+1} e_0^T)`.
pub fn find_compensator(sys: &SystemMatrices, n_train: usize, budget: usize) -> Result<Compensator> {
    if n_train < 12 {
        return Err(Error::InvalidParameter {
            name: "n_train",
            reason: format!("need at least 12 training directions, got {n_train}"),
        });
    }
    let mut search = Search {
        sys,
        omegas: sphere::fibonacci(n_train, 0.0),
        evals: 0,
        budget: budget.max(1),
    };
    let mut theta = vec![0.0; 3 * SKEW_PARAMS];
    for j in 0..3 {
        // entry (p, q) = (j + 1, 0) sits at offset p (p - 1) / 2 + q
        let p = IDX_U + j;
        theta[j * SKEW_PARAMS + p * (p - 1) / 2] = -1.0;
    }
    let mut value = search.eval(&theta);
    let ladder: Vec<f64> = (-24..=4).map(|e| 2f64.powi(e)).collect();
    value = search.rescale(&mut theta, value, &ladder);

    let mut step = 0.5 * theta.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let min_step = 1e-12 * step.max(1e-300);
    while !search.exhausted() && step > min_step {
        let mut improved = false;
        for i in 0..theta.len() {
            for dir in [1.0, -1.0] {
                if search.exhausted() {
                    break;
                }
                let old = theta[i];
                theta[i] = old + dir * step;
                let v = search.eval(&theta);
                if v > value {
                    value = v;
                    improved = true;
                    break;
                }
                theta[i] = old;
            }
        }
        if improved {
            value = search.rescale(&mut theta, value, &[0.5, 0.8, 1.25, 2.0]);
        } else {
            step *= 0.5;
        }
    }

    let mut comp = Compensator::from_params(&theta, &sys.a0_diag);
    comp.margin = value;
    if value > 0.0 {
        Ok(comp)
    } else {
        Err(Error::NoCompensatorFound { margin: value })
    }
}

/// Margin, skewness and oddness of a compensator on a fresh lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensatorCheck {
    pub margin: f64,
    pub max_skew_defect: f64,
    pub max_odd_defect: f64,
    pub n_test: usize,
}

pub fn verify_compensator(k: &Compensator, sys: &SystemMatrices, n_test: usize) -> CompensatorCheck {
    verify_compensator_on(k, sys, &sphere::fibonacci(n_test, TEST_OFFSET))
}

pub fn verify_compensator_on(k: &Compensator, sys: &SystemMatrices, omegas: &[[f64; 3]]) -> CompensatorCheck {
    CompensatorCheck {
        margin: sample_margin(sys, k, omegas),
        max_skew_defect: omegas.iter().map(|w| k.skew_defect(sys, *w)).fold(0.0, f64::max),
        max_odd_defect: omegas.iter().map(|w| k.odd_defect(*w)).fold(0.0, f64::max),
        n_test: omegas.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ModelConfig;
    use crate::linalg::to_complex;
    use crate::model::{Equilibrium, PhysParams};

    fn sys_nu(nu: f64) -> SystemMatrices {
        SystemMatrices::from_model(&ModelConfig::all_ones().with_nu(nu).unwrap()).unwrap()
    }

    fn e(i: usize) -> Vec9 {
        let mut v = Vec9::zeros();
        v[i] = 1.0;
        v
    }

    #[test]
    fn damped_kernel_is_density_direction() {
        let sys = sys_nu(1.0);
        let k = null_space(&sys.b_symbol([0.0, 0.6, 0.8]), KERNEL_TOL);
        assert_eq!(k.ncols(), 1);
        assert!((k[(0, 0)].abs() - 1.0).abs() < 1e-14);
        let r = sk_check(&sys, [0.0, 0.6, 0.8]).unwrap();
        assert!(r.holds && r.witness.is_none());
    }

    #[test]
    fn undamped_fails_orthogonal_to_field() {
        let sys = sys_nu(0.0);
        let r = sk_check(&sys, [0.0, 1.0, 0.0]).unwrap();
        assert!(!r.holds);
        let (lambda, x) = r.witness.unwrap();
        assert!(lambda.abs() < 1e-12);
        assert!((sys.a_symbol(r.xi) * x).norm() < 1e-10);
        assert!((sys.b_symbol(r.xi) * x).norm() < 1e-10);
        // the proof's witness (0, x, 0, ..) with x = e1
        assert!((sys.a_symbol([0.0, 1.0, 0.0]) * e(1)).norm() == 0.0);
        let along = sk_check(&sys, [1.0, 0.0, 0.0]).unwrap();
        assert!(along.holds);
    }

    #[test]
    fn sweep_counts_and_verdicts() {
        let sys = sys_nu(1.0);
        let r = sk_sweep(&sys, 1).unwrap();
        assert_eq!(r.checks.len(), 7);
        let r = sk_sweep(&sys, 200).unwrap();
        assert!(r.holds_everywhere && r.worst_min_angle > ANGLE_TOL);

        let sys0 = sys_nu(0.0);
        let r = sk_sweep(&sys0, 50).unwrap();
        assert!(!r.holds_everywhere);
        for c in &r.checks {
            let orth = sys0.equilibrium.b_dot(c.xi).abs() <= 1e-12;
            assert_eq!(!c.holds, orth, "xi = {:?}", c.xi);
        }
    }

    #[test]
    fn kernel_eigenpairs() {
        let sys = sys_nu(0.0);
        let pairs = kernel_eigenpairs_nu0(&sys, [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].1, e(1));
        assert_eq!(pairs[1].1, e(2));
        // oracle: null space of A(xi) intersected with the velocity block
        let ns = null_space(&sys.a_symbol([0.0, 0.0, 1.0]), 1e-12);
        let ub = DMatrix::from_fn(DIM, 3, |r, c| if r == IDX_U + c { 1.0 } else { 0.0 });
        for (_, x) in &pairs {
            let xd = DMatrix::from_column_slice(DIM, 1, x.as_slice());
            let (a1, _) = min_principal_angle(&xd, &ns);
            let (a2, _) = min_principal_angle(&xd, &ub);
            assert!(a1 < 1e-12 && a2 < 1e-12);
        }
        assert!(kernel_eigenpairs_nu0(&sys, [1.0, 0.0, 0.0]).unwrap().is_empty());
        assert!(matches!(
            kernel_eigenpairs_nu0(&sys_nu(1.0), [0.0, 0.0, 1.0]),
            Err(Error::DampingPresent { .. })
        ));

        let params = PhysParams::all_ones().with_nu(0.0).unwrap();
        let mut m = ModelConfig::all_ones().with_nu(0.0).unwrap();
        m.equilibrium = Equilibrium::compatible(&params, 1.0, 1.0, [0.0; 3]).unwrap();
        let sys = SystemMatrices::from_model(&m).unwrap();
        assert_eq!(kernel_eigenpairs_nu0(&sys, [0.6, 0.0, 0.8]).unwrap().len(), 2);
    }

    #[test]
    fn kalman_matches_sk() {
        assert_eq!(kalman_rank(&sys_nu(1.0), [1.0, 0.0, 0.0]), 9);
        assert!(kalman_rank(&sys_nu(0.0), [0.0, 1.0, 0.0]) < 9);
        assert_eq!(kalman_rank_of(&Mat9::zeros(), &Mat9::identity()), 0);
        for nu in [0.0, 1.0] {
            let sys = sys_nu(nu);
            for xi in sweep_directions(&sys, 40) {
                let sk = sk_check(&sys, xi).unwrap();
                assert_eq!(sk.holds, kalman_rank(&sys, xi) == 9, "nu = {nu}, xi = {xi:?}");
            }
        }
    }

    #[test]
    fn abscissa_basics() {
        let sys = sys_nu(1.0);
        assert!(spectral_abscissa(&sys, [0.0; 3]).unwrap().abscissa.abs() <= 1e-12);
        assert!(spectral_abscissa(&sys, [1.0, 0.0, 0.0]).unwrap().abscissa < 0.0);
        let a3 = spectral_abscissa(&sys, [1e-3, 0.0, 0.0]).unwrap().abscissa;
        let a2 = spectral_abscissa(&sys, [1e-2, 0.0, 0.0]).unwrap().abscissa;
        let ratio = a2 / a3;
        assert!((ratio - 100.0).abs() < 20.0, "ratio {ratio}");
    }

    #[test]
    fn conjugate_symmetry_of_spectra() {
        let sys = SystemMatrices::from_model(&ModelConfig::all_ones()).unwrap();
        let xi = [0.3, -1.1, 0.7];
        let mut p = complex_eigen(&sys.generator(xi)).unwrap().values;
        let mut m: Vec<_> = complex_eigen(&sys.generator([-0.3, 1.1, -0.7]))
            .unwrap()
            .values
            .into_iter()
            .map(|v| v.conj())
            .collect();
        let key = |a: &num_complex::Complex64, b: &num_complex::Complex64| {
            a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
        };
        p.sort_by(key);
        m.sort_by(key);
        for (a, b) in p.iter().zip(&m) {
            assert!((a - b).norm() < 1e-10);
        }
        let _ = to_complex(&sys.bt);
    }

    #[test]
    fn decay_map_shape() {
        let sys = sys_nu(1.0);
        let mags: Vec<f64> = (0..9).map(|i| 10f64.powf(-3.0 + 0.25 * i as f64)).collect();
        let map = decay_map(&sys, &mags, &[[1.0, 0.0, 0.0]]).unwrap();
        let slope = map.low_slope.unwrap();
        assert!((slope - 2.0).abs() < 0.2, "slope {slope}");
        let hi = decay_map(&sys, &[1e2, 1e3], &[[1.0, 0.0, 0.0]]).unwrap();
        let (a, b) = (hi.points[0].abscissa, hi.points[1].abscissa);
        assert!(((a - b) / b).abs() < 0.05, "{a} vs {b}");
        assert!(decay_map(&sys, &[], &[[1.0, 0.0, 0.0]]).unwrap().points.is_empty());
    }

    #[test]
    fn fit_slope_exact_power() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|x| (*x, -3.0 * x * x * x)).collect();
        assert!((fit_loglog_slope(&pts).unwrap() - 3.0).abs() < 1e-12);
        assert!(fit_loglog_slope(&pts[..1]).is_none());
    }

    #[test]
    fn compensator_structure() {
        let sys = sys_nu(1.0);
        let theta: Vec<f64> = (0..3 * SKEW_PARAMS).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let k = Compensator::from_params(&theta, &sys.a0_diag);
        for w in sphere::fibonacci(20, 0.3) {
            assert!(k.skew_defect(&sys, w) <= 1e-12);
            assert_eq!(k.odd_defect(w), 0.0);
        }
        let zero = verify_compensator(&Compensator::zero(), &sys, 50);
        assert!(zero.margin.abs() < 1e-12);
    }

    #[test]
    fn compensator_search_finds_positive_margin() {
        let sys = sys_nu(1.0);
        let k = find_compensator(&sys, 24, 600).unwrap();
        assert!(k.margin > 0.0);
        let check = verify_compensator(&k, &sys, 200);
        assert!(check.margin > 0.0);
        assert!(check.max_skew_defect <= 1e-12);
        assert_eq!(check.max_odd_defect, 0.0);
        assert!(matches!(
            find_compensator(&sys_nu(0.0), 24, 50),
            Err(Error::NoCompensatorFound { .. })
        ));
    }
}
