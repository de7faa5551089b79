//! Dense 9x9 kernels: matrix exponential, eigen-solvers, ranks, subspace angles.

use nalgebra::{DMatrix, DVector, SMatrix, SVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DIM: usize = 9;

pub type Mat9 = SMatrix<f64, DIM, DIM>;
pub type Vec9 = SVector<f64, DIM>;
pub type CMat9 = SMatrix<Complex64, DIM, DIM>;
pub type CVec9 = SVector<Complex64, DIM>;

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the [13/13] Padé approximant is accurate to
/// double precision without scaling.
const THETA13: f64 = 5.371_920_351_148_152;

pub fn norm1(m: &CMat9) -> f64 {
    (0..DIM)
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a fixed [13/13] Padé
/// approximant; the scaling exponent comes from the 1-norm.
pub fn expm(a: &CMat9) -> CMat9 {
    let nrm = norm1(a);
    let squarings = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a.scale(0.5f64.powi(squarings));
    let b = PADE13.map(|c| Complex64::new(c, 0.0));
    let id = CMat9::identity();
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let u_inner = a6 * (a6 * b[13] + a4 * b[11] + a2 * b[9]) + a6 * b[7] + a4 * b[5] + a2 * b[3] + id * b[1];
    let u = a * u_inner;
    let v = a6 * (a6 * b[12] + a4 * b[10] + a2 * b[8]) + a6 * b[6] + a4 * b[4] + a2 * b[2] + id * b[0];
    let mut r = (v - u)
        .lu()
        .solve(&(v + u))
        .expect("Padé denominator is nonsingular after scaling");
    for _ in 0..squarings {
        r = r * r;
    }
    r
}

/// Generalized symmetric-definite problem `A x = lambda A0 x` with diagonal
/// SPD `A0`, via `y = A0^{1/2} x`. Eigenvalues ascending; columns of the
/// returned matrix are `A0`-orthonormal eigenvectors.
pub fn generalized_symmetric_eigen(a: &Mat9, a0_diag: &[f64; DIM]) -> Result<([f64; DIM], Mat9)> {
    let inv_sqrt: [f64; DIM] = a0_diag.map(|d| 1.0 / d.sqrt());
    let mut c = Mat9::zeros();
    for i in 0..DIM {
        for j in 0..DIM {
            c[(i, j)] = inv_sqrt[i] * a[(i, j)] * inv_sqrt[j];
        }
    }
    // exact symmetrization guards against rounding in the products above
    let c = (c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(c, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::EigenFailure("symmetric-definite eigensolve".into()))?;
    let mut order: Vec<usize> = (0..DIM).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut values = [0.0; DIM];
    let mut vectors = Mat9::zeros();
    for (k, &i) in order.iter().enumerate() {
        values[k] = eig.eigenvalues[i];
        for r in 0..DIM {
            vectors[(r, k)] = inv_sqrt[r] * eig.eigenvectors[(r, i)];
        }
    }
    Ok((values, vectors))
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn sym_min_eigenvalue(m: &Mat9) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    s.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Frobenius norm of `m - m^T` over pairs `i < j`, i.e. `||m - m^T||_F / sqrt(2)`.
pub fn asymmetry_defect(m: &Mat9) -> f64 {
    let mut acc = 0.0;
    for i in 0..DIM {
        for j in (i + 1)..DIM {
            let d = m[(i, j)] - m[(j, i)];
            acc += d * d;
        }
    }
    acc.sqrt()
}

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = m.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Orthonormal basis of the null space of a square matrix: right singular
/// vectors with singular value `<= rel_tol * sigma_max`.
pub fn null_space(m: &Mat9, rel_tol: f64) -> DMatrix<f64> {
    let dm = DMatrix::from_iterator(DIM, DIM, m.iter().copied());
    let svd = dm.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cols: Vec<usize> = (0..DIM)
        .filter(|&k| smax == 0.0 || svd.singular_values[k] <= rel_tol * smax)
        .collect();
    let mut out = DMatrix::zeros(DIM, cols.len());
    for (c, &k) in cols.iter().enumerate() {
        for r in 0..DIM {
            out[(r, c)] = v_t[(k, r)];
        }
    }
    out
}

/// Orthonormal basis for the column span of a full-column-rank matrix.
pub fn orthonormalize(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().qr().q()
}

/// Smallest principal angle between the column spans of two orthonormal
/// bases, with the unit vector of `span(q1)` attaining it.
pub fn min_principal_angle(q1: &DMatrix<f64>, q2: &DMatrix<f64>) -> (f64, DVector<f64>) {
    if q1.ncols() == 0 || q2.ncols() == 0 {
        let w = DVector::zeros(q1.nrows());
        return (std::f64::consts::FRAC_PI_2, w);
    }
    let residual = q1 - q2 * (q2.transpose() * q1);
    let svd = residual.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (k, smin) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    // more columns than the complement can hold forces an exact intersection
    let smin = if q1.ncols() + q2.ncols() > q1.nrows() { 0.0 } else { smin };
    let c = v_t.row(k).transpose();
    let w = q1 * c;
    (smin.clamp(0.0, 1.0).asin(), w)
}

/// Eigenvalues and unit eigenvectors of a complex 9x9 matrix.
#[derive(Debug, Clone)]
pub struct ComplexEigen {
    pub values: Vec<Complex64>,
    pub vectors: CMat9,
    /// 2-norm condition number of the eigenvector matrix; infinite when the
    /// matrix is defective within tolerance.
    pub cond: f64,
}

/// Eigenvalues from a complex Schur form; eigenvectors from the null spaces
/// of `M - lambda I` over clusters of nearby eigenvalues.
pub fn complex_eigen(m: &CMat9) -> Result<ComplexEigen> {
    let schur = Schur::try_new(*m, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::EigenFailure("complex Schur iteration".into()))?;
    let (_, t) = schur.unpack();
    let mut values: Vec<Complex64> = (0..DIM).map(|i| t[(i, i)]).collect();
    values.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));

    let scale = norm1(m).max(1.0);
    let cluster_tol = 1e-8 * scale;
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match clusters
            .iter_mut()
            .find(|c| c.iter().any(|&j| (values[j] - v).norm() <= cluster_tol))
        {
            Some(c) => c.push(i),
            None => clusters.push(vec![i]),
        }
    }

    let mut vectors = CMat9::zeros();
    let mut defective = false;
    for cluster in &clusters {
        let mean = cluster.iter().map(|&i| values[i]).sum::<Complex64>() / cluster.len() as f64;
        let shifted = m - CMat9::identity() * mean;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let mut idx: Vec<usize> = (0..DIM).collect();
        idx.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        let needed = cluster.len();
        if svd.singular_values[idx[needed - 1]] > 1e-6 * scale {
            defective = true;
        }
        for (slot, &k) in cluster.iter().zip(&idx[..needed]) {
            for r in 0..DIM {
                vectors[(r, *slot)] = v_t[(k, r)].conj();
            }
        }
    }
    for j in 0..DIM {
        let n = vectors.column(j).norm();
        if n > 0.0 {
            vectors.column_mut(j).unscale_mut(n);
        }
    }
    let sv = vectors.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let cond = if defective || smin <= 1e-8 * smax {
        f64::INFINITY
    } else {
        smax / smin
    };
    Ok(ComplexEigen {
        values,
        vectors,
        cond,
    })
}

pub fn to_complex(m: &Mat9) -> CMat9 {
    m.map(|x| Complex64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(seed: u64) -> CMat9 {
        // deterministic pseudo-random entries without pulling in an RNG
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        CMat9::from_fn(|_, _| {
            let mut next = || {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            };
            Complex64::new(next(), next())
        })
    }

    #[test]
    fn expm_matches_nalgebra_reference() {
        for seed in 0..6 {
            let a = sample(seed) * Complex64::new(3.0 * seed as f64 + 0.1, 0.0);
            let ours = expm(&a);
            let reference = a.exp();
            let err = (ours - reference).norm() / reference.norm();
            assert!(err < 1e-12, "seed {seed}: {err}");
        }
    }

    #[test]
    fn expm_of_diagonal() {
        let mut a = CMat9::zeros();
        for i in 0..DIM {
            a[(i, i)] = Complex64::new(-(i as f64), 0.5 * i as f64);
        }
        let e = expm(&a);
        for i in 0..DIM {
            let want = a[(i, i)].exp();
            assert!((e[(i, i)] - want).norm() < 1e-14 * want.norm().max(1.0));
        }
        assert_eq!(expm(&CMat9::zeros()), CMat9::identity());
    }

    #[test]
    fn complex_eigen_residuals() {
        let m = sample(42);
        let eig = complex_eigen(&m).unwrap();
        for j in 0..DIM {
            let x = eig.vectors.column(j);
            let r = m * x - x * eig.values[j];
            assert!(r.norm() < 1e-12, "col {j}: {}", r.norm());
        }
        assert!(eig.cond.is_finite() && eig.cond >= 1.0);
    }

    #[test]
    fn jordan_block_is_flagged_defective() {
        let mut m = CMat9::zeros();
        for i in 0..DIM {
            m[(i, i)] = Complex64::new(i as f64, 0.0);
        }
        m[(1, 1)] = Complex64::new(0.0, 0.0);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(complex_eigen(&m).unwrap().cond.is_infinite());
    }

    #[test]
    fn semisimple_repeated_eigenvalue_has_finite_condition() {
        let mut m = CMat9::zeros();
        for i in 0..DIM {
            m[(i, i)] = Complex64::new((i / 3) as f64, 0.0);
        }
        let eig = complex_eigen(&m).unwrap();
        assert!((eig.cond - 1.0).abs() < 1e-12, "{}", eig.cond);
    }

    #[test]
    fn generalized_eigen_is_a0_orthonormal() {
        let base = sample(3).map(|z| z.re);
        let a = base + base.transpose();
        let d = [1.0, 2.0, 0.5, 3.0, 1.5, 0.25, 1.0, 4.0, 2.0];
        let (vals, x) = generalized_symmetric_eigen(&a, &d).unwrap();
        let a0 = Mat9::from_diagonal(&Vec9::from_row_slice(&d));
        let gram = x.transpose() * a0 * x;
        assert!((gram - Mat9::identity()).norm() < 1e-12);
        for k in 0..DIM {
            let r = a * x.column(k) - a0 * x.column(k) * vals[k];
            assert!(r.norm() < 1e-12);
        }
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn principal_angle_detects_intersection() {
        let q1 = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let q2 = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(min_principal_angle(&q1, &q2).0 < 1e-15);
        let q3 = DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0]);
        assert!((min_principal_angle(&q3, &q2).0 - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let t: f64 = 1e-9;
        let q4 = DMatrix::from_column_slice(3, 1, &[0.0, t.sin(), t.cos()]);
        let q5 = DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0]);
        assert!((min_principal_angle(&q4, &q5).0 - t).abs() < 1e-20);
    }

    #[test]
    fn rank_and_null_space() {
        let mut m = Mat9::identity();
        m[(0, 0)] = 0.0;
        m[(4, 4)] = 0.0;
        let ns = null_space(&m, 1e-10);
        assert_eq!(ns.ncols(), 2);
        let dm = DMatrix::from_iterator(DIM, DIM, m.iter().copied());
        assert_eq!(numerical_rank(&dm, 1e-10), 7);
        assert_eq!(numerical_rank(&DMatrix::zeros(4, 3), 1e-10), 0);
    }
}
