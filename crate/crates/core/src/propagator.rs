//! Exact per-mode evolution on a periodic box, Sobolev norms and the discrete
//! energy functional `N(t)`.
//!
//! Grid layout: `data[(ix * n + iy) * n + iz]`, z fastest. Spectra use the
//! unnormalized forward DFT; wavenumbers are `k = (2 pi / L) m` with signed
//! `m`, and Nyquist modes (any `m = n/2`) are dropped.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{expm, CVec9, DIM};
use crate::symbols::{StateVector, SystemMatrices, IDX_B, IDX_ER, IDX_T, IDX_U};

/// A real periodic field of perturbation state vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub n: usize,
    pub l: f64,
    pub data: Vec<StateVector>,
}

impl Field {
    pub fn zeros(n: usize, l: f64) -> Result<Self> {
        check_grid(n)?;
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "L",
                reason: format!("box length must be > 0, got {l}"),
            });
        }
        Ok(Self {
            n,
            l,
            data: vec![[0.0; DIM]; n * n * n],
        })
    }

    pub fn from_fn(n: usize, l: f64, f: impl Fn([f64; 3]) -> StateVector) -> Result<Self> {
        let mut out = Self::zeros(n, l)?;
        let h = l / n as f64;
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    out.data[(ix * n + iy) * n + iz] = f([ix as f64 * h, iy as f64 * h, iz as f64 * h]);
                }
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn cell_volume(&self) -> f64 {
        (self.l / self.n as f64).powi(3)
    }

    pub fn volume(&self) -> f64 {
        self.l.powi(3)
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.data.iter().map(|v| v[c]).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().flatten().for_each(|x| *x *= s);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Plain grid sum `sum |U|^2 (L/n)^3`.
    pub fn l2_norm_direct(&self) -> f64 {
        let s: f64 = self.data.iter().flatten().map(|x| x * x).sum();
        (s * self.cell_volume()).sqrt()
    }

    /// Grid `L^2` norm over a subset of components.
    pub fn l2_norm_of(&self, comps: &[usize]) -> f64 {
        let s: f64 = self.data.iter().map(|v| comps.iter().map(|&c| v[c] * v[c]).sum::<f64>()).sum();
        (s * self.cell_volume()).sqrt()
    }
}

fn check_grid(n: usize) -> Result<()> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::GridTooSmall { n });
    }
    Ok(())
}

/// Signed frequency index of grid index `i`; `None` at Nyquist.
pub fn signed_index(i: usize, n: usize) -> Option<i64> {
    let h = n / 2;
    match i.cmp(&h) {
        std::cmp::Ordering::Less => Some(i as i64),
        std::cmp::Ordering::Equal => None,
        std::cmp::Ordering::Greater => Some(i as i64 - n as i64),
    }
}

fn neg_index(i: usize, n: usize) -> usize {
    (n - i) % n
}

/// Discrete spectrum of a field (unnormalized DFT per component).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub n: usize,
    pub l: f64,
    pub data: Vec<[Complex64; DIM]>,
}

impl Spectrum {
    fn zeros(n: usize, l: f64) -> Self {
        Self {
            n,
            l,
            data: vec![[Complex64::new(0.0, 0.0); DIM]; n * n * n],
        }
    }

    /// Wavevector at a linear index; `None` for Nyquist modes.
    pub fn wavevector(&self, idx: usize) -> Option<[f64; 3]> {
        wavevector(idx, self.n, self.l)
    }
}

pub fn wavevector(idx: usize, n: usize, l: f64) -> Option<[f64; 3]> {
    let (ix, iy, iz) = (idx / (n * n), (idx / n) % n, idx % n);
    let f = 2.0 * std::f64::consts::PI / l;
    Some([
        f * signed_index(ix, n)? as f64,
        f * signed_index(iy, n)? as f64,
        f * signed_index(iz, n)? as f64,
    ])
}

fn mirror(idx: usize, n: usize) -> usize {
    let (ix, iy, iz) = (idx / (n * n), (idx / n) % n, idx % n);
    (neg_index(ix, n) * n + neg_index(iy, n)) * n + neg_index(iz, n)
}

/// In-place 3D DFT of one scalar grid; the inverse is normalized by `1/n^3`.
fn fft3(buf: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    // z lines are contiguous
    for line in buf.chunks_mut(n) {
        fft.process(line);
    }
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    for ix in 0..n {
        for iz in 0..n {
            for iy in 0..n {
                tmp[iy] = buf[(ix * n + iy) * n + iz];
            }
            fft.process(&mut tmp);
            for iy in 0..n {
                buf[(ix * n + iy) * n + iz] = tmp[iy];
            }
        }
    }
    for iy in 0..n {
        for iz in 0..n {
            for ix in 0..n {
                tmp[ix] = buf[(ix * n + iy) * n + iz];
            }
            fft.process(&mut tmp);
            for ix in 0..n {
                buf[(ix * n + iy) * n + iz] = tmp[ix];
            }
        }
    }
    if inverse {
        let s = 1.0 / (n * n * n) as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }
}

pub fn forward(field: &Field) -> Spectrum {
    let mut out = Spectrum::zeros(field.n, field.l);
    let comps: Vec<Vec<Complex64>> = (0..DIM)
        .into_par_iter()
        .map(|c| {
            let mut buf: Vec<Complex64> = field.data.iter().map(|v| Complex64::new(v[c], 0.0)).collect();
            fft3(&mut buf, field.n, false);
            buf
        })
        .collect();
    for (c, buf) in comps.iter().enumerate() {
        for (o, z) in out.data.iter_mut().zip(buf) {
            o[c] = *z;
        }
    }
    out
}

/// Inverse transform; returns the real field and the relative imaginary residue
/// `max |Im| / max |value|` (0 for a zero field).
pub fn inverse(spec: &Spectrum) -> (Field, f64) {
    let comps: Vec<Vec<Complex64>> = (0..DIM)
        .into_par_iter()
        .map(|c| {
            let mut buf: Vec<Complex64> = spec.data.iter().map(|v| v[c]).collect();
            fft3(&mut buf, spec.n, true);
            buf
        })
        .collect();
    let mut field = Field {
        n: spec.n,
        l: spec.l,
        data: vec![[0.0; DIM]; spec.data.len()],
    };
    let (mut im_max, mut abs_max) = (0.0f64, 0.0f64);
    for (c, buf) in comps.iter().enumerate() {
        for (o, z) in field.data.iter_mut().zip(buf) {
            o[c] = z.re;
            im_max = im_max.max(z.im.abs());
            abs_max = abs_max.max(z.norm());
        }
    }
    let residue = if abs_max > 0.0 { im_max / abs_max } else { 0.0 };
    (field, residue)
}

/// Zeros Nyquist modes and replaces every pair `(k, -k)` by its Hermitian average.
fn enforce_hermitian(spec: &mut Spectrum) {
    let n = spec.n;
    for idx in 0..spec.data.len() {
        if spec.wavevector(idx).is_none() {
            spec.data[idx] = [Complex64::new(0.0, 0.0); DIM];
            continue;
        }
        let m = mirror(idx, n);
        if m < idx {
            continue;
        }
        let mut a = spec.data[idx];
        let b = spec.data[m];
        for c in 0..DIM {
            a[c] = 0.5 * (a[c] + b[c].conj());
        }
        spec.data[idx] = a;
        spec.data[m] = a.map(|z| z.conj());
    }
}

/// `exp(t A0^{-1} E(xi)) u0`.
pub fn propagate_mode(sys: &SystemMatrices, u0: &CVec9, xi: [f64; 3], t: f64) -> Result<CVec9> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: format!("must be >= 0, got {t}"),
        });
    }
    Ok(expm(&(sys.generator(xi) * Complex64::new(t, 0.0))) * u0)
}

/// Leray projection of the magnetic block; the `k = 0` mode is kept.
pub fn project_divfree(field: &Field) -> Field {
    let mut spec = forward(field);
    project_spectrum(&mut spec);
    inverse(&spec).0
}

fn project_spectrum(spec: &mut Spectrum) {
    for idx in 0..spec.data.len() {
        let Some(k) = spec.wavevector(idx) else {
            continue;
        };
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            continue;
        }
        let v = &mut spec.data[idx];
        let kb = (0..3).map(|j| v[IDX_B + j] * k[j]).sum::<Complex64>() / k2;
        for j in 0..3 {
            v[IDX_B + j] -= kb * k[j];
        }
    }
}

/// `max_k |k . b(k)| / max_k |b(k)|` over non-Nyquist modes.
pub fn divergence_defect(field: &Field) -> f64 {
    spectrum_divergence_defect(&forward(field))
}

fn spectrum_divergence_defect(spec: &Spectrum) -> f64 {
    let (mut div, mut bmax) = (0.0f64, 0.0f64);
    for (idx, v) in spec.data.iter().enumerate() {
        let Some(k) = spec.wavevector(idx) else {
            continue;
        };
        let kb: Complex64 = (0..3).map(|j| v[IDX_B + j] * k[j]).sum();
        div = div.max(kb.norm());
        bmax = bmax.max((0..3).map(|j| v[IDX_B + j].norm_sqr()).sum::<f64>().sqrt());
    }
    if bmax > 0.0 {
        div / bmax
    } else {
        0.0
    }
}

/// One row of the tracked-functional table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormRow {
    pub t: f64,
    /// `||V - V_bar||_{H^d}`.
    pub hd: f64,
    /// `||grad V||^2_{H^{d-1}} + ||grad theta||^2_{H^d} + ||grad E_r||^2_{H^d} + ||grad B||^2_{H^d}`.
    pub grad_terms: f64,
    /// `||theta - T_r||^2_{H^{d-1}} + ||u||^2_{H^{d-1}}` with `T_r` linearized.
    pub relax_terms: f64,
    /// Discrete `N(t)^2`: running sup of `hd^2` plus trapezoidal integrals.
    pub n2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
    pub norms: Vec<NormRow>,
    pub sobolev_d: f64,
    pub max_imag_residue: f64,
    pub max_div_defect: f64,
}

impl Trajectory {
    pub fn norms_csv(&self) -> String {
        let mut s = String::from("t,H^d,grad_terms,relax_terms,N2\n");
        for r in &self.norms {
            let _ = writeln!(s, "{},{},{},{},{}", r.t, r.hd, r.grad_terms, r.relax_terms, r.n2);
        }
        s
    }
}

/// Evolves every mode by its exact exponential from `t = 0` to each of the
/// `n_out + 1` uniform output times.
pub fn simulate(sys: &SystemMatrices, field0: &Field, t_end: f64, n_out: usize, d: f64) -> Result<Trajectory> {
    check_grid(field0.n)?;
    if !(t_end > 0.0) || n_out == 0 {
        return Err(Error::InvalidParameter {
            name: "t_end/n_out",
            reason: format!("need t_end > 0 and n_out >= 1, got {t_end}, {n_out}"),
        });
    }
    let (n, l) = (field0.n, field0.l);
    let times: Vec<f64> = (0..=n_out).map(|m| t_end * m as f64 / n_out as f64).collect();
    let mut spec0 = forward(field0);
    enforce_hermitian(&mut spec0);

    let primary: Vec<usize> = (0..spec0.data.len())
        .filter(|&i| spec0.wavevector(i).is_some() && mirror(i, n) >= i)
        .collect();
    let evolved: Vec<Vec<[Complex64; DIM]>> = primary
        .par_iter()
        .map(|&idx| {
            let xi = spec0.wavevector(idx).expect("non-Nyquist");
            let u0 = CVec9::from_column_slice(&spec0.data[idx]);
            times
                .iter()
                .map(|&t| {
                    let u = if u0.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                        u0
                    } else {
                        propagate_mode(sys, &u0, xi, t).expect("t >= 0")
                    };
                    let mut out = [Complex64::new(0.0, 0.0); DIM];
                    out.copy_from_slice(u.as_slice());
                    out
                })
                .collect()
        })
        .collect();

    let mut snapshots = Vec::with_capacity(times.len());
    let mut spectra = Vec::with_capacity(times.len());
    let (mut max_res, mut max_div) = (0.0f64, 0.0f64);
    for m in 0..times.len() {
        let mut spec = Spectrum::zeros(n, l);
        for (p, &idx) in primary.iter().enumerate() {
            let v = evolved[p][m];
            spec.data[idx] = v;
            spec.data[mirror(idx, n)] = v.map(|z| z.conj());
        }
        max_div = max_div.max(spectrum_divergence_defect(&spec));
        let (field, res) = inverse(&spec);
        max_res = max_res.max(res);
        snapshots.push(field);
        spectra.push(spec);
    }
    let norms = norm_table(sys, &times, &spectra, d);
    Ok(Trajectory {
        times,
        snapshots,
        norms,
        sobolev_d: d,
        max_imag_residue: max_res,
        max_div_defect: max_div,
    })
}

/// `||f||_{H^s}^2 = (L/n)^3 / n^3 sum_k (1 + |k|^2)^s |F_k|^2`, optionally with an
/// extra `|k|^2` weight (gradient norm) and restricted to some components.
fn weighted_sum(spec: &Spectrum, s: f64, grad: bool, comp: impl Fn(&[Complex64; DIM]) -> f64) -> f64 {
    let n3 = spec.data.len() as f64;
    let norm = (spec.l / spec.n as f64).powi(3) / n3;
    let mut acc = 0.0;
    for (idx, v) in spec.data.iter().enumerate() {
        let k = match spec.wavevector(idx) {
            Some(k) => k,
            None => nyquist_wavevector(idx, spec.n, spec.l),
        };
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let mut w = (1.0 + k2).powf(s);
        if grad {
            w *= k2;
        }
        acc += w * comp(v);
    }
    acc * norm
}

/// Wavevector with Nyquist indices taken as `+n/2`; used only for norms.
fn nyquist_wavevector(idx: usize, n: usize, l: f64) -> [f64; 3] {
    let (ix, iy, iz) = (idx / (n * n), (idx / n) % n, idx % n);
    let f = 2.0 * std::f64::consts::PI / l;
    let s = |i: usize| signed_index(i, n).unwrap_or(n as i64 / 2) as f64 * f;
    [s(ix), s(iy), s(iz)]
}

fn all_components(v: &[Complex64; DIM]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn sobolev_norm(field: &Field, s: f64) -> f64 {
    weighted_sum(&forward(field), s, false, all_components).sqrt()
}

fn norm_row(sys: &SystemMatrices, spec: &Spectrum, t: f64, d: f64) -> NormRow {
    let hd2 = weighted_sum(spec, d, false, all_components);
    let grad_v = weighted_sum(spec, d - 1.0, true, all_components);
    let grad_hd = weighted_sum(spec, d, true, |v| {
        v[IDX_T].norm_sqr() + v[IDX_ER].norm_sqr() + (0..3).map(|j| v[IDX_B + j].norm_sqr()).sum::<f64>()
    });
    let tr_coeff = 1.0 / (4.0 * sys.params.a * sys.equilibrium.theta_bar.powi(3));
    let relax = weighted_sum(spec, d - 1.0, false, |v| {
        (v[IDX_T] - v[IDX_ER] * tr_coeff).norm_sqr() + (0..3).map(|j| v[IDX_U + j].norm_sqr()).sum::<f64>()
    });
    NormRow {
        t,
        hd: hd2.sqrt(),
        grad_terms: grad_v + grad_hd,
        relax_terms: relax,
        n2: 0.0,
    }
}

fn norm_table(sys: &SystemMatrices, times: &[f64], spectra: &[Spectrum], d: f64) -> Vec<NormRow> {
    let mut rows: Vec<NormRow> = times
        .par_iter()
        .zip(spectra)
        .map(|(&t, s)| norm_row(sys, s, t, d))
        .collect();
    let (mut sup, mut integral) = (0.0f64, 0.0f64);
    for i in 0..rows.len() {
        sup = sup.max(rows[i].hd * rows[i].hd);
        if i > 0 {
            let dt = rows[i].t - rows[i - 1].t;
            let f0 = rows[i - 1].grad_terms + rows[i - 1].relax_terms;
            let f1 = rows[i].grad_terms + rows[i].relax_terms;
            integral += 0.5 * dt * (f0 + f1);
        }
        rows[i].n2 = sup + integral;
    }
    rows
}

/// Discrete `N(t)^2` at the last snapshot of a trajectory, recomputed from the fields.
pub fn energy_functional_n(sys: &SystemMatrices, traj: &Trajectory, d: f64) -> f64 {
    if traj.snapshots.is_empty() {
        return 0.0;
    }
    let spectra: Vec<Spectrum> = traj.snapshots.iter().map(forward).collect();
    norm_table(sys, &traj.times, &spectra, d).last().map_or(0.0, |r| r.n2)
}

/// Real field `Re(amp exp(i k . x))` for the integer mode `m`.
pub fn single_mode(n: usize, l: f64, m: [i64; 3], amp: &CVec9) -> Result<Field> {
    let f = 2.0 * std::f64::consts::PI / l;
    let k = m.map(|c| c as f64 * f);
    Field::from_fn(n, l, |x| {
        let phase = Complex64::new(0.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]).exp();
        let mut v = [0.0; DIM];
        for c in 0..DIM {
            v[c] = (amp[c] * phase).re;
        }
        v
    })
}

/// Mode amplitude used by the `mode` initializer: all ones, with the magnetic
/// part projected orthogonal to `m`.
pub fn default_mode_amplitude(m: [i64; 3]) -> CVec9 {
    let mut v = CVec9::from_element(Complex64::new(1.0, 0.0));
    let k = m.map(|c| c as f64);
    let k2: f64 = k.iter().map(|c| c * c).sum();
    if k2 > 0.0 {
        let kb: Complex64 = (0..3).map(|j| v[IDX_B + j] * k[j]).sum::<Complex64>() / k2;
        for j in 0..3 {
            v[IDX_B + j] -= kb * k[j];
        }
    }
    v
}

pub const DEFAULT_MODE: [i64; 3] = [1, 2, 0];

/// Seeded random smooth field with `|F(k)| ~ (1 + |k|^2)^{-q}`: no mean, no
/// Nyquist content, Hermitian, divergence-free magnetic block.
pub fn random_field(n: usize, l: f64, q: f64, seed: u64) -> Result<Field> {
    check_grid(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = Spectrum::zeros(n, l);
    for idx in 0..spec.data.len() {
        let Some(k) = spec.wavevector(idx) else {
            continue;
        };
        let m = mirror(idx, n);
        if m <= idx {
            continue;
        }
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let w = (1.0 + k2).powf(-q) * (n * n * n) as f64;
        let mut v = [Complex64::new(0.0, 0.0); DIM];
        for z in v.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *z = Complex64::new(re, im) * w;
        }
        spec.data[idx] = v;
        spec.data[m] = v.map(|z| z.conj());
    }
    project_spectrum(&mut spec);
    Ok(inverse(&spec).0)
}

/// Spectral derivative `d f / d x_axis` of a scalar grid function.
pub fn spectral_derivative(values: &[f64], n: usize, l: f64, axis: usize) -> Vec<f64> {
    let mut buf: Vec<Complex64> = values.iter().map(|x| Complex64::new(*x, 0.0)).collect();
    fft3(&mut buf, n, false);
    for (idx, z) in buf.iter_mut().enumerate() {
        *z = match wavevector(idx, n, l) {
            Some(k) => *z * Complex64::new(0.0, k[axis]),
            None => Complex64::new(0.0, 0.0),
        };
    }
    fft3(&mut buf, n, true);
    buf.into_iter().map(|z| z.re).collect()
}

pub fn spectral_gradient(values: &[f64], n: usize, l: f64) -> [Vec<f64>; 3] {
    [0, 1, 2].map(|a| spectral_derivative(values, n, l, a))
}

/// Pointwise curl of a vector field given as three component grids.
pub fn spectral_curl(v: [&[f64]; 3], n: usize, l: f64) -> [Vec<f64>; 3] {
    let d = |c: usize, a: usize| spectral_derivative(v[c], n, l, a);
    let (d21, d12) = (d(2, 1), d(1, 2));
    let (d02, d20) = (d(0, 2), d(2, 0));
    let (d10, d01) = (d(1, 0), d(0, 1));
    [
        d21.iter().zip(&d12).map(|(a, b)| a - b).collect(),
        d02.iter().zip(&d20).map(|(a, b)| a - b).collect(),
        d10.iter().zip(&d01).map(|(a, b)| a - b).collect(),
    ]
}

/// Header `n L t`, then `n^3` lines of 9 values, z fastest.
pub fn write_snapshot(path: &Path, field: &Field, t: f64) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{} {} {}", field.n, field.l, t)?;
    for v in &field.data {
        let line: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(Field, f64)> {
    let r = BufReader::new(std::fs::File::open(path)?);
    let mut lines = r.lines();
    let bad = |line: usize, message: String| Error::Config { line, message };
    let header = lines.next().ok_or_else(|| bad(1, "empty snapshot".into()))??;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(bad(1, format!("expected header `n L t`, got `{header}`")));
    }
    let n: usize = parts[0].parse().map_err(|e| bad(1, format!("n: {e}")))?;
    let l: f64 = parts[1].parse().map_err(|e| bad(1, format!("L: {e}")))?;
    let t: f64 = parts[2].parse().map_err(|e| bad(1, format!("t: {e}")))?;
    let mut field = Field::zeros(n, l)?;
    for (i, slot) in field.data.iter_mut().enumerate() {
        let lineno = i + 2;
        let line = lines.next().ok_or_else(|| bad(lineno, "truncated snapshot".into()))??;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(lineno, e.to_string()))?;
        if vals.len() != DIM {
            return Err(bad(lineno, format!("expected {DIM} values, got {}", vals.len())));
        }
        slot.copy_from_slice(&vals);
    }
    Ok((field, t))
}
