//! Band-limited operators on the circle.
//!
//! An operator is `sum c_{kl} |k><l|` over modes `k, l` in `[-K, K]` with
//! `<z|k> = z^k`. With the probability Haar measure on the circle and
//! counting measure on the integers the KD distribution has the closed form
//! `KD(z, m) = sum_k c_{km} z^(k - m)`, a trigonometric polynomial of
//! degree at most `2K` in `z` for each `m`.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::random::complex_normal;

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(DMatrix<Complex64>),
    Diagonal(Vec<Complex64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandLimitedOperator {
    band: usize,
    storage: Storage,
}

const UNIT_TOL: f64 = 1e-12;

impl BandLimitedOperator {
    pub fn new(band: usize, coeffs: DMatrix<Complex64>) -> Result<Self> {
        let d = 2 * band + 1;
        if coeffs.nrows() != d || coeffs.ncols() != d {
            return Err(Error::Malformed(format!(
                "band {band} needs a {d}x{d} coefficient matrix, got {}x{}",
                coeffs.nrows(),
                coeffs.ncols()
            )));
        }
        Ok(Self { band, storage: Storage::Dense(coeffs) })
    }

    /// Diagonal operator; `diag[i]` is the coefficient of mode `i - K`.
    pub fn diagonal(band: usize, diag: Vec<Complex64>) -> Result<Self> {
        if diag.len() != 2 * band + 1 {
            return Err(Error::Malformed(format!("band {band} needs {} diagonal entries, got {}", 2 * band + 1, diag.len())));
        }
        Ok(Self { band, storage: Storage::Diagonal(diag) })
    }

    /// `|psi><psi|` for amplitudes indexed like [`Self::diagonal`].
    pub fn pure(band: usize, amplitudes: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(amplitudes);
        if v.len() != 2 * band + 1 {
            return Err(Error::Malformed(format!("band {band} needs {} amplitudes, got {}", 2 * band + 1, v.len())));
        }
        Self::new(band, &v * v.adjoint())
    }

    /// `(1 - e^-a) sum_{k=0..K} e^(-a k) |k><k|`, renormalized to trace one.
    pub fn geometric_state(a: f64, band: usize) -> Result<Self> {
        if a.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Malformed(format!("decay rate must be positive, got {a}")));
        }
        let mut diag = vec![Complex64::new(0.0, 0.0); 2 * band + 1];
        let weights: Vec<f64> = (0..=band).map(|k| (1.0 - (-a).exp()) * (-a * k as f64).exp()).collect();
        let total: f64 = weights.iter().sum();
        for (k, w) in weights.iter().enumerate() {
            diag[band + k] = Complex64::new(w / total, 0.0);
        }
        Self::diagonal(band, diag)
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn dim(&self) -> usize {
        2 * self.band + 1
    }

    fn check_mode(&self, m: i64) -> Result<usize> {
        if m.unsigned_abs() as usize > self.band {
            return Err(Error::OutOfBand { mode: m, band: self.band });
        }
        Ok((m + self.band as i64) as usize)
    }

    /// `c_{kl}` by matrix index.
    fn at(&self, i: usize, j: usize) -> Complex64 {
        match &self.storage {
            Storage::Dense(c) => c[(i, j)],
            Storage::Diagonal(d) if i == j => d[i],
            Storage::Diagonal(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// `c_{kl}` by signed modes.
    pub fn coeff(&self, k: i64, l: i64) -> Result<Complex64> {
        Ok(self.at(self.check_mode(k)?, self.check_mode(l)?))
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match &self.storage {
            Storage::Dense(c) => c.clone(),
            Storage::Diagonal(d) => DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.at(i, i)).sum()
    }

    /// `sum |c_{kl}|^2`.
    pub fn hs_norm_sq(&self) -> f64 {
        match &self.storage {
            Storage::Dense(c) => c.iter().map(|v| v.norm_sqr()).sum(),
            Storage::Diagonal(d) => d.iter().map(|v| v.norm_sqr()).sum(),
        }
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        match &self.storage {
            Storage::Dense(c) => {
                let d = self.dim();
                let mut worst = 0.0f64;
                for i in 0..d {
                    for j in i..d {
                        worst = worst.max((c[(i, j)] - c[(j, i)].conj()).norm());
                    }
                }
                worst
            }
            Storage::Diagonal(d) => d.iter().fold(0.0, |w, v| w.max(2.0 * v.im.abs())),
        }
    }

    pub fn max_offdiag(&self) -> f64 {
        match &self.storage {
            Storage::Dense(c) => {
                let d = self.dim();
                let mut worst = 0.0f64;
                for i in 0..d {
                    for j in 0..d {
                        if i != j {
                            worst = worst.max(c[(i, j)].norm());
                        }
                    }
                }
                worst
            }
            Storage::Diagonal(_) => 0.0,
        }
    }

    pub fn min_diag(&self) -> f64 {
        (0..self.dim()).map(|i| self.at(i, i).re).fold(f64::INFINITY, f64::min)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match &self.storage {
            Storage::Dense(c) => {
                let h = (c + c.adjoint()) * Complex64::new(0.5, 0.0);
                SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
            }
            Storage::Diagonal(_) => self.min_diag(),
        }
    }

    /// Hermitian, trace one and PSD, each within `tol`.
    pub fn check_state(&self, tol: f64) -> Result<()> {
        let dev = self.hermiticity_deviation();
        if dev > tol {
            return Err(Error::NotState(format!("not Hermitian (deviation {dev:e})")));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::NotState(format!("trace is {} {:+}i, not 1", tr.re, tr.im)));
        }
        let min = self.min_eigenvalue();
        if min < -tol {
            return Err(Error::NotState(format!("not positive semidefinite (min eigenvalue {min:e})")));
        }
        Ok(())
    }

    /// Column `m` as `(exponent, coefficient)` pairs of the KD polynomial.
    fn column_terms(&self, j: usize) -> Vec<(i64, Complex64)> {
        let band = self.band as i64;
        let m = j as i64 - band;
        match &self.storage {
            Storage::Dense(c) => (0..self.dim()).map(|i| (i as i64 - band - m, c[(i, j)])).filter(|(_, v)| *v != Complex64::new(0.0, 0.0)).collect(),
            Storage::Diagonal(d) => vec![(0, d[j])],
        }
    }
}

fn eval_terms(terms: &[(i64, Complex64)], theta: f64) -> Complex64 {
    terms.iter().map(|&(e, c)| c * Complex64::from_polar(1.0, e as f64 * theta)).sum()
}

/// `KD_A(z, m)`.
pub fn circle_kd_eval(a: &BandLimitedOperator, m: i64, z: Complex64) -> Result<Complex64> {
    let j = a.check_mode(m)?;
    if (z.norm() - 1.0).abs() > UNIT_TOL {
        return Err(Error::Malformed(format!("evaluation point must lie on the unit circle, |z| = {}", z.norm())));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.dim() {
        let c = a.at(i, j);
        if c != Complex64::new(0.0, 0.0) {
            acc += c * z.powi((i as i64 - j as i64) as i32);
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CirclePoint {
    pub m: i64,
    /// Angle of `z` in `[0, 2 pi)`.
    pub theta: f64,
    #[serde(with = "crate::json::complex")]
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativityReport {
    pub grid_size: usize,
    pub max_imag: f64,
    pub max_imag_at: CirclePoint,
    pub min_real: f64,
    pub min_real_at: CirclePoint,
}

impl NegativityReport {
    /// `max(max |Im|, -min Re, 0)`.
    pub fn violation(&self) -> f64 {
        self.max_imag.max(-self.min_real).max(0.0)
    }
}

const GOLDEN_STEPS: usize = 80;

/// Maximizes `f` on `[lo, hi]` by golden-section search.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_STEPS {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn wrap(theta: f64) -> f64 {
    theta.rem_euclid(TAU)
}

struct ColumnExtremes {
    imag: (f64, f64, Complex64),
    real: (f64, f64, Complex64),
}

fn search_column(terms: &[(i64, Complex64)], grid: usize) -> ColumnExtremes {
    let h = TAU / grid as f64;
    let mut best_im = (0usize, f64::NEG_INFINITY);
    let mut best_re = (0usize, f64::INFINITY);
    for j in 0..grid {
        let v = eval_terms(terms, j as f64 * h);
        if v.im.abs() > best_im.1 {
            best_im = (j, v.im.abs());
        }
        if v.re < best_re.1 {
            best_re = (j, v.re);
        }
    }
    let refine = |j: usize, f: &dyn Fn(f64) -> f64| {
        let centre = j as f64 * h;
        let (t, v) = golden_max(f, centre - h, centre + h);
        let grid_value = f(centre);
        if v >= grid_value {
            (wrap(t), v)
        } else {
            (centre, grid_value)
        }
    };
    let (ti, vi) = refine(best_im.0, &|t| eval_terms(terms, t).im.abs());
    let (tr, vr) = refine(best_re.0, &|t| -eval_terms(terms, t).re);
    ColumnExtremes { imag: (ti, vi, eval_terms(terms, ti)), real: (tr, -vr, eval_terms(terms, tr)) }
}

/// Grid evaluation of every KD column followed by golden-section
/// refinement around the worst grid point of each column.
pub fn circle_negativity_search(a: &BandLimitedOperator, grid_size: usize) -> Result<NegativityReport> {
    let need = 4 * a.band + 4;
    if grid_size < need {
        return Err(Error::Precondition(format!("grid size {grid_size} is below the Nyquist margin {need}")));
    }
    let band = a.band as i64;
    let columns: Vec<(i64, ColumnExtremes)> = (0..a.dim())
        .into_par_iter()
        .map(|j| (j as i64 - band, search_column(&a.column_terms(j), grid_size)))
        .collect();
    let mut max_imag = (f64::NEG_INFINITY, CirclePoint { m: 0, theta: 0.0, value: Complex64::new(0.0, 0.0) });
    let mut min_real = (f64::INFINITY, max_imag.1);
    for (m, ex) in &columns {
        if ex.imag.1 > max_imag.0 {
            max_imag = (ex.imag.1, CirclePoint { m: *m, theta: ex.imag.0, value: ex.imag.2 });
        }
        if ex.real.1 < min_real.0 {
            min_real = (ex.real.1, CirclePoint { m: *m, theta: ex.real.0, value: ex.real.2 });
        }
    }
    Ok(NegativityReport { grid_size, max_imag: max_imag.0, max_imag_at: max_imag.1, min_real: min_real.0, min_real_at: min_real.1 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalVerdict {
    pub verdict: bool,
    pub max_offdiag: f64,
    pub min_diag: f64,
}

/// Diagonal in the Fourier basis with nonnegative diagonal, within `tol`.
pub fn circle_is_classical(a: &BandLimitedOperator, tol: f64) -> Result<ClassicalVerdict> {
    let dev = a.hermiticity_deviation();
    if dev > tol {
        return Err(Error::NotHermitian(dev));
    }
    let max_offdiag = a.max_offdiag();
    let min_diag = a.min_diag();
    Ok(ClassicalVerdict { verdict: max_offdiag <= tol && min_diag >= -tol, max_offdiag, min_diag })
}

/// Wishart state `X X* / tr` with `X` of shape `(2K+1) x rank`.
pub fn random_band_state<R: Rng + ?Sized>(band: usize, rank: usize, rng: &mut R) -> BandLimitedOperator {
    let d = 2 * band + 1;
    let x = DMatrix::from_fn(d, rank.max(1), |_, _| complex_normal(rng));
    let m = &x * x.adjoint();
    let tr: Complex64 = m.trace();
    BandLimitedOperator { band, storage: Storage::Dense(m / tr) }
}

/// `(1 - e^-a)/(1 + e^-a)`, the untruncated purity of the geometric state.
pub fn geometric_purity_limit(a: f64) -> f64 {
    let q = (-a).exp();
    (1.0 - q) / (1.0 + q)
}

#[derive(Serialize, Deserialize)]
struct BandJson {
    #[serde(rename = "K")]
    band: usize,
    #[serde(with = "crate::json::pair_vec")]
    coeffs: Vec<Complex64>,
}

impl Serialize for BandLimitedOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        let coeffs = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| self.at(i, j)).collect();
        BandJson { band: self.band, coeffs }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BandLimitedOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BandJson::deserialize(d)?;
        let dim = 2 * raw.band + 1;
        if raw.coeffs.len() != dim * dim {
            return Err(serde::de::Error::custom(format!("coeffs has {} entries, expected {}", raw.coeffs.len(), dim * dim)));
        }
        Ok(BandLimitedOperator { band: raw.band, storage: Storage::Dense(DMatrix::from_row_slice(dim, dim, &raw.coeffs)) })
    }
}
