//! Operators on L^2(G) stored by their integral kernels.
//!
//! An operator acts by `(A psi)(g) = (1/|G|) sum_g' K[g][g'] psi(g')`. The
//! ordinary matrix of `A` in the orthonormal position basis is therefore
//! `K/|G|`; traces, products and spectra go through that matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group::FiniteAbelianGroup;
use crate::harmonic::GFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub group: FiniteAbelianGroup,
    pub kernel: DMatrix<Complex64>,
}

impl Operator {
    pub fn new(group: &FiniteAbelianGroup, kernel: DMatrix<Complex64>) -> Result<Self> {
        let n = group.order();
        if kernel.nrows() != n || kernel.ncols() != n {
            return Err(Error::GroupMismatch(format!(
                "kernel is {}x{} but |G| = {n}",
                kernel.nrows(),
                kernel.ncols()
            )));
        }
        Ok(Self { group: group.clone(), kernel })
    }

    /// Operator whose matrix in the orthonormal position basis is `m`.
    pub fn from_matrix(group: &FiniteAbelianGroup, m: DMatrix<Complex64>) -> Result<Self> {
        let n = group.order() as f64;
        Self::new(group, m * Complex64::new(n, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.group.order()
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        &self.kernel / Complex64::new(self.dim() as f64, 0.0)
    }

    pub fn zero(group: &FiniteAbelianGroup) -> Self {
        let n = group.order();
        Self { group: group.clone(), kernel: DMatrix::zeros(n, n) }
    }

    pub fn identity(group: &FiniteAbelianGroup) -> Self {
        let n = group.order();
        Self { group: group.clone(), kernel: DMatrix::identity(n, n) * Complex64::new(n as f64, 0.0) }
    }

    /// `I/|G|`.
    pub fn maximally_mixed(group: &FiniteAbelianGroup) -> Self {
        let n = group.order();
        Self { group: group.clone(), kernel: DMatrix::identity(n, n) }
    }

    /// `|psi><psi|`, kernel `psi(g) conj(psi(g'))`. No normalization is applied.
    pub fn projector(psi: &GFunction) -> Self {
        let n = psi.len();
        let kernel = DMatrix::from_fn(n, n, |i, j| psi.values[i] * psi.values[j].conj());
        Self { group: psi.group.clone(), kernel }
    }

    /// Normalizes `psi` first, then forms the projector.
    pub fn pure_state(psi: &GFunction) -> Result<Self> {
        Ok(Self::projector(&psi.normalized()?))
    }

    /// Multiplication by `f`: kernel `|G| f(g) delta_{g,g'}`.
    pub fn multiplication(f: &GFunction) -> Self {
        let n = f.len();
        let mut kernel = DMatrix::zeros(n, n);
        for i in 0..n {
            kernel[(i, i)] = f.values[i] * n as f64;
        }
        Self { group: f.group.clone(), kernel }
    }

    pub fn adjoint(&self) -> Self {
        Self { group: self.group.clone(), kernel: self.kernel.adjoint() }
    }

    pub fn trace(&self) -> Complex64 {
        self.kernel.diagonal().sum() / self.dim() as f64
    }

    /// `tr(A* B) = (1/|G|^2) sum conj(K_A) K_B`.
    pub fn hs_inner(&self, other: &Operator) -> Complex64 {
        let n = self.dim() as f64;
        self.kernel.iter().zip(other.kernel.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>() / (n * n)
    }

    pub fn hs_norm(&self) -> f64 {
        let n = self.dim() as f64;
        self.kernel.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / n
    }

    pub fn hs_distance(&self, other: &Operator) -> f64 {
        let n = self.dim() as f64;
        self.kernel.iter().zip(other.kernel.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt() / n
    }

    /// Operator product `self * other`.
    pub fn compose(&self, other: &Operator) -> Operator {
        let n = self.dim() as f64;
        Self { group: self.group.clone(), kernel: (&self.kernel * &other.kernel) / Complex64::new(n, 0.0) }
    }

    pub fn apply(&self, psi: &GFunction) -> GFunction {
        let n = self.dim();
        let values = (0..n)
            .map(|i| (0..n).map(|j| self.kernel[(i, j)] * psi.values[j]).sum::<Complex64>() / n as f64)
            .collect();
        GFunction { group: self.group.clone(), values }
    }

    pub fn add(&self, other: &Operator) -> Operator {
        Self { group: self.group.clone(), kernel: &self.kernel + &other.kernel }
    }

    pub fn sub(&self, other: &Operator) -> Operator {
        Self { group: self.group.clone(), kernel: &self.kernel - &other.kernel }
    }

    pub fn scale(&self, s: f64) -> Operator {
        Self { group: self.group.clone(), kernel: &self.kernel * Complex64::new(s, 0.0) }
    }

    /// Largest entry of `|K - K*|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.kernel[(i, j)] - self.kernel[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// `(A + A*)/2`.
    pub fn hermitian_part(&self) -> Operator {
        let k = (&self.kernel + self.kernel.adjoint()) * Complex64::new(0.5, 0.0);
        Self { group: self.group.clone(), kernel: k }
    }

    /// Spectrum of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.hermitian_part().matrix());
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
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
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::NotState(format!("not positive semidefinite (min eigenvalue {min:e})")));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    group: FiniteAbelianGroup,
    #[serde(with = "crate::json::pair_vec")]
    kernel: Vec<Complex64>,
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let kernel = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| self.kernel[(i, j)]).collect();
        OperatorJson { group: self.group.clone(), kernel }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = OperatorJson::deserialize(d)?;
        let n = raw.group.order();
        if raw.kernel.len() != n * n {
            return Err(serde::de::Error::custom(format!(
                "kernel has {} entries, expected {}",
                raw.kernel.len(),
                n * n
            )));
        }
        let kernel = DMatrix::from_row_slice(n, n, &raw.kernel);
        Ok(Operator { group: raw.group, kernel })
    }
}
