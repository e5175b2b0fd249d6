//! Fourier analysis on G and its dual.
//!
//! G carries the probability Haar measure (weight `1/|G|` per point) and
//! the dual carries counting measure, which is the scaling that makes
//! inversion hold without extra constants:
//!
//! ```text
//! fourier(psi)(chi) = (1/|G|) sum_g psi(g) conj(chi(g))
//! inverse(phi)(g)   = sum_chi phi(chi) chi(g)
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, Subgroup};

/// A function on G, indexed by canonical element order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GFunction {
    pub group: FiniteAbelianGroup,
    #[serde(with = "crate::json::complex_vec")]
    pub values: Vec<Complex64>,
}

/// A function on the dual, indexed by character label order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualFunction {
    pub group: FiniteAbelianGroup,
    #[serde(with = "crate::json::complex_vec")]
    pub values: Vec<Complex64>,
}

fn check_len(group: &FiniteAbelianGroup, len: usize) -> Result<()> {
    if len != group.order() {
        return Err(Error::GroupMismatch(format!("{len} values for a group of order {}", group.order())));
    }
    Ok(())
}

impl GFunction {
    pub fn new(group: &FiniteAbelianGroup, values: Vec<Complex64>) -> Result<Self> {
        check_len(group, values.len())?;
        Ok(Self { group: group.clone(), values })
    }

    pub fn from_real(group: &FiniteAbelianGroup, values: &[f64]) -> Result<Self> {
        Self::new(group, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(group: &FiniteAbelianGroup) -> Self {
        Self { group: group.clone(), values: vec![Complex64::new(0.0, 0.0); group.order()] }
    }

    /// The character `chi_c` viewed as a function on G.
    pub fn character(group: &FiniteAbelianGroup, c: usize) -> Self {
        Self { group: group.clone(), values: (0..group.order()).map(|g| group.pair_idx(c, g)).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(1/|G|) sum conj(self) other`.
    pub fn inner(&self, other: &GFunction) -> Complex64 {
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        s / self.values.len() as f64
    }

    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        Ok(Self { group: self.group.clone(), values: self.values.iter().map(|z| z / n).collect() })
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self { group: self.group.clone(), values: self.values.iter().map(|z| z * s).collect() }
    }
}

impl DualFunction {
    pub fn new(group: &FiniteAbelianGroup, values: Vec<Complex64>) -> Result<Self> {
        check_len(group, values.len())?;
        Ok(Self { group: group.clone(), values })
    }

    pub fn from_real(group: &FiniteAbelianGroup, values: &[f64]) -> Result<Self> {
        Self::new(group, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

pub fn fourier(psi: &GFunction) -> DualFunction {
    let g = &psi.group;
    let n = g.order();
    let values = (0..n)
        .map(|c| {
            let s: Complex64 = psi.values.iter().enumerate().map(|(x, v)| v * g.pair_idx(c, x).conj()).sum();
            s / n as f64
        })
        .collect();
    DualFunction { group: g.clone(), values }
}

pub fn inverse_fourier(phi: &DualFunction) -> GFunction {
    let g = &phi.group;
    let n = g.order();
    let values = (0..n)
        .map(|x| phi.values.iter().enumerate().map(|(c, v)| v * g.pair_idx(c, x)).sum())
        .collect();
    GFunction { group: g.clone(), values }
}

/// Density of the probability Haar measure of `h` with respect to the
/// measure on G: `(|G|/|H|) 1_H`.
pub fn haar_density(group: &FiniteAbelianGroup, h: &Subgroup) -> GFunction {
    let w = group.order() as f64 / h.order() as f64;
    let mut values = vec![Complex64::new(0.0, 0.0); group.order()];
    for &e in &h.elements {
        values[e] = Complex64::new(w, 0.0);
    }
    GFunction { group: group.clone(), values }
}

/// `mu_G(H) * mu_dual(H^perp)`; equals 1 for every subgroup.
pub fn mass_product(group: &FiniteAbelianGroup, h: &Subgroup) -> f64 {
    let perp = group.annihilator(h);
    h.order() as f64 / group.order() as f64 * perp.order() as f64
}
