use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{dash_join, FiniteAbelianGroup};

/// Complex table on `G x dual(G)`, row-major in `(element, character)`.
///
/// The measure is `mu_G x counting`, so `norm^2 = (1/|G|) sum |F|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceFunction {
    pub group: FiniteAbelianGroup,
    #[serde(with = "crate::json::pair_vec")]
    pub values: Vec<Complex64>,
}

impl PhaseSpaceFunction {
    pub fn new(group: &FiniteAbelianGroup, values: Vec<Complex64>) -> Result<Self> {
        let n = group.order();
        if values.len() != n * n {
            return Err(Error::GroupMismatch(format!("{} values for a {n}x{n} phase space", values.len())));
        }
        Ok(Self { group: group.clone(), values })
    }

    pub fn from_fn(group: &FiniteAbelianGroup, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let n = group.order();
        let values = (0..n).flat_map(|g| (0..n).map(move |c| (g, c))).map(|(g, c)| f(g, c)).collect();
        Self { group: group.clone(), values }
    }

    pub fn zeros(group: &FiniteAbelianGroup) -> Self {
        let n = group.order();
        Self { group: group.clone(), values: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn dim(&self) -> usize {
        self.group.order()
    }

    pub fn get(&self, g: usize, c: usize) -> Complex64 {
        self.values[g * self.dim() + c]
    }

    pub fn inner(&self, other: &PhaseSpaceFunction) -> Complex64 {
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        s / self.dim() as f64
    }

    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.dim() as f64).sqrt()
    }

    /// Integral against `mu_G x counting`.
    pub fn total_mass(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.dim() as f64
    }

    pub fn conj(&self) -> Self {
        Self { group: self.group.clone(), values: self.values.iter().map(|z| z.conj()).collect() }
    }

    pub fn max_abs_diff(&self, other: &PhaseSpaceFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn min_real(&self) -> f64 {
        self.values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }

    /// CSV with header `g,chi,re,im`; tuples are dash-joined.
    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let mut out = String::from("g,chi,re,im\n");
        for g in 0..n {
            let gs = dash_join(&self.group.residues(g));
            for c in 0..n {
                let z = self.get(g, c);
                let _ = writeln!(out, "{gs},{},{:?},{:?}", dash_join(&self.group.residues(c)), z.re, z.im);
            }
        }
        out
    }
}
