//! Kirkwood-Dirac and related phase-space representations.
//!
//! With kernel `K` and the measure conventions of [`crate::harmonic`]:
//!
//! ```text
//! KD_A(g, chi)   = conj(chi(g)) (1/|G|) sum_g' K[g][g'] chi(g')
//! K[g][g']       = sum_chi KD_A(g, chi) chi(g - g')
//! X0_A(g, chi)   = tr(A U(g, chi, 1))
//! X1_A(g, chi)   = X0_A(g, chi) conj(chi(g))
//! Xh_A(g, chi)   = X0_A(g, chi) conj(chi(g/2))        (odd groups only)
//! Fs(F)(g, chi)  = (1/|G|) sum_{g', chi'} F(g', chi') chi(g') conj(chi'(g))
//! ```
//!
//! `KD = Fs(X1)`, `aKD = Fs(X0) = conj(KD_{A*})`, and the Wigner function
//! of an odd group is `Fs(Xh)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{inverse_fourier, DualFunction, GFunction};
use crate::operator::Operator;
use crate::phase_space::PhaseSpaceFunction;

pub fn kd(a: &Operator) -> PhaseSpaceFunction {
    let g = &a.group;
    let n = g.order();
    let inv_n = 1.0 / n as f64;
    let mut values = Vec::with_capacity(n * n);
    for x in 0..n {
        for c in 0..n {
            let s: Complex64 = (0..n).map(|y| a.kernel[(x, y)] * g.pair_idx(c, y)).sum();
            values.push(g.pair_idx(c, x).conj() * s * inv_n);
        }
    }
    PhaseSpaceFunction { group: g.clone(), values }
}

pub fn kd_inverse(f: &PhaseSpaceFunction) -> Operator {
    let g = &f.group;
    let n = g.order();
    let mut kernel = DMatrix::zeros(n, n);
    for x in 0..n {
        // row_c = F(x, c) chi_c(x); K[x][y] = sum_c row_c conj(chi_c(y))
        let row: Vec<Complex64> = (0..n).map(|c| f.get(x, c) * g.pair_idx(c, x)).collect();
        for y in 0..n {
            kernel[(x, y)] = row.iter().enumerate().map(|(c, r)| r * g.pair_idx(c, y).conj()).sum();
        }
    }
    Operator { group: g.clone(), kernel }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CharOrder {
    /// `tr(A M_chi T_g)`
    Standard0,
    /// `tr(A T_g M_chi)`
    Standard1,
    /// Symmetric phase `conj(chi(g/2))`; needs an invertible doubling map.
    Half,
}

impl std::str::FromStr for CharOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "standard0" | "0" => Ok(Self::Standard0),
            "standard1" | "1" => Ok(Self::Standard1),
            "half" => Ok(Self::Half),
            other => Err(Error::Malformed(format!("unknown characteristic-function order '{other}'"))),
        }
    }
}

/// `X0_A(g, chi) = tr(A U(g, chi, 1))`.
///
/// `U(g, chi, 1)` has matrix entries `chi(b)` at `(b, b - g)`, so the
/// trace of the product only visits those entries of `A`.
fn char_standard0(a: &Operator) -> PhaseSpaceFunction {
    let g = &a.group;
    let n = g.order();
    let inv_n = 1.0 / n as f64;
    let mut values = Vec::with_capacity(n * n);
    for x in 0..n {
        let diag: Vec<Complex64> = (0..n).map(|b| a.kernel[(g.sub_idx(b, x), b)]).collect();
        for c in 0..n {
            let s: Complex64 = diag.iter().enumerate().map(|(b, k)| k * g.pair_idx(c, b)).sum();
            values.push(s * inv_n);
        }
    }
    PhaseSpaceFunction { group: g.clone(), values }
}

pub fn char_fn(a: &Operator, order: CharOrder) -> Result<PhaseSpaceFunction> {
    let g = a.group.clone();
    let x0 = char_standard0(a);
    match order {
        CharOrder::Standard0 => Ok(x0),
        CharOrder::Standard1 => Ok(PhaseSpaceFunction::from_fn(&g, |x, c| x0.get(x, c) * g.pair_idx(c, x).conj())),
        CharOrder::Half => {
            let halving = g.doubling();
            let halves = (0..g.order()).map(|x| halving.halve_idx(x)).collect::<Result<Vec<_>>>()?;
            Ok(PhaseSpaceFunction::from_fn(&g, |x, c| x0.get(x, c) * g.pair_idx(c, halves[x]).conj()))
        }
    }
}

pub fn symplectic_fourier(f: &PhaseSpaceFunction) -> PhaseSpaceFunction {
    let g = &f.group;
    let n = g.order();
    // t[g'][x] = sum_c' F(g', c') conj(chi_c'(x))
    let mut t = vec![Complex64::new(0.0, 0.0); n * n];
    for gp in 0..n {
        for x in 0..n {
            t[gp * n + x] = (0..n).map(|cp| f.get(gp, cp) * g.pair_idx(cp, x).conj()).sum();
        }
    }
    let inv_n = 1.0 / n as f64;
    PhaseSpaceFunction::from_fn(g, |x, c| (0..n).map(|gp| t[gp * n + x] * g.pair_idx(c, gp)).sum::<Complex64>() * inv_n)
}

/// Inverse of [`symplectic_fourier`]; the transform is an involution.
pub fn symplectic_fourier_inverse(f: &PhaseSpaceFunction) -> PhaseSpaceFunction {
    symplectic_fourier(f)
}

/// Anti-KD distribution `Fs(X0_A)`.
pub fn akd(a: &Operator) -> PhaseSpaceFunction {
    symplectic_fourier(&char_standard0(a))
}

/// `Fs(Xh_A)`; errors on groups with an even factor.
pub fn wigner(a: &Operator) -> Result<PhaseSpaceFunction> {
    Ok(symplectic_fourier(&char_fn(a, CharOrder::Half)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginals {
    /// `sum_chi KD(g, chi) = <g|rho|g>`; averages to 1 under `mu_G`.
    pub position: Vec<f64>,
    /// `(1/|G|) sum_g KD(g, chi) = <chi|rho|chi>`; sums to 1.
    pub momentum: Vec<f64>,
}

pub fn marginals(rho: &Operator, tol: f64) -> Result<Marginals> {
    rho.check_state(tol)?;
    let table = kd(rho);
    let n = rho.dim();
    let position = (0..n).map(|x| (0..n).map(|c| table.get(x, c).re).sum()).collect();
    let momentum = (0..n).map(|c| (0..n).map(|x| table.get(x, c).re).sum::<f64>() / n as f64).collect();
    Ok(Marginals { position, momentum })
}

/// Fourier multiplier by `h`: kernel `(inverse_fourier h)(g - g')`.
pub fn fourier_multiplier(h: &DualFunction) -> Operator {
    let g = &h.group;
    let n = g.order();
    let ih = inverse_fourier(h);
    let kernel = DMatrix::from_fn(n, n, |x, y| ih.values[g.sub_idx(x, y)]);
    Operator { group: g.clone(), kernel }
}

/// Standard-ordered quantization of `f (x) h`: position factor on the left.
pub fn kohn_nirenberg(f: &GFunction, h: &DualFunction) -> Result<Operator> {
    if f.group != h.group {
        return Err(Error::GroupMismatch("symbol factors live on different groups".into()));
    }
    let g = &f.group;
    let n = g.order();
    let ih = inverse_fourier(h);
    let kernel = DMatrix::from_fn(n, n, |x, y| f.values[x] * ih.values[g.sub_idx(x, y)]);
    Ok(Operator { group: g.clone(), kernel })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::parse_group;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn position_state_on_z2() {
        let z2 = parse_group("Z2").unwrap();
        let rho = Operator::projector(&GFunction::from_real(&z2, &[2f64.sqrt(), 0.0]).unwrap());
        let t = kd(&rho);
        for (x, want) in [(0, 1.0), (1, 0.0)] {
            for ch in 0..2 {
                assert!((t.get(x, ch) - c(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn character_state_on_z2() {
        let z2 = parse_group("Z2").unwrap();
        let t = kd(&Operator::projector(&GFunction::character(&z2, 1)));
        for x in 0..2 {
            assert!(t.get(x, 0).norm() < 1e-14);
            assert!((t.get(x, 1) - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn negativity_witness_on_z2() {
        let z2 = parse_group("Z2").unwrap();
        let b = 0.56f64.sqrt();
        let t = kd(&Operator::projector(&GFunction::from_real(&z2, &[1.2, b]).unwrap()));
        let want = b * (b - 1.2) / 2.0;
        assert!((t.get(1, 1) - c(want, 0.0)).norm() < 1e-14);
        assert!(want < -0.16);
    }

    #[test]
    fn inverse_examples() {
        let z3 = parse_group("Z3").unwrap();
        assert_eq!(kd_inverse(&PhaseSpaceFunction::zeros(&z3)).kernel, DMatrix::zeros(3, 3));
        let ind = PhaseSpaceFunction::from_fn(&z3, |_, ch| if ch == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let op = kd_inverse(&ind);
        let want = Operator::projector(&GFunction::character(&z3, 0));
        assert!(op.hs_distance(&want) < 1e-14);
    }

    #[test]
    fn characteristic_function_examples() {
        let z2 = parse_group("Z2").unwrap();
        let x0 = char_fn(&Operator::projector(&GFunction::character(&z2, 0)), CharOrder::Standard0).unwrap();
        for x in 0..2 {
            assert!((x0.get(x, 0) - c(1.0, 0.0)).norm() < 1e-14);
            assert!(x0.get(x, 1).norm() < 1e-14);
        }
        let z5 = parse_group("Z5").unwrap();
        let x0 = char_fn(&Operator::maximally_mixed(&z5), CharOrder::Standard0).unwrap();
        assert!((x0.get(0, 0) - c(1.0, 0.0)).norm() < 1e-14);
        let z4 = parse_group("Z4").unwrap();
        assert!(matches!(char_fn(&Operator::maximally_mixed(&z4), CharOrder::Half), Err(Error::UnsupportedOrder(_))));
    }

    #[test]
    fn symplectic_transform_of_constant() {
        let g = parse_group("Z3").unwrap();
        let one = PhaseSpaceFunction::from_fn(&g, |_, _| c(1.0, 0.0));
        let t = symplectic_fourier(&one);
        for x in 0..3 {
            for ch in 0..3 {
                let want = if x == 0 && ch == 0 { 3.0 } else { 0.0 };
                assert!((t.get(x, ch) - c(want, 0.0)).norm() < 1e-13);
            }
        }
        assert!(symplectic_fourier_inverse(&t).max_abs_diff(&one) < 1e-13);
    }

    #[test]
    fn kohn_nirenberg_two_point() {
        let z2 = parse_group("Z2").unwrap();
        let f = GFunction::from_real(&z2, &[2.0, 0.0]).unwrap();
        let h = DualFunction::from_real(&z2, &[1.0, 1.0]).unwrap();
        let op = kohn_nirenberg(&f, &h).unwrap();
        assert!((op.kernel[(0, 0)] - c(4.0, 0.0)).norm() < 1e-14);
        for (i, j) in [(0, 1), (1, 0), (1, 1)] {
            assert!(op.kernel[(i, j)].norm() < 1e-14);
        }
        let t = kd(&op);
        for x in 0..2 {
            for ch in 0..2 {
                assert!((t.get(x, ch) - f.values[x] * h.values[ch]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn marginals_of_a_pure_state() {
        let z2 = parse_group("Z2").unwrap();
        let rho = Operator::projector(&GFunction::from_real(&z2, &[1.2, 0.56f64.sqrt()]).unwrap());
        let m = marginals(&rho, 1e-9).unwrap();
        assert!((m.position[0] - 1.44).abs() < 1e-12 && (m.position[1] - 0.56).abs() < 1e-12);
        let m = marginals(&Operator::maximally_mixed(&parse_group("Z4").unwrap()), 1e-9).unwrap();
        assert!(m.position.iter().all(|p| (p - 1.0).abs() < 1e-14));
        assert!(m.momentum.iter().all(|p| (p - 0.25).abs() < 1e-14));
        assert!(matches!(marginals(&Operator::identity(&z2), 1e-9), Err(Error::NotState(_))));
    }
}
