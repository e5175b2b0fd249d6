//! The Weyl-Heisenberg group `G x dual(G) x S^1` and its action on L^2(G).
//!
//! Group law: `(g, chi, z)(g', chi', z') = (g + g', chi chi', z z' conj(chi'(g)))`.
//! The representation is `U(g, chi, z) = z M_chi T_g` with
//! `(T_g psi)(x) = psi(x - g)` and `(M_chi psi)(x) = chi(x) psi(x)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Character, Element, FiniteAbelianGroup};
use crate::operator::Operator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WHElement {
    pub g: Element,
    pub chi: Character,
    #[serde(with = "crate::json::complex")]
    pub z: Complex64,
}

const UNIT_TOL: f64 = 1e-12;

impl WHElement {
    pub fn new(g: Element, chi: Character, z: Complex64) -> Result<Self> {
        if (z.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::Malformed(format!("phase must have modulus 1, got {}", z.norm())));
        }
        Ok(Self { g, chi, z })
    }

    pub fn identity(group: &FiniteAbelianGroup) -> Self {
        Self { g: group.zero(), chi: Character::new(vec![0; group.rank()]), z: Complex64::new(1.0, 0.0) }
    }

    pub fn from_indices(group: &FiniteAbelianGroup, g: usize, c: usize, z: Complex64) -> Result<Self> {
        Self::new(group.element(g), group.character(c), z)
    }

    fn indices(&self, group: &FiniteAbelianGroup) -> Result<(usize, usize)> {
        Ok((group.element_index(&self.g)?, group.character_index(&self.chi)?))
    }

    pub fn approx_eq(&self, other: &WHElement, tol: f64) -> bool {
        self.g == other.g && self.chi == other.chi && (self.z - other.z).norm() <= tol
    }
}

pub fn wh_mul(group: &FiniteAbelianGroup, a: &WHElement, b: &WHElement) -> Result<WHElement> {
    let (ga, ca) = a.indices(group)?;
    let (gb, cb) = b.indices(group)?;
    let z = a.z * b.z * group.pair_idx(cb, ga).conj();
    Ok(WHElement { g: group.element(group.add_idx(ga, gb)), chi: group.character(group.add_idx(ca, cb)), z })
}

/// `(g, chi, z)^-1 = (-g, conj chi, conj(z chi(g)))`.
pub fn wh_inv(group: &FiniteAbelianGroup, a: &WHElement) -> Result<WHElement> {
    let (g, c) = a.indices(group)?;
    let z = (a.z * group.pair_idx(c, g)).conj();
    Ok(WHElement { g: group.element(group.neg_idx(g)), chi: group.character(group.neg_idx(c)), z })
}

/// `U(g, chi, z)` as a dense kernel: `|G| z chi(x)` at `(x, x - g)`.
pub fn wh_unitary(group: &FiniteAbelianGroup, a: &WHElement) -> Result<Operator> {
    let (g, c) = a.indices(group)?;
    let n = group.order();
    let mut kernel = DMatrix::zeros(n, n);
    for x in 0..n {
        kernel[(x, group.sub_idx(x, g))] = a.z * group.pair_idx(c, x) * n as f64;
    }
    Operator::new(group, kernel)
}

/// `U(a) A U(a)*`.
pub fn wh_conjugate(op: &Operator, a: &WHElement) -> Result<Operator> {
    let u = wh_unitary(&op.group, a)?;
    Ok(u.compose(op).compose(&u.adjoint()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::parse_group;
    use crate::harmonic::GFunction;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn products_on_z4_and_z2() {
        let z4 = parse_group("Z4").unwrap();
        let a = WHElement::from_indices(&z4, 1, 1, c(1.0, 0.0)).unwrap();
        let p = wh_mul(&z4, &a, &a).unwrap();
        assert!(p.approx_eq(&WHElement::from_indices(&z4, 2, 2, c(0.0, -1.0)).unwrap(), 1e-15));
        let id = WHElement::identity(&z4);
        assert!(wh_mul(&z4, &a, &id).unwrap().approx_eq(&a, 0.0));

        let z2 = parse_group("Z2").unwrap();
        let b = WHElement::from_indices(&z2, 1, 1, c(1.0, 0.0)).unwrap();
        let p = wh_mul(&z2, &b, &b).unwrap();
        assert!(p.approx_eq(&WHElement::from_indices(&z2, 0, 0, c(-1.0, 0.0)).unwrap(), 1e-15));
    }

    #[test]
    fn inverses() {
        let z4 = parse_group("Z4").unwrap();
        let id = WHElement::identity(&z4);
        assert!(wh_inv(&z4, &id).unwrap().approx_eq(&id, 0.0));
        let a = WHElement::from_indices(&z4, 1, 1, c(1.0, 0.0)).unwrap();
        let inv = wh_inv(&z4, &a).unwrap();
        assert!(inv.approx_eq(&WHElement::from_indices(&z4, 3, 3, c(0.0, -1.0)).unwrap(), 1e-15));
        assert!(wh_mul(&z4, &a, &inv).unwrap().approx_eq(&id, 1e-15));
        assert!(wh_inv(&z4, &inv).unwrap().approx_eq(&a, 1e-15));
    }

    #[test]
    fn action_on_z2() {
        let z2 = parse_group("Z2").unwrap();
        let psi = GFunction::new(&z2, vec![c(0.3, 0.1), c(-0.7, 2.0)]).unwrap();
        let t = wh_unitary(&z2, &WHElement::from_indices(&z2, 1, 0, c(1.0, 0.0)).unwrap()).unwrap();
        let out = t.apply(&psi);
        assert!((out.values[0] - psi.values[1]).norm() < 1e-15 && (out.values[1] - psi.values[0]).norm() < 1e-15);
        let m = wh_unitary(&z2, &WHElement::from_indices(&z2, 0, 1, c(1.0, 0.0)).unwrap()).unwrap();
        let out = m.apply(&psi);
        assert!((out.values[0] - psi.values[0]).norm() < 1e-15 && (out.values[1] + psi.values[1]).norm() < 1e-15);
        let id = wh_unitary(&z2, &WHElement::identity(&z2)).unwrap();
        assert_eq!(id, Operator::identity(&z2));
    }

    #[test]
    fn conjugating_a_position_projector() {
        let z2 = parse_group("Z2").unwrap();
        let d0 = Operator::projector(&GFunction::from_real(&z2, &[2f64.sqrt(), 0.0]).unwrap());
        let d1 = Operator::projector(&GFunction::from_real(&z2, &[0.0, 2f64.sqrt()]).unwrap());
        let moved = wh_conjugate(&d0, &WHElement::from_indices(&z2, 1, 0, c(1.0, 0.0)).unwrap()).unwrap();
        assert!(moved.hs_distance(&d1) < 1e-14);
    }

    #[test]
    fn rejects_non_unit_phase() {
        let z2 = parse_group("Z2").unwrap();
        assert!(WHElement::from_indices(&z2, 0, 0, c(1.1, 0.0)).is_err());
    }

    #[test]
    fn json_shape() {
        let z4 = parse_group("Z4xZ2").unwrap();
        let a = WHElement::from_indices(&z4, 3, 5, c(0.0, 1.0)).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"g":[1,1],"chi":[2,1],"z":{"re":0.0,"im":1.0}}"#);
    }
}
