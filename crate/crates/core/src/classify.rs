//! KD-positive pure states.
//!
//! A unit vector has a nonnegative KD distribution exactly when it is, up
//! to a phase, `chi(x) 1_H(x - g) / sqrt(mu_G(H))` for a subgroup `H`,
//! `g` in `G/H` and `chi` in `dual/H^perp`. Its KD distribution is the
//! indicator of `(g + H) x (chi H^perp)`.

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::config::DEFAULT_SUBGROUP_BOUND;
use crate::error::{Error, Result};
use crate::group::{Character, Element, FiniteAbelianGroup, Subgroup};
use crate::harmonic::GFunction;
use crate::operator::Operator;
use crate::phase_space::PhaseSpaceFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct KdPureState {
    pub subgroup: Subgroup,
    pub annihilator: Subgroup,
    pub g_rep: Element,
    pub chi_rep: Character,
    pub vector: GFunction,
    g_idx: usize,
    c_idx: usize,
}

impl KdPureState {
    pub fn projector(&self) -> Operator {
        Operator::projector(&self.vector)
    }

    /// `1_H(x - g) 1_{H^perp}(c - chi)`, the KD table of the projector.
    pub fn kd_indicator(&self) -> PhaseSpaceFunction {
        let group = &self.vector.group;
        PhaseSpaceFunction::from_fn(group, |x, c| {
            let inside = self.subgroup.contains(group.sub_idx(x, self.g_idx))
                && self.annihilator.contains(group.sub_idx(c, self.c_idx));
            Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
        })
    }

    pub fn g_index(&self) -> usize {
        self.g_idx
    }

    pub fn chi_index(&self) -> usize {
        self.c_idx
    }
}

impl Serialize for KdPureState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        #[serde(transparent)]
        struct Vector<'a>(#[serde(with = "crate::json::complex_vec")] &'a Vec<Complex64>);

        let mut st = s.serialize_struct("KdPureState", 4)?;
        st.serialize_field("H", &self.subgroup.elements)?;
        st.serialize_field("g", &self.g_rep)?;
        st.serialize_field("chi", &self.chi_rep)?;
        st.serialize_field("vector", &Vector(&self.vector.values))?;
        st.end()
    }
}

fn state_from_indices(group: &FiniteAbelianGroup, h: &Subgroup, perp: &Subgroup, g: usize, c: usize) -> KdPureState {
    let g_idx = group.coset_rep_of(h, g);
    let c_idx = group.coset_rep_of(perp, c);
    let amp = (group.order() as f64 / h.order() as f64).sqrt();
    let mut values = vec![Complex64::new(0.0, 0.0); group.order()];
    for &e in &h.elements {
        let x = group.add_idx(g_idx, e);
        values[x] = group.pair_idx(c_idx, x) * amp;
    }
    KdPureState {
        subgroup: h.clone(),
        annihilator: perp.clone(),
        g_rep: group.element(g_idx),
        chi_rep: group.character(c_idx),
        vector: GFunction { group: group.clone(), values },
        g_idx,
        c_idx,
    }
}

/// Builds the canonical family member for `(H, g, chi)`; `g` and `chi`
/// are first reduced to their minimal coset representatives.
pub fn make_subgroup_state(
    group: &FiniteAbelianGroup,
    h: &Subgroup,
    g: &Element,
    chi: &Character,
) -> Result<KdPureState> {
    if !group.is_subgroup(h) {
        return Err(Error::Precondition("index set is not a subgroup".into()));
    }
    let perp = group.annihilator(h);
    Ok(state_from_indices(group, h, &perp, group.element_index(g)?, group.character_index(chi)?))
}

/// One state per subgroup and coset pair, ordered by subgroup, then
/// `g` representative, then character representative.
pub fn enumerate_kd_positive_pure(group: &FiniteAbelianGroup) -> Result<Vec<KdPureState>> {
    enumerate_kd_positive_pure_bounded(group, DEFAULT_SUBGROUP_BOUND)
}

pub fn enumerate_kd_positive_pure_bounded(group: &FiniteAbelianGroup, bound: usize) -> Result<Vec<KdPureState>> {
    let mut out = Vec::new();
    for h in group.enumerate_subgroups_bounded(bound)? {
        let perp = group.annihilator(&h);
        let g_reps = group.coset_rep_indices(&h);
        let c_reps = group.coset_rep_indices(&perp);
        for &g in &g_reps {
            for &c in &c_reps {
                out.push(state_from_indices(group, &h, &perp, g, c));
            }
        }
    }
    Ok(out)
}

/// Matches `psi` against `family` up to a global phase.
pub fn recognize_in<'a>(family: &'a [KdPureState], psi: &GFunction, tol: f64) -> Result<Option<&'a KdPureState>> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > tol {
        return Err(Error::NotNormalized(norm));
    }
    let best = family
        .iter()
        .map(|m| (m, m.vector.inner(psi).norm()))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    Ok(best.filter(|(_, overlap)| *overlap > 1.0 - tol).map(|(m, _)| m))
}

pub fn recognize_kd_positive_pure(psi: &GFunction, tol: f64) -> Result<Option<KdPureState>> {
    let family = enumerate_kd_positive_pure(&psi.group)?;
    Ok(recognize_in(&family, psi, tol)?.cloned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::parse_group;
    use crate::kd::kd;

    #[test]
    fn half_subgroup_state_on_z4() {
        let z4 = parse_group("Z4").unwrap();
        let h = Subgroup::from_sorted(vec![0, 2]);
        let s = make_subgroup_state(&z4, &h, &z4.element(0), &z4.character(0)).unwrap();
        let r2 = 2f64.sqrt();
        let want = [r2, 0.0, r2, 0.0];
        for (v, w) in s.vector.values.iter().zip(want) {
            assert!((v - Complex64::new(w, 0.0)).norm() < 1e-15);
        }
        let t = kd(&s.projector());
        for x in 0..4 {
            for c in 0..4 {
                let want = if x % 2 == 0 && c % 2 == 0 { 1.0 } else { 0.0 };
                assert!((t.get(x, c) - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn extreme_subgroups() {
        let g = parse_group("Z2xZ3").unwrap();
        let whole = Subgroup::from_sorted((0..6).collect());
        let s = make_subgroup_state(&g, &whole, &g.element(4), &g.character(5)).unwrap();
        assert_eq!(s.g_rep, g.element(0));
        assert_eq!(s.vector, GFunction::character(&g, 5));
        let triv = Subgroup::from_sorted(vec![0]);
        let s = make_subgroup_state(&g, &triv, &g.element(4), &g.character(5)).unwrap();
        assert_eq!(s.chi_rep, g.character(0));
        for (x, v) in s.vector.values.iter().enumerate() {
            let want = if x == 4 { 6f64.sqrt() } else { 0.0 };
            assert!((v - Complex64::new(want, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn family_sizes() {
        for (spec, size) in [("Z2", 4), ("Z2xZ2", 20), ("Z4", 12), ("Z6", 24), ("Z1", 1)] {
            let g = parse_group(spec).unwrap();
            assert_eq!(enumerate_kd_positive_pure(&g).unwrap().len(), size, "{spec}");
        }
    }

    #[test]
    fn recognition() {
        let z2 = parse_group("Z2").unwrap();
        let delta = GFunction::from_real(&z2, &[2f64.sqrt(), 0.0]).unwrap();
        let m = recognize_kd_positive_pure(&delta, 1e-9).unwrap().unwrap();
        assert_eq!(m.subgroup.elements, vec![0]);
        assert_eq!(m.g_rep, z2.element(0));

        let phased = GFunction::character(&z2, 1).scaled(Complex64::from_polar(1.0, std::f64::consts::PI / 7.0));
        let m = recognize_kd_positive_pure(&phased, 1e-9).unwrap().unwrap();
        assert_eq!(m.subgroup.order(), 2);
        assert_eq!(m.chi_rep, z2.character(1));

        let neg = GFunction::from_real(&z2, &[1.2, 0.56f64.sqrt()]).unwrap();
        assert!(recognize_kd_positive_pure(&neg, 1e-9).unwrap().is_none());

        let bad = GFunction::from_real(&z2, &[1.0, 1.0]).unwrap().scaled(Complex64::new(2.0, 0.0));
        assert!(matches!(recognize_kd_positive_pure(&bad, 1e-9), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn json_shape() {
        let z2 = parse_group("Z2").unwrap();
        let fam = enumerate_kd_positive_pure(&z2).unwrap();
        let v = serde_json::to_value(&fam[0]).unwrap();
        assert_eq!(v["H"], serde_json::json!([0]));
        assert_eq!(v["g"], serde_json::json!([0]));
        assert_eq!(v["chi"], serde_json::json!([0]));
        assert_eq!(v["vector"][1], serde_json::json!({"re": 0.0, "im": 0.0}));
    }
}
