//! The classical fragment: KD-real observables, KD-positive states, and
//! the span and convex hull of the KD-positive pure states.
//!
//! Membership questions are answered in KD coordinates. `kd` is unitary
//! from the Hilbert-Schmidt inner product to `(1/|G|) sum conj(F) F'`, and
//! the tables of the pure family are real indicators, so a state is
//! compared against the family through the real part of its table
//! scaled by `1/sqrt(|G|)`; the imaginary part only adds a constant.

mod projection;
mod simplex_ls;
mod witness;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classify::{enumerate_kd_positive_pure, KdPureState};
use crate::error::{Error, Result};
use crate::group::{Character, Element, FiniteAbelianGroup};
use crate::kd::{char_fn, kd, CharOrder};
use crate::operator::Operator;

pub use projection::{project_onto_kdpos, project_onto_kdpos_with, Projection, ProjectionMethod, ProjectionStatus};
pub use witness::{find_conv_gap_witness, find_conv_gap_witness_with, ConvGapWitness, WitnessConfig, WitnessSearch};

/// Kernel equal to its adjoint within the structural tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct HermitianOperator(Operator);

impl HermitianOperator {
    pub const TOL: f64 = 1e-10;

    pub fn new(op: Operator) -> Result<Self> {
        Self::with_tol(op, Self::TOL)
    }

    /// Deviations are measured on the kernel, so the tolerance scales
    /// with `|G|` relative to matrix entries.
    pub fn with_tol(op: Operator, tol: f64) -> Result<Self> {
        let dev = op.hermiticity_deviation();
        if dev > tol {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self(op))
    }

    pub fn as_operator(&self) -> &Operator {
        &self.0
    }

    pub fn into_inner(self) -> Operator {
        self.0
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.0.group
    }
}

impl std::ops::Deref for HermitianOperator {
    type Target = Operator;

    fn deref(&self) -> &Operator {
        &self.0
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let op = Operator::deserialize(d)?;
        Self::new(op).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KdRealReport {
    pub verdict: bool,
    /// Larger of the two measured violations.
    pub worst_violation: f64,
    /// `max |Im KD_A|`.
    pub imaginary_violation: f64,
    /// `max |X0_A(g, chi)|` over `chi(g) != 1`.
    pub support_violation: f64,
    pub method_agreement: bool,
}

/// KD-reality by two routes: the imaginary part of the table, and the
/// support of the characteristic function `X0` on `{chi(g) = 1}`.
pub fn is_kd_real(a: &HermitianOperator, tol: f64) -> KdRealReport {
    let group = a.group();
    let n = group.order();
    let imaginary_violation = kd(a).max_abs_imag();
    let x0 = char_fn(a, CharOrder::Standard0).expect("standard order is always defined");
    let mut support_violation = 0.0f64;
    for g in 0..n {
        for c in 0..n {
            if !group.pairs_trivially(c, g) {
                support_violation = support_violation.max(x0.get(g, c).norm());
            }
        }
    }
    let direct = imaginary_violation <= tol;
    let support = support_violation <= tol;
    KdRealReport {
        verdict: direct && support,
        worst_violation: imaginary_violation.max(support_violation),
        imaginary_violation,
        support_violation,
        method_agreement: direct == support,
    }
}

/// Number of phase-space points with `chi(g) = 1`.
pub fn kd_real_dimension(group: &FiniteAbelianGroup) -> usize {
    let n = group.order();
    (0..n).map(|g| (0..n).filter(|&c| group.pairs_trivially(c, g)).count()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KdPositivityReport {
    pub verdict: bool,
    pub worst_violation: f64,
    pub max_imag: f64,
    pub min_real: f64,
}

pub fn is_kd_positive_state(rho: &HermitianOperator, tol: f64) -> Result<KdPositivityReport> {
    rho.check_state(tol)?;
    Ok(positivity_with_tol(rho, tol))
}

fn positivity_with_tol(rho: &Operator, tol: f64) -> KdPositivityReport {
    let t = kd(rho);
    let max_imag = t.max_abs_imag();
    let min_real = t.min_real();
    let worst_violation = max_imag.max(-min_real).max(0.0);
    KdPositivityReport { verdict: max_imag <= tol && min_real >= -tol, worst_violation, max_imag, min_real }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Inside,
    Outside,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Inside => 0,
            Verdict::Outside => 3,
            Verdict::Inconclusive => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HullTerm {
    pub member: usize,
    pub lambda: f64,
    #[serde(rename = "H")]
    pub subgroup: Vec<usize>,
    pub g: Element,
    pub chi: Character,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Family coefficients; nonnegative and summing to one for hull queries.
    Coefficients { terms: Vec<HullTerm> },
    /// Hermitian `W` with `<W, rho> - max_i <W, P_i> = gap`; for span
    /// queries the maximum runs over `|<W, P_i>|`.
    Separating { functional: Operator, gap: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipResult {
    pub verdict: Verdict,
    pub residual: f64,
    pub tolerance: f64,
    pub certificate: Certificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span_dimension: Option<usize>,
}

/// The enumerated KD-positive pure states with their KD tables laid out
/// as columns of a real design matrix.
#[derive(Debug, Clone)]
pub struct PureFamily {
    group: FiniteAbelianGroup,
    members: Vec<KdPureState>,
    projectors: Vec<Operator>,
    design: DMatrix<f64>,
}

impl PureFamily {
    pub fn new(group: &FiniteAbelianGroup) -> Result<Self> {
        let members = enumerate_kd_positive_pure(group)?;
        let n = group.order();
        let scale = 1.0 / (n as f64).sqrt();
        let mut design = DMatrix::zeros(n * n, members.len());
        for (j, m) in members.iter().enumerate() {
            let t = m.kd_indicator();
            for (i, v) in t.values.iter().enumerate() {
                design[(i, j)] = v.re * scale;
            }
        }
        let projectors = members.iter().map(|m| m.projector()).collect();
        Ok(Self { group: group.clone(), members, projectors, design })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn members(&self) -> &[KdPureState] {
        &self.members
    }

    pub fn projectors(&self) -> &[Operator] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn span_dimension(&self) -> usize {
        let svd = self.design.clone().svd(false, false);
        let top = svd.singular_values.max();
        let cut = top * 1e-10 * self.design.nrows().max(self.design.ncols()) as f64;
        svd.singular_values.iter().filter(|&&s| s > cut).count()
    }

    fn check_group(&self, op: &Operator) -> Result<()> {
        if op.group != self.group {
            return Err(Error::GroupMismatch(format!("operator on {} but family on {}", op.group, self.group)));
        }
        Ok(())
    }

    fn coordinates(&self, op: &Operator) -> (DVector<f64>, f64) {
        let t = kd(op);
        let n = self.group.order() as f64;
        let re = DVector::from_iterator(t.values.len(), t.values.iter().map(|v| v.re / n.sqrt()));
        let im2 = t.values.iter().map(|v| v.im * v.im).sum::<f64>() / n;
        (re, im2)
    }

    fn combination(&self, lambda: &[f64]) -> Operator {
        let n = self.group.order();
        let mut k = DMatrix::<Complex64>::zeros(n, n);
        for (l, p) in lambda.iter().zip(&self.projectors) {
            if *l != 0.0 {
                k += &p.kernel * Complex64::new(*l, 0.0);
            }
        }
        Operator { group: self.group.clone(), kernel: k }
    }

    fn terms(&self, lambda: &[f64]) -> Vec<HullTerm> {
        lambda
            .iter()
            .enumerate()
            .filter(|(_, l)| **l != 0.0)
            .map(|(i, &l)| {
                let m = &self.members[i];
                HullTerm {
                    member: i,
                    lambda: l,
                    subgroup: m.subgroup.elements.clone(),
                    g: m.g_rep.clone(),
                    chi: m.chi_rep.clone(),
                }
            })
            .collect()
    }

    /// Unit-norm `rho - sigma` and its HS norm; `None` when they coincide.
    fn separating(rho: &Operator, sigma: &Operator) -> Option<(Operator, f64)> {
        let d = rho.sub(sigma).hermitian_part();
        let norm = d.hs_norm();
        (norm > 0.0).then(|| (d.scale(1.0 / norm), norm))
    }

    /// `<W, rho> - max_i <W, P_i>`, or with `|<W, P_i>|` for span queries.
    pub fn functional_gap(&self, w: &Operator, rho: &Operator, absolute: bool) -> f64 {
        let top = self
            .projectors
            .iter()
            .map(|p| {
                let v = w.hs_inner(p).re;
                if absolute {
                    v.abs()
                } else {
                    v
                }
            })
            .fold(f64::NEG_INFINITY, f64::max);
        w.hs_inner(rho).re - top
    }

    /// Least-squares projection onto the real span of the family.
    pub fn span_membership(&self, a: &HermitianOperator, tol: f64) -> Result<MembershipResult> {
        self.check_group(a)?;
        let (b, _) = self.coordinates(a);
        let svd = self.design.clone().svd(true, true);
        let top = svd.singular_values.max();
        let cut = top * 1e-10 * self.design.nrows().max(self.design.ncols()) as f64;
        let rank = svd.singular_values.iter().filter(|&&s| s > cut).count();
        let lambda = svd.solve(&b, cut).map_err(|e| Error::Malformed(e.to_string()))?;
        let lambda: Vec<f64> = lambda.iter().copied().collect();
        let sigma = self.combination(&lambda);
        let residual = a.hs_distance(&sigma);
        let (verdict, certificate) = if residual <= tol {
            (Verdict::Inside, Certificate::Coefficients { terms: self.terms(&lambda) })
        } else {
            match Self::separating(a, &sigma) {
                Some((w, _)) => {
                    let gap = self.functional_gap(&w, a, true);
                    let verdict = if gap > tol { Verdict::Outside } else { Verdict::Inconclusive };
                    (verdict, Certificate::Separating { functional: w, gap })
                }
                None => (Verdict::Inconclusive, Certificate::Coefficients { terms: self.terms(&lambda) }),
            }
        };
        Ok(MembershipResult { verdict, residual, tolerance: tol, certificate, span_dimension: Some(rank) })
    }

    /// Simplex-constrained least squares over the family. The state must
    /// be KD-positive within `tol`.
    pub fn conv_membership(&self, rho: &HermitianOperator, tol: f64) -> Result<MembershipResult> {
        self.check_group(rho)?;
        rho.check_state(tol)?;
        let pos = positivity_with_tol(rho, tol);
        if !pos.verdict {
            return Err(Error::Precondition(format!(
                "state is not KD-positive (worst violation {:e})",
                pos.worst_violation
            )));
        }
        let (b, _) = self.coordinates(rho);
        let sol = simplex_ls::solve(&self.design, &b);
        let sigma = self.combination(&sol.lambda);
        let residual = rho.hs_distance(&sigma);
        let coefficients = || Certificate::Coefficients { terms: self.terms(&sol.lambda) };
        let (verdict, certificate) = if residual <= tol {
            (Verdict::Inside, coefficients())
        } else {
            match Self::separating(rho, &sigma) {
                Some((w, _)) => {
                    let gap = self.functional_gap(&w, rho, false);
                    if gap > tol {
                        (Verdict::Outside, Certificate::Separating { functional: w, gap })
                    } else {
                        (Verdict::Inconclusive, coefficients())
                    }
                }
                None => (Verdict::Inconclusive, coefficients()),
            }
        };
        Ok(MembershipResult { verdict, residual, tolerance: tol, certificate, span_dimension: None })
    }

    /// Re-evaluates a certificate from operators alone. Hull coefficients
    /// must be a probability vector reconstructing `op` within the result
    /// tolerance; a separating functional must reproduce its gap within
    /// `gap_tol` and exceed the tolerance.
    pub fn recheck(&self, op: &Operator, result: &MembershipResult, hull: bool, gap_tol: f64) -> bool {
        match &result.certificate {
            Certificate::Coefficients { terms } => {
                let mut lambda = vec![0.0; self.len()];
                for t in terms {
                    if t.member >= lambda.len() {
                        return false;
                    }
                    lambda[t.member] = t.lambda;
                }
                if hull {
                    let total: f64 = lambda.iter().sum();
                    if lambda.iter().any(|&l| l < 0.0) || (total - 1.0).abs() > result.tolerance {
                        return false;
                    }
                }
                result.verdict != Verdict::Inside || op.hs_distance(&self.combination(&lambda)) <= result.tolerance
            }
            Certificate::Separating { functional, gap } => {
                let again = self.functional_gap(functional, op, !hull);
                (again - gap).abs() <= gap_tol && again > result.tolerance
            }
        }
    }
}

pub fn span_membership(a: &HermitianOperator, tol: f64) -> Result<MembershipResult> {
    PureFamily::new(a.group())?.span_membership(a, tol)
}

pub fn conv_membership(rho: &HermitianOperator, tol: f64) -> Result<MembershipResult> {
    PureFamily::new(rho.group())?.conv_membership(rho, tol)
}
