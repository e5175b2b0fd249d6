//! Invariant suites over one group, assembled into a report.
//!
//! Every check names the identity it exercises. Checks run independently
//! from per-check random streams, so the report does not depend on the
//! order in which suites are scheduled; it is sorted by check name.

use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::recognize_in;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::fragment::{
    find_conv_gap_witness, is_kd_positive_state, is_kd_real, kd_real_dimension, project_onto_kdpos, HermitianOperator,
    PureFamily, Verdict,
};
use crate::group::FiniteAbelianGroup;
use crate::kd::{akd, char_fn, kd, kd_inverse, marginals, symplectic_fourier, wigner, CharOrder};
use crate::operator::Operator;
use crate::random::{random_hermitian, random_operator, random_pure_vector, random_state, rng};
use crate::weyl_heisenberg::{wh_conjugate, WHElement};

/// Check names with the identity each one exercises.
pub const ANCHORS: &[(&str, &str)] = &[
    ("classify.family_size", "KD-positive pure states: one per subgroup H, coset g+H and coset chi H^perp"),
    ("classify.indicator", "KD of a subgroup state is the indicator of (g+H) x (chi H^perp)"),
    ("classify.recognition", "KD-positive pure states are exactly the subgroup states"),
    ("fragment.certificates", "hull certificates re-evaluate from the projectors"),
    ("fragment.chain", "pure KD-positive states lie in the KD-positive states, which lie in the KD-real observables"),
    ("fragment.kd_real_agreement", "Hermitian A is KD-real iff X0_A is supported on {chi(g) = 1}"),
    ("fragment.kd_real_ratio", "Hermitian A is KD-real iff X0_A is supported on {chi(g) = 1}"),
    ("fragment.projection_idempotent", "nearest-point projection onto a closed convex set is idempotent"),
    ("fragment.span_dimension", "KD-real observables are the real span of the KD-positive pure states"),
    ("fragment.witness_search", "hull of the KD-positive pure states versus all KD-positive states"),
    ("kd.anti_kd", "aKD_A = conj(KD_{A*}) = Fs(X0_A)"),
    ("kd.marginals", "Born rule: KD marginals are the position and momentum distributions"),
    ("kd.oconnell", "O'Connell formula: KD_A = Fs(X1_A)"),
    ("kd.round_trip", "KD inversion formula"),
    ("kd.total_mass", "total KD mass equals the trace"),
    ("kd.unitarity", "KD unitarity: <A, B>_HS = <KD_A, KD_B>"),
    ("wh.covariance", "Weyl-Heisenberg covariance: KD_{U A U*}(x, c) = KD_A(x - g, c - chi)"),
    ("wh.family_closed", "Weyl-Heisenberg conjugation permutes the KD-positive pure states"),
    ("wigner.doubling", "Wigner function Fs(X_{1/2}) via the inverse of the doubling map"),
];

pub fn anchor(name: &str) -> &'static str {
    ANCHORS.iter().find(|(n, _)| *n == name).map(|(_, a)| *a).unwrap_or("")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub anchor: String,
    pub status: CheckStatus,
    pub measured: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        let status = if measured <= tolerance { CheckStatus::Pass } else { CheckStatus::Fail };
        Self { name: name.into(), anchor: anchor(name).into(), status, measured, tolerance, detail: None }
    }

    fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }

    fn failed(name: &str, err: &Error) -> Self {
        Self {
            name: name.into(),
            anchor: anchor(name).into(),
            status: CheckStatus::Fail,
            measured: 0.0,
            tolerance: 0.0,
            detail: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub group: String,
    pub seed: u64,
    pub timestamp: u64,
    pub pass: bool,
    pub summary: Summary,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random operators per sampled identity.
    pub samples: usize,
    pub witness_budget: usize,
    pub tolerances: Tolerances,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 0, samples: 100, witness_budget: 2_000, tolerances: Tolerances::default() }
    }
}

type CheckFn = fn(&Ctx) -> Result<Check>;

struct Ctx<'a> {
    group: &'a FiniteAbelianGroup,
    family: &'a PureFamily,
    opts: &'a VerifyOptions,
}

impl Ctx<'_> {
    fn rng(&self, stream: u64) -> rand_chacha::ChaCha8Rng {
        rng(self.opts.seed, stream)
    }

    fn herm(&self, op: Operator) -> Result<HermitianOperator> {
        HermitianOperator::with_tol(op, self.opts.tolerances.structural)
    }
}

const CHECKS: &[(&str, CheckFn)] = &[
    ("classify.family_size", family_size),
    ("classify.indicator", indicator),
    ("classify.recognition", recognition),
    ("fragment.certificates", certificates),
    ("fragment.chain", chain),
    ("fragment.kd_real_agreement", kd_real_agreement),
    ("fragment.kd_real_ratio", kd_real_ratio),
    ("fragment.projection_idempotent", projection_idempotent),
    ("fragment.span_dimension", span_dimension),
    ("fragment.witness_search", witness_search),
    ("kd.anti_kd", anti_kd),
    ("kd.marginals", born_marginals),
    ("kd.oconnell", oconnell),
    ("kd.round_trip", round_trip),
    ("kd.total_mass", total_mass),
    ("kd.unitarity", unitarity),
    ("wh.covariance", covariance),
    ("wh.family_closed", family_closed),
    ("wigner.doubling", wigner_doubling),
];

pub fn verify_all(group: &FiniteAbelianGroup, opts: &VerifyOptions) -> Result<VerificationReport> {
    let family = PureFamily::new(group)?;
    let ctx = Ctx { group, family: &family, opts };
    let mut checks: Vec<Check> = CHECKS
        .par_iter()
        .map(|(name, f)| f(&ctx).unwrap_or_else(|e| Check::failed(name, &e)))
        .collect();
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    let passed = checks.iter().filter(|c| c.status == CheckStatus::Pass).count();
    let summary = Summary { total: checks.len(), passed, failed: checks.len() - passed };
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    Ok(VerificationReport {
        suite: "all".into(),
        group: group.to_string(),
        seed: opts.seed,
        timestamp,
        pass: summary.failed == 0,
        summary,
        checks,
    })
}

fn unitarity(ctx: &Ctx) -> Result<Check> {
    let mut r = ctx.rng(1);
    let mut worst = 0.0f64;
    for _ in 0..ctx.opts.samples {
        let a = random_operator(ctx.group, &mut r);
        let b = random_operator(ctx.group, &mut r);
        worst = worst.max((a.hs_inner(&b) - kd(&a).inner(&kd(&b))).norm());
    }
    Ok(Check::at_most("kd.unitarity", worst, ctx.opts.tolerances.structural))
}

fn round_trip(ctx: &Ctx) -> Result<Check> {
    let mut r = ctx.rng(2);
    let mut worst = 0.0f64;
    for _ in 0..ctx.opts.samples {
        let a = random_operator(ctx.group, &mut r);
        worst = worst.max(kd_inverse(&kd(&a)).hs_distance(&a));
    }
    Ok(Check::at_most("kd.round_trip", worst, ctx.opts.tolerances.structural))
}

fn oconnell(ctx: &Ctx) -> Result<Check> {
    let mut r = ctx.rng(3);
    let mut worst = 0.0f64;
    for _ in 0..ctx.opts.samples {
        let a = random_operator(ctx.group, &mut r);
        let via_char = symplectic_fourier(&char_fn(&a, CharOrder::Standard1)?);
        worst = worst.max(kd(&a).max_abs_diff(&via_char));
    }
    Ok(Check::at_most("kd.oconnell", worst, ctx.opts.tolerances.structural))
}

fn anti_kd(ctx: &Ctx) -> Result<Check> {
    let mut r = ctx.rng(4);
    let mut worst = 0.0f64;
    for _ in 0..ctx.opts.samples {
        let a = random_operator(ctx.group, &mut r);
        worst = worst.max(akd(&a).max_abs_diff(&kd(&a.adjoint()).conj()));
    }
    Ok(Check::at_most("kd.anti_kd", worst, ctx.opts.tolerances.structural))
}

fn born_marginals(ctx: &Ctx) -> Result<Check> {
    let g = ctx.group;
    let n = g.order();
    let mut r = ctx.rng(5);
    let mut worst = 0.0f64;
    for i in 0..ctx.opts.samples {
        let rho = random_state(g, 1 + i % n, &mut r);
        let m = marginals(&rho, ctx.opts.tolerances.positivity)?;
        let mat = rho.matrix();
        for x in 0..n {
            // position marginal is a density for mu_G: |G| <x|rho|x>
            worst = worst.max((m.position[x] - mat[(x, x)].re * n as f64).abs());
        }
        for c in 0..n {
            let chi: Vec<Complex64> = (0..n).map(|x| g.pair_idx(c, x) / (n as f64).sqrt()).collect();
            let mut p = Complex64::new(0.0, 0.0);
            for x in 0..n {
                for y in 0..n {
                    p += chi[x].conj() * mat[(x, y)] * chi[y];
                }
            }
            worst = worst.max((m.momentum[c] - p.re).abs());
        }
    }
    Ok(Check::at_most("kd.marginals", worst, ctx.opts.tolerances.structural))
}

fn total_mass(ctx: &Ctx) -> Result<Check> {
    let mut r = ctx.rng(6);
    let mut worst = 0.0f64;
    for i in 0..ctx.opts.samples {
        let rho = random_state(ctx.group, 1 + i % ctx.group.order(), &mut r);
        worst = worst.max((kd(&rho).total_mass() - Complex64::new(1.0, 0.0)).norm());
    }
    Ok(Check::at_most("kd.total_mass", worst, ctx.opts.tolerances.structural))
}

fn random_wh<R: rand::Rng>(g: &FiniteAbelianGroup, r: &mut R) -> WHElement {
    let n = g.order();
    let z = Complex64::from_polar(1.0, r.random_range(0.0..std::f64::consts::TAU));
    WHElement::from_indices(g, r.random_range(0..n), r.random_range(0..n), z).expect("unit phase")
}

fn covariance(ctx: &Ctx) -> Result<Check> {
    let g = ctx.group;
    let n = g.order();
    let mut r = ctx.rng(7);
    let mut worst = 0.0f64;
    for _ in 0..ctx.opts.samples {
        let a = random_operator(g, &mut r);
        let w = random_wh(g, &mut r);
        let (gi, ci) = (g.element_index(&w.g)?, g.character_index(&w.chi)?);
        let moved = kd(&wh_conjugate(&a, &w)?);
        let t = kd(&a);
        for x in 0..n {
            for c in 0..n {
                worst = worst.max((moved.get(x, c) - t.get(g.sub_idx(x, gi), g.sub_idx(c, ci))).norm());
            }
        }
    }
    Ok(Check::at_most("wh.covariance", worst, ctx.opts.tolerances.structural))
}

fn family_closed(ctx: &Ctx) -> Result<Check> {
    let g = ctx.group;
    let mut r = ctx.rng(8);
    let tol = ctx.opts.tolerances.structural;
    let mut worst = 0.0f64;
    let members = ctx.family.members();
    for _ in 0..ctx.opts.samples.min(20) {
        let w = random_wh(g, &mut r);
        for m in members {
            let moved = wh_conjugate(&m.projector(), &w)?;
            let nearest = ctx.family.projectors().iter().map(|p| p.hs_distance(&moved)).fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest);
        }
    }
    Ok(Check::at_most("wh.family_closed", worst, tol))
}

fn family_size(ctx: &Ctx) -> Result<Check> {
    let g = ctx.group;
    let subgroups = g.enumerate_subgroups()?.len();
    let expected = g.order() * subgroups;
    let found = ctx.family.len();
    Ok(Check::at_most("classify.family_size", found.abs_diff(expected) as f64, 0.0)
        .detail(format!("{found} states, {subgroups} subgroups")))
}

fn indicator(ctx: &Ctx) -> Result<Check> {
    let mut worst = 0.0f64;
    for (m, p) in ctx.family.members().iter().zip(ctx.family.projectors()) {
        worst = worst.max(kd(p).max_abs_diff(&m.kd_indicator()));
    }
    Ok(Check::at_most("classify.indicator", worst, 1e-12))
}

fn recognition(ctx: &Ctx) -> Result<Check> {
    let g = ctx.group;
    let tol = ctx.opts.tolerances.positivity;
    let mut r = ctx.rng(9);
    let mut missed = 0usize;
    let mut positive = 0usize;
    for _ in 0..ctx.opts.samples * 10 {
        let psi = random_pure_vector(g, &mut r);
        let t = kd(&Operator::projector(&psi));
        if t.max_abs_imag() <= tol && t.min_real() >= -tol {
            positive += 1;
            if recognize_in(ctx.family.members(), &psi, tol)?.is_none() {
                missed += 1;
            }
        }
    }
    // every member, with a random global phase, is recognized as itself
    for (i, m) in ctx.family.members().iter().enumerate() {
        let phase = Complex64::from_polar(1.0, 0.37 * i as f64);
        let found = recognize_in(ctx.family.members(), &m.vector.scaled(phase), tol)?;
        if found.map(|f| f != m).unwrap_or(true) {
            missed += 1;
        }
    }
    Ok(Check::at_most("classify.recognition", missed as f64, 0.0)
        .detail(format!("{positive} KD-positive among {} random states", ctx.opts.samples * 10)))
}

fn kd_real_agreement(ctx: &Ctx) -> Result<Check> {
    let mut r = ctx.rng(10);
    let mut disagreements = 0usize;
    for _ in 0..ctx.opts.samples {
        let a = ctx.herm(random_hermitian(ctx.group, &mut r))?;
        if !is_kd_real(&a, ctx.opts.tolerances.structural).method_agreement {
            disagreements += 1;
        }
    }
    for p in ctx.family.projectors() {
        let rep = is_kd_real(&ctx.herm(p.clone())?, ctx.opts.tolerances.structural);
        if !rep.method_agreement || !rep.verdict {
            disagreements += 1;
        }
    }
    Ok(Check::at_most("fragment.kd_real_agreement", disagreements as f64, 0.0))
}

fn kd_real_ratio(ctx: &Ctx) -> Result<Check> {
    let mut r = ctx.rng(11);
    let mut worst = 1.0f64;
    for _ in 0..ctx.opts.samples {
        let a = ctx.herm(random_hermitian(ctx.group, &mut r))?;
        let rep = is_kd_real(&a, ctx.opts.tolerances.structural);
        if !rep.verdict {
            let (hi, lo) = if rep.imaginary_violation > rep.support_violation {
                (rep.imaginary_violation, rep.support_violation)
            } else {
                (rep.support_violation, rep.imaginary_violation)
            };
            worst = worst.max(if lo > 0.0 { hi / lo } else { f64::MAX });
        }
    }
    if ctx.group.is_trivial() {
        worst = 1.0;
    }
    Ok(Check::at_most("fragment.kd_real_ratio", worst, 10.0))
}

fn span_dimension(ctx: &Ctx) -> Result<Check> {
    let span = ctx.family.span_dimension();
    let expected = kd_real_dimension(ctx.group);
    Ok(Check::at_most("fragment.span_dimension", span.abs_diff(expected) as f64, 0.0)
        .detail(format!("span {span}, KD-real dimension {expected}")))
}

fn chain(ctx: &Ctx) -> Result<Check> {
    let tols = &ctx.opts.tolerances;
    let mut failures = 0usize;
    for p in ctx.family.projectors() {
        let h = ctx.herm(p.clone())?;
        let positive = is_kd_positive_state(&h, tols.positivity)?.verdict;
        let real = is_kd_real(&h, tols.structural).verdict;
        let span = ctx.family.span_membership(&h, tols.membership)?.verdict == Verdict::Inside;
        let hull = ctx.family.conv_membership(&h, tols.membership)?.verdict == Verdict::Inside;
        if !(positive && real && span && hull) {
            failures += 1;
        }
    }
    let mut r = ctx.rng(12);
    for i in 0..ctx.opts.samples {
        let rho = ctx.herm(random_state(ctx.group, 1 + i % ctx.group.order(), &mut r))?;
        let positive = is_kd_positive_state(&rho, tols.positivity)?.verdict;
        if positive && !is_kd_real(&rho, tols.structural).verdict {
            failures += 1;
        }
    }
    Ok(Check::at_most("fragment.chain", failures as f64, 0.0))
}

fn certificates(ctx: &Ctx) -> Result<Check> {
    let tols = &ctx.opts.tolerances;
    let mut failures = 0usize;
    let mixed = ctx.herm(Operator::maximally_mixed(ctx.group))?;
    let mut targets = vec![mixed];
    for p in ctx.family.projectors().iter().take(8) {
        targets.push(ctx.herm(p.clone())?);
    }
    for t in &targets {
        let res = ctx.family.conv_membership(t, tols.membership)?;
        if res.verdict != Verdict::Inside || !ctx.family.recheck(t, &res, true, tols.membership) {
            failures += 1;
        }
    }
    Ok(Check::at_most("fragment.certificates", failures as f64, 0.0))
}

fn projection_idempotent(ctx: &Ctx) -> Result<Check> {
    let tol = 1e-10;
    let mut r = ctx.rng(13);
    let mut worst = 0.0f64;
    for _ in 0..ctx.opts.samples.min(10) {
        let rho = ctx.herm(random_state(ctx.group, 1, &mut r))?;
        let first = project_onto_kdpos(&rho, 100_000, tol)?;
        let again = project_onto_kdpos(&ctx.herm(first.rho.hermitian_part())?, 100_000, tol)?;
        worst = worst.max(again.rho.hs_distance(&first.rho));
    }
    Ok(Check::at_most("fragment.projection_idempotent", worst, 2.0 * tol * ctx.group.order() as f64))
}

fn witness_search(ctx: &Ctx) -> Result<Check> {
    let s = find_conv_gap_witness(ctx.group, ctx.opts.seed, ctx.opts.witness_budget)?;
    let detail = match &s.witness {
        Some(w) => format!("gap {:e} at path {} step {} ({} steps)", w.gap, w.path, w.step, s.steps_used),
        None => format!("none found at budget {}", s.budget),
    };
    let gap = s.witness.as_ref().map(|w| w.gap).unwrap_or(0.0);
    let verified = match &s.witness {
        Some(w) => (ctx.family.functional_gap(&w.functional, &w.rho, false) - w.gap).abs() <= 1e-8,
        None => true,
    };
    let mut c = Check::at_most("fragment.witness_search", if verified { 0.0 } else { 1.0 }, 0.0).detail(detail);
    c.measured = gap;
    c.tolerance = ctx.opts.tolerances.witness;
    Ok(c)
}

fn wigner_doubling(ctx: &Ctx) -> Result<Check> {
    let g = ctx.group;
    let mut r = ctx.rng(14);
    if !g.doubling().invertible {
        let a = random_hermitian(g, &mut r);
        let rejected = matches!(wigner(&a), Err(Error::UnsupportedOrder(_)));
        return Ok(Check::at_most("wigner.doubling", if rejected { 0.0 } else { 1.0 }, 0.0)
            .detail("half order rejected on a group with an even factor"));
    }
    let mut worst = 0.0f64;
    for _ in 0..ctx.opts.samples {
        let a = random_hermitian(g, &mut r);
        worst = worst.max(wigner(&a)?.max_abs_imag());
    }
    Ok(Check::at_most("wigner.doubling", worst, ctx.opts.tolerances.structural).detail("imaginary part on Hermitian inputs"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::parse_group;

    #[test]
    fn klein_group_report() {
        let g = parse_group("Z2xZ2").unwrap();
        let opts = VerifyOptions { samples: 20, witness_budget: 200, ..Default::default() };
        let rep = verify_all(&g, &opts).unwrap();
        for c in &rep.checks {
            assert_eq!(c.status, CheckStatus::Pass, "{c:?}");
            assert!(!c.anchor.is_empty());
        }
        assert!(rep.pass);
        let sizes = rep.checks.iter().find(|c| c.name == "classify.family_size").unwrap();
        assert_eq!(sizes.detail.as_deref(), Some("20 states, 5 subgroups"));
        let names: Vec<_> = rep.checks.iter().map(|c| c.name.clone()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }

    #[test]
    fn odd_group_report() {
        let g = parse_group("Z3").unwrap();
        let opts = VerifyOptions { samples: 20, witness_budget: 100, ..Default::default() };
        let rep = verify_all(&g, &opts).unwrap();
        assert!(rep.pass, "{:?}", rep.checks.iter().filter(|c| c.status == CheckStatus::Fail).collect::<Vec<_>>());
    }

    #[test]
    fn anchors_cover_checks() {
        for (name, _) in CHECKS {
            assert!(!anchor(name).is_empty(), "{name}");
        }
        assert_eq!(ANCHORS.len(), CHECKS.len());
    }
}
