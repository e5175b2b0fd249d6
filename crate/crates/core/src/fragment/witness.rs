//! Search for KD-positive states outside the hull of the pure family.
//!
//! Each path draws a random traceless Hermitian direction `W` and runs
//! projected gradient ascent of `<W, rho>` from the maximally mixed state.
//! The projection onto the KD-positive states is the ADMM variant of
//! [`super::project_onto_kdpos_with`], warm-started along the path. Every iterate is handed to the
//! hull solver; an outside verdict is kept only if its separating
//! functional re-evaluates to the same gap from the projectors.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::projection::{admm, AdmmWarm, KdFrame};
use super::{positivity_with_tol, Certificate, HermitianOperator, PureFamily, Verdict};
use crate::error::Result;
use crate::group::FiniteAbelianGroup;
use crate::operator::Operator;
use crate::random::{random_hermitian, rng};

#[derive(Debug, Clone, Serialize)]
pub struct WitnessConfig {
    pub steps_per_path: usize,
    pub step_size: f64,
    pub projection_iters: usize,
    pub projection_tol: f64,
    pub membership_tol: f64,
    pub gap_tol: f64,
    /// Paths evaluated between early-exit checks.
    pub batch: usize,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        Self {
            steps_per_path: 8,
            step_size: 0.5,
            projection_iters: 5_000,
            projection_tol: 1e-10,
            membership_tol: 1e-8,
            gap_tol: 1e-6,
            batch: 16,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvGapWitness {
    pub rho: Operator,
    /// Separating functional certified by the hull solver.
    #[serde(rename = "W")]
    pub functional: Operator,
    pub gap: f64,
    /// HS distance from `rho` to the hull.
    pub residual: f64,
    /// Random ascent direction of the path that produced `rho`.
    pub direction: Operator,
    pub path: usize,
    pub step: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessSearch {
    pub budget: usize,
    pub steps_used: usize,
    pub paths: usize,
    pub best_gap: f64,
    pub witness: Option<ConvGapWitness>,
}

pub fn find_conv_gap_witness(group: &FiniteAbelianGroup, seed: u64, budget: usize) -> Result<WitnessSearch> {
    find_conv_gap_witness_with(group, seed, budget, &WitnessConfig::default())
}

pub fn find_conv_gap_witness_with(
    group: &FiniteAbelianGroup,
    seed: u64,
    budget: usize,
    cfg: &WitnessConfig,
) -> Result<WitnessSearch> {
    let family = PureFamily::new(group)?;
    let steps = cfg.steps_per_path.max(1);
    let total_paths = budget.div_ceil(steps);
    let mut steps_used = 0;
    let mut paths = 0;
    let mut best: Option<ConvGapWitness> = None;
    let mut best_gap = 0.0f64;

    let mut start = 0;
    while start < total_paths {
        let end = (start + cfg.batch.max(1)).min(total_paths);
        let results: Vec<(usize, f64, Option<ConvGapWitness>)> = (start..end)
            .into_par_iter()
            .map(|path| {
                let len = steps.min(budget - path * steps);
                run_path(&family, seed, path, len, cfg)
            })
            .collect();
        for (used, gap, w) in results {
            steps_used += used;
            paths += 1;
            best_gap = best_gap.max(gap);
            if let Some(w) = w {
                if best.as_ref().is_none_or(|b| w.gap > b.gap) {
                    best = Some(w);
                }
            }
        }
        if best.is_some() {
            break;
        }
        start = end;
    }
    Ok(WitnessSearch { budget, steps_used, paths, best_gap, witness: best })
}

fn run_path(
    family: &PureFamily,
    seed: u64,
    path: usize,
    len: usize,
    cfg: &WitnessConfig,
) -> (usize, f64, Option<ConvGapWitness>) {
    let group = family.group();
    let mut r = rng(seed, path as u64);
    let direction = traceless(&random_hermitian(group, &mut r));
    let frame = KdFrame::new(group);
    let step_m = direction.matrix() * Complex64::new(cfg.step_size, 0.0);
    let mut m = Operator::maximally_mixed(group).matrix();
    let mut warm: AdmmWarm = None;
    let mut best: Option<ConvGapWitness> = None;
    let mut best_gap = 0.0f64;
    for step in 0..len {
        let run = admm(&frame, &(&m + &step_m), cfg.projection_iters, cfg.projection_tol, &mut warm);
        let converged = run.converged;
        m = run.m;
        if !converged {
            continue;
        }
        let rho = Operator::from_matrix(group, m.clone()).expect("square");
        if let Some(w) = certify(family, &rho, cfg) {
            best_gap = best_gap.max(w.0);
            if w.0 > cfg.gap_tol && best.as_ref().is_none_or(|b| w.0 > b.gap) {
                best = Some(ConvGapWitness {
                    rho: rho.clone(),
                    functional: w.1,
                    gap: w.0,
                    residual: w.2,
                    direction: direction.clone(),
                    path,
                    step,
                });
            }
        }
    }
    (len, best_gap, best)
}

fn traceless(w: &Operator) -> Operator {
    let n = w.dim() as f64;
    let d = w.sub(&Operator::identity(&w.group).scale(w.trace().re / n));
    d.scale(1.0 / d.hs_norm())
}

/// Gap, functional and residual of an outside verdict whose certificate
/// survives independent re-evaluation.
fn certify(family: &PureFamily, rho: &Operator, cfg: &WitnessConfig) -> Option<(f64, Operator, f64)> {
    let h = HermitianOperator::with_tol(rho.clone(), 1e-10 * rho.dim() as f64).ok()?;
    let pos = positivity_with_tol(rho, cfg.membership_tol);
    if !pos.verdict {
        return None;
    }
    let res = family.conv_membership(&h, cfg.membership_tol).ok()?;
    if res.verdict != Verdict::Outside || !family.recheck(rho, &res, true, 1e-8) {
        return None;
    }
    let Certificate::Separating { functional, gap } = res.certificate else {
        return None;
    };
    Some((gap, functional, res.residual))
}
