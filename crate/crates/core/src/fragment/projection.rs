//! Euclidean projection onto the KD-positive states.
//!
//! The two sets are the density matrices (projection through the spectrum)
//! and the operators whose KD table is real and nonnegative (projection by
//! clamping the table, which is exact because `kd` is unitary). Their
//! intersection is reached either by Dykstra's alternating projections or
//! by over-relaxed ADMM on the same pair of projections; both converge to
//! the same nearest point.
//!
//! Internally everything is an ordinary matrix `M = K/|G|`, for which
//! `KD = conj(C) .* (M C)` and `M = ((F .* C) C*)/|G|` with
//! `C[g][c] = chi_c(g)`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::HermitianOperator;
use crate::error::{Error, Result};
use crate::group::FiniteAbelianGroup;
use crate::operator::Operator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionStatus {
    Converged,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionMethod {
    #[default]
    Dykstra,
    Admm,
}

impl std::str::FromStr for ProjectionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dykstra" => Ok(Self::Dykstra),
            "admm" => Ok(Self::Admm),
            other => Err(Error::Malformed(format!("unknown projection method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Projection {
    /// Last density-matrix iterate.
    pub rho: Operator,
    /// `||rho - rho0||_HS`.
    pub distance: f64,
    pub status: ProjectionStatus,
    pub iterations: usize,
    /// HS distance between the final iterates of the two sets.
    pub set_gap: f64,
    /// Largest KD violation of `rho`.
    pub kd_violation: f64,
}

pub(crate) struct KdFrame {
    n: usize,
    c: DMatrix<Complex64>,
    c_adj: DMatrix<Complex64>,
}

impl KdFrame {
    pub(crate) fn new(group: &FiniteAbelianGroup) -> Self {
        let n = group.order();
        let c = DMatrix::from_fn(n, n, |g, ch| group.pair_idx(ch, g));
        let c_adj = c.adjoint();
        Self { n, c, c_adj }
    }

    fn table(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut t = m * &self.c;
        t.zip_apply(&self.c, |v, c| *v *= c.conj());
        t
    }

    fn from_table(&self, f: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut t = f.clone();
        t.zip_apply(&self.c, |v, c| *v *= c);
        (t * &self.c_adj) / Complex64::new(self.n as f64, 0.0)
    }

    fn clamp(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut t = self.table(m);
        t.apply(|v| *v = Complex64::new(v.re.max(0.0), 0.0));
        self.from_table(&t)
    }

    fn violation(&self, m: &DMatrix<Complex64>) -> f64 {
        self.table(m).iter().fold(0.0f64, |w, v| w.max(v.im.abs()).max(-v.re))
    }
}

pub(crate) fn simplex_project(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (j + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Nearest density matrix in Frobenius norm.
fn project_states(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut eig = SymmetricEigen::new(h);
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    for (e, p) in eig.eigenvalues.iter_mut().zip(simplex_project(&vals)) {
        *e = p;
    }
    eig.recompose()
}

pub fn project_onto_kdpos(rho0: &HermitianOperator, max_iter: usize, tol: f64) -> Result<Projection> {
    project_onto_kdpos_with(rho0, ProjectionMethod::Dykstra, max_iter, tol)
}

pub fn project_onto_kdpos_with(
    rho0: &HermitianOperator,
    method: ProjectionMethod,
    max_iter: usize,
    tol: f64,
) -> Result<Projection> {
    let tr = rho0.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-9 {
        return Err(Error::Precondition(format!("trace is {} {:+}i, not 1", tr.re, tr.im)));
    }
    let frame = KdFrame::new(rho0.group());
    let m0 = rho0.matrix();
    let run = match method {
        ProjectionMethod::Dykstra => dykstra(&frame, &m0, max_iter, tol),
        ProjectionMethod::Admm => admm(&frame, &m0, max_iter, tol, &mut None),
    };
    Ok(run.finish(&frame, rho0))
}

pub(crate) struct Run {
    pub m: DMatrix<Complex64>,
    pub iterations: usize,
    pub converged: bool,
    pub set_gap: f64,
}

impl Run {
    pub(crate) fn finish(self, frame: &KdFrame, rho0: &Operator) -> Projection {
        let rho = Operator::from_matrix(&rho0.group, self.m).expect("square");
        let kd_violation = frame.violation(&rho.matrix()).max(0.0);
        Projection {
            distance: rho.hs_distance(rho0),
            rho,
            status: if self.converged { ProjectionStatus::Converged } else { ProjectionStatus::Inconclusive },
            iterations: self.iterations,
            set_gap: self.set_gap,
            kd_violation,
        }
    }
}

fn dykstra(frame: &KdFrame, m0: &DMatrix<Complex64>, max_iter: usize, tol: f64) -> Run {
    let n = m0.nrows();
    let mut x = m0.clone();
    let mut p = DMatrix::zeros(n, n);
    let mut q = DMatrix::zeros(n, n);
    let mut y = x.clone();
    let mut set_gap = f64::INFINITY;
    for it in 1..=max_iter {
        let xp = &x + &p;
        y = project_states(&xp);
        p = xp - &y;
        let yq = &y + &q;
        let x_next = frame.clamp(&yq);
        q = yq - &x_next;
        set_gap = (&x_next - &y).norm();
        let change = (&x_next - &x).norm();
        x = x_next;
        if set_gap <= tol && change <= tol {
            return Run { m: y, iterations: it, converged: true, set_gap };
        }
    }
    Run { m: y, iterations: max_iter, converged: false, set_gap }
}

/// Cone iterate and scaled dual carried between nearby ADMM solves.
pub(crate) type AdmmWarm = Option<(DMatrix<Complex64>, DMatrix<Complex64>)>;

const ADMM_SIGMA: f64 = 3.0;
const ADMM_RELAX: f64 = 1.6;

pub(crate) fn admm(frame: &KdFrame, m0: &DMatrix<Complex64>, max_iter: usize, tol: f64, warm: &mut AdmmWarm) -> Run {
    let n = m0.nrows();
    let (mut z, mut u) = warm.take().unwrap_or_else(|| (frame.clamp(m0), DMatrix::zeros(n, n)));
    let sigma = Complex64::new(ADMM_SIGMA, 0.0);
    let scale = Complex64::new(1.0 / (1.0 + ADMM_SIGMA), 0.0);
    let relax = Complex64::new(ADMM_RELAX, 0.0);
    let keep = Complex64::new(1.0 - ADMM_RELAX, 0.0);
    let mut x = m0.clone();
    let mut set_gap = f64::INFINITY;
    let mut converged = false;
    let mut iterations = max_iter;
    for it in 1..=max_iter {
        x = project_states(&((m0 + (&z - &u) * sigma) * scale));
        let xr = &x * relax + &z * keep;
        let z_next = frame.clamp(&(&xr + &u));
        u += xr - &z_next;
        set_gap = (&x - &z_next).norm();
        let dual = ADMM_SIGMA * (&z_next - &z).norm();
        z = z_next;
        if set_gap <= tol && dual <= tol {
            converged = true;
            iterations = it;
            break;
        }
    }
    *warm = Some((z, u));
    Run { m: x, iterations, converged, set_gap }
}
