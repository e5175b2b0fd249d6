//! `min ||b - A lambda||` over the probability simplex.
//!
//! Primal active set in the style of Lawson-Hanson. The passive columns
//! stay affinely independent: a column only enters when its reduced cost
//! is negative, and the residual of the passive subproblem is orthogonal
//! to the affine hull of the passive columns.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub lambda: Vec<f64>,
    #[allow(dead_code)]
    pub converged: bool,
}

const KKT_EPS: f64 = 1e-13;

pub(crate) fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Solution {
    let m = a.ncols();
    let start = (0..m)
        .map(|j| (j, (a.column(j) - b).norm_squared()))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        .0;
    let mut lambda = vec![0.0; m];
    lambda[start] = 1.0;
    let mut passive = vec![start];
    let max_outer = 3 * m + 50;

    for _ in 0..max_outer {
        let lam = DVector::from_column_slice(&lambda);
        let r = b - a * &lam;
        let grad = -(a.transpose() * r);
        let nu: f64 = passive.iter().map(|&i| lambda[i] * grad[i]).sum();
        let entering = (0..m)
            .filter(|j| !passive.contains(j))
            .map(|j| (j, grad[j] - nu))
            .fold(None, |best: Option<(usize, f64)>, cur| match best {
                Some(b) if b.1 <= cur.1 => Some(b),
                _ => Some(cur),
            });
        let Some((j, reduced)) = entering else {
            return Solution { lambda, converged: true };
        };
        if reduced >= -KKT_EPS {
            return Solution { lambda, converged: true };
        }
        passive.push(j);

        let mut stalled = false;
        let mut first = true;
        loop {
            let z = affine_subproblem(a, b, &passive);
            if z.iter().all(|&v| v > 0.0) {
                for (&i, &v) in passive.iter().zip(&z) {
                    lambda[i] = v;
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (&i, &v) in passive.iter().zip(&z) {
                if v <= 0.0 {
                    alpha = alpha.min(lambda[i] / (lambda[i] - v));
                }
            }
            for (&i, &v) in passive.iter().zip(&z) {
                lambda[i] += alpha * (v - lambda[i]);
            }
            let before = passive.len();
            let zero_tol = 1e-15;
            let removed: Vec<usize> = passive.iter().copied().filter(|&i| lambda[i] <= zero_tol).collect();
            passive.retain(|&i| lambda[i] > zero_tol);
            for i in removed {
                lambda[i] = 0.0;
            }
            if passive.is_empty() {
                // cannot happen in exact arithmetic; fall back to the start vertex
                lambda.iter_mut().for_each(|l| *l = 0.0);
                lambda[start] = 1.0;
                passive.push(start);
                stalled = true;
                break;
            }
            let total: f64 = passive.iter().map(|&i| lambda[i]).sum();
            for &i in &passive {
                lambda[i] /= total;
            }
            if passive.len() == before {
                stalled = true;
                break;
            }
            if first && !passive.contains(&j) {
                stalled = true;
                break;
            }
            first = false;
        }
        if stalled {
            return Solution { lambda, converged: false };
        }
    }
    Solution { lambda, converged: false }
}

/// `min ||b - A_P z||` subject to `sum z = 1`, by eliminating the first
/// passive coordinate.
fn affine_subproblem(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[usize]) -> Vec<f64> {
    if passive.len() == 1 {
        return vec![1.0];
    }
    let k0 = passive[0];
    let base = a.column(k0);
    let rest = &passive[1..];
    let mut d = DMatrix::zeros(a.nrows(), rest.len());
    for (c, &i) in rest.iter().enumerate() {
        d.set_column(c, &(a.column(i) - base));
    }
    let rhs = b - base;
    let svd = d.svd(true, true);
    let eps = svd.singular_values.max() * 1e-13;
    let y = svd.solve(&rhs, eps).expect("both factors computed");
    let mut z = Vec::with_capacity(passive.len());
    z.push(1.0 - y.sum());
    z.extend(y.iter().copied());
    z
}
