//! Maximum-entropy pmfs on `Z_m` under linear moment constraints.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Pmf};

/// Residual on the constraint moments at which Newton stops.
pub const MAXENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct MaxEntFit {
    pub pmf: Pmf,
    /// Exponential-family coefficients `b_i`.
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn log_weights(table: &[Vec<f64>], b: &[f64], m: usize) -> Vec<f64> {
    (0..m).map(|r| table.iter().zip(b).map(|(t, bi)| bi * t[r]).sum()).collect()
}

/// `ln Σ_r exp(Σ_i b_i t_i(r)) − b·targets`, the convex dual objective.
fn dual(table: &[Vec<f64>], targets: &[f64], b: &[f64], m: usize) -> f64 {
    let lw = log_weights(table, b, m);
    let mx = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = mx + lw.iter().map(|l| (l - mx).exp()).sum::<f64>().ln();
    lse - b.iter().zip(targets).map(|(x, y)| x * y).sum::<f64>()
}

/// Finds `p(r) ∝ exp(Σ b_i t_i(r))` with `E t_i = targets[i]` by damped Newton
/// on the dual. `constraints[i][r]` holds `t_i(r)`.
pub fn fit_max_entropy(lattice: Lattice, constraints: &[Vec<f64>], targets: &[f64]) -> Result<MaxEntFit> {
    let m = lattice.m();
    let k = constraints.len();
    if k != targets.len() {
        return Err(Error::domain("need one target per constraint function"));
    }
    if constraints.iter().any(|c| c.len() != m) {
        return Err(Error::domain("constraint tables must have one value per lattice point"));
    }
    if targets.iter().any(|t| !t.is_finite()) {
        return Err(Error::domain("targets must be finite"));
    }
    let mut b = vec![0.0; k];
    for iter in 0..500 {
        let pmf = Pmf::from_log_weights(lattice, &log_weights(constraints, &b, m))?;
        let p = pmf.probs();
        let mean: Vec<f64> = constraints.iter().map(|t| t.iter().zip(p).map(|(x, w)| x * w).sum()).collect();
        let grad: Vec<f64> = mean.iter().zip(targets).map(|(a, t)| a - t).collect();
        let residual = grad.iter().map(|g| g.abs()).fold(0.0, f64::max);
        if residual < MAXENT_TOL {
            return Ok(MaxEntFit { pmf, coefficients: b, iterations: iter, residual });
        }
        let hess = DMatrix::from_fn(k, k, |i, j| {
            (0..m).map(|r| p[r] * (constraints[i][r] - mean[i]) * (constraints[j][r] - mean[j])).sum::<f64>()
        });
        let g = DVector::from_vec(grad.clone());
        // a tiny ridge keeps the step defined for (near-)collinear constraints
        let ridge = 1e-14 * (1.0 + hess.diagonal().amax());
        let step = (hess + DMatrix::identity(k, k) * ridge)
            .lu()
            .solve(&g)
            .ok_or_else(|| Error::NoSolution("moment covariance matrix is singular".into()))?;
        let f0 = dual(constraints, targets, &b, m);
        let slope: f64 = -g.dot(&step);
        let mut alpha = 1.0;
        loop {
            let trial: Vec<f64> = b.iter().zip(step.iter()).map(|(x, s)| x - alpha * s).collect();
            let f1 = dual(constraints, targets, &trial, m);
            if f1.is_finite() && f1 <= f0 + 1e-4 * alpha * slope {
                b = trial;
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-12 {
                return Err(Error::NoSolution(format!(
                    "damped Newton stalled (residual {residual:.3e}); targets are likely not attainable"
                )));
            }
        }
        if b.iter().any(|x| x.abs() > 1e6) {
            return Err(Error::NoSolution(
                "coefficients diverge; targets lie on or outside the moment boundary".into(),
            ));
        }
    }
    Err(Error::NoSolution("maximum-entropy Newton iteration did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::conditional::pmf_cdvm;

    fn trig(l: Lattice) -> Vec<Vec<f64>> {
        vec![l.points().map(|r| l.angle(r).cos()).collect(), l.points().map(|r| l.angle(r).sin()).collect()]
    }

    #[test]
    fn zero_targets_give_uniform() {
        let l = Lattice::new(9).unwrap();
        let fit = fit_max_entropy(l, &trig(l), &[0.0, 0.0]).unwrap();
        assert!(fit.pmf.probs().iter().all(|p| (p - 1.0 / 9.0).abs() < 1e-12));
        assert!(fit.coefficients.iter().all(|b| b.abs() < 1e-9));
    }

    #[test]
    fn recovers_cdvm() {
        let l = Lattice::new(10).unwrap();
        let target = pmf_cdvm(l, 1.7, 0).unwrap();
        let ec = target.expect(|r| l.angle(r).cos());
        let fit = fit_max_entropy(l, &trig(l)[..1], &[ec]).unwrap();
        assert!((fit.coefficients[0] - 1.7).abs() < 1e-8);
        for r in l.points() {
            assert!((fit.pmf.get(r) - target.get(r)).abs() < 1e-8);
        }
    }

    #[test]
    fn infeasible_targets_fail() {
        let l = Lattice::new(6).unwrap();
        assert!(matches!(fit_max_entropy(l, &trig(l), &[1.2, 0.0]), Err(Error::NoSolution(_))));
    }
}
