//! Discrete distributions on the torus `Z_m × Z_m` built from the bivariate
//! wrapped Cauchy with uniform marginals and wrapped Cauchy conditionals.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::marginal::wc_arc_probability;
use crate::error::{Error, Result};
use crate::lattice::{neumaier_sum, Lattice, Pmf};
use crate::special::Quadrature;

/// Tolerance on the total mass and the marginals of a [`BivPmf`].
pub const BIV_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivPmf {
    lattice: Lattice,
    /// Row-major, `probs[r1 * m + r2]`.
    probs: Vec<f64>,
    pub rho: f64,
    pub mu: f64,
}

impl BivPmf {
    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn m(&self) -> usize {
        self.lattice.m()
    }

    pub fn get(&self, r1: usize, r2: usize) -> f64 {
        let m = self.m();
        self.probs[(r1 % m) * m + r2 % m]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn row(&self, r1: usize) -> &[f64] {
        let m = self.m();
        &self.probs[r1 * m..(r1 + 1) * m]
    }

    pub fn total(&self) -> f64 {
        neumaier_sum(&self.probs)
    }

    /// Marginal of the first coordinate.
    pub fn marginal_first(&self) -> Vec<f64> {
        (0..self.m()).map(|r1| neumaier_sum(self.row(r1))).collect()
    }

    /// Marginal of the second coordinate.
    pub fn marginal_second(&self) -> Vec<f64> {
        let m = self.m();
        (0..m).map(|r2| neumaier_sum(&(0..m).map(|r1| self.get(r1, r2)).collect::<Vec<_>>())).collect()
    }

    /// Distribution of `r1` given `r2`.
    pub fn conditional_first(&self, r2: usize) -> Result<Pmf> {
        Pmf::from_weights(self.lattice, (0..self.m()).map(|r1| self.get(r1, r2)).collect())
    }

    /// Distribution of `r2` given `r1`.
    pub fn conditional_second(&self, r1: usize) -> Result<Pmf> {
        Pmf::from_weights(self.lattice, self.row(r1).to_vec())
    }
}

fn check_params(rho: f64, mu: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::domain(format!("bivariate wrapped Cauchy needs |rho| < 1, got {rho}")));
    }
    if !mu.is_finite() {
        return Err(Error::domain("mu must be finite"));
    }
    Ok(mu.rem_euclid(TAU))
}

/// Builds the matrix from a circulant kernel `k[(r1 − r2) mod m]`, reflecting
/// the second coordinate when `rho < 0`.
fn assemble(lattice: Lattice, kernel: &[f64], reflect: Option<fn(usize, usize) -> usize>) -> Vec<f64> {
    let m = lattice.m();
    let mut probs = vec![0.0; m * m];
    for r1 in 0..m {
        for r2 in 0..m {
            let s = reflect.map_or(r2, |f| f(r2, m));
            probs[r1 * m + r2] = kernel[(r1 + m - s) % m];
        }
    }
    probs
}

fn validate(lattice: Lattice, probs: Vec<f64>, rho: f64, mu: f64) -> Result<BivPmf> {
    let out = BivPmf { lattice, probs, rho, mu };
    let total = out.total();
    if (total - 1.0).abs() > BIV_TOL {
        return Err(Error::numeric(format!("bivariate pmf sums to {total}")));
    }
    Ok(out)
}

/// Closed-form normalizer `D** = m²(1−ρ^{2m}) / [(1−ρ²)(1+ρ^{2m}−2ρ^m cos mμ)]`
/// of the conditionalized kernel `1/(1+ρ²−2ρcos(2π(r1−r2)/m − μ))`, `ρ ≥ 0`.
pub fn biv_cdwc_normalizer(m: usize, rho: f64, mu: f64) -> f64 {
    let mf = m as f64;
    let rm = rho.powi(m as i32);
    mf * mf * (1.0 - rm * rm) / ((1.0 - rho * rho) * (1.0 + rm * rm - 2.0 * rm * (mf * mu).cos()))
}

/// Conditionalized bivariate wrapped Cauchy on `Z_m × Z_m`.
pub fn biv_cdwc(lattice: Lattice, rho: f64, mu: f64) -> Result<BivPmf> {
    let mu = check_params(rho, mu)?;
    let m = lattice.m();
    let a = rho.abs();
    let d = biv_cdwc_normalizer(m, a, mu);
    let kernel: Vec<f64> =
        (0..m).map(|k| 1.0 / (d * (1.0 + a * a - 2.0 * a * (lattice.angle(k) - mu).cos()))).collect();
    let reflect: Option<fn(usize, usize) -> usize> = if rho < 0.0 { Some(|r, m| (m - r) % m) } else { None };
    validate(lattice, assemble(lattice, &kernel, reflect), rho, mu)
}

/// Marginalized bivariate wrapped Cauchy: cell masses are 1-D integrals over
/// the second bin of the conditional arc probability in the first.
pub fn biv_mdwc(lattice: Lattice, rho: f64, mu: f64) -> Result<BivPmf> {
    let mu = check_params(rho, mu)?;
    let m = lattice.m();
    let h = lattice.spacing();
    let a = rho.abs();
    let q = Quadrature { abs_tol: 1e-13, rel_tol: 1e-11, max_intervals: 500 };
    let kernel: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|k| {
            let lo = lattice.angle(k);
            let inner = |th2: f64| wc_arc_probability(a, mu + th2, lo, lo + h) / TAU;
            q.integrate(inner, 0.0, h).map_err(|e| Error::numeric(format!("cell quadrature failed at offset {k}: {e}")))
        })
        .collect::<Result<_>>()?;
    // θ2 ↦ −θ2 sends bin r2 to bin m−1−r2
    let reflect: Option<fn(usize, usize) -> usize> = if rho < 0.0 { Some(|r, m| m - 1 - r) } else { None };
    validate(lattice, assemble(lattice, &kernel, reflect), rho, mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    use crate::distributions::pmf_cdwc_mu;

    #[test]
    fn rho_zero_is_uniform() {
        let l = Lattice::new(7).unwrap();
        for p in [biv_cdwc(l, 0.0, 0.3).unwrap(), biv_mdwc(l, 0.0, 0.3).unwrap()] {
            assert!(p.probs().iter().all(|x| (x - 1.0 / 49.0).abs() < 1e-12));
        }
    }

    #[test]
    fn normalizer_m2_by_hand() {
        let (rho, mu) = (0.5f64, 0.0f64);
        let mut brute = 0.0;
        for r1 in 0..2 {
            for r2 in 0..2 {
                let th = PI * (r1 as f64 - r2 as f64) - mu;
                brute += 1.0 / (1.0 + rho * rho - 2.0 * rho * th.cos());
            }
        }
        assert!((biv_cdwc_normalizer(2, rho, mu) - brute).abs() < 1e-12);
    }

    #[test]
    fn rows_are_cdwc() {
        let l = Lattice::new(9).unwrap();
        let p = biv_cdwc(l, 0.6, 0.4).unwrap();
        for r1 in 0..9 {
            let c = p.conditional_second(r1).unwrap();
            // r2 has center (r1·h − μ)
            let want = pmf_cdwc_mu(l, 0.6, (l.angle(r1) - 0.4).rem_euclid(TAU)).unwrap();
            for r2 in 0..9 {
                assert!((c.get(r2) - want.get(r2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn negative_rho_reflects() {
        let l = Lattice::new(6).unwrap();
        let pos = biv_mdwc(l, 0.5, 0.2).unwrap();
        let neg = biv_mdwc(l, -0.5, 0.2).unwrap();
        for r1 in 0..6 {
            for r2 in 0..6 {
                assert!((neg.get(r1, r2) - pos.get(r1, 5 - r2)).abs() < 1e-15);
            }
        }
        for m in [neg.marginal_first(), neg.marginal_second()] {
            assert!(m.iter().all(|x| (x - 1.0 / 6.0).abs() < 1e-8));
        }
    }

    #[test]
    fn domain() {
        let l = Lattice::new(4).unwrap();
        assert!(biv_cdwc(l, 1.0, 0.0).is_err());
        assert!(biv_mdwc(l, -1.0, 0.0).is_err());
        assert!(biv_cdwc(l, 0.5, f64::NAN).is_err());
    }
}
