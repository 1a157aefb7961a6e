//! Generic discretization of continuous circular densities and the line
//! constructions behind the invariance and duality results.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::distributions::marginal::marginalize;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Pmf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    Marginalized,
    Conditionalized,
}

/// Discretizes a density on `[0, 2π)` by either method.
pub fn discretize(lattice: Lattice, density: impl Fn(f64) -> f64, method: Discretization) -> Result<Pmf> {
    match method {
        Discretization::Marginalized => marginalize(lattice, density),
        Discretization::Conditionalized => {
            Pmf::from_weights(lattice, lattice.points().map(|r| density(lattice.angle(r))).collect())
        }
    }
}

/// Density of the exponential law with rate `lambda` wrapped onto the circle.
pub fn wrapped_exponential_density(lambda: f64, theta: f64) -> f64 {
    let th = theta.rem_euclid(TAU);
    lambda * (-lambda * th).exp() / (1.0 - (-TAU * lambda).exp())
}

/// Discretized wrapped exponential; both methods give the same pmf.
pub fn pmf_wrapped_exponential(lattice: Lattice, lambda: f64, method: Discretization) -> Result<Pmf> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!("exponential rate must be positive, got {lambda}")));
    }
    match method {
        Discretization::Conditionalized => discretize(lattice, |t| wrapped_exponential_density(lambda, t), method),
        Discretization::Marginalized => {
            // the density has a jump at 0, which is a bin edge, so the cdf is exact
            let cdf = |x: f64| (1.0 - (-lambda * x).exp()) / (1.0 - (-TAU * lambda).exp());
            let probs = lattice
                .points()
                .map(|r| {
                    let a = lattice.angle(r);
                    cdf(a + lattice.spacing()) - cdf(a)
                })
                .collect();
            Pmf::with_tolerance(lattice, probs, 1e-12)
        }
    }
}

/// Marginalized discrete Cauchy on the integers, scale `a`:
/// `p(j) = atan(a / (a² + j(j+1))) / π`.
pub fn md_cauchy_line(a: f64, j: i64) -> f64 {
    let jf = j as f64;
    (a / (a * a + jf * (jf + 1.0))).atan().rem_euclid(PI) / PI
}

/// Conditionalized discrete Cauchy on the integers, scale `a`:
/// `p(j) = a tanh(aπ) / (π (a² + j²))`.
pub fn cd_cauchy_line(a: f64, j: i64) -> f64 {
    a * (a * PI).tanh() / (PI * (a * a + (j * j) as f64))
}

/// Wraps a pmf on the integers modulo `m`:
/// `Σ_k p(r + km)`, with the slowly decaying `O(1/k²)` tails extrapolated.
pub fn wrap_line_pmf(lattice: Lattice, p: impl Fn(i64) -> f64) -> Vec<f64> {
    let m = lattice.m() as i64;
    let partial = |r: i64, kmax: i64| {
        let mut s = 0.0;
        let mut c = 0.0;
        for k in -kmax..=kmax {
            let y = p(r + k * m) - c;
            let t = s + y;
            c = (t - s) - y;
            s = t;
        }
        s
    };
    lattice
        .points()
        .map(|r| {
            // Richardson on S(K) = S − c₁/K + c₂/K² + …
            let k = 20_000;
            let s1 = partial(r as i64, k);
            let s2 = partial(r as i64, 2 * k);
            let s4 = partial(r as i64, 4 * k);
            let r1 = 2.0 * s2 - s1;
            let r2 = 2.0 * s4 - s2;
            (4.0 * r2 - r1) / 3.0
        })
        .collect()
}

/// Duality route (a): scale the Cauchy with parameter `a` by `m/2π`,
/// discretize on the integers, then wrap modulo `m`.
pub fn cauchy_discretize_then_wrap(lattice: Lattice, a: f64, method: Discretization) -> Result<Pmf> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("Cauchy scale must be positive, got {a}")));
    }
    let s = a * lattice.m() as f64 / TAU;
    let w = match method {
        Discretization::Marginalized => wrap_line_pmf(lattice, |j| md_cauchy_line(s, j)),
        Discretization::Conditionalized => wrap_line_pmf(lattice, |j| cd_cauchy_line(s, j)),
    };
    Pmf::from_weights(lattice, w.into_iter().map(|x| x.max(0.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_cauchy_pmfs_normalize() {
        let l = Lattice::new(3).unwrap();
        for a in [0.3, 1.0, 4.0] {
            let md: f64 = wrap_line_pmf(l, |j| md_cauchy_line(a, j)).iter().sum();
            let cd: f64 = wrap_line_pmf(l, |j| cd_cauchy_line(a, j)).iter().sum();
            assert!((md - 1.0).abs() < 1e-12, "{md}");
            assert!((cd - 1.0).abs() < 1e-12, "{cd}");
        }
    }

    #[test]
    fn md_cauchy_is_cdf_difference() {
        let a = 0.7;
        for j in -5..5 {
            let d = (((j + 1) as f64 / a).atan() - (j as f64 / a).atan()) / PI;
            assert!((md_cauchy_line(a, j) - d).abs() < 1e-15);
        }
    }

    #[test]
    fn wrapped_exponential_cdf_matches_quadrature() {
        let l = Lattice::new(9).unwrap();
        let a = pmf_wrapped_exponential(l, 0.8, Discretization::Marginalized).unwrap();
        let b = discretize(l, |t| wrapped_exponential_density(0.8, t), Discretization::Marginalized).unwrap();
        for r in l.points() {
            assert!((a.get(r) - b.get(r)).abs() < 1e-12);
        }
    }
}
