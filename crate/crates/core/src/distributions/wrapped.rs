//! Integer-valued laws on the line wrapped modulo `m`, with a centering shift.

use serde::{Deserialize, Serialize};

use crate::distributions::check_lattice_center;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Pmf};
use crate::special::{ln_factorial, SERIES_CAP};

/// Base laws on the integers that can be wrapped onto `Z_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "base", rename_all = "snake_case")]
pub enum WrapBase {
    /// Poisson with mean `lambda`.
    Poisson { lambda: f64 },
    /// `P(k) = (1−p) p^k`, `k ≥ 0`.
    Geometric { p: f64 },
    /// Discrete skew Laplace: `p^k` on `k ≥ 0`, `q^{−k}` on `k ≤ 0`.
    SkewLaplace { p: f64, q: f64 },
}

impl WrapBase {
    fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must lie in (0,1), got {v}")))
            }
        };
        match *self {
            WrapBase::Poisson { lambda } if !(lambda >= 0.0) || !lambda.is_finite() => {
                Err(Error::domain(format!("Poisson mean must be finite and >= 0, got {lambda}")))
            }
            WrapBase::Poisson { .. } => Ok(()),
            WrapBase::Geometric { p } => unit("p", p),
            WrapBase::SkewLaplace { p, q } => unit("p", p).and(unit("q", q)),
        }
    }
}

/// Uncentered wrapped probabilities `p_{w0}(r) = Σ_k P(X = r + km)`.
pub fn wrapped_uncentered(base: WrapBase, lattice: Lattice) -> Result<Vec<f64>> {
    base.validate()?;
    let m = lattice.m();
    let mi = m as i32;
    match base {
        WrapBase::Poisson { lambda } => {
            if lambda == 0.0 {
                let mut v = vec![0.0; m];
                v[0] = 1.0;
                return Ok(v);
            }
            let ln_l = lambda.ln();
            lattice
                .points()
                .map(|r| {
                    let mut acc = 0.0;
                    for k in 0..SERIES_CAP {
                        let j = (r + k * m) as u64;
                        let term = (-lambda + j as f64 * ln_l - ln_factorial(j)).exp();
                        acc += term;
                        // past the mode the terms decay geometrically
                        if j as f64 > lambda && term <= 1e-14 * acc.max(f64::MIN_POSITIVE) {
                            return Ok(acc);
                        }
                        if j as f64 > lambda + 50.0 * lambda.sqrt() + 50.0 && term == 0.0 {
                            return Ok(acc);
                        }
                    }
                    Err(Error::numeric("wrapped Poisson sum did not converge"))
                })
                .collect()
        }
        WrapBase::Geometric { p } => {
            let z = (1.0 - p) / (1.0 - p.powi(mi));
            Ok(lattice.points().map(|r| z * p.powi(r as i32)).collect())
        }
        WrapBase::SkewLaplace { p, q } => {
            let c = (1.0 - p) * (1.0 - q) / (1.0 - p * q);
            Ok(lattice
                .points()
                .map(|r| c * (p.powi(r as i32) / (1.0 - p.powi(mi)) + q.powi(mi - r as i32) / (1.0 - q.powi(mi))))
                .collect())
        }
    }
}

/// Centered wrapped law: `p_w(r) = p_{w0}((r − t) mod m)`.
pub fn pmf_centered_wrapped(base: WrapBase, lattice: Lattice, t: usize) -> Result<Pmf> {
    check_lattice_center(lattice, t)?;
    let w0 = wrapped_uncentered(base, lattice)?;
    let probs = lattice.points().map(|r| w0[lattice.offset(r, t as i64)]).collect();
    Pmf::with_tolerance(lattice, probs, 1e-11).and_then(|p| Pmf::from_weights(lattice, p.into_probs()))
}
