//! Marginalized families: the parent density integrated over each lattice arc
//! `[2πr/m, 2π(r+1)/m)`.

use std::f64::consts::{PI, TAU};

use crate::distributions::conditional::{cauchy_denominator, check_kato_jones, kato_jones_kernel};
use crate::distributions::{check_concentration, RHO_CAP};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Pmf};
use crate::special::{bessel_i_scaled, Quadrature};

/// Tolerance on the total mass of quadrature-based pmfs before renormalizing.
pub const QUADRATURE_MASS_TOL: f64 = 1e-10;

/// Reduces an angle into `(−π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    let y = x - TAU * (x / TAU).round();
    if y <= -PI {
        y + TAU
    } else {
        y
    }
}

/// Wrapped-Cauchy density with mean `mu`.
pub fn wc_density(rho: f64, mu: f64, theta: f64) -> f64 {
    (1.0 - rho) * (1.0 + rho) / (TAU * cauchy_denominator(rho, theta - mu))
}

/// Von Mises density with mean `mu`.
pub fn vm_density(kappa: f64, mu: f64, theta: f64) -> f64 {
    (kappa * ((theta - mu).cos() - 1.0)).exp() / (TAU * bessel_i_scaled(0, kappa))
}

/// Cdf of the wrapped Cauchy centred at zero, measured from the antimode:
/// `G(φ) ∈ (−1/2, 1/2]` for `φ ∈ (−π, π]`.
pub fn wc_centered_cdf(rho: f64, phi: f64) -> f64 {
    let h = 0.5 * phi;
    ((1.0 + rho) * h.sin()).atan2((1.0 - rho) * h.cos()) / PI
}

/// Probability that a wrapped Cauchy lands in the arc `[a, b]`, `0 < b − a < 2π`.
pub fn wc_arc_probability(rho: f64, mu: f64, a: f64, b: f64) -> f64 {
    let d = wc_centered_cdf(rho, wrap_pi(b - mu)) - wc_centered_cdf(rho, wrap_pi(a - mu));
    // the cdf jumps by −1 across the antimode
    if d < 0.0 {
        d + 1.0
    } else {
        d
    }
}

/// Marginalized discrete wrapped Cauchy.
pub fn pmf_mdwc(lattice: Lattice, rho: f64, mu: f64) -> Result<Pmf> {
    check_concentration("rho", rho)?;
    check_mu(mu)?;
    let rho = rho.min(RHO_CAP);
    let probs = lattice
        .points()
        .map(|r| wc_arc_probability(rho, mu, lattice.angle(r), lattice.angle(r) + lattice.spacing()))
        .collect::<Vec<f64>>();
    // cdf differences lose a few ulps per bin for very fine lattices
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > QUADRATURE_MASS_TOL {
        return Err(Error::numeric(format!("MDWC bins sum to {total}")));
    }
    Pmf::from_weights(lattice, probs)
}

fn bin_quadrature() -> Quadrature {
    Quadrature { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 200 }
}

/// Integrates `f` over every lattice arc and renormalizes after checking the
/// total mass is within [`QUADRATURE_MASS_TOL`] of one.
pub fn marginalize(lattice: Lattice, f: impl Fn(f64) -> f64) -> Result<Pmf> {
    let q = bin_quadrature();
    let mut probs = Vec::with_capacity(lattice.m());
    for r in lattice.points() {
        let a = lattice.angle(r);
        let p = q
            .integrate(&f, a, a + lattice.spacing())
            .map_err(|e| Error::numeric(format!("quadrature failed on bin {r} of m={}: {e}", lattice.m())))?;
        probs.push(p.max(0.0));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > QUADRATURE_MASS_TOL {
        return Err(Error::numeric(format!("bin integrals sum to {total}")));
    }
    Pmf::from_weights(lattice, probs)
}

/// Marginalized discrete von Mises (no closed form; per-bin quadrature).
pub fn pmf_mdvm(lattice: Lattice, kappa: f64, mu: f64) -> Result<Pmf> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::domain(format!("kappa must be finite and >= 0, got {kappa}")));
    }
    check_mu(mu)?;
    if kappa == 0.0 {
        return Ok(Pmf::uniform(lattice));
    }
    let norm = TAU * bessel_i_scaled(0, kappa);
    marginalize(lattice, |th| (kappa * ((th - mu).cos() - 1.0)).exp() / norm)
}

/// Marginalized discrete cardioid:
/// `p(r) = 1/m + (2ρ sin(π/m)/π) cos(2π(r + 1/2)/m − μ)`.
pub fn pmf_md_cardioid(lattice: Lattice, rho: f64, mu: f64) -> Result<Pmf> {
    if !(rho.abs() < 0.5) {
        return Err(Error::domain(format!("cardioid requires |rho| < 1/2, got {rho}")));
    }
    check_mu(mu)?;
    let m = lattice.m() as f64;
    let amp = 2.0 * rho * (PI / m).sin() / PI;
    let probs = lattice.points().map(|r| 1.0 / m + amp * (TAU * (r as f64 + 0.5) / m - mu).cos()).collect();
    Pmf::new(lattice, probs)
}

/// Parameters `(ρ', μ')` of the conditionalized cardioid that coincides with
/// the marginalized cardioid `(ρ, μ)` on `m` points.
pub fn md_cardioid_as_conditional(m: usize, rho: f64, mu: f64) -> (f64, f64) {
    let mf = m as f64;
    (mf * rho * (PI / mf).sin() / PI, mu - PI / mf)
}

/// Kato–Jones density.
pub fn kato_jones_density(rho: f64, mu: f64, gamma: f64, lambda: f64, theta: f64) -> f64 {
    kato_jones_kernel(rho, mu, gamma, lambda, theta) / TAU
}

/// Below this `ρ` the closed-form bin integral loses accuracy (it divides by ρ).
const MDKJ_SMALL_RHO: f64 = 1e-3;

/// Marginalized discrete Kato–Jones.
///
/// With `φ = θ − μ − λ` the density integrates to
/// `θ/2π + (γ/ρ)[cos λ (G(φ) − φ/2π) − sin λ ln D(φ)/(2π)]`,
/// `D(φ) = 1 + ρ² − 2ρ cos φ`, `G` the wrapped-Cauchy cdf.
pub fn pmf_mdkj(lattice: Lattice, rho: f64, mu: f64, gamma: f64, lambda: f64) -> Result<Pmf> {
    check_kato_jones(rho, gamma, lambda)?;
    check_mu(mu)?;
    let rho = rho.min(RHO_CAP);
    if rho < MDKJ_SMALL_RHO {
        return marginalize(lattice, |th| kato_jones_density(rho, mu, gamma, lambda, th));
    }
    let h = lattice.spacing();
    let g = gamma / rho;
    let (s, c) = lambda.sin_cos();
    let probs = lattice
        .points()
        .map(|r| {
            let a = lattice.angle(r);
            let b = a + h;
            let dg = wc_arc_probability(rho, mu + lambda, a, b);
            let dlog = cauchy_denominator(rho, b - mu - lambda).ln() - cauchy_denominator(rho, a - mu - lambda).ln();
            (h / TAU * (1.0 - g * c) + g * c * dg - g * s * dlog / TAU).max(0.0)
        })
        .collect();
    Pmf::with_tolerance(lattice, probs, 1e-11).and_then(|p| Pmf::from_weights(lattice, p.into_probs()))
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("mean direction must be finite"))
    }
}
