//! Conditionalized ("plug-in") families: the parent density evaluated at the
//! lattice angles and renormalized.

use std::f64::consts::TAU;

use crate::distributions::{check_concentration, check_lattice_center, check_stable_exponent, RHO_CAP};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Pmf};
use crate::special::{sum_series, SERIES_CAP, SERIES_TOL};

/// `1 + ρ² − 2ρ cos θ`, written to avoid cancellation near the mode.
#[inline]
pub(crate) fn cauchy_denominator(rho: f64, theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    (1.0 - rho) * (1.0 - rho) + 4.0 * rho * s * s
}

/// Conditionalized discrete von Mises, `p(r) ∝ exp(κ cos(2π(r−t)/m))`.
pub fn pmf_cdvm(lattice: Lattice, kappa: f64, t: usize) -> Result<Pmf> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::domain(format!("kappa must be finite and >= 0, got {kappa}")));
    }
    check_lattice_center(lattice, t)?;
    let log_w: Vec<f64> =
        lattice.points().map(|r| kappa * (lattice.angle(lattice.offset(r, t as i64)).cos() - 1.0)).collect();
    Pmf::from_log_weights(lattice, &log_w)
}

/// `L_p(κ) e^{−κ} = Σ_r cos(2πpr/m) e^{κ(cos(2πr/m) − 1)}`.
pub fn l_scaled(lattice: Lattice, p: i64, kappa: f64) -> f64 {
    let m = lattice.m() as i64;
    lattice
        .points()
        .map(|r| {
            let a = lattice.angle(r);
            let pr = (p * r as i64).rem_euclid(m) as usize;
            lattice.angle(pr).cos() * (kappa * (a.cos() - 1.0)).exp()
        })
        .sum()
}

/// Conditionalized discrete wrapped Cauchy with lattice centering `t`.
///
/// The normalizer is the closed form `(1−ρ²)(1−ρ^m) / (m(1+ρ^m))`.
pub fn pmf_cdwc(lattice: Lattice, rho: f64, t: usize) -> Result<Pmf> {
    check_concentration("rho", rho)?;
    check_lattice_center(lattice, t)?;
    let rho = rho.min(RHO_CAP);
    let c = cdwc_normalizer(lattice.m(), rho);
    let probs =
        lattice.points().map(|r| c / cauchy_denominator(rho, lattice.angle(lattice.offset(r, t as i64)))).collect();
    Pmf::new(lattice, probs)
}

/// Reciprocal normalizer of the centered CDWC kernel `1/(1+ρ²−2ρcosθ)`.
pub fn cdwc_normalizer(m: usize, rho: f64) -> f64 {
    let rm = rho.powi(m as i32);
    (1.0 - rho) * (1.0 + rho) * one_minus_pow(rho, m as f64) / (m as f64 * (1.0 + rm))
}

/// `1 − ρ^k` without cancellation near `ρ = 1`.
fn one_minus_pow(rho: f64, k: f64) -> f64 {
    if rho == 0.0 {
        1.0
    } else {
        -(k * rho.ln()).exp_m1()
    }
}

/// CDWC with a continuous mean direction `μ`:
/// normalizer `(1 − 2ρ^m cos(mμ) + ρ^{2m})(1−ρ²) / (m(1−ρ^{2m}))`.
pub fn pmf_cdwc_mu(lattice: Lattice, rho: f64, mu: f64) -> Result<Pmf> {
    check_concentration("rho", rho)?;
    let rho = rho.min(RHO_CAP);
    let m = lattice.m();
    let rm = rho.powi(m as i32);
    let c = if rho == 0.0 {
        1.0 / m as f64
    } else {
        let d = one_minus_pow(rho, m as f64);
        let s = (0.5 * m as f64 * mu).sin();
        (d * d + 4.0 * rm * s * s) * (1.0 - rho) * (1.0 + rho) / (m as f64 * one_minus_pow(rho, 2.0 * m as f64))
    };
    let probs = lattice.points().map(|r| c / cauchy_denominator(rho, lattice.angle(r) - mu)).collect();
    Pmf::new(lattice, probs)
}

/// Conditionalized cardioid, `p(r) = (1 + 2ρ cos(2πr/m − μ)) / m`.
pub fn pmf_cd_cardioid(lattice: Lattice, rho: f64, mu: f64) -> Result<Pmf> {
    if !(rho.abs() < 0.5) {
        return Err(Error::domain(format!("cardioid requires |rho| < 1/2, got {rho}")));
    }
    let m = lattice.m() as f64;
    let probs = lattice.points().map(|r| (1.0 + 2.0 * rho * (lattice.angle(r) - mu).cos()) / m).collect();
    Pmf::new(lattice, probs)
}

/// Log of the wrapped-normal kernel `1 + 2Σ_q ρ^{q²} cos(qθ)`.
///
/// For concentrated laws the Fourier series cancels catastrophically in the
/// tails, so the equivalent Poisson-summed form
/// `(√(2π)/σ) Σ_k exp(−(θ+2πk)²/(2σ²))`, `σ² = −2 ln ρ`, is used there.
pub fn wrapped_normal_log_kernel(rho: f64, theta: f64) -> Result<f64> {
    if rho == 0.0 {
        return Ok(0.0);
    }
    let sigma2 = -2.0 * rho.ln();
    if sigma2 < 4.0 {
        // reduce θ into (−π, π]
        let th = theta - TAU * (theta / TAU).round();
        let base = -th * th / (2.0 * sigma2);
        let mut acc = 1.0;
        for k in 1..SERIES_CAP {
            let kk = TAU * k as f64;
            let a = (-((th + kk).powi(2) - th * th) / (2.0 * sigma2)).exp();
            let b = (-((th - kk).powi(2) - th * th) / (2.0 * sigma2)).exp();
            acc += a + b;
            if a + b < 1e-17 {
                break;
            }
        }
        Ok(0.5 * (TAU / sigma2).ln() + base + acc.ln())
    } else {
        let ln_rho = rho.ln();
        let mut s = 1.0;
        for q in 1..SERIES_CAP {
            let mag = ((q * q) as f64 * ln_rho).exp();
            if mag < 1e-17 {
                break;
            }
            s += 2.0 * mag * (q as f64 * theta).cos();
        }
        if s <= 0.0 {
            return Err(Error::numeric("wrapped normal kernel evaluated non-positive"));
        }
        Ok(s.ln())
    }
}

/// Closed-form normalizer of the CDWN kernel, `m(1 + 2Σ_k ρ^{k²m²})`.
pub fn cdwn_normalizer(m: usize, rho: f64) -> Result<f64> {
    let mf = m as f64;
    let tail = sum_series(1, |k| {
        let e = (k as f64 * mf).powi(2);
        if rho == 0.0 {
            0.0
        } else {
            (e * rho.ln()).exp()
        }
    })?;
    Ok(mf * (1.0 + 2.0 * tail))
}

/// Conditionalized discrete wrapped normal (`ρ` is the mean resultant length
/// of the parent wrapped normal).
pub fn pmf_cdwn(lattice: Lattice, rho: f64, t: usize) -> Result<Pmf> {
    check_concentration("rho", rho)?;
    check_lattice_center(lattice, t)?;
    let rho = rho.min(RHO_CAP);
    let norm = cdwn_normalizer(lattice.m(), rho)?;
    let mut probs = Vec::with_capacity(lattice.m());
    for r in lattice.points() {
        let lk = wrapped_normal_log_kernel(rho, lattice.angle(lattice.offset(r, t as i64)))?;
        probs.push(lk.exp() / norm);
    }
    Pmf::with_tolerance(lattice, probs, 1e-11).and_then(renormalize)
}

fn renormalize(p: Pmf) -> Result<Pmf> {
    let lattice = p.lattice();
    Pmf::from_weights(lattice, p.into_probs())
}

/// Wrapped-stable kernel `1 + 2Σ_q ρ^{q^a} cos(qθ + b q^a)`.
pub fn stable_kernel(rho: f64, a: f64, b: f64, theta: f64) -> Result<f64> {
    if rho == 0.0 {
        return Ok(1.0);
    }
    let ln_rho = rho.ln();
    let mut sum = 0.0;
    for q in 1..=SERIES_CAP {
        let qa = (q as f64).powf(a);
        let mag = (qa * ln_rho).exp();
        sum += mag * (q as f64 * theta + b * qa).cos();
        // ρ^{q^a} is decreasing in q
        if mag < SERIES_TOL {
            return Ok(1.0 + 2.0 * sum);
        }
    }
    Err(Error::numeric(format!("wrapped stable series (rho={rho}, a={a}) needs more than {SERIES_CAP} terms")))
}

/// Closed-form normalizer of the symmetric (`b = 0`) stable kernel,
/// `m(1 + 2Σ_k ρ^{(mk)^a})`.
pub fn cd_stable_normalizer(m: usize, rho: f64, a: f64) -> Result<f64> {
    if rho == 0.0 {
        return Ok(m as f64);
    }
    let ln_rho = rho.ln();
    let tail = sum_series(1, |k| ((m as f64 * k as f64).powf(a) * ln_rho).exp())?;
    Ok(m as f64 * (1.0 + 2.0 * tail))
}

/// Conditionalized discrete wrapped stable law.
pub fn pmf_cd_stable(lattice: Lattice, rho: f64, t: usize, a: f64, b: f64) -> Result<Pmf> {
    check_concentration("rho", rho)?;
    check_lattice_center(lattice, t)?;
    check_stable_exponent(a)?;
    if !b.is_finite() {
        return Err(Error::domain("stable skewness b must be finite"));
    }
    let rho = rho.min(RHO_CAP);
    let mut w = Vec::with_capacity(lattice.m());
    for r in lattice.points() {
        let k = stable_kernel(rho, a, b, lattice.angle(lattice.offset(r, t as i64)))?;
        if k < -1e-12 {
            return Err(Error::domain(format!(
                "stable parameters (rho={rho}, a={a}, b={b}) give a negative density at r={r}"
            )));
        }
        w.push(k.max(0.0));
    }
    Pmf::from_weights(lattice, w)
}

/// Checks the Kato–Jones parameter constraints, naming the violated one.
pub fn check_kato_jones(rho: f64, gamma: f64, lambda: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::domain(format!("Kato-Jones constraint 0 <= rho < 1 violated (rho={rho})")));
    }
    if !(gamma >= 0.0 && gamma <= (1.0 + rho) / 2.0 + 1e-15) {
        return Err(Error::domain(format!(
            "Kato-Jones constraint 0 <= gamma <= (1+rho)/2 violated (gamma={gamma}, rho={rho})"
        )));
    }
    if !lambda.is_finite() {
        return Err(Error::domain("Kato-Jones lambda must be finite"));
    }
    if rho * gamma * lambda.cos() < (rho * rho + 2.0 * gamma - 1.0) / 2.0 - 1e-15 {
        return Err(Error::domain(format!(
            "Kato-Jones constraint rho*gamma*cos(lambda) >= (rho^2 + 2 gamma - 1)/2 violated \
             (rho={rho}, gamma={gamma}, lambda={lambda})"
        )));
    }
    Ok(())
}

/// Kato–Jones kernel `1 + 2γ (cos(θ−μ) − ρ cos λ) / (1 + ρ² − 2ρ cos(θ−μ−λ))`.
pub fn kato_jones_kernel(rho: f64, mu: f64, gamma: f64, lambda: f64, theta: f64) -> f64 {
    1.0 + 2.0 * gamma * ((theta - mu).cos() - rho * lambda.cos()) / cauchy_denominator(rho, theta - mu - lambda)
}

/// Closed-form normalizer `D*` of the CDKJ kernel.
pub fn cdkj_normalizer(m: usize, rho: f64, mu: f64, gamma: f64, lambda: f64) -> f64 {
    let mf = m as f64;
    let rm = rho.powi(m as i32);
    let rm1 = if m >= 1 { rho.powi(m as i32 - 1) } else { 1.0 };
    let num = (mf * (mu + lambda) - lambda).cos() - rm * lambda.cos();
    let den = 1.0 + rm * rm - 2.0 * rm * (mf * (mu + lambda)).cos();
    mf * (1.0 + 2.0 * gamma * rm1 * num / den)
}

/// Conditionalized discrete Kato–Jones family.
pub fn pmf_cdkj(lattice: Lattice, rho: f64, mu: f64, gamma: f64, lambda: f64) -> Result<Pmf> {
    check_kato_jones(rho, gamma, lambda)?;
    let rho = rho.min(RHO_CAP);
    let d = cdkj_normalizer(lattice.m(), rho, mu, gamma, lambda);
    let probs: Vec<f64> =
        lattice.points().map(|r| (kato_jones_kernel(rho, mu, gamma, lambda, lattice.angle(r)) / d).max(0.0)).collect();
    Pmf::new(lattice, probs)
}
