//! Characteristic functions and trigonometric moments: brute-force sums over
//! the lattice and the analytic forms for each family.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distributions::conditional::l_scaled;
use crate::distributions::marginal::wrap_pi;
use crate::distributions::{Family, FamilySpec};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Pmf};
use crate::special::{bessel_i_scaled, Quadrature, SERIES_CAP};

/// Trigonometric moments of order `p`: `ψ_p = β_p + i α_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigMoments {
    pub p: usize,
    pub alpha: f64,
    pub beta: f64,
    pub psi_re: f64,
    pub psi_im: f64,
}

impl TrigMoments {
    pub fn psi(&self) -> Complex64 {
        Complex64::new(self.psi_re, self.psi_im)
    }
}

fn reduce(p: i64, m: usize) -> usize {
    p.rem_euclid(m as i64) as usize
}

/// `ψ_p = Σ_r p(r) e^{i p 2πr/m}` by direct summation.
pub fn chf_bruteforce(pmf: &Pmf, p: i64) -> Complex64 {
    let l = pmf.lattice();
    let p = reduce(p, l.m());
    pmf.probs()
        .iter()
        .enumerate()
        .map(|(r, w)| {
            let a = l.angle((p * r) % l.m());
            Complex64::new(w * a.cos(), w * a.sin())
        })
        .sum()
}

pub fn trig_moments(pmf: &Pmf, p: i64) -> TrigMoments {
    let psi = chf_bruteforce(pmf, p);
    TrigMoments { p: reduce(p, pmf.m()), alpha: psi.im, beta: psi.re, psi_re: psi.re, psi_im: psi.im }
}

fn phase(m: usize, p: usize, t: usize) -> Complex64 {
    Complex64::from_polar(1.0, TAU * ((p * t) % m) as f64 / m as f64)
}

/// Sums `term(q)` over `q = p + l m`, `l ∈ Z`, stopping on each side once
/// the magnitude `mag(q)` (non-increasing in `|q|`) drops below `1e-17`.
fn aliased_sum(
    m: usize,
    p: usize,
    skip_zero: bool,
    mag: impl Fn(i64) -> f64,
    term: impl Fn(i64) -> Complex64,
) -> Result<Complex64> {
    let m = m as i64;
    let p = p as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for dir in [1i64, -1] {
        let start = if dir == 1 { 0 } else { 1 };
        let mut converged = false;
        for l in start..SERIES_CAP as i64 {
            let q = p + dir * l * m;
            if q == 0 && skip_zero {
                continue;
            }
            let g = mag(q);
            acc += term(q);
            if g < 1e-17 && q.abs() > m {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::numeric("aliased characteristic-function series did not converge"));
        }
    }
    Ok(acc)
}

type Chf<'a> = Box<dyn Fn(i64) -> Complex64 + 'a>;
type Bound<'a> = Box<dyn Fn(i64) -> f64 + 'a>;

/// Parent characteristic function `φ_q` and a decreasing bound on `|φ_q|`.
fn parent_chf(family: &Family) -> Result<(Chf<'_>, Bound<'_>)> {
    Ok(match *family {
        Family::Cdvm { kappa, .. } | Family::Mdvm { kappa, .. } => {
            let mu = match *family {
                Family::Mdvm { mu, .. } => mu,
                _ => 0.0,
            };
            let i0 = bessel_i_scaled(0, kappa);
            let f = move |q: i64| {
                let r = if q.unsigned_abs() > u32::MAX as u64 {
                    0.0
                } else {
                    bessel_i_scaled(q.unsigned_abs() as u32, kappa) / i0
                };
                Complex64::from_polar(r, q as f64 * mu)
            };
            let g = move |q: i64| {
                if q.unsigned_abs() > 100_000 {
                    0.0
                } else {
                    bessel_i_scaled(q.unsigned_abs() as u32, kappa) / i0
                }
            };
            (Box::new(f), Box::new(g))
        }
        Family::Cdwc { rho, .. } | Family::Mdwc { rho, .. } => {
            let mu = match *family {
                Family::Mdwc { mu, .. } => mu,
                _ => 0.0,
            };
            (
                Box::new(move |q: i64| Complex64::from_polar(rho.powf(q.abs() as f64), q as f64 * mu)),
                Box::new(move |q: i64| rho.powf(q.abs() as f64)),
            )
        }
        Family::Cdwn { rho, .. } => (
            Box::new(move |q: i64| Complex64::new(rho.powf((q * q) as f64), 0.0)),
            Box::new(move |q: i64| rho.powf((q * q) as f64)),
        ),
        Family::CdStable { rho, a, b, .. } => {
            if b != 0.0 {
                return Err(Error::NotImplemented(
                    "analytic characteristic function of the skewed (b != 0) stable family".into(),
                ));
            }
            (
                Box::new(move |q: i64| Complex64::new(rho.powf((q.abs() as f64).powf(a)), 0.0)),
                Box::new(move |q: i64| rho.powf((q.abs() as f64).powf(a))),
            )
        }
        Family::CdCardioid { rho, mu } | Family::MdCardioid { rho, mu } => (
            Box::new(move |q: i64| match q {
                0 => Complex64::new(1.0, 0.0),
                1 | -1 => Complex64::from_polar(rho, q as f64 * mu),
                _ => Complex64::new(0.0, 0.0),
            }),
            Box::new(move |q: i64| if q.abs() <= 1 { 1.0 } else { 0.0 }),
        ),
        Family::Cdkj { rho, mu, gamma, lambda } | Family::Mdkj { rho, mu, gamma, lambda } => {
            let f = move |q: i64| {
                if q == 0 {
                    return Complex64::new(1.0, 0.0);
                }
                let k = q.abs() as f64;
                let z = Complex64::from_polar(gamma * rho.powf(k - 1.0), k * mu + (k - 1.0) * lambda);
                if q > 0 {
                    z
                } else {
                    z.conj()
                }
            };
            let g = move |q: i64| if q == 0 { 1.0 } else { gamma * rho.powf(q.abs() as f64 - 1.0) };
            (Box::new(f), Box::new(g))
        }
        _ => {
            return Err(Error::NotImplemented(format!(
                "no parent characteristic function for family {}",
                family.name()
            )))
        }
    })
}

fn center_of(family: &Family) -> usize {
    match *family {
        Family::Cdvm { t, .. }
        | Family::Cdwc { t, .. }
        | Family::Cdwn { t, .. }
        | Family::CdStable { t, .. }
        | Family::WrappedPoisson { t, .. }
        | Family::WrappedGeometric { t, .. }
        | Family::WrappedSkewLaplace { t, .. } => t,
        _ => 0,
    }
}

/// Analytic characteristic function of a conditionalized (or centered
/// wrapped) family: `ψ_p = e^{ip2πt/m} Σ_l φ_{p+lm} / Σ_l φ_{lm}`, with the
/// closed forms for CDWC and the wrapped laws.
pub fn chf_cd_analytic(spec: &FamilySpec, p: i64) -> Result<Complex64> {
    let m = spec.m();
    let p = reduce(p, m);
    let t = center_of(&spec.family);
    let ph = phase(m, p, t);
    match spec.family {
        Family::Cdwc { rho, .. } => {
            let rm = rho.powi(m as i32);
            let beta = if rho == 0.0 {
                if p == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                rho.powi(p as i32) * (1.0 + rho.powi(m as i32 - 2 * p as i32)) / (1.0 + rm)
            };
            return Ok(ph * beta);
        }
        Family::WrappedPoisson { lambda, .. } => {
            let s = TAU * p as f64 / m as f64;
            let z = Complex64::new(0.0, s).exp() - 1.0;
            return Ok(ph * (z * lambda).exp());
        }
        Family::WrappedGeometric { p: g, .. } => {
            let e = Complex64::from_polar(1.0, TAU * p as f64 / m as f64);
            return Ok(ph * (1.0 - g) / (1.0 - e * g));
        }
        Family::WrappedSkewLaplace { p: a, q: b, .. } => {
            let e = Complex64::from_polar(1.0, TAU * p as f64 / m as f64);
            let c = (1.0 - a) * (1.0 - b) / (1.0 - a * b);
            return Ok(ph * c * (1.0 / (1.0 - e * a) + e.conj() * b / (1.0 - e.conj() * b)));
        }
        Family::Mdvm { .. } | Family::Mdwc { .. } | Family::MdCardioid { .. } | Family::Mdkj { .. } => {
            return Err(Error::NotImplemented(format!(
                "{} is marginalized; use the marginalized characteristic function",
                spec.family.name()
            )))
        }
        _ => {}
    }
    if p == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let (phi, mag) = parent_chf(&spec.family)?;
    let num = aliased_sum(m, p, false, &mag, &phi)?;
    let den = aliased_sum(m, 0, false, &mag, &phi)?;
    Ok(ph * num / den)
}

/// `S_{p,m} = Σ_{q ≡ p (mod m), q ≠ 0} φ_q / q`.
fn s_series(spec: &FamilySpec, p: usize) -> Result<Complex64> {
    let (phi, mag) = parent_chf(&spec.family)?;
    aliased_sum(spec.m(), p, true, |q| mag(q) / q.abs() as f64, |q| phi(q) / q as f64)
}

/// Analytic characteristic function of a marginalized family:
/// `ψ_p = e^{−iπp/m} (m sin(πp/m)/π) S_{p,m}`.
pub fn chf_md_analytic(spec: &FamilySpec, p: i64) -> Result<Complex64> {
    let m = spec.m();
    let p = reduce(p, m);
    if p == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let factor = Complex64::from_polar(m as f64 * (PI * p as f64 / m as f64).sin() / PI, -PI * p as f64 / m as f64);
    match spec.family {
        Family::Mdvm { .. } | Family::MdCardioid { .. } | Family::Mdkj { .. } => Ok(factor * s_series(spec, p)?),
        Family::Mdwc { rho, mu } => {
            // on-lattice centres allow the integral form of the series
            let t = mu * m as f64 / TAU;
            if (t - t.round()).abs() < 1e-12 {
                let t = (t.round() as i64).rem_euclid(m as i64) as usize;
                Ok(factor * phase(m, p, t) * mdwc_s_integral(m, p, rho)?)
            } else {
                Ok(factor * s_series(spec, p)?)
            }
        }
        _ => Err(Error::NotImplemented(format!(
            "{} is not marginalized; use the conditionalized characteristic function",
            spec.family.name()
        ))),
    }
}

/// `∫₀^ρ x^{p−1}(1 − x^{m−2p}) / (1 − x^m) dx`, the centred MDWC series.
pub fn mdwc_s_integral(m: usize, p: usize, rho: f64) -> Result<f64> {
    let (mi, pi) = (m as i32, p as i32);
    let f = |x: f64| {
        if x == 0.0 {
            return if p == 1 { 1.0 } else { 0.0 } - if m - p == 1 { 1.0 } else { 0.0 };
        }
        (x.powi(pi - 1) - x.powi(mi - pi - 1)) / (1.0 - x.powi(mi))
    };
    Quadrature { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 2000 }.integrate(f, 0.0, rho)
}

/// `B(κ) = E cos(2πr/m)` under CDVM(κ, 0), computed as `L₁/L₀`.
pub fn b_kappa(kappa: f64, lattice: Lattice) -> f64 {
    if kappa == 0.0 {
        return 0.0;
    }
    l_scaled(lattice, 1, kappa) / l_scaled(lattice, 0, kappa)
}

/// `B′(κ) = Var cos(2πr/m) = (1 + L₂/L₀)/2 − B²`.
pub fn b_kappa_derivative(kappa: f64, lattice: Lattice) -> f64 {
    let l0 = l_scaled(lattice, 0, kappa);
    let b = l_scaled(lattice, 1, kappa) / l0;
    0.5 * (1.0 + l_scaled(lattice, 2, kappa) / l0) - b * b
}

/// `L_p(κ) = Σ_r cos(2πpr/m) e^{κ cos(2πr/m)}`.
pub fn l_p(lattice: Lattice, p: i64, kappa: f64) -> f64 {
    l_scaled(lattice, p, kappa) * kappa.exp()
}

/// Inverts `B` by bracketed Newton to `|B(κ̂) − target| < 1e-10`.
pub fn b_inverse(target: f64, lattice: Lattice) -> Result<f64> {
    if !(target >= 0.0) {
        return Err(Error::OutOfRange(format!("B(kappa) target must be >= 0, got {target}")));
    }
    if target >= 1.0 {
        return Err(Error::OutOfRange(format!("B(kappa) < 1 for every kappa; target {target} is unattainable")));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while b_kappa(hi, lattice) < target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e7 {
            return Err(Error::OutOfRange(format!("B(kappa) target {target} needs kappa beyond 1e7")));
        }
    }
    let mut k = 0.5 * (lo + hi);
    for _ in 0..200 {
        let b = b_kappa(k, lattice) - target;
        if b.abs() < 1e-13 {
            return Ok(k);
        }
        if b > 0.0 {
            hi = k;
        } else {
            lo = k;
        }
        let d = b_kappa_derivative(k, lattice);
        let newton = k - b / d;
        k = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-15 * hi.max(1.0) {
            break;
        }
    }
    if (b_kappa(k, lattice) - target).abs() < 1e-10 {
        Ok(k)
    } else {
        Err(Error::numeric(format!("B inversion stalled at kappa={k} for target {target}")))
    }
}

/// Mean resultant length of CDWC(ρ): `ρ(1 + ρ^{m−2}) / (1 + ρ^m)`.
pub fn rho_w(rho: f64, m: usize) -> f64 {
    rho * (1.0 + rho.powi(m as i32 - 2)) / (1.0 + rho.powi(m as i32))
}

/// Inverse of [`rho_w`] by bisection; the target is clipped to `[0, 1 − 1e-12)`.
pub fn rho_w_inverse(target: f64, m: usize) -> f64 {
    let target = target.clamp(0.0, 1.0 - 1e-12);
    if target == 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if rho_w(mid, m) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `a(h) = h / (2 sin(h/2))`, the Sheppard multiplier for grouped angles.
pub fn sheppard_multiplier(h: f64) -> f64 {
    let h = wrap_pi(h).abs();
    if h < 1e-8 {
        1.0 + h * h / 24.0
    } else {
        h / (2.0 * (0.5 * h).sin())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{pmf_cdwc, Family};

    fn lat(m: usize) -> Lattice {
        Lattice::new(m).unwrap()
    }

    #[test]
    fn brute_force_trivial_orders() {
        let u = Pmf::uniform(lat(12));
        assert!(chf_bruteforce(&u, 1).norm() < 1e-15);
        let p = pmf_cdwc(lat(10), 0.5, 3).unwrap();
        assert!((chf_bruteforce(&p, 0) - 1.0).norm() < 1e-15);
        assert!((chf_bruteforce(&p, 13) - chf_bruteforce(&p, 3)).norm() < 1e-15);
    }

    #[test]
    fn cdwc_first_moment_is_rho_w() {
        let p = pmf_cdwc(lat(10), 0.5, 0).unwrap();
        let b = chf_bruteforce(&p, 1).re;
        assert!((b - 0.501_463_414_634_146_3).abs() < 1e-12);
        assert!((rho_w(0.5, 10) - b).abs() < 1e-14);
    }

    #[test]
    fn cardioid_row() {
        let spec = FamilySpec::new(lat(8), Family::CdCardioid { rho: 0.3, mu: 0.0 });
        for p in 0..8 {
            let want = match p {
                0 => 1.0,
                1 | 7 => 0.3,
                _ => 0.0,
            };
            assert!((chf_cd_analytic(&spec, p).unwrap() - want).norm() < 1e-15);
        }
    }

    #[test]
    fn md_cardioid_first_order() {
        let m = 9;
        let spec = FamilySpec::new(lat(m), Family::MdCardioid { rho: 0.35, mu: 0.0 });
        let want = Complex64::from_polar(m as f64 * 0.35 * (PI / m as f64).sin() / PI, -PI / m as f64);
        assert!((chf_md_analytic(&spec, 1).unwrap() - want).norm() < 1e-14);
    }

    #[test]
    fn b_round_trip_and_small_kappa() {
        let l = lat(10);
        assert_eq!(b_kappa(0.0, l), 0.0);
        let k = b_inverse(b_kappa(2.5, l), l).unwrap();
        assert!((k - 2.5).abs() < 1e-8);
        assert!(b_inverse(1.0, l).is_err());
        // B(κ) ≈ κ/2 for small κ
        assert!((b_kappa(0.036, lat(37)) - 0.018).abs() < 2e-5);
    }

    #[test]
    fn rho_w_inverse_round_trip() {
        for &m in &[3usize, 10, 37] {
            for &r in &[0.0, 0.1, 0.5, 0.9, 0.99] {
                assert!((rho_w_inverse(rho_w(r, m), m) - r).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sheppard_limit() {
        assert!((sheppard_multiplier(1e-6) - 1.0).abs() < 1e-12);
        assert!((sheppard_multiplier(PI / 2.0) - (PI / 2.0) / (2.0 * (PI / 4.0).sin())).abs() < 1e-15);
    }
}
