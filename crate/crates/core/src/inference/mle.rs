use std::cell::RefCell;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::distributions::conditional::{cauchy_denominator, l_scaled};
use crate::distributions::{LocationFamily, KAPPA_MAX, RHO_MAX};
use crate::error::Result;
use crate::inference::SampleSummary;
use crate::lattice::Lattice;
use crate::moments::{b_inverse, b_kappa, rho_w_inverse};
use crate::special::{bisect, golden_section_max};

/// Maximum-likelihood fit of a location family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub family: LocationFamily,
    /// `κ̂` or `ρ̂`.
    pub tau_hat: f64,
    pub t_hat: usize,
    /// `2π t̂ / m`.
    pub theta_hat: f64,
    pub loglik: f64,
    /// Bootstrap standard error of `τ̂`, once computed.
    pub se_tau: Option<f64>,
    /// Bootstrap mean resultant length of `2π t̂*/m`, once computed.
    pub rbar_t: Option<f64>,
    /// `τ̂` sits at the upper end of the search range.
    pub saturated: bool,
    /// More than one local maximum in `τ` was found at some `t`.
    pub non_concave: bool,
}

impl MleResult {
    fn new(family: LocationFamily, m: usize, tau_hat: f64, t_hat: usize, loglik: f64) -> Self {
        MleResult {
            family,
            tau_hat,
            t_hat,
            theta_hat: TAU * t_hat as f64 / m as f64,
            loglik,
            se_tau: None,
            rbar_t: None,
            saturated: false,
            non_concave: false,
        }
    }
}

/// CDVM log-likelihood `−n ln L₀(κ) + nκR̄ cos(θ̄ − 2πt/m)`.
fn loglik_cdvm(s: &SampleSummary, kappa: f64, t: usize) -> f64 {
    let n = s.n as f64;
    let l = s.lattice();
    let ln_l0 = l_scaled(l, 0, kappa).ln() + kappa;
    -n * ln_l0 + n * kappa * s.r_bar() * (s.mean_direction() - l.angle(t)).cos()
}

/// CDWC log-likelihood with the closed-form normalizer.
fn loglik_cdwc(s: &SampleSummary, rho: f64, t: usize) -> f64 {
    let n = s.n as f64;
    let l = s.lattice();
    let m = s.m;
    let rm = rho.powi(m as i32);
    let head = n * ((1.0 - rho * rho).ln() + (1.0 - rm).ln() - (m as f64).ln() - (1.0 + rm).ln());
    let tail: f64 = s
        .counts
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(r, &k)| k as f64 * cauchy_denominator(rho, l.angle(l.offset(r, t as i64))).ln())
        .sum();
    head - tail
}

/// `Σ_r n_r ln p(r | τ, t)` for any location family.
pub fn loglik(s: &SampleSummary, family: LocationFamily, tau: f64, t: usize) -> Result<f64> {
    match family {
        LocationFamily::Cdvm => Ok(loglik_cdvm(s, tau, t)),
        LocationFamily::Cdwc => Ok(loglik_cdwc(s, tau, t)),
        _ => {
            let p = family.pmf(s.lattice(), tau, t)?;
            Ok(counts_loglik(&s.counts, p.probs()))
        }
    }
}

fn counts_loglik(counts: &[u64], probs: &[f64]) -> f64 {
    counts.iter().zip(probs).filter(|(&k, _)| k > 0).map(|(&k, &p)| k as f64 * p.ln()).sum()
}

/// Log-likelihood with the pmf centred at 0 and the data shifted by `t`.
fn shifted_loglik(counts: &[u64], log_p0: &[f64], t: usize) -> f64 {
    let m = counts.len();
    counts.iter().enumerate().filter(|(_, &k)| k > 0).map(|(r, &k)| k as f64 * log_p0[(r + m - t) % m]).sum()
}

/// `[x]_m`: nearest integer modulo `m`, exact halves going down.
fn nearest_mod(x: f64, m: usize) -> usize {
    let f = x.floor();
    let r = if x - f > 0.5 { f + 1.0 } else { f };
    (r as i64).rem_euclid(m as i64) as usize
}

/// Closed-form CDVM estimator: `t̂ = [mθ̄/2π]_m`, `B(κ̂) = R̄ cos(θ̄ − 2πt̂/m)`.
pub fn mle_cdvm(s: &SampleSummary) -> Result<MleResult> {
    let l = s.lattice();
    let m = s.m;
    if s.degenerate {
        return Ok(MleResult::new(LocationFamily::Cdvm, m, 0.0, 0, loglik_cdvm(s, 0.0, 0)));
    }
    let t = nearest_mod(m as f64 * s.mean_direction() / TAU, m);
    let target = (s.r_bar() * (s.mean_direction() - l.angle(t)).cos()).max(0.0);
    let (kappa, saturated) =
        if target >= b_kappa(KAPPA_MAX, l) { (KAPPA_MAX, true) } else { (b_inverse(target, l)?, false) };
    let mut out = MleResult::new(LocationFamily::Cdvm, m, kappa, t, loglik_cdvm(s, kappa, t));
    out.saturated = saturated;
    Ok(out)
}

/// Score `h(ρ, t) = (1/n) ∂LL/∂ρ` of the CDWC likelihood (valid at ρ = 0).
fn cdwc_score(s: &SampleSummary, rho: f64, t: usize) -> f64 {
    let l = s.lattice();
    let m = s.m as i32;
    let n = s.n as f64;
    let mut acc = 0.0;
    for (r, &k) in s.counts.iter().enumerate() {
        if k > 0 {
            let c = l.angle(l.offset(r, t as i64)).cos();
            acc += k as f64 * (2.0 * rho - 2.0 * c) / cauchy_denominator(rho, l.angle(l.offset(r, t as i64)));
        }
    }
    -2.0 * rho / (1.0 - rho * rho) - 2.0 * m as f64 * rho.powi(m - 1) / (1.0 - rho.powi(2 * m)) - acc / n
}

const SCORE_GRID: usize = 200;

/// CDWC maximum likelihood: for every `t`, the roots of the score on a
/// 200-point sign scan refined by bisection; the best `(ρ̂(t), t)` wins.
pub fn mle_cdwc(s: &SampleSummary) -> Result<MleResult> {
    let m = s.m;
    let mut best: Option<MleResult> = None;
    let mut non_concave = false;
    for t in 0..m {
        let grid: Vec<f64> = (0..=SCORE_GRID).map(|i| RHO_MAX * i as f64 / SCORE_GRID as f64).collect();
        let h: Vec<f64> = grid.iter().map(|&r| cdwc_score(s, r, t)).collect();
        let mut candidates = vec![0.0];
        let mut maxima = 0;
        for i in 0..SCORE_GRID {
            if h[i] > 0.0 && h[i + 1] <= 0.0 {
                maxima += 1;
                candidates.push(bisect(|r| cdwc_score(s, r, t), grid[i], grid[i + 1], 1e-12)?);
            }
        }
        if h[SCORE_GRID] > 0.0 {
            candidates.push(RHO_MAX);
        }
        non_concave |= maxima > 1;
        for rho in candidates {
            let ll = loglik_cdwc(s, rho, t);
            if best.as_ref().is_none_or(|b| ll > b.loglik) {
                let mut r = MleResult::new(LocationFamily::Cdwc, m, rho, t, ll);
                r.saturated = rho >= RHO_MAX;
                best = Some(r);
            }
        }
    }
    let mut out = best.expect("lattice has at least two points");
    out.non_concave = non_concave;
    Ok(out)
}

fn tau_grid(family: LocationFamily) -> Vec<f64> {
    if family.uses_kappa() {
        let mut g = vec![0.0];
        let mut k = 0.01;
        while k < KAPPA_MAX {
            g.push(k);
            k *= 1.25;
        }
        g.push(KAPPA_MAX);
        g
    } else {
        (0..=100).map(|i| RHO_MAX * i as f64 / 100.0).collect()
    }
}

/// Exhaustive search over `t` with a grid scan and golden-section refinement
/// in `τ` (tolerance 1e-9) for any location family.
pub fn mle_generic(s: &SampleSummary, family: LocationFamily) -> Result<MleResult> {
    let l = s.lattice();
    let m = s.m;
    let grid = tau_grid(family);
    let log_p0 = |tau: f64| -> Result<Vec<f64>> { Ok(family.pmf(l, tau, 0)?.log_probs()) };
    let table: Vec<Vec<f64>> = grid.iter().map(|&tau| log_p0(tau)).collect::<Result<_>>()?;
    let mut best: Option<MleResult> = None;
    for t in 0..m {
        let ll: Vec<f64> = table.iter().map(|lp| shifted_loglik(&s.counts, lp, t)).collect();
        let (i, _) =
            ll.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(grid.len() - 1)];
        let err = RefCell::new(None);
        let (tau, val) = golden_section_max(
            |tau| match log_p0(tau) {
                Ok(lp) => shifted_loglik(&s.counts, &lp, t),
                Err(e) => {
                    *err.borrow_mut() = Some(e);
                    f64::NEG_INFINITY
                }
            },
            lo,
            hi,
            1e-9,
        );
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        let (tau, val) = if ll[i] > val { (grid[i], ll[i]) } else { (tau, val) };
        if best.as_ref().is_none_or(|b| val > b.loglik) {
            let mut r = MleResult::new(family, m, tau, t, val);
            r.saturated = tau >= family.tau_bounds().1 - 1e-9;
            best = Some(r);
        }
    }
    Ok(best.expect("lattice has at least two points"))
}

/// Dispatches to the specialised estimators where they exist.
pub fn mle(s: &SampleSummary, family: LocationFamily) -> Result<MleResult> {
    match family {
        LocationFamily::Cdvm => mle_cdvm(s),
        LocationFamily::Cdwc => mle_cdwc(s),
        _ => mle_generic(s, family),
    }
}

/// Moment estimator of the CDWC concentration: invert `ρ_w` at `R̄`.
pub fn moment_rho(s: &SampleSummary) -> f64 {
    rho_w_inverse(s.r_bar(), s.m)
}

pub(crate) fn uniform_loglik(n: u64, l: Lattice) -> f64 {
    -(n as f64) * (l.m() as f64).ln()
}
