//! Divergences between lattice pmfs, concentration matching by the first
//! trigonometric moment, maximum-divergence scans and Sheppard diagnostics.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{pmf_cdvm, pmf_cdwn, pmf_mdwc, LocationFamily, RHO_CAP};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Pmf};
use crate::moments::{b_inverse, b_kappa, chf_bruteforce, rho_w, rho_w_inverse, sheppard_multiplier};
use crate::special::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceTriple {
    pub kl: f64,
    pub l1: f64,
    /// Includes the factor `m/2π` so that it tends to the continuous `L₂`.
    pub l2: f64,
}

/// `KL(p₁‖p₂)`, `L₁` and scaled `L₂` between pmfs on the same lattice.
pub fn divergences(p1: &Pmf, p2: &Pmf) -> Result<DivergenceTriple> {
    if p1.m() != p2.m() {
        return Err(Error::domain(format!("pmfs live on different lattices ({} vs {})", p1.m(), p2.m())));
    }
    let mut kl = 0.0;
    let mut l1 = 0.0;
    let mut sq = 0.0;
    for (r, (&a, &b)) in p1.probs().iter().zip(p2.probs()).enumerate() {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::domain(format!("KL undefined: second pmf is zero at r={r} where the first is not")));
            }
            kl += a * (a / b).ln();
        }
        l1 += (a - b).abs();
        sq += (a - b).powi(2);
    }
    Ok(DivergenceTriple { kl: kl.max(0.0), l1, l2: (sq * p1.m() as f64 / TAU).sqrt() })
}

/// Families that can be matched by their first trigonometric moment.
fn check_matchable(f: LocationFamily) -> Result<()> {
    match f {
        LocationFamily::Cdvm | LocationFamily::Cdwc | LocationFamily::Cdwn => Ok(()),
        _ => Err(Error::NotImplemented(format!("moment matching for {}", f.name()))),
    }
}

/// Mean resultant length of a centred family member.
pub fn first_moment(family: LocationFamily, tau: f64, lattice: Lattice) -> Result<f64> {
    check_matchable(family)?;
    Ok(match family {
        LocationFamily::Cdvm => b_kappa(tau, lattice),
        LocationFamily::Cdwc => rho_w(tau, lattice.m()),
        _ => chf_bruteforce(&pmf_cdwn(lattice, tau, 0)?, 1).re,
    })
}

/// Concentration of `family` whose first moment equals `target`.
pub fn invert_first_moment(family: LocationFamily, target: f64, lattice: Lattice) -> Result<f64> {
    check_matchable(family)?;
    if !(0.0..1.0).contains(&target) {
        return Err(Error::OutOfRange(format!("first moment {target} is outside [0,1)")));
    }
    match family {
        LocationFamily::Cdvm => b_inverse(target, lattice),
        LocationFamily::Cdwc => Ok(rho_w_inverse(target, lattice.m())),
        _ => {
            if target == 0.0 {
                return Ok(0.0);
            }
            let top = first_moment(family, RHO_CAP, lattice)?;
            if target >= top {
                return Err(Error::OutOfRange(format!("CDWN cannot reach first moment {target}")));
            }
            let f = |rho: f64| first_moment(family, rho, lattice).map(|v| v - target).unwrap_or(f64::NAN);
            bisect(f, 0.0, RHO_CAP, 1e-13)
        }
    }
}

/// Maps a concentration between families by matching `B(κ) = ρ_w`.
pub fn map_concentration(from: LocationFamily, to: LocationFamily, value: f64, lattice: Lattice) -> Result<f64> {
    let target = first_moment(from, value, lattice)?;
    invert_first_moment(to, target, lattice)
}

/// Divergences of `other` from the CDVM base at a common first moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub rho_w: f64,
    pub kappa: f64,
    pub tau_other: f64,
    pub kl: f64,
    pub l1: f64,
    pub l2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanMax {
    pub value: f64,
    pub rho_w: f64,
    /// The maximum sits at the last grid point, so the true one may be higher.
    pub at_cap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub m: usize,
    pub other: LocationFamily,
    pub kl: ScanMax,
    pub l1: ScanMax,
    pub l2: ScanMax,
    pub rows: Vec<ScanRow>,
}

/// The paper's computational cap on `ρ_w` for scans.
pub const SCAN_CAP: f64 = 0.995;

/// `ρ_w` grid `step, 2·step, …` up to `cap`.
pub fn scan_grid(step: f64, cap: f64) -> Vec<f64> {
    let k = (cap / step + 1e-9).floor() as usize;
    (1..=k).map(|i| ((i as f64 * step) * 1e12).round() / 1e12).collect()
}

/// Evaluates `KL(CDVM‖other)`, `L₁`, `L₂` at moment-matched pairs over the
/// grid and reports the per-metric maxima.
pub fn max_divergence_scan(other: LocationFamily, lattice: Lattice, grid: &[f64]) -> Result<ScanResult> {
    check_matchable(other)?;
    if grid.is_empty() {
        return Err(Error::domain("scan grid is empty"));
    }
    let rows: Vec<ScanRow> = grid
        .par_iter()
        .map(|&rw| {
            let kappa = b_inverse(rw, lattice)?;
            let tau = invert_first_moment(other, rw, lattice)?;
            let base = pmf_cdvm(lattice, kappa, 0)?;
            let alt = other.pmf(lattice, tau, 0)?;
            let d = divergences(&base, &alt)?;
            Ok(ScanRow { rho_w: rw, kappa, tau_other: tau, kl: d.kl, l1: d.l1, l2: d.l2 })
        })
        .collect::<Result<_>>()?;
    let best = |pick: fn(&ScanRow) -> f64| {
        let (i, row) =
            rows.iter().enumerate().fold((0, &rows[0]), |acc, (i, r)| if pick(r) > pick(acc.1) { (i, r) } else { acc });
        ScanMax { value: pick(row), rho_w: row.rho_w, at_cap: i + 1 == rows.len() }
    };
    Ok(ScanResult { m: lattice.m(), other, kl: best(|r| r.kl), l1: best(|r| r.l1), l2: best(|r| r.l2), rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SheppardRow {
    pub m: usize,
    pub mdwc_cos1: f64,
    pub mdwc_cos2: f64,
    pub cdwc_cos1: f64,
    pub cdwc_cos2: f64,
    /// Sheppard multiplier `a(h)` for bin width `h = 2π/m`.
    pub a1: f64,
    /// `a(2h)`.
    pub a2: f64,
}

/// `E cos θ` and `E cos 2θ` of MDWC(m, ρ, 0) (exact bin integrals) and
/// CDWC(m, ρ, 0) for each `m`.
pub fn sheppard_report(rho: f64, m_list: &[usize]) -> Result<Vec<SheppardRow>> {
    m_list
        .iter()
        .map(|&m| {
            let l = Lattice::new(m)?;
            let md = pmf_mdwc(l, rho, 0.0)?;
            let h = l.spacing();
            Ok(SheppardRow {
                m,
                mdwc_cos1: chf_bruteforce(&md, 1).re,
                mdwc_cos2: chf_bruteforce(&md, 2).re,
                cdwc_cos1: cdwc_beta(rho, m, 1),
                cdwc_cos2: cdwc_beta(rho, m, 2),
                a1: sheppard_multiplier(h),
                a2: sheppard_multiplier(2.0 * h),
            })
        })
        .collect()
}

/// `β_p = ρ^p (1 + ρ^{m−2p}) / (1 + ρ^m)` for `0 ≤ p ≤ m`, reduced mod `m`.
pub fn cdwc_beta(rho: f64, m: usize, p: usize) -> f64 {
    let p = p % m;
    if rho == 0.0 {
        return if p == 0 { 1.0 } else { 0.0 };
    }
    rho.powi(p as i32) * (1.0 + rho.powi(m as i32 - 2 * p as i32)) / (1.0 + rho.powi(m as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::pmf_cdwc;

    #[test]
    fn identical_pmfs() {
        let l = Lattice::new(10).unwrap();
        let p = pmf_cdwc(l, 0.4, 2).unwrap();
        assert_eq!(divergences(&p, &p).unwrap(), DivergenceTriple { kl: 0.0, l1: 0.0, l2: 0.0 });
    }

    #[test]
    fn support_violation() {
        let l = Lattice::new(4).unwrap();
        let a = Pmf::uniform(l);
        let b = Pmf::point_mass(l, 0);
        assert!(divergences(&a, &b).is_err());
        assert!(divergences(&b, &a).is_ok());
    }

    #[test]
    fn zero_maps_to_zero() {
        let l = Lattice::new(10).unwrap();
        for (a, b) in [(LocationFamily::Cdvm, LocationFamily::Cdwc), (LocationFamily::Cdwc, LocationFamily::Cdwn)] {
            assert_eq!(map_concentration(a, b, 0.0, l).unwrap(), 0.0);
        }
    }

    #[test]
    fn cdwc_beta_matches_table_rows() {
        assert!((cdwc_beta(0.5, 3, 1) - 2.0 / 3.0).abs() < 1e-12);
        assert!((cdwc_beta(0.5, 3, 2) - 2.0 / 3.0).abs() < 1e-12);
        assert!((cdwc_beta(0.5, 5, 1) - 0.545_454_545_454_545_4).abs() < 1e-12);
    }

    #[test]
    fn grid_endpoints() {
        let g = scan_grid(0.001, SCAN_CAP);
        assert_eq!(g.len(), 995);
        assert!((g[994] - 0.995).abs() < 1e-12);
    }
}
