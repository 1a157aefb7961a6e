//! Mixtures of lattice pmfs whose lattices may differ; the support is the
//! union of the component supports.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::distributions::FamilySpec;
use crate::error::{Error, Result};
use crate::lattice::NORMALIZATION_TOL;

/// A point `2π·num/den` of the circle, stored as a reduced fraction so that
/// points shared by different lattices compare exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CirclePoint {
    pub num: u64,
    pub den: u64,
}

impl CirclePoint {
    pub fn new(r: usize, m: usize) -> Self {
        let g = gcd(r as u64, m as u64);
        CirclePoint { num: r as u64 / g, den: m as u64 / g }
    }

    pub fn angle(self) -> f64 {
        TAU * self.num as f64 / self.den as f64
    }
}

impl Ord for CirclePoint {
    fn cmp(&self, other: &Self) -> Ordering {
        ((self.num as u128) * (other.den as u128)).cmp(&((other.num as u128) * (self.den as u128)))
    }
}

impl PartialOrd for CirclePoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Probability function on an irregular set of circle points, sorted by angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrregularPmf {
    points: Vec<CirclePoint>,
    probs: Vec<f64>,
}

impl IrregularPmf {
    pub fn points(&self) -> &[CirclePoint] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.angle()).collect()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Probability of the point `2π r/m` (zero when it is not in the support).
    pub fn prob_at(&self, r: usize, m: usize) -> f64 {
        let key = CirclePoint::new(r % m, m);
        self.points.binary_search(&key).map(|i| self.probs[i]).unwrap_or(0.0)
    }
}

/// `Σ_j w_j p_j` over the union of the component lattices.
pub fn mixture_pmf(components: &[(FamilySpec, f64)]) -> Result<IrregularPmf> {
    if components.is_empty() {
        return Err(Error::domain("mixture needs at least one component"));
    }
    if components.iter().any(|(_, w)| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::domain("mixture weights must be finite and non-negative"));
    }
    let wsum: f64 = components.iter().map(|(_, w)| w).sum();
    if (wsum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::domain(format!("mixture weights sum to {wsum}, not 1")));
    }
    let mut cells: Vec<(CirclePoint, f64)> = Vec::new();
    for (spec, w) in components {
        let pmf = spec.pmf()?;
        let m = pmf.m();
        cells.extend(pmf.probs().iter().enumerate().map(|(r, p)| (CirclePoint::new(r, m), w * p)));
    }
    cells.sort_by_key(|a| a.0);
    let mut points: Vec<CirclePoint> = Vec::new();
    let mut probs: Vec<f64> = Vec::new();
    for (pt, p) in cells {
        match points.last() {
            Some(last) if *last == pt => *probs.last_mut().unwrap() += p,
            _ => {
                points.push(pt);
                probs.push(p);
            }
        }
    }
    Ok(IrregularPmf { points, probs })
}
