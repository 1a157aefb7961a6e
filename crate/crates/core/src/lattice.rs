use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a [`Pmf`].
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// The circular lattice `Z_m`, i.e. the `m` equally spaced angles `2πr/m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Lattice(usize);

impl Lattice {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::domain(format!("lattice size must be >= 2, got {m}")));
        }
        Ok(Lattice(m))
    }

    #[inline]
    pub fn m(self) -> usize {
        self.0
    }

    /// Angle `2πr/m` of lattice point `r` (taken mod m).
    #[inline]
    pub fn angle(self, r: usize) -> f64 {
        TAU * (r % self.0) as f64 / self.0 as f64
    }

    /// Angular spacing `2π/m`.
    #[inline]
    pub fn spacing(self) -> f64 {
        TAU / self.0 as f64
    }

    /// `(r - t) mod m` for signed offsets.
    #[inline]
    pub fn offset(self, r: usize, t: i64) -> usize {
        (r as i64 - t).rem_euclid(self.0 as i64) as usize
    }

    pub fn contains(self, r: usize) -> bool {
        r < self.0
    }

    pub fn points(self) -> impl Iterator<Item = usize> {
        0..self.0
    }
}

impl TryFrom<usize> for Lattice {
    type Error = Error;

    fn try_from(m: usize) -> Result<Self> {
        Lattice::new(m)
    }
}

impl From<Lattice> for usize {
    fn from(l: Lattice) -> usize {
        l.0
    }
}

/// A probability vector over `Z_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    lattice: Lattice,
    probs: Vec<f64>,
}

impl Pmf {
    /// Wraps an already normalized vector, checking the invariants.
    pub fn new(lattice: Lattice, probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(lattice, probs, NORMALIZATION_TOL)
    }

    pub(crate) fn with_tolerance(lattice: Lattice, probs: Vec<f64>, tol: f64) -> Result<Self> {
        if probs.len() != lattice.m() {
            return Err(Error::domain(format!(
                "pmf has {} entries for a lattice of size {}",
                probs.len(),
                lattice.m()
            )));
        }
        if let Some(bad) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::domain(format!("pmf entry {bad} is not a finite non-negative number")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::numeric(format!("pmf sums to {total}, not 1")));
        }
        Ok(Pmf { lattice, probs })
    }

    /// Normalizes non-negative weights into a pmf.
    pub fn from_weights(lattice: Lattice, mut weights: Vec<f64>) -> Result<Self> {
        if weights.len() != lattice.m() {
            return Err(Error::domain("weight vector length does not match lattice"));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::numeric("weights must be finite and non-negative"));
        }
        let total = neumaier_sum(&weights);
        if !(total > 0.0) {
            return Err(Error::numeric("weights sum to zero"));
        }
        for w in &mut weights {
            *w /= total;
        }
        Pmf::new(lattice, weights)
    }

    /// Normalizes log-weights, subtracting the maximum first.
    pub fn from_log_weights(lattice: Lattice, log_w: &[f64]) -> Result<Self> {
        let max = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::numeric("log-weights are not finite"));
        }
        Pmf::from_weights(lattice, log_w.iter().map(|l| (l - max).exp()).collect())
    }

    pub fn uniform(lattice: Lattice) -> Self {
        let m = lattice.m();
        Pmf { lattice, probs: vec![1.0 / m as f64; m] }
    }

    pub fn point_mass(lattice: Lattice, r: usize) -> Self {
        let mut probs = vec![0.0; lattice.m()];
        probs[r % lattice.m()] = 1.0;
        Pmf { lattice, probs }
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn m(&self) -> usize {
        self.lattice.m()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn get(&self, r: usize) -> f64 {
        self.probs[r % self.m()]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Lowest index attaining the maximum probability.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (r, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = r;
            }
        }
        best
    }

    pub fn log_probs(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.ln()).collect()
    }

    /// Pmf of `(r + shift) mod m`.
    pub fn rotate(&self, shift: usize) -> Pmf {
        let m = self.m();
        let mut probs = vec![0.0; m];
        for (r, &p) in self.probs.iter().enumerate() {
            probs[(r + shift) % m] = p;
        }
        Pmf { lattice: self.lattice, probs }
    }

    /// Expected value of `f(r)`.
    pub fn expect(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.probs.iter().enumerate().map(|(r, p)| p * f(r)).sum()
    }
}

/// Compensated summation.
pub fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}
