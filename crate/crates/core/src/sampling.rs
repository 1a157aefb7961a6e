//! Random generation from lattice pmfs and from continuous parents followed
//! by discretization.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::construct::{discretize, Discretization};
use crate::distributions::marginal::{vm_density, wc_density};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Pmf};

/// Seed of a deterministic random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent stream `i` under the same key, for per-task generators.
    pub fn stream(self, i: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(i);
        rng
    }

    /// Deterministically derived seed for a named sub-analysis.
    pub fn child(self, i: u64) -> RngSeed {
        // splitmix64 finalizer
        let mut z = self.0 ^ i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }
}

impl From<u64> for RngSeed {
    fn from(s: u64) -> Self {
        RngSeed(s)
    }
}

/// Inverse-cdf sampler over a fixed pmf.
#[derive(Debug, Clone)]
pub struct PmfSampler {
    cdf: Vec<f64>,
}

impl PmfSampler {
    pub fn new(pmf: &Pmf) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = pmf
            .probs()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        // guard against the last entry falling short of 1 through rounding
        let last = cdf.len() - 1;
        cdf[last] = f64::INFINITY;
        PmfSampler { cdf }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }

    pub fn draw_n<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<usize> {
        (0..n).map(|_| self.draw(rng)).collect()
    }
}

/// `n` iid draws from `pmf`.
pub fn sample_pmf(pmf: &Pmf, n: usize, seed: RngSeed) -> Vec<usize> {
    PmfSampler::new(pmf).draw_n(&mut seed.rng(), n)
}

/// Continuous circular parents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "parent", rename_all = "snake_case")]
pub enum Parent {
    VonMises { kappa: f64, mu: f64 },
    WrappedCauchy { rho: f64, mu: f64 },
}

impl Parent {
    fn validate(&self) -> Result<()> {
        match *self {
            Parent::VonMises { kappa, mu } if kappa >= 0.0 && kappa.is_finite() && mu.is_finite() => Ok(()),
            Parent::WrappedCauchy { rho, mu } if (0.0..1.0).contains(&rho) && mu.is_finite() => Ok(()),
            _ => Err(Error::domain(format!("invalid parent parameters {self:?}"))),
        }
    }

    pub fn density(&self, theta: f64) -> f64 {
        match *self {
            Parent::VonMises { kappa, mu } => vm_density(kappa, mu, theta),
            Parent::WrappedCauchy { rho, mu } => wc_density(rho, mu, theta),
        }
    }

    /// One draw in `[0, 2π)`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let th = match *self {
            Parent::WrappedCauchy { rho, mu } => {
                let u: f64 = rng.random();
                mu + 2.0 * ((1.0 - rho) / (1.0 + rho) * (PI * (u - 0.5)).tan()).atan()
            }
            Parent::VonMises { kappa, mu } => mu + best_fisher(kappa, rng),
        };
        th.rem_euclid(TAU)
    }
}

/// Best & Fisher (1979) rejection sampler for the centred von Mises.
fn best_fisher<R: Rng + ?Sized>(kappa: f64, rng: &mut R) -> f64 {
    if kappa < 1e-8 {
        return rng.random::<f64>() * TAU - PI;
    }
    let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let u1: f64 = rng.random();
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        let u2: f64 = rng.random();
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let u3: f64 = rng.random();
            let th = f.clamp(-1.0, 1.0).acos();
            return if u3 > 0.5 { th } else { -th };
        }
    }
}

/// Lattice index of an angle under marginalization: `⌊mθ/2π⌋ mod m`.
pub fn bin_of(lattice: Lattice, theta: f64) -> usize {
    let m = lattice.m();
    ((m as f64 * theta.rem_euclid(TAU) / TAU).floor() as usize).min(m - 1)
}

/// Draws via a continuous parent: the marginalized path simulates angles and
/// bins them; the conditionalized path samples the plug-in pmf.
pub fn sample_via_parent(
    parent: Parent,
    lattice: Lattice,
    method: Discretization,
    n: usize,
    seed: RngSeed,
) -> Result<Vec<usize>> {
    parent.validate()?;
    let mut rng = seed.rng();
    match method {
        Discretization::Marginalized => Ok((0..n).map(|_| bin_of(lattice, parent.draw(&mut rng))).collect()),
        Discretization::Conditionalized => {
            let pmf = discretize(lattice, |t| parent.density(t), method)?;
            Ok(PmfSampler::new(&pmf).draw_n(&mut rng, n))
        }
    }
}

/// Duality route (a) for a Cauchy parent on the line with scale `a`: draw
/// `X`, discretize `mX/2π` on the integers, then wrap modulo `m`.
pub fn sample_cauchy_discretize_then_wrap(lattice: Lattice, a: f64, mu: f64, n: usize, seed: RngSeed) -> Vec<usize> {
    let mut rng = seed.rng();
    let m = lattice.m() as f64;
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let x = mu + a * (PI * (u - 0.5)).tan();
            let j = (m * x / TAU).floor();
            j.rem_euclid(m) as usize % lattice.m()
        })
        .collect()
}

/// Duality route (b): wrap the same Cauchy draw onto the circle, then bin it.
pub fn sample_cauchy_wrap_then_discretize(lattice: Lattice, a: f64, mu: f64, n: usize, seed: RngSeed) -> Vec<usize> {
    let mut rng = seed.rng();
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let x = mu + a * (PI * (u - 0.5)).tan();
            bin_of(lattice, x.rem_euclid(TAU))
        })
        .collect()
}

/// Frequency counts of lattice draws.
pub fn counts(lattice: Lattice, data: &[usize]) -> Vec<u64> {
    let mut c = vec![0u64; lattice.m()];
    for &x in data {
        c[x % lattice.m()] += 1;
    }
    c
}
