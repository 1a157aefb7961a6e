use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{mle, MleResult, SampleSummary};
use crate::lattice::Lattice;
use crate::sampling::{PmfSampler, RngSeed};

/// Minimum number of bootstrap replicates accepted.
pub const MIN_BOOTSTRAP: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub replicates: usize,
    /// Standard deviation of the `τ̂*` replicates.
    pub se_tau: f64,
    /// Mean resultant length of the angles `2π t̂*/m`.
    pub rbar_t: f64,
    pub tau: Vec<f64>,
    pub t: Vec<usize>,
}

/// Parametric bootstrap: `b` samples of size `n` from the fitted pmf, each
/// refitted with the same estimator. Replicate `i` uses stream `i` of `seed`.
pub fn bootstrap(fit: &MleResult, lattice: Lattice, n: u64, b: usize, seed: RngSeed) -> Result<BootstrapResult> {
    if b < MIN_BOOTSTRAP {
        return Err(Error::domain(format!("bootstrap needs at least {MIN_BOOTSTRAP} replicates, got {b}")));
    }
    if n == 0 {
        return Err(Error::domain("bootstrap sample size must be positive"));
    }
    let pmf = fit.family.pmf(lattice, fit.tau_hat, fit.t_hat)?;
    let sampler = PmfSampler::new(&pmf);
    let reps: Vec<(f64, usize)> = (0..b)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.stream(i as u64);
            let mut counts = vec![0u64; lattice.m()];
            for _ in 0..n {
                counts[sampler.draw(&mut rng)] += 1;
            }
            let s = SampleSummary::from_counts(lattice, counts, 2)?;
            let f = mle(&s, fit.family)?;
            Ok((f.tau_hat, f.t_hat))
        })
        .collect::<Result<_>>()?;
    let tau: Vec<f64> = reps.iter().map(|r| r.0).collect();
    let t: Vec<usize> = reps.iter().map(|r| r.1).collect();
    let mean = tau.iter().sum::<f64>() / b as f64;
    let var = tau.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b as f64 - 1.0);
    let (c, s) = t.iter().fold((0.0, 0.0), |(c, s), &ti| {
        let a = lattice.angle(ti);
        (c + a.cos(), s + a.sin())
    });
    Ok(BootstrapResult { replicates: b, se_tau: var.sqrt(), rbar_t: (c / b as f64).hypot(s / b as f64), tau, t })
}
