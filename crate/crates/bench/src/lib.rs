//! Fixed inputs shared by the benchmarks.

use circlat::distributions::pmf_cdwc;
use circlat::sampling::sample_pmf;
use circlat::{Lattice, Pmf, RngSeed};

pub fn lattice(m: usize) -> Lattice {
    Lattice::new(m).expect("benchmark lattice sizes are valid")
}

/// Roulette-scale sequence: `n` draws from CDWC(ρ, t=0) on `Z_m`.
pub fn cdwc_sample(m: usize, rho: f64, n: usize) -> Vec<usize> {
    let pmf = pmf_cdwc(lattice(m), rho, 0).expect("valid CDWC parameters");
    sample_pmf(&pmf, n, RngSeed(17))
}

/// Uniform for the first half, CDWC(0.5) afterwards.
pub fn switch_sample(m: usize, n: usize) -> Vec<usize> {
    let l = lattice(m);
    let mut d = sample_pmf(&Pmf::uniform(l), n / 2, RngSeed(18));
    d.extend(cdwc_sample(m, 0.5, n - n / 2));
    d
}
