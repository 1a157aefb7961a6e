//! Sample summaries, maximum-likelihood estimation, parametric bootstrap and
//! tests of uniformity and serial independence.

mod bootstrap;
mod mle;
mod serial;
mod uniformity;

pub use bootstrap::{bootstrap, BootstrapResult};
pub use mle::{loglik, mle, mle_cdvm, mle_cdwc, mle_generic, moment_rho, MleResult};
pub use serial::{serial_statistics, test_serial, SerialReport, SerialStats};
pub use uniformity::{
    adhoc_statistics, chi2_sf, lr_statistic, null_t_distribution, test_t1, test_t2, test_ug2, test_uniformity_adhoc,
    test_uniformity_t, NullDistribution, TestReport,
};

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// Below this resultant length the mean direction is treated as undefined.
pub const DEGENERATE_RBAR: f64 = 1e-12;

/// Frequency counts and sample trigonometric moments of lattice data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub m: usize,
    pub n: u64,
    pub counts: Vec<u64>,
    /// `a_p`, `p = 1..=P` (index `p − 1`).
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub rbar: Vec<f64>,
    /// Mean directions in `[0, 2π)`; 0 when degenerate.
    pub theta_bar: Vec<f64>,
    /// True when the first resultant vanishes and `θ̄` is undefined.
    pub degenerate: bool,
}

impl SampleSummary {
    pub fn from_counts(lattice: Lattice, counts: Vec<u64>, max_order: usize) -> Result<Self> {
        let m = lattice.m();
        if counts.len() != m {
            return Err(Error::domain("count vector length does not match lattice"));
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::domain("cannot summarize an empty sample"));
        }
        let max_order = max_order.max(2);
        let nf = n as f64;
        let (mut a, mut b, mut rbar, mut theta_bar) = (vec![], vec![], vec![], vec![]);
        for p in 1..=max_order {
            let (mut c, mut s) = (0.0, 0.0);
            for (r, &k) in counts.iter().enumerate() {
                if k > 0 {
                    let ang = lattice.angle((p * r) % m);
                    c += k as f64 * ang.cos();
                    s += k as f64 * ang.sin();
                }
            }
            let (c, s) = (c / nf, s / nf);
            let rb = c.hypot(s);
            a.push(c);
            b.push(s);
            rbar.push(rb);
            theta_bar.push(if rb < DEGENERATE_RBAR { 0.0 } else { s.atan2(c).rem_euclid(TAU) });
        }
        let degenerate = rbar[0] < DEGENERATE_RBAR;
        Ok(SampleSummary { m, n, counts, a, b, rbar, theta_bar, degenerate })
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::new(self.m).expect("summary holds a valid lattice size")
    }

    pub fn c_bar(&self) -> f64 {
        self.a[0]
    }

    pub fn s_bar(&self) -> f64 {
        self.b[0]
    }

    pub fn r_bar(&self) -> f64 {
        self.rbar[0]
    }

    pub fn mean_direction(&self) -> f64 {
        self.theta_bar[0]
    }
}

/// Summarizes observations in `Z_m` up to trigonometric order `max_order`.
pub fn summarize(data: &[usize], lattice: Lattice, max_order: usize) -> Result<SampleSummary> {
    if data.is_empty() {
        return Err(Error::domain("cannot summarize an empty sample"));
    }
    let mut counts = vec![0u64; lattice.m()];
    for (i, &x) in data.iter().enumerate() {
        if !lattice.contains(x) {
            return Err(Error::domain(format!("observation {i} = {x} is not in Z_{}", lattice.m())));
        }
        counts[x] += 1;
    }
    SampleSummary::from_counts(lattice, counts, max_order)
}
