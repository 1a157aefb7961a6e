use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{NullDistribution, TestReport};
use crate::lattice::Lattice;
use crate::sampling::RngSeed;

/// Lag-one serial statistics of a lattice sequence; `C̄` and `S̄` divide the
/// `n − 1` lag-one terms by `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SerialStats {
    pub n: usize,
    pub c_bar: f64,
    pub s_bar: f64,
    /// `√(2n) C̄`
    pub c_stat: f64,
    /// `√(2n) S̄`
    pub s_stat: f64,
    /// `2n R̄²`
    pub r2_stat: f64,
}

fn stats_from_sums(n: usize, c: f64, s: f64) -> SerialStats {
    let nf = n as f64;
    let (cb, sb) = (c / nf, s / nf);
    let k = (2.0 * nf).sqrt();
    SerialStats { n, c_bar: cb, s_bar: sb, c_stat: k * cb, s_stat: k * sb, r2_stat: 2.0 * nf * (cb * cb + sb * sb) }
}

fn trig_table(lattice: Lattice) -> (Vec<f64>, Vec<f64>) {
    lattice.points().map(|r| (lattice.angle(r).cos(), lattice.angle(r).sin())).unzip()
}

pub fn serial_statistics(data: &[usize], lattice: Lattice) -> Result<SerialStats> {
    if data.len() < 3 {
        return Err(Error::domain(format!("serial test needs n >= 3, got {}", data.len())));
    }
    if let Some(i) = data.iter().position(|&x| !lattice.contains(x)) {
        return Err(Error::domain(format!("observation {i} = {} is not in Z_{}", data[i], lattice.m())));
    }
    let (ct, st) = trig_table(lattice);
    let (mut c, mut s) = (0.0, 0.0);
    for w in data.windows(2) {
        let d = lattice.offset(w[1], w[0] as i64);
        c += ct[d];
        s += st[d];
    }
    Ok(stats_from_sums(data.len(), c, s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerialReport {
    pub stats: SerialStats,
    /// `serial_C` and `serial_S` (two-sided, critical values for `|·|`) and
    /// `serial_R2` (upper tail).
    pub tests: Vec<TestReport>,
}

fn normal_two_sided(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Watson–Beran lag-one test with critical values from `reps` simulated iid
/// uniform sequences of the same length.
pub fn test_serial(data: &[usize], lattice: Lattice, reps: usize, seed: RngSeed) -> Result<SerialReport> {
    let obs = serial_statistics(data, lattice)?;
    let n = data.len();
    let m = lattice.m();
    let (ct, st) = trig_table(lattice);
    let sims: Vec<SerialStats> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.stream(i as u64);
            let mut prev = rng.random_range(0..m);
            let (mut c, mut s) = (0.0, 0.0);
            for _ in 1..n {
                let x = rng.random_range(0..m);
                let d = (x + m - prev) % m;
                c += ct[d];
                s += st[d];
                prev = x;
            }
            stats_from_sums(n, c, s)
        })
        .collect();
    let two_sided = |name: &str, value: f64, pick: fn(&SerialStats) -> f64| {
        let null = NullDistribution::new(sims.iter().map(|x| pick(x).abs()).collect());
        let mut r = null.report(name, value.abs(), Some(normal_two_sided(value)));
        r.value = value;
        r
    };
    let r2 = NullDistribution::new(sims.iter().map(|x| x.r2_stat).collect());
    let tests = vec![
        two_sided("serial_C", obs.c_stat, |x| x.c_stat),
        two_sided("serial_S", obs.s_stat, |x| x.s_stat),
        r2.report("serial_R2", obs.r2_stat, Some((-0.5 * obs.r2_stat).exp())),
    ];
    Ok(SerialReport { stats: obs, tests })
}
