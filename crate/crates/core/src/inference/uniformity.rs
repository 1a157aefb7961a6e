use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::LocationFamily;
use crate::error::{Error, Result};
use crate::inference::mle::uniform_loglik;
use crate::inference::{mle, MleResult, SampleSummary};
use crate::lattice::Lattice;
use crate::sampling::RngSeed;

/// Minimum sample size for the uniformity tests.
pub const MIN_TEST_N: u64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    /// One of `T`, `UG2`, `T1sq`, `T2sq`, `serial_C`, `serial_S`, `serial_R2`.
    pub statistic: String,
    pub value: f64,
    /// Monte-Carlo p-value `(1 + #{T* ≥ T}) / (1 + B)`.
    pub p_value: f64,
    pub replications: usize,
    pub p_value_asymptotic: Option<f64>,
    pub critical_5: Option<f64>,
    pub critical_1: Option<f64>,
    /// Standard deviation of the statistic over the null replicates.
    pub null_sd: Option<f64>,
}

/// Simulated null distribution of a statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    sorted: Vec<f64>,
}

impl NullDistribution {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        NullDistribution { sorted: values }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// Add-one Monte-Carlo p-value for an upper-tail test.
    pub fn p_value(&self, x: f64) -> f64 {
        // tolerate rounding in statistics that are exactly tied
        let ge = self.sorted.len() - self.sorted.partition_point(|&v| v < x - 1e-12 * x.abs().max(1.0));
        (1 + ge) as f64 / (1 + self.sorted.len()) as f64
    }

    /// Empirical quantile (inverse of the empirical cdf).
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.sorted.len();
        let k = ((q * n as f64).ceil() as usize).clamp(1, n);
        self.sorted[k - 1]
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.sorted.len() as f64
    }

    pub fn sd(&self) -> f64 {
        let mu = self.mean();
        let n = self.sorted.len() as f64;
        (self.sorted.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    }

    pub(crate) fn report(&self, name: &str, value: f64, asymptotic: Option<f64>) -> TestReport {
        TestReport {
            statistic: name.to_string(),
            value,
            p_value: self.p_value(value),
            replications: self.len(),
            p_value_asymptotic: asymptotic,
            critical_5: Some(self.quantile(0.95)),
            critical_1: Some(self.quantile(0.99)),
            null_sd: Some(self.sd()),
        }
    }
}

/// Survival function of χ² with an even number of degrees of freedom.
pub fn chi2_sf(x: f64, df: u32) -> f64 {
    assert!(df.is_multiple_of(2) && df > 0, "closed form needs even df");
    let h = 0.5 * x.max(0.0);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..df / 2 {
        term *= h / k as f64;
        sum += term;
    }
    (-h).exp() * sum
}

pub(crate) fn uniform_counts<R: Rng + ?Sized>(rng: &mut R, n: u64, m: usize) -> Vec<u64> {
    let mut c = vec![0u64; m];
    for _ in 0..n {
        c[rng.random_range(0..m)] += 1;
    }
    c
}

/// Likelihood-ratio statistic `T = 2(LL(τ̂, t̂) − LL(0, 0))` and the fit.
pub fn lr_statistic(s: &SampleSummary, family: LocationFamily) -> Result<(f64, MleResult)> {
    let fit = mle(s, family)?;
    let t = 2.0 * (fit.loglik - uniform_loglik(s.n, s.lattice()));
    Ok((t.max(0.0), fit))
}

/// Null distribution of `T` from `reps` uniform samples of size `n`.
pub fn null_t_distribution(
    lattice: Lattice,
    n: u64,
    family: LocationFamily,
    reps: usize,
    seed: RngSeed,
) -> Result<NullDistribution> {
    let vals = (0..reps)
        .into_par_iter()
        .map(|i| {
            let counts = uniform_counts(&mut seed.stream(i as u64), n, lattice.m());
            let s = SampleSummary::from_counts(lattice, counts, 2)?;
            Ok(lr_statistic(&s, family)?.0)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(NullDistribution::new(vals))
}

fn check_n(s: &SampleSummary) -> Result<()> {
    if s.n < MIN_TEST_N {
        Err(Error::domain(format!("uniformity tests need n >= {MIN_TEST_N}, got {}", s.n)))
    } else {
        Ok(())
    }
}

/// Likelihood-ratio test of uniformity with a Monte-Carlo null.
pub fn test_uniformity_t(
    s: &SampleSummary,
    family: LocationFamily,
    reps: usize,
    seed: RngSeed,
) -> Result<(TestReport, MleResult)> {
    check_n(s)?;
    let (t, fit) = lr_statistic(s, family)?;
    let null = null_t_distribution(s.lattice(), s.n, family, reps, seed)?;
    Ok((null.report("T", t, None), fit))
}

/// `(U_G², T₁², T₂²)` for a sample.
pub fn adhoc_statistics(s: &SampleSummary) -> (f64, f64, f64) {
    let n = s.n as f64;
    let m = s.m as f64;
    let e = n / m;
    let mut acc = 0.0;
    let partial: Vec<f64> = s
        .counts
        .iter()
        .map(|&o| {
            acc += o as f64 - e;
            acc
        })
        .collect();
    let mean = partial.iter().sum::<f64>() / m;
    let ug2 = partial.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n * m);
    let r1 = s.rbar[0];
    let r2 = s.rbar[1];
    (ug2, 2.0 * n * r1 * r1, 2.0 * n * (r1 * r1 + r2 * r2))
}

/// Monte-Carlo (and for T₁², T₂² asymptotic χ²) tests of uniformity:
/// returns reports for `UG2`, `T1sq`, `T2sq` in that order.
pub fn test_uniformity_adhoc(s: &SampleSummary, reps: usize, seed: RngSeed) -> Result<Vec<TestReport>> {
    check_n(s)?;
    let lattice = s.lattice();
    let sims = (0..reps)
        .into_par_iter()
        .map(|i| {
            let counts = uniform_counts(&mut seed.stream(i as u64), s.n, lattice.m());
            Ok(adhoc_statistics(&SampleSummary::from_counts(lattice, counts, 2)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let (u, t1, t2) = adhoc_statistics(s);
    Ok(vec![
        NullDistribution::new(sims.iter().map(|x| x.0).collect()).report("UG2", u, None),
        NullDistribution::new(sims.iter().map(|x| x.1).collect()).report("T1sq", t1, Some(chi2_sf(t1, 2))),
        NullDistribution::new(sims.iter().map(|x| x.2).collect()).report("T2sq", t2, Some(chi2_sf(t2, 4))),
    ])
}

pub fn test_ug2(s: &SampleSummary, reps: usize, seed: RngSeed) -> Result<TestReport> {
    Ok(test_uniformity_adhoc(s, reps, seed)?.swap_remove(0))
}

pub fn test_t1(s: &SampleSummary, reps: usize, seed: RngSeed) -> Result<TestReport> {
    Ok(test_uniformity_adhoc(s, reps, seed)?.swap_remove(1))
}

pub fn test_t2(s: &SampleSummary, reps: usize, seed: RngSeed) -> Result<TestReport> {
    Ok(test_uniformity_adhoc(s, reps, seed)?.swap_remove(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi2_survival_values() {
        // χ²₂ upper 5% point is 5.991, χ²₄ is 9.488
        assert!((chi2_sf(5.991_464_547_107_979, 2) - 0.05).abs() < 1e-12);
        assert!((chi2_sf(9.487_729_036_781_154, 4) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn exact_uniform_counts() {
        let l = Lattice::new(10).unwrap();
        let s = SampleSummary::from_counts(l, vec![5; 10], 2).unwrap();
        let (u, t1, t2) = adhoc_statistics(&s);
        assert!(u.abs() < 1e-12 && t1.abs() < 1e-20 && t2.abs() < 1e-20);
        let (rep, _) = test_uniformity_t(&s, LocationFamily::Cdwc, 99, RngSeed(1)).unwrap();
        assert_eq!(rep.value, 0.0);
        assert_eq!(rep.p_value, 1.0);
    }

    #[test]
    fn null_distribution_quantiles() {
        let d = NullDistribution::new((1..=100).map(|x| x as f64).collect());
        assert_eq!(d.quantile(0.95), 95.0);
        assert_eq!(d.quantile(0.99), 99.0);
        assert!((d.p_value(95.0) - 7.0 / 101.0).abs() < 1e-15);
    }
}
