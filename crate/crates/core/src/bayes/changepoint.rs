use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    accept, count_loglik, run_chains, tau_name, ChainOutput, LogPmfSource, McmcConfig, Move, ParamDraws, ParamKind,
    PosteriorDraws,
};
use crate::distributions::LocationFamily;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::sampling::RngSeed;

/// Uniform first segment `x_1..x_K`, then a location family `(τ₂, t₂)` for
/// `x_{K+1}..x_n`, with `1 ≤ K ≤ n−1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangepointModel {
    pub lattice: Lattice,
    pub family: LocationFamily,
}

impl ChangepointModel {
    pub fn new(lattice: Lattice) -> Self {
        ChangepointModel { lattice, family: LocationFamily::Cdwc }
    }
}

pub const MIN_CHANGEPOINT_N: usize = 4;
pub const MIN_PREFIX: usize = 10;

/// Extra local proposals on `t` and `K` per sweep; they are cheap.
const K_PROPOSALS: usize = 5;

fn check_data(data: &[usize], lattice: Lattice) -> Result<()> {
    if let Some(bad) = data.iter().find(|&&x| !lattice.contains(x)) {
        return Err(Error::domain(format!("observation {bad} is outside Z_{}", lattice.m())));
    }
    Ok(())
}

/// Posterior draws of `K`, `τ₂` (named `rho2` or `kappa2`) and `t2`.
pub fn changepoint_fit(
    data: &[usize],
    model: &ChangepointModel,
    mcmc: &McmcConfig,
    seed: RngSeed,
) -> Result<PosteriorDraws> {
    mcmc.validate()?;
    if data.len() < MIN_CHANGEPOINT_N {
        return Err(Error::domain(format!("changepoint analysis needs n >= {MIN_CHANGEPOINT_N}")));
    }
    check_data(data, model.lattice)?;
    let (_, hi) = mcmc.tau_range(model.family);
    let source = LogPmfSource::new(model.family, model.lattice, hi)?;
    run_chains(mcmc, seed, |rng| chain(data, model, mcmc, &source, rng))
}

fn chain(
    data: &[usize],
    model: &ChangepointModel,
    cfg: &McmcConfig,
    source: &LogPmfSource,
    mut rng: rand_chacha::ChaCha8Rng,
) -> Result<ChainOutput> {
    let n = data.len();
    let m = model.lattice.m();
    let ln_m = (m as f64).ln();
    let (lo, hi) = cfg.tau_range(model.family);
    let name = tau_name(model.family);

    let mut k = n / 2;
    let mut c2 = vec![0usize; m];
    for &x in &data[k..] {
        c2[x] += 1;
    }
    let mut t = (0..m).fold(0, |b, r| if c2[r] > c2[b] { r } else { b });
    let mut tau = if model.family.uses_kappa() { 1.0 } else { 0.5 };
    let mut lp = source.log_pmf(tau)?;
    let mut ll2 = count_loglik(&c2, &lp, t);

    let mut tau_move = Move::new(format!("{name}2"), cfg.tau_scale(model.family), true);
    let mut t_move = Move::new("t2", 0.0, false);
    let mut k_move = Move::new("K", 0.0, false);
    let keep = cfg.draws_per_chain();
    let mut out_k = Vec::with_capacity(keep);
    let mut out_tau = Vec::with_capacity(keep);
    let mut out_t = Vec::with_capacity(keep);
    let mut prefix = vec![0.0; n + 1];
    let w = cfg.window as i64;

    for it in 0..cfg.iterations {
        let burning = it < cfg.burnin;

        // τ₂: reflected Gaussian walk
        let z: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
        let ok = match super::reflect(tau + tau_move.scale * z, lo, hi) {
            Some(prop) => {
                let lp_new = source.log_pmf(prop)?;
                let ll_new = count_loglik(&c2, &lp_new, t);
                let a = accept(&mut rng, ll_new - ll2);
                if a {
                    tau = prop;
                    lp = lp_new;
                    ll2 = ll_new;
                }
                a
            }
            None => false,
        };
        tau_move.record(ok, burning);

        // t₂: one independent uniform proposal, one local step
        for local in [false, true] {
            let prop = if local {
                let d = rng.random_range(1..=3usize);
                if rng.random::<bool>() {
                    (t + d) % m
                } else {
                    (t + m - d % m) % m
                }
            } else {
                rng.random_range(0..m)
            };
            let ll_new = count_loglik(&c2, &lp, prop);
            let a = accept(&mut rng, ll_new - ll2);
            if a {
                t = prop;
                ll2 = ll_new;
            }
            if !local {
                t_move.record(a, burning);
            }
        }

        // K: random walk with O(1) evaluations from prefix sums
        for i in 0..n {
            prefix[i + 1] = prefix[i] + lp[(data[i] + m - t) % m];
        }
        let ll_k = |k: usize| -(k as f64) * ln_m + prefix[n] - prefix[k];
        for _ in 0..K_PROPOSALS {
            let mut d = rng.random_range(-w..w);
            if d >= 0 {
                d += 1;
            }
            let prop = k as i64 + d;
            let a = (1..n as i64).contains(&prop) && accept(&mut rng, ll_k(prop as usize) - ll_k(k));
            if a {
                let p = prop as usize;
                if p > k {
                    data[k..p].iter().for_each(|&x| c2[x] -= 1);
                } else {
                    data[p..k].iter().for_each(|&x| c2[x] += 1);
                }
                k = p;
            }
            k_move.record(a, burning);
        }
        ll2 = prefix[n] - prefix[k];

        if cfg.keeps(it) {
            out_k.push(k as f64);
            out_tau.push(tau);
            out_t.push(t as f64);
        }
    }
    Ok(ChainOutput {
        params: vec![
            ParamDraws { name: "K".into(), kind: ParamKind::Count, draws: out_k },
            ParamDraws { name: format!("{name}2"), kind: ParamKind::Continuous, draws: out_tau },
            ParamDraws { name: "t2".into(), kind: ParamKind::Circular { m }, draws: out_t },
        ],
        moves: vec![k_move, tau_move, t_move],
    })
}

/// Independent fits on the prefixes `data[..u]`, all driven by the same seed.
pub fn changepoint_stream(
    data: &[usize],
    prefixes: &[usize],
    model: &ChangepointModel,
    mcmc: &McmcConfig,
    seed: RngSeed,
) -> Result<Vec<PosteriorDraws>> {
    if prefixes.is_empty() {
        return Err(Error::domain("no prefixes given"));
    }
    if prefixes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("prefixes must be strictly increasing"));
    }
    if prefixes[0] < MIN_PREFIX || *prefixes.last().unwrap() > data.len() {
        return Err(Error::domain(format!("prefixes must lie in [{MIN_PREFIX}, n={}]", data.len())));
    }
    prefixes.par_iter().map(|&u| changepoint_fit(&data[..u], model, mcmc, seed)).collect()
}
