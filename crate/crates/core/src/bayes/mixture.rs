use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{
    accept, count_loglik, reflect, run_chains, tau_name, ChainOutput, LogPmfSource, McmcConfig, Move, ParamDraws,
    ParamKind, PosteriorDraws,
};
use crate::distributions::LocationFamily;
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::sampling::RngSeed;

/// `K`-component mixture of one location family; optionally the first
/// component is pinned to the uniform law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureModel {
    pub lattice: Lattice,
    pub family: LocationFamily,
    pub components: usize,
    pub uniform_first: bool,
}

impl MixtureModel {
    pub fn new(lattice: Lattice, family: LocationFamily, components: usize) -> Self {
        MixtureModel { lattice, family, components, uniform_first: false }
    }

    fn free(&self) -> std::ops::Range<usize> {
        usize::from(self.uniform_first)..self.components
    }
}

/// Posterior draws of the weights `w1..wK` and of `rho_j`/`kappa_j`, `t_j`
/// for every free component, relabelled by circular order of the centres.
pub fn mixture_fit(data: &[usize], model: &MixtureModel, mcmc: &McmcConfig, seed: RngSeed) -> Result<PosteriorDraws> {
    mcmc.validate()?;
    let (m, k) = (model.lattice.m(), model.components);
    if k == 0 {
        return Err(Error::domain("mixture needs at least one component"));
    }
    if k > m {
        return Err(Error::domain(format!("{k} components are not identifiable on Z_{m}")));
    }
    if data.len() < 10 * k {
        return Err(Error::domain(format!("mixture with {k} components needs n >= {}", 10 * k)));
    }
    let mut counts = vec![0usize; m];
    for &x in data {
        if x >= m {
            return Err(Error::domain(format!("observation {x} is outside Z_{m}")));
        }
        counts[x] += 1;
    }
    let (_, hi) = mcmc.tau_range(model.family);
    let source = LogPmfSource::new(model.family, model.lattice, hi)?;
    let mut post = run_chains(mcmc, seed, |rng| chain(&counts, model, mcmc, &source, rng))?;
    relabel(&mut post, model);
    Ok(post)
}

/// Lattice point after the emptiest smoothed stretch of `hist`.
fn cut_point(hist: &[f64]) -> usize {
    let m = hist.len();
    let smooth = |r: usize| hist[(r + m - 1) % m] + hist[r] + hist[(r + 1) % m];
    (0..m).fold(0, |b, r| if smooth(r) < smooth(b) { r } else { b })
}

/// Centres at evenly spaced circular quantiles of the data.
fn initial_centres(counts: &[usize], k: usize) -> Vec<usize> {
    let m = counts.len();
    let cut = cut_point(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
    let n: usize = counts.iter().sum();
    let mut out = Vec::with_capacity(k);
    let mut acc = 0usize;
    let mut j = 0;
    for s in 0..m {
        let r = (cut + s) % m;
        acc += counts[r];
        while j < k && acc as f64 >= (j as f64 + 0.5) / k as f64 * n as f64 {
            out.push(r);
            j += 1;
        }
    }
    while out.len() < k {
        out.push((cut + m - 1) % m);
    }
    out
}

fn chain(
    counts: &[usize],
    model: &MixtureModel,
    cfg: &McmcConfig,
    source: &LogPmfSource,
    mut rng: rand_chacha::ChaCha8Rng,
) -> Result<ChainOutput> {
    let m = counts.len();
    let k = model.components;
    let free = model.free();
    let (lo, hi) = cfg.tau_range(model.family);
    let name = tau_name(model.family);
    let uniform_lp = vec![-(m as f64).ln(); m];

    let mut w = vec![1.0 / k as f64; k];
    let mut tau = vec![0.0; k];
    let mut t = vec![0usize; k];
    let mut lp = vec![uniform_lp.clone(); k];
    for (j, c) in free.clone().zip(initial_centres(counts, free.len())) {
        t[j] = c;
        tau[j] = if model.family.uses_kappa() { 2.0 } else { 0.5 };
        lp[j] = source.log_pmf(tau[j])?;
    }

    let mut tau_moves: Vec<Move> =
        (0..k).map(|j| Move::new(format!("{name}{}", j + 1), cfg.tau_scale(model.family), true)).collect();
    let mut t_moves: Vec<Move> = (0..k).map(|j| Move::new(format!("t{}", j + 1), 0.0, false)).collect();
    let keep = cfg.draws_per_chain();
    let mut out_w = vec![Vec::with_capacity(keep); k];
    let mut out_tau = vec![Vec::with_capacity(keep); k];
    let mut out_t = vec![Vec::with_capacity(keep); k];
    let mut alloc = vec![vec![0usize; m]; k];
    let mut q = vec![0.0; k];

    for it in 0..cfg.iterations {
        let burning = it < cfg.burnin;

        // allocations: per lattice value, a multinomial split of its count
        for a in alloc.iter_mut() {
            a.iter_mut().for_each(|x| *x = 0);
        }
        for r in 0..m {
            if counts[r] == 0 {
                continue;
            }
            for j in 0..k {
                q[j] = w[j].ln() + lp[j][(r + m - t[j]) % m];
            }
            let top = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            q.iter_mut().for_each(|x| *x = (*x - top).exp());
            let mut left = counts[r] as u64;
            let mut mass: f64 = q.iter().sum();
            for j in 0..k {
                if left == 0 {
                    break;
                }
                let take = if j + 1 == k || mass <= 0.0 {
                    left
                } else {
                    let p = (q[j] / mass).clamp(0.0, 1.0);
                    Binomial::new(left, p).map_err(|e| Error::numeric(e.to_string()))?.sample(&mut rng)
                };
                alloc[j][r] = take as usize;
                left -= take;
                mass -= q[j];
            }
        }

        // weights: flat simplex prior gives Dirichlet(1 + n_j)
        let mut total = 0.0;
        for j in 0..k {
            let nj: usize = alloc[j].iter().sum();
            let g = Gamma::new(1.0 + nj as f64, 1.0).map_err(|e| Error::numeric(e.to_string()))?;
            w[j] = g.sample(&mut rng).max(f64::MIN_POSITIVE);
            total += w[j];
        }
        w.iter_mut().for_each(|x| *x /= total);

        for j in free.clone() {
            let mut ll = count_loglik(&alloc[j], &lp[j], t[j]);
            let z: f64 = StandardNormal.sample(&mut rng);
            let ok = match reflect(tau[j] + tau_moves[j].scale * z, lo, hi) {
                Some(prop) => {
                    let lp_new = source.log_pmf(prop)?;
                    let ll_new = count_loglik(&alloc[j], &lp_new, t[j]);
                    let a = accept(&mut rng, ll_new - ll);
                    if a {
                        tau[j] = prop;
                        lp[j] = lp_new;
                        ll = ll_new;
                    }
                    a
                }
                None => false,
            };
            tau_moves[j].record(ok, burning);
            for local in [false, true] {
                let prop = if local {
                    let d = rng.random_range(1..=3usize) % m;
                    if rng.random::<bool>() {
                        (t[j] + d) % m
                    } else {
                        (t[j] + m - d) % m
                    }
                } else {
                    rng.random_range(0..m)
                };
                let ll_new = count_loglik(&alloc[j], &lp[j], prop);
                let a = accept(&mut rng, ll_new - ll);
                if a {
                    t[j] = prop;
                    ll = ll_new;
                }
                if !local {
                    t_moves[j].record(a, burning);
                }
            }
        }

        if cfg.keeps(it) {
            for j in 0..k {
                out_w[j].push(w[j]);
                out_tau[j].push(tau[j]);
                out_t[j].push(t[j] as f64);
            }
        }
    }

    let mut params = Vec::new();
    let mut moves = Vec::new();
    for (j, draws) in out_w.into_iter().enumerate() {
        params.push(ParamDraws { name: format!("w{}", j + 1), kind: ParamKind::Continuous, draws });
    }
    for ((j, td), cd) in out_tau.into_iter().enumerate().zip(out_t) {
        if free.contains(&j) {
            params.push(ParamDraws { name: format!("{name}{}", j + 1), kind: ParamKind::Continuous, draws: td });
            params.push(ParamDraws { name: format!("t{}", j + 1), kind: ParamKind::Circular { m }, draws: cd });
        }
    }
    for (j, (a, b)) in tau_moves.into_iter().zip(t_moves).enumerate() {
        if free.contains(&j) {
            moves.push(a);
            moves.push(b);
        }
    }
    Ok(ChainOutput { params, moves })
}

/// Sorts the free components of every draw by circular order of `t_j`,
/// starting after the emptiest stretch of the pooled centre draws.
fn relabel(post: &mut PosteriorDraws, model: &MixtureModel) {
    let m = model.lattice.m();
    let free: Vec<usize> = model.free().collect();
    if free.len() < 2 {
        return;
    }
    let name = tau_name(model.family);
    let idx = |label: String| post.params.iter().position(|p| p.name == label).unwrap();
    let wi: Vec<usize> = free.iter().map(|j| idx(format!("w{}", j + 1))).collect();
    let ti: Vec<usize> = free.iter().map(|j| idx(format!("t{}", j + 1))).collect();
    let ci: Vec<usize> = free.iter().map(|j| idx(format!("{name}{}", j + 1))).collect();
    let mut hist = vec![0.0; m];
    for &i in &ti {
        for &x in &post.params[i].draws {
            hist[x as usize] += 1.0;
        }
    }
    let cut = cut_point(&hist);
    for d in 0..post.len() {
        let mut comps: Vec<(usize, f64, f64, f64)> = (0..free.len())
            .map(|c| {
                let t = post.params[ti[c]].draws[d];
                ((t as usize + m - cut) % m, t, post.params[ci[c]].draws[d], post.params[wi[c]].draws[d])
            })
            .collect();
        comps.sort_by(|a, b| a.0.cmp(&b.0).then(a.2.total_cmp(&b.2)));
        for (c, comp) in comps.into_iter().enumerate() {
            post.params[ti[c]].draws[d] = comp.1;
            post.params[ci[c]].draws[d] = comp.2;
            post.params[wi[c]].draws[d] = comp.3;
        }
    }
}
