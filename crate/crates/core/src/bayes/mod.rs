//! Flat-prior Metropolis-within-Gibbs samplers for a single changepoint and
//! for finite mixtures of lattice location families.

mod changepoint;
mod mixture;

pub use changepoint::{changepoint_fit, changepoint_stream, ChangepointModel};
pub use mixture::{mixture_fit, MixtureModel};

use std::f64::consts::TAU;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::LocationFamily;
use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// Acceptance rates outside this band produce a tuning warning.
pub const ACCEPTANCE_BAND: (f64, f64) = (0.1, 0.6);

/// A second histogram peak at least this fraction of the first flags multimodality.
pub const MULTIMODAL_RATIO: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burnin: usize,
    pub thin: usize,
    pub chains: usize,
    /// Upper end of the flat prior on `κ`.
    pub kappa_max: f64,
    /// Half-width of the random walk on the changepoint.
    pub window: usize,
    pub rho_scale: f64,
    pub kappa_scale: f64,
    pub seed: Option<u64>,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            iterations: 20_000,
            burnin: 5_000,
            thin: 5,
            chains: 1,
            kappa_max: 50.0,
            window: 25,
            rho_scale: 0.05,
            kappa_scale: 0.5,
            seed: None,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burnin >= self.iterations {
            return Err(Error::domain(format!(
                "burn-in ({}) must be smaller than iterations ({})",
                self.burnin, self.iterations
            )));
        }
        if self.thin == 0 || self.chains == 0 || self.window == 0 {
            return Err(Error::domain("thin, chains and window must be positive"));
        }
        if self.draws_per_chain() == 0 {
            return Err(Error::domain("configuration keeps no draws"));
        }
        for (k, v) in [("kappa_max", self.kappa_max), ("rho_scale", self.rho_scale), ("kappa_scale", self.kappa_scale)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{k} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = McmcConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Parse { line: i + 1, msg };
            let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let int = || value.parse::<usize>().map_err(|e| bad(format!("{key}: {e}")));
            let float = || value.parse::<f64>().map_err(|e| bad(format!("{key}: {e}")));
            match key {
                "iterations" => cfg.iterations = int()?,
                "burnin" | "burn_in" => cfg.burnin = int()?,
                "thin" => cfg.thin = int()?,
                "chains" => cfg.chains = int()?,
                "kappa_max" => cfg.kappa_max = float()?,
                "window" => cfg.window = int()?,
                "rho_scale" => cfg.rho_scale = float()?,
                "kappa_scale" => cfg.kappa_scale = float()?,
                "seed" => cfg.seed = Some(value.parse::<u64>().map_err(|e| bad(format!("seed: {e}")))?),
                _ => return Err(bad(format!("unknown key {key:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn draws_per_chain(&self) -> usize {
        self.iterations.saturating_sub(self.burnin) / self.thin
    }

    pub(crate) fn tau_range(&self, family: LocationFamily) -> (f64, f64) {
        if family.uses_kappa() {
            (0.0, self.kappa_max)
        } else {
            (0.0, 1.0)
        }
    }

    pub(crate) fn tau_scale(&self, family: LocationFamily) -> f64 {
        if family.uses_kappa() {
            self.kappa_scale
        } else {
            self.rho_scale
        }
    }

    /// Whether iteration `it` (0-based) is stored.
    pub(crate) fn keeps(&self, it: usize) -> bool {
        it >= self.burnin && (it + 1 - self.burnin).is_multiple_of(self.thin)
    }
}

pub(crate) fn tau_name(family: LocationFamily) -> &'static str {
    if family.uses_kappa() {
        "kappa"
    } else {
        "rho"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamKind {
    Continuous,
    /// Integer valued on a line (e.g. the changepoint).
    Count,
    /// Lattice index on `Z_m`.
    Circular {
        m: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDraws {
    pub name: String,
    pub kind: ParamKind,
    pub draws: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub lo95: f64,
    pub hi95: f64,
    /// Most frequent value, for discrete parameters.
    pub mode: Option<f64>,
    pub multimodal: bool,
    /// Circular mean angle `θ` and mean resultant length of `2πt/m`.
    pub circular_mean: Option<f64>,
    pub rbar: Option<f64>,
}

impl ParamSummary {
    /// The equal-tailed interval is read as reaching zero when its lower end
    /// is below a tenth of its upper end.
    pub fn interval_includes_zero(&self) -> bool {
        self.lo95 < 0.1 * self.hi95
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    pub params: Vec<ParamDraws>,
    /// Post-burn-in acceptance rate of each Metropolis move.
    pub acceptance: Vec<(String, f64)>,
    pub chains: usize,
    pub draws_per_chain: usize,
    pub warnings: Vec<String>,
}

impl PosteriorDraws {
    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.params.iter().find(|p| p.name == name).map(|p| p.draws.as_slice())
    }

    pub fn len(&self) -> usize {
        self.params.first().map_or(0, |p| p.draws.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn summary(&self, name: &str) -> Option<ParamSummary> {
        self.params.iter().find(|p| p.name == name).map(summarize)
    }

    pub fn summaries(&self) -> Vec<ParamSummary> {
        self.params.iter().map(summarize).collect()
    }

    /// Pools chains in order and records acceptance and tuning warnings.
    fn pool(chains: Vec<ChainOutput>, draws_per_chain: usize) -> PosteriorDraws {
        let n_chains = chains.len();
        let mut params: Vec<ParamDraws> = chains[0]
            .params
            .iter()
            .map(|p| ParamDraws { name: p.name.clone(), kind: p.kind, draws: Vec::new() })
            .collect();
        let mut acc: Vec<(String, f64, bool)> =
            chains[0].moves.iter().map(|m| (m.name.clone(), 0.0, m.tuned)).collect();
        for c in &chains {
            for (dst, src) in params.iter_mut().zip(&c.params) {
                dst.draws.extend_from_slice(&src.draws);
            }
            for (dst, mv) in acc.iter_mut().zip(&c.moves) {
                dst.1 += mv.rate() / n_chains as f64;
            }
        }
        let warnings = acc
            .iter()
            .filter(|(_, r, tuned)| *tuned && !(ACCEPTANCE_BAND.0..=ACCEPTANCE_BAND.1).contains(r))
            .map(|(n, r, _)| {
                format!("acceptance of {n} is {r:.3}, outside [{}, {}]", ACCEPTANCE_BAND.0, ACCEPTANCE_BAND.1)
            })
            .collect();
        PosteriorDraws {
            params,
            acceptance: acc.into_iter().map(|(n, r, _)| (n, r)).collect(),
            chains: n_chains,
            draws_per_chain,
            warnings,
        }
    }
}

/// Type-7 quantile of sorted data.
pub fn quantile_sorted(xs: &[f64], q: f64) -> f64 {
    let h = (xs.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo])
}

fn summarize(p: &ParamDraws) -> ParamSummary {
    let n = p.draws.len() as f64;
    let mean = p.draws.iter().sum::<f64>() / n;
    let sd = if p.draws.len() > 1 {
        (p.draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = p.draws.clone();
    sorted.sort_by(f64::total_cmp);
    let mut s = ParamSummary {
        name: p.name.clone(),
        mean,
        sd,
        lo95: quantile_sorted(&sorted, 0.025),
        hi95: quantile_sorted(&sorted, 0.975),
        mode: None,
        multimodal: false,
        circular_mean: None,
        rbar: None,
    };
    match p.kind {
        ParamKind::Continuous => {}
        ParamKind::Count => {
            let lo = sorted[0] as i64;
            let hist = histogram(
                p.draws.iter().map(|&x| (x as i64 - lo) as usize),
                (sorted[sorted.len() - 1] as i64 - lo) as usize + 1,
            );
            let (mode, multi) = modes(&hist, false);
            s.mode = Some((mode as i64 + lo) as f64);
            s.multimodal = multi;
        }
        ParamKind::Circular { m } => {
            let hist = histogram(p.draws.iter().map(|&x| x as usize % m), m);
            let (mode, multi) = modes(&hist, true);
            s.mode = Some(mode as f64);
            s.multimodal = multi;
            let (c, sn) = p.draws.iter().fold((0.0, 0.0), |(c, sn), &x| {
                let a = TAU * x / m as f64;
                (c + a.cos(), sn + a.sin())
            });
            s.rbar = Some((c * c + sn * sn).sqrt() / n);
            s.circular_mean = Some(sn.atan2(c).rem_euclid(TAU));
        }
    }
    s
}

fn histogram(values: impl Iterator<Item = usize>, len: usize) -> Vec<usize> {
    let mut h = vec![0; len];
    for v in values {
        h[v] += 1;
    }
    h
}

/// Mode (lowest index among ties) and whether a separate peak reaches
/// [`MULTIMODAL_RATIO`] of it. A value is a separate peak when every path to
/// the mode crosses a bin holding less than half its count.
fn modes(hist: &[usize], circular: bool) -> (usize, bool) {
    let top = (0..hist.len()).fold(0, |b, i| if hist[i] > hist[b] { i } else { b });
    let len = hist.len();
    let separated = |v: usize| {
        let floor = hist[v] as f64 * 0.5;
        let valley = |i: usize| (hist[i] as f64) < floor;
        if circular {
            let fwd = (1..(v + len - top) % len).map(|k| (top + k) % len).any(valley);
            let bwd = (1..(top + len - v) % len).map(|k| (v + k) % len).any(valley);
            fwd && bwd
        } else {
            let (a, b) = if v < top { (v, top) } else { (top, v) };
            (a + 1..b).any(valley)
        }
    };
    let multi = (0..len).filter(|&v| v != top && hist[v] as f64 >= MULTIMODAL_RATIO * hist[top] as f64).any(separated);
    (top, multi)
}

/// Reflects `x` into `[lo, hi)`; `None` when it lands on the open end.
pub(crate) fn reflect(mut x: f64, lo: f64, hi: f64) -> Option<f64> {
    let w = hi - lo;
    if !x.is_finite() || w <= 0.0 {
        return None;
    }
    x = (x - lo).rem_euclid(2.0 * w);
    if x > w {
        x = 2.0 * w - x;
    }
    let y = lo + x;
    (y < hi).then_some(y)
}

/// Random-walk scale tuned during burn-in, frozen afterwards.
#[derive(Debug, Clone)]
pub(crate) struct Move {
    pub name: String,
    pub scale: f64,
    /// Whether the move has a tunable scale (and is checked against the band).
    pub tuned: bool,
    batch_acc: usize,
    batch_tries: usize,
    acc: usize,
    tries: usize,
}

const TUNE_BATCH: usize = 50;
const TARGET_ACCEPTANCE: f64 = 0.3;

impl Move {
    pub fn new(name: impl Into<String>, scale: f64, tuned: bool) -> Self {
        Move { name: name.into(), scale, tuned, batch_acc: 0, batch_tries: 0, acc: 0, tries: 0 }
    }

    pub fn record(&mut self, accepted: bool, burning: bool) {
        if burning {
            self.batch_acc += accepted as usize;
            self.batch_tries += 1;
            if self.tuned && self.batch_tries == TUNE_BATCH {
                let rate = self.batch_acc as f64 / TUNE_BATCH as f64;
                self.scale *= (2.0 * (rate - TARGET_ACCEPTANCE)).exp();
                self.batch_acc = 0;
                self.batch_tries = 0;
            }
        } else {
            self.acc += accepted as usize;
            self.tries += 1;
        }
    }

    pub fn rate(&self) -> f64 {
        if self.tries == 0 {
            0.0
        } else {
            self.acc as f64 / self.tries as f64
        }
    }
}

/// Metropolis accept step on log densities.
pub(crate) fn accept(rng: &mut impl Rng, log_ratio: f64) -> bool {
    if log_ratio.is_nan() {
        return false;
    }
    log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio
}

pub(crate) struct ChainOutput {
    pub params: Vec<ParamDraws>,
    pub moves: Vec<Move>,
}

/// Runs `cfg.chains` chains in parallel and pools them in chain order.
pub(crate) fn run_chains(
    cfg: &McmcConfig,
    seed: crate::sampling::RngSeed,
    chain: impl Fn(rand_chacha::ChaCha8Rng) -> Result<ChainOutput> + Sync,
) -> Result<PosteriorDraws> {
    cfg.validate()?;
    let outs: Vec<ChainOutput> =
        (0..cfg.chains as u64).into_par_iter().map(|c| chain(seed.stream(c))).collect::<Result<_>>()?;
    Ok(PosteriorDraws::pool(outs, cfg.draws_per_chain()))
}

/// `log p(r)` tables of a centred location family, on demand or from a
/// cached interpolation grid when the pmf needs quadrature.
pub(crate) struct LogPmfSource {
    family: LocationFamily,
    lattice: Lattice,
    grid: Option<(f64, Vec<Vec<f64>>)>,
}

/// `κ` step of the cached MDVM grid.
const MDVM_GRID_STEP: f64 = 0.05;

impl LogPmfSource {
    pub fn new(family: LocationFamily, lattice: Lattice, tau_hi: f64) -> Result<Self> {
        let grid = if family == LocationFamily::Mdvm {
            let k = (tau_hi / MDVM_GRID_STEP).ceil() as usize;
            let tables = (0..=k)
                .into_par_iter()
                .map(|i| family.pmf(lattice, i as f64 * MDVM_GRID_STEP, 0).map(|p| p.log_probs()))
                .collect::<Result<Vec<_>>>()?;
            Some((MDVM_GRID_STEP, tables))
        } else {
            None
        };
        Ok(LogPmfSource { family, lattice, grid })
    }

    pub fn log_pmf(&self, tau: f64) -> Result<Vec<f64>> {
        match &self.grid {
            None => self.family.pmf(self.lattice, tau, 0).map(|p| p.log_probs()),
            Some((step, tables)) => {
                let x = (tau / step).clamp(0.0, (tables.len() - 1) as f64);
                let i = (x.floor() as usize).min(tables.len() - 2);
                let w = x - i as f64;
                Ok(tables[i].iter().zip(&tables[i + 1]).map(|(a, b)| a + w * (b - a)).collect())
            }
        }
    }
}

/// `Σ_r c_r log p((r − t) mod m)`, skipping empty cells.
pub(crate) fn count_loglik(counts: &[usize], log_p: &[f64], t: usize) -> f64 {
    let m = counts.len();
    counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(r, &c)| c as f64 * log_p[(r + m - t) % m]).sum()
}
