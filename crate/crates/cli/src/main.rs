mod error;
mod family;
mod ingest;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use circlat::bayes::{
    changepoint_fit, changepoint_stream, mixture_fit, ChangepointModel, McmcConfig, MixtureModel, PosteriorDraws,
};
use circlat::distributions::LocationFamily;
use circlat::divergence::{max_divergence_scan, scan_grid, sheppard_report, SCAN_CAP};
use circlat::inference::{
    bootstrap, mle, moment_rho, summarize, test_serial, test_uniformity_adhoc, test_uniformity_t, SampleSummary,
};
use circlat::sampling::sample_pmf;
use circlat::{FamilySpec, Lattice, RngSeed};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use error::CliError;
use family::{FamilyArgs, ParamArgs};
use ingest::{ingest, require_sequence, Dataset, InputFormat};
use report::{value, write_csv, Report};

const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "circlat", version, about = "Discrete circular distributions on the lattice Z_m")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Data file
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "sequence-csv")]
    format: InputFormat,
    /// Lattice size
    #[arg(long)]
    m: usize,
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write plot data as CSV
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probability function of a family on Z_m
    Pmf {
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Draw an outcome sequence (written as sequence-csv)
    Sample {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximum-likelihood fit with parametric bootstrap
    Fit {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        family: FamilyArgs,
        /// Bootstrap replicates (0 skips the bootstrap)
        #[arg(long, default_value_t = 500)]
        bootstrap: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Likelihood-ratio and ad hoc tests of uniformity
    TestUniformity {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 999)]
        replicates: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lag-one serial independence test
    TestSerial {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 999)]
        replicates: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bayesian analysis of a switch from uniform to a location family
    Changepoint {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        family: FamilyArgs,
        /// key=value MCMC settings
        #[arg(long)]
        mcmc_config: Option<PathBuf>,
        /// Analyse these prefixes of the sequence separately
        #[arg(long, value_delimiter = ',')]
        stream: Option<Vec<usize>>,
        /// Include the thinned draws in the report
        #[arg(long)]
        draws: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Bayesian finite mixture of a location family
    Mixture {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        components: usize,
        /// Make the first component uniform
        #[arg(long)]
        uniform_first: bool,
        #[arg(long)]
        mcmc_config: Option<PathBuf>,
        #[arg(long)]
        draws: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest divergence between CDVM and a moment-matched family over ρ_w
    DivergenceScan {
        #[arg(long)]
        m: usize,
        /// cdwc or cdwn
        #[arg(long, default_value = "cdwc")]
        other: String,
        #[arg(long, default_value_t = 0.001)]
        step: f64,
        #[arg(long, default_value_t = SCAN_CAP)]
        cap: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Trigonometric moments of discretized wrapped Cauchy against their continuous limits
    Sheppard {
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [3usize, 5, 10, 15, 20, 30, 50, 100, 500])]
        m_list: Vec<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn lattice(m: usize) -> Result<Lattice, CliError> {
    Lattice::new(m).map_err(|e| CliError::usage(e.to_string()))
}

fn load(input: &InputArgs) -> Result<Dataset, CliError> {
    ingest(&input.input, input.format, input.m)
}

fn input_config(input: &InputArgs, d: &Dataset) -> Value {
    let format = input.format.to_possible_value().map(|v| v.get_name().to_string());
    json!({ "input": input.input, "format": format, "m": input.m, "n": d.len(), "labelled": d.labels.is_some() })
}

fn summary_json(s: &SampleSummary) -> Value {
    json!({
        "n": s.n,
        "rbar": s.r_bar(),
        "theta_bar": if s.degenerate { None } else { Some(s.mean_direction()) },
        "degenerate": s.degenerate,
    })
}

fn mcmc_config(path: Option<&Path>) -> Result<McmcConfig, CliError> {
    match path {
        None => Ok(McmcConfig::default()),
        Some(p) => {
            let text =
                fs::read_to_string(p).map_err(|e| CliError::usage(format!("cannot read {}: {e}", p.display())))?;
            McmcConfig::parse(&text).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))
        }
    }
}

fn posterior_json(post: &PosteriorDraws, draws: bool) -> Value {
    let mut v = json!({
        "chains": post.chains,
        "draws_per_chain": post.draws_per_chain,
        "summaries": value(&post.summaries()),
        "acceptance": post.acceptance.iter().map(|(k, r)| json!({ "move": k, "rate": r })).collect::<Vec<_>>(),
        "warnings": post.warnings,
    });
    if draws {
        v["draws"] = value(&post.params);
    }
    v
}

#[derive(Serialize)]
struct PmfRow {
    r: usize,
    theta: f64,
    p: f64,
}

#[derive(Serialize)]
struct StreamRow {
    prefix: usize,
    k_mode: Option<f64>,
    k_lo95: f64,
    k_hi95: f64,
    tau_mean: f64,
    tau_lo95: f64,
    tau_hi95: f64,
    t_mode: Option<f64>,
    tau_interval_includes_zero: bool,
}

fn stream_row(prefix: usize, post: &PosteriorDraws, tau: &str) -> Result<StreamRow, CliError> {
    let get = |name: &str| post.summary(name).ok_or_else(|| CliError::numeric(format!("no draws of {name}")));
    let (k, s, t) = (get("K")?, get(tau)?, get("t2")?);
    Ok(StreamRow {
        prefix,
        k_mode: k.mode,
        k_lo95: k.lo95,
        k_hi95: k.hi95,
        tau_mean: s.mean,
        tau_lo95: s.lo95,
        tau_hi95: s.hi95,
        t_mode: t.mode,
        tau_interval_includes_zero: s.interval_includes_zero(),
    })
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Pmf { m, family, params, out } => {
            let l = lattice(m)?;
            let spec = FamilySpec::new(l, params.build(&family, l)?);
            let pmf = spec.pmf()?;
            let rows: Vec<PmfRow> = l.points().map(|r| PmfRow { r, theta: l.angle(r), p: pmf.get(r) }).collect();
            if let Some(p) = &out.csv {
                write_csv(p, &rows)?;
            }
            Report::new("pmf", None, value(&spec), json!({ "probs": pmf.probs(), "total": pmf.total() }))
                .emit(out.out.as_deref())
        }
        Command::Sample { m, n, family, params, seed, out } => {
            let l = lattice(m)?;
            let pmf = params.build(&family, l)?.pmf(l)?;
            let data = sample_pmf(&pmf, n, RngSeed(seed.unwrap_or(DEFAULT_SEED)));
            let text: String = data.iter().map(|x| format!("{x}\n")).collect();
            match out {
                Some(p) => fs::write(p, text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Fit { input, family, bootstrap: b, seed, out } => {
            let d = load(&input)?;
            let fam = family.location()?;
            let seed = seed.unwrap_or(DEFAULT_SEED);
            let s = summarize(&d.observations, d.lattice, 2)?;
            let mut fit = mle(&s, fam)?;
            let mut result = json!({ "summary": summary_json(&s) });
            if b > 0 {
                let boot = bootstrap(&fit, d.lattice, s.n, b, RngSeed(seed).child(0))?;
                fit.se_tau = Some(boot.se_tau);
                fit.rbar_t = Some(boot.rbar_t);
                result["bootstrap_replicates"] = json!(boot.replicates);
            }
            result["fit"] = value(&fit);
            if fam == LocationFamily::Cdwc {
                result["moment_rho"] = json!(moment_rho(&s));
            }
            let mut config = input_config(&input, &d);
            config["family"] = json!(fam.name());
            config["bootstrap"] = json!(b);
            Report::new("fit", Some(seed), config, result).emit(out.as_deref())
        }
        Command::TestUniformity { input, family, replicates, seed, out } => {
            let d = load(&input)?;
            let fam = family.location()?;
            let seed = seed.unwrap_or(DEFAULT_SEED);
            let s = summarize(&d.observations, d.lattice, 2)?;
            let (t, fit) = test_uniformity_t(&s, fam, replicates, RngSeed(seed).child(0))?;
            let mut tests = vec![t];
            tests.extend(test_uniformity_adhoc(&s, replicates, RngSeed(seed).child(1))?);
            let mut config = input_config(&input, &d);
            config["family"] = json!(fam.name());
            config["replicates"] = json!(replicates);
            let result = json!({ "summary": summary_json(&s), "fit": value(&fit), "tests": value(&tests) });
            Report::new("test-uniformity", Some(seed), config, result).emit(out.as_deref())
        }
        Command::TestSerial { input, replicates, seed, out } => {
            require_sequence(input.format, "test-serial")?;
            let d = load(&input)?;
            let seed = seed.unwrap_or(DEFAULT_SEED);
            let rep = test_serial(&d.observations, d.lattice, replicates, RngSeed(seed).child(0))?;
            let mut config = input_config(&input, &d);
            config["replicates"] = json!(replicates);
            Report::new("test-serial", Some(seed), config, value(&rep)).emit(out.as_deref())
        }
        Command::Changepoint { input, family, mcmc_config: cfg_path, stream, draws, seed, out } => {
            require_sequence(input.format, "changepoint")?;
            let d = load(&input)?;
            let model = ChangepointModel { lattice: d.lattice, family: family.location()? };
            let cfg = mcmc_config(cfg_path.as_deref())?;
            let seed = seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
            let tau = if model.family.uses_kappa() { "kappa2" } else { "rho2" };
            let mut config = input_config(&input, &d);
            config["family"] = json!(model.family.name());
            config["mcmc"] = value(&cfg);
            let result = match stream {
                None => {
                    let post = changepoint_fit(&d.observations, &model, &cfg, RngSeed(seed))?;
                    if let Some(p) = &out.csv {
                        write_csv(p, [stream_row(d.len(), &post, tau)?])?;
                    }
                    posterior_json(&post, draws)
                }
                Some(prefixes) => {
                    config["stream"] = json!(prefixes);
                    let posts = changepoint_stream(&d.observations, &prefixes, &model, &cfg, RngSeed(seed))?;
                    let rows = prefixes
                        .iter()
                        .zip(&posts)
                        .map(|(&p, post)| stream_row(p, post, tau))
                        .collect::<Result<Vec<_>, _>>()?;
                    if let Some(p) = &out.csv {
                        write_csv(p, &rows)?;
                    }
                    let per: Vec<Value> = prefixes
                        .iter()
                        .zip(&posts)
                        .map(|(&p, post)| json!({ "prefix": p, "posterior": posterior_json(post, draws) }))
                        .collect();
                    json!({ "prefixes": per })
                }
            };
            Report::new("changepoint", Some(seed), config, result).emit(out.out.as_deref())
        }
        Command::Mixture { input, family, components, uniform_first, mcmc_config: cfg_path, draws, seed, out } => {
            let d = load(&input)?;
            let mut model = MixtureModel::new(d.lattice, family.location()?, components);
            model.uniform_first = uniform_first;
            let cfg = mcmc_config(cfg_path.as_deref())?;
            let seed = seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
            let post = mixture_fit(&d.observations, &model, &cfg, RngSeed(seed))?;
            let mut config = input_config(&input, &d);
            config["family"] = json!(model.family.name());
            config["components"] = json!(components);
            config["uniform_first"] = json!(uniform_first);
            config["mcmc"] = value(&cfg);
            Report::new("mixture", Some(seed), config, posterior_json(&post, draws)).emit(out.as_deref())
        }
        Command::DivergenceScan { m, other, step, cap, out } => {
            let l = lattice(m)?;
            let other = LocationFamily::parse(&other).map_err(|e| CliError::usage(e.to_string()))?;
            if !(step > 0.0 && step < 1.0) || !(cap > 0.0 && cap < 1.0) {
                return Err(CliError::usage("--step and --cap must lie in (0, 1)"));
            }
            let scan = max_divergence_scan(other, l, &scan_grid(step, cap))?;
            if let Some(p) = &out.csv {
                write_csv(p, &scan.rows)?;
            }
            let config = json!({ "m": m, "other": other.name(), "step": step, "cap": cap });
            let result = json!({ "kl": value(&scan.kl), "l1": value(&scan.l1), "l2": value(&scan.l2), "points": scan.rows.len() });
            Report::new("divergence-scan", None, config, result).emit(out.out.as_deref())
        }
        Command::Sheppard { rho, m_list, out } => {
            let rows = sheppard_report(rho, &m_list)?;
            if let Some(p) = &out.csv {
                write_csv(p, &rows)?;
            }
            Report::new("sheppard", None, json!({ "rho": rho, "m_list": m_list }), value(&rows))
                .emit(out.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::usage(e.render().to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return err.kind.exit_code();
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.kind.exit_code()
        }
    }
}
