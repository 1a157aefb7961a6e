use circlat::distributions::LocationFamily;
use circlat::{Family, Lattice};
use clap::{Args, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Marginalized,
    Conditionalized,
}

/// Family selection and parameters shared by the commands.
#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    /// cdvm, cdwc, cdwn, mdvm, mdwc, cdstable, cdkj, mdkj, cd-cardioid, md-cardioid,
    /// wrapped-poisson, wrapped-geometric, wrapped-skew-laplace; or a parent
    /// (vm, wc, cardioid, kj) together with --method
    #[arg(long, default_value = "cdwc")]
    pub family: String,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
}

/// Parameters of a single distribution.
#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Lattice centre
    #[arg(long)]
    pub t: Option<usize>,
    /// Continuous location in radians (defaults to 2πt/m)
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Stable exponent
    #[arg(long)]
    pub a: Option<f64>,
    /// Stable skewness
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
}

impl FamilyArgs {
    /// Canonical family name with any `--method` applied.
    pub fn resolved(&self) -> Result<String, CliError> {
        let name = self.family.to_ascii_lowercase().replace('_', "-");
        let prefix = match self.method {
            None => return Ok(name),
            Some(Method::Marginalized) => "md",
            Some(Method::Conditionalized) => "cd",
        };
        match name.as_str() {
            "vm" | "wc" | "kj" => Ok(format!("{prefix}{name}")),
            "cardioid" => Ok(format!("{prefix}-cardioid")),
            "wn" | "stable" if prefix == "cd" => Ok(format!("cd{name}")),
            _ if name.starts_with(prefix) => Ok(name),
            _ => Err(CliError::usage(format!("--method {prefix} does not apply to family {name}"))),
        }
    }

    pub fn location(&self) -> Result<LocationFamily, CliError> {
        LocationFamily::parse(&self.resolved()?).map_err(|e| CliError::usage(e.to_string()))
    }
}

fn need<T>(v: Option<T>, flag: &str, family: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::usage(format!("family {family} needs --{flag}")))
}

impl ParamArgs {
    fn centre(&self, family: &str) -> Result<usize, CliError> {
        if self.t.is_none() && self.mu.is_some() {
            return Err(CliError::usage(format!("family {family} is centred on a lattice point; use --t")));
        }
        Ok(self.t.unwrap_or(0))
    }

    fn angle(&self, lattice: Lattice) -> f64 {
        self.mu.unwrap_or_else(|| lattice.angle(self.t.unwrap_or(0) % lattice.m()))
    }

    pub fn build(&self, family: &FamilyArgs, lattice: Lattice) -> Result<Family, CliError> {
        let name = family.resolved()?;
        let n = name.as_str();
        Ok(match n {
            "cdvm" => Family::Cdvm { kappa: need(self.kappa, "kappa", n)?, t: self.centre(n)? },
            "cdwc" => Family::Cdwc { rho: need(self.rho, "rho", n)?, t: self.centre(n)? },
            "cdwn" => Family::Cdwn { rho: need(self.rho, "rho", n)?, t: self.centre(n)? },
            "mdvm" => Family::Mdvm { kappa: need(self.kappa, "kappa", n)?, mu: self.angle(lattice) },
            "mdwc" => Family::Mdwc { rho: need(self.rho, "rho", n)?, mu: self.angle(lattice) },
            "cdstable" => Family::CdStable {
                rho: need(self.rho, "rho", n)?,
                t: self.centre(n)?,
                a: need(self.a, "a", n)?,
                b: self.b.unwrap_or(0.0),
            },
            "cdkj" | "mdkj" => {
                let (rho, mu) = (need(self.rho, "rho", n)?, self.angle(lattice));
                let (gamma, lambda) = (need(self.gamma, "gamma", n)?, self.lambda.unwrap_or(0.0));
                if n == "cdkj" {
                    Family::Cdkj { rho, mu, gamma, lambda }
                } else {
                    Family::Mdkj { rho, mu, gamma, lambda }
                }
            }
            "cd-cardioid" => Family::CdCardioid { rho: need(self.rho, "rho", n)?, mu: self.angle(lattice) },
            "md-cardioid" => Family::MdCardioid { rho: need(self.rho, "rho", n)?, mu: self.angle(lattice) },
            "wrapped-poisson" => Family::WrappedPoisson { lambda: need(self.lambda, "lambda", n)?, t: self.centre(n)? },
            "wrapped-geometric" => Family::WrappedGeometric { p: need(self.p, "p", n)?, t: self.centre(n)? },
            "wrapped-skew-laplace" => {
                Family::WrappedSkewLaplace { p: need(self.p, "p", n)?, q: need(self.q, "q", n)?, t: self.centre(n)? }
            }
            other => return Err(CliError::usage(format!("unknown family {other:?}"))),
        })
    }
}
