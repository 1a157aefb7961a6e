//! Exact probability functions for the discrete circular families.

pub mod conditional;
pub mod construct;
pub mod marginal;
pub mod maxent;
pub mod mixture;
pub mod wrapped;

use serde::{Deserialize, Serialize};

pub use conditional::{
    cd_stable_normalizer, cdkj_normalizer, cdwc_normalizer, cdwn_normalizer, pmf_cd_cardioid, pmf_cd_stable, pmf_cdkj,
    pmf_cdvm, pmf_cdwc, pmf_cdwc_mu, pmf_cdwn,
};
pub use construct::Discretization;
pub use marginal::{pmf_md_cardioid, pmf_mdkj, pmf_mdvm, pmf_mdwc};
pub use maxent::{fit_max_entropy, MaxEntFit};
pub use mixture::{mixture_pmf, CirclePoint, IrregularPmf};
pub use wrapped::{pmf_centered_wrapped, WrapBase};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Pmf};

/// Concentrations of Cauchy/normal/stable type are clamped to this value
/// before evaluating kernels, which otherwise overflow at the mode.
pub const RHO_CAP: f64 = 0.999_999;

pub(crate) fn check_concentration(name: &str, rho: f64) -> Result<()> {
    if (0.0..1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must lie in [0,1), got {rho}")))
    }
}

pub(crate) fn check_lattice_center(lattice: Lattice, t: usize) -> Result<()> {
    if lattice.contains(t) {
        Ok(())
    } else {
        Err(Error::domain(format!("centering t={t} is not in Z_{}", lattice.m())))
    }
}

pub(crate) fn check_stable_exponent(a: f64) -> Result<()> {
    if a > 0.0 && a <= 2.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("stable exponent a must lie in (0,2], got {a}")))
    }
}

/// One discrete circular family with its parameters.
///
/// Conditionalized families are centred on a lattice point `t`; marginalized
/// ones accept a continuous mean direction `mu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Cdvm {
        kappa: f64,
        t: usize,
    },
    Cdwc {
        rho: f64,
        t: usize,
    },
    Mdvm {
        kappa: f64,
        mu: f64,
    },
    Mdwc {
        rho: f64,
        mu: f64,
    },
    MdCardioid {
        rho: f64,
        mu: f64,
    },
    CdCardioid {
        rho: f64,
        mu: f64,
    },
    Cdwn {
        rho: f64,
        t: usize,
    },
    CdStable {
        rho: f64,
        t: usize,
        a: f64,
        b: f64,
    },
    WrappedPoisson {
        lambda: f64,
        t: usize,
    },
    WrappedGeometric {
        p: f64,
        t: usize,
    },
    WrappedSkewLaplace {
        p: f64,
        q: f64,
        t: usize,
    },
    Mdkj {
        rho: f64,
        mu: f64,
        gamma: f64,
        lambda: f64,
    },
    Cdkj {
        rho: f64,
        mu: f64,
        gamma: f64,
        lambda: f64,
    },
    /// `p(r) ∝ exp(Σ_k cos_k cos(kθ_r) + sin_k sin(kθ_r))`, `k = 1, 2, …`.
    MaxEnt {
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Cdvm { .. } => "cdvm",
            Family::Cdwc { .. } => "cdwc",
            Family::Mdvm { .. } => "mdvm",
            Family::Mdwc { .. } => "mdwc",
            Family::MdCardioid { .. } => "md_cardioid",
            Family::CdCardioid { .. } => "cd_cardioid",
            Family::Cdwn { .. } => "cdwn",
            Family::CdStable { .. } => "cd_stable",
            Family::WrappedPoisson { .. } => "wrapped_poisson",
            Family::WrappedGeometric { .. } => "wrapped_geometric",
            Family::WrappedSkewLaplace { .. } => "wrapped_skew_laplace",
            Family::Mdkj { .. } => "mdkj",
            Family::Cdkj { .. } => "cdkj",
            Family::MaxEnt { .. } => "max_ent",
        }
    }

    pub fn pmf(&self, lattice: Lattice) -> Result<Pmf> {
        match *self {
            Family::Cdvm { kappa, t } => pmf_cdvm(lattice, kappa, t),
            Family::Cdwc { rho, t } => pmf_cdwc(lattice, rho, t),
            Family::Mdvm { kappa, mu } => pmf_mdvm(lattice, kappa, mu),
            Family::Mdwc { rho, mu } => pmf_mdwc(lattice, rho, mu),
            Family::MdCardioid { rho, mu } => pmf_md_cardioid(lattice, rho, mu),
            Family::CdCardioid { rho, mu } => pmf_cd_cardioid(lattice, rho, mu),
            Family::Cdwn { rho, t } => pmf_cdwn(lattice, rho, t),
            Family::CdStable { rho, t, a, b } => pmf_cd_stable(lattice, rho, t, a, b),
            Family::WrappedPoisson { lambda, t } => pmf_centered_wrapped(WrapBase::Poisson { lambda }, lattice, t),
            Family::WrappedGeometric { p, t } => pmf_centered_wrapped(WrapBase::Geometric { p }, lattice, t),
            Family::WrappedSkewLaplace { p, q, t } => pmf_centered_wrapped(WrapBase::SkewLaplace { p, q }, lattice, t),
            Family::Mdkj { rho, mu, gamma, lambda } => pmf_mdkj(lattice, rho, mu, gamma, lambda),
            Family::Cdkj { rho, mu, gamma, lambda } => pmf_cdkj(lattice, rho, mu, gamma, lambda),
            Family::MaxEnt { ref cos, ref sin } => {
                if cos.iter().chain(sin).any(|c| !c.is_finite()) {
                    return Err(Error::domain("max-entropy coefficients must be finite"));
                }
                let lw: Vec<f64> = lattice
                    .points()
                    .map(|r| {
                        let th = lattice.angle(r);
                        let c: f64 = cos.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * th).cos()).sum();
                        let s: f64 = sin.iter().enumerate().map(|(k, b)| b * ((k + 1) as f64 * th).sin()).sum();
                        c + s
                    })
                    .collect();
                Pmf::from_log_weights(lattice, &lw)
            }
        }
    }
}

/// A family together with the lattice it lives on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub lattice: Lattice,
    #[serde(flatten)]
    pub family: Family,
}

impl FamilySpec {
    pub fn new(lattice: Lattice, family: Family) -> Self {
        FamilySpec { lattice, family }
    }

    pub fn m(&self) -> usize {
        self.lattice.m()
    }

    pub fn pmf(&self) -> Result<Pmf> {
        self.family.pmf(self.lattice)
    }
}

/// Two-parameter location families `(τ, t)` used for estimation; marginalized
/// members are centred at the lattice angle `2πt/m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocationFamily {
    Cdvm,
    Cdwc,
    Cdwn,
    Mdvm,
    Mdwc,
}

/// Upper end of the κ search range in estimation.
pub const KAPPA_MAX: f64 = 500.0;
/// Upper end of the ρ search range in estimation.
pub const RHO_MAX: f64 = 0.999;

impl LocationFamily {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "cdvm" => Ok(LocationFamily::Cdvm),
            "cdwc" => Ok(LocationFamily::Cdwc),
            "cdwn" => Ok(LocationFamily::Cdwn),
            "mdvm" => Ok(LocationFamily::Mdvm),
            "mdwc" => Ok(LocationFamily::Mdwc),
            other => Err(Error::domain(format!("'{other}' is not a location family (cdvm|cdwc|cdwn|mdvm|mdwc)"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LocationFamily::Cdvm => "cdvm",
            LocationFamily::Cdwc => "cdwc",
            LocationFamily::Cdwn => "cdwn",
            LocationFamily::Mdvm => "mdvm",
            LocationFamily::Mdwc => "mdwc",
        }
    }

    pub fn is_marginalized(self) -> bool {
        matches!(self, LocationFamily::Mdvm | LocationFamily::Mdwc)
    }

    /// Whether the concentration is a von Mises `κ` (else a resultant `ρ`).
    pub fn uses_kappa(self) -> bool {
        matches!(self, LocationFamily::Cdvm | LocationFamily::Mdvm)
    }

    /// Closed search interval for the concentration.
    pub fn tau_bounds(self) -> (f64, f64) {
        if self.uses_kappa() {
            (0.0, KAPPA_MAX)
        } else {
            (0.0, RHO_MAX)
        }
    }

    pub fn family(self, lattice: Lattice, tau: f64, t: usize) -> Family {
        let mu = lattice.angle(t % lattice.m());
        match self {
            LocationFamily::Cdvm => Family::Cdvm { kappa: tau, t },
            LocationFamily::Cdwc => Family::Cdwc { rho: tau, t },
            LocationFamily::Cdwn => Family::Cdwn { rho: tau, t },
            LocationFamily::Mdvm => Family::Mdvm { kappa: tau, mu },
            LocationFamily::Mdwc => Family::Mdwc { rho: tau, mu },
        }
    }

    pub fn pmf(self, lattice: Lattice, tau: f64, t: usize) -> Result<Pmf> {
        self.family(lattice, tau, t).pmf(lattice)
    }
}
