use std::str::FromStr;

use fredholm_bvp::limits::DEFAULT_CONVERGENCE_TOL;
use fredholm_bvp::{IntegratorConfig, SolverConfig};
use serde::Serialize;

use crate::schema::FileTolerances;
use crate::CliError;

/// Named default tolerance sets. Precedence: flag, then file, then profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Profile {
    #[default]
    Default,
    Strict,
    Fast,
}

impl FromStr for Profile {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "" | "default" => Ok(Profile::Default),
            "strict" => Ok(Profile::Strict),
            "fast" => Ok(Profile::Fast),
            other => Err(CliError::Schema(format!(
                "unknown tolerance profile {other:?} (expected default, strict or fast)"
            ))),
        }
    }
}

impl Profile {
    pub fn from_env() -> Result<Self, CliError> {
        match std::env::var(crate::PROFILE_ENV) {
            Ok(v) => v.parse(),
            Err(_) => Ok(Profile::Default),
        }
    }

    pub fn tolerances(self) -> Resolved {
        let (integrator, quadrature, rank, consistency) = match self {
            Profile::Default => (1e-12, 1e-10, 1e-10, 1e-7),
            Profile::Strict => (1e-13, 1e-12, 1e-11, 1e-9),
            Profile::Fast => (1e-9, 1e-8, 1e-8, 1e-5),
        };
        Resolved {
            integrator,
            quadrature,
            rank,
            consistency,
            convergence: DEFAULT_CONVERGENCE_TOL,
        }
    }
}

/// Command-line overrides.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub quad_tol: Option<f64>,
    pub rank_tol: Option<f64>,
    pub consistency_tol: Option<f64>,
}

/// Tolerances in effect for one run; echoed into every JSON report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resolved {
    /// Absolute integrator tolerance; the relative one is 100 times larger.
    pub integrator: f64,
    pub quadrature: f64,
    pub rank: f64,
    pub consistency: f64,
    pub convergence: f64,
}

impl Resolved {
    pub fn resolve(profile: Profile, file: &FileTolerances, flags: &Overrides) -> Result<Self, CliError> {
        let base = profile.tolerances();
        let pick = |flag: Option<f64>, file: Option<f64>, default: f64| flag.or(file).unwrap_or(default);
        let out = Self {
            integrator: pick(flags.tol, file.integrator, base.integrator),
            quadrature: pick(flags.quad_tol, file.quadrature, base.quadrature),
            rank: pick(flags.rank_tol, file.rank, base.rank),
            consistency: pick(flags.consistency_tol, file.consistency, base.consistency),
            convergence: file.convergence.unwrap_or(base.convergence),
        };
        for (name, v) in [
            ("integrator", out.integrator),
            ("quadrature", out.quadrature),
            ("rank", out.rank),
            ("consistency", out.consistency),
            ("convergence", out.convergence),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Schema(format!("{name} tolerance must be positive, got {v}")));
            }
        }
        Ok(out)
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            integrator: IntegratorConfig {
                atol: self.integrator,
                rtol: 100.0 * self.integrator,
                ..IntegratorConfig::default()
            },
            quad_tol: self.quadrature,
            rank_tol: self.rank,
            consistency_tol: self.consistency,
        }
    }
}
