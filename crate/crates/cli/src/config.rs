//! JSON run configuration.

use std::path::Path;

use ddq::dynamics::QubitState;
use ddq::operators::truncation_for_n_bar;
use ddq::{BathSpec, CircuitSpec, DerivedParams, SystemParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub circuit: CircuitSpec,
    pub bath: BathSpec,
    #[serde(default, skip_serializing_if = "Overrides::is_empty")]
    pub overrides: Overrides,
    #[serde(default)]
    pub simulation: Simulation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub initial: Initial,
    /// Written by `derive`; ignored on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived: Option<serde_json::Value>,
}

/// Replacements for the dimensionless couplings computed from the circuit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gf_prime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_prime: Option<f64>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        self.gf_prime.is_none() && self.gamma_prime.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Simulation {
    /// Resonator truncation; chosen from the occupancy bound when absent.
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(default = "default_p_max")]
    pub p_max: f64,
    /// Evolution horizon in units of 1/ω_A; `3/γ′ + 3/Γ₂R` when absent.
    #[serde(rename = "t_max_omegaA", default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default = "default_n_times")]
    pub n_times: usize,
    #[serde(default = "default_eps_overlap")]
    pub eps_overlap: f64,
}

fn default_p_max() -> f64 {
    1e-7
}

fn default_n_times() -> usize {
    201
}

fn default_eps_overlap() -> f64 {
    ddq::spectral::OVERLAP_EPS
}

impl Default for Simulation {
    fn default() -> Self {
        Self {
            s: None,
            p_max: default_p_max(),
            t_max: None,
            n_times: default_n_times(),
            eps_overlap: default_eps_overlap(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    T,
    #[serde(rename = "gamma_prime")]
    GammaPrime,
    #[serde(rename = "gf_prime")]
    GfPrime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grid {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub grid: Grid,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.min];
        }
        let frac = |i: usize| i as f64 / (n - 1) as f64;
        match self.grid {
            Grid::Linear => (0..n).map(|i| self.min + (self.max - self.min) * frac(i)).collect(),
            Grid::Log => {
                let (a, b) = (self.min.ln(), self.max.ln());
                (0..n).map(|i| (a + (b - a) * frac(i)).exp()).collect()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QubitInit {
    #[default]
    Plus,
    G,
    E,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResonatorInit {
    #[default]
    Thermal,
    Coherent,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    #[serde(default)]
    pub qubit: QubitInit,
    #[serde(default)]
    pub resonator: ResonatorInit,
    /// Coherent amplitude as `[re, im]`.
    #[serde(default)]
    pub alpha: [f64; 2],
}

impl QubitInit {
    pub fn state(self) -> QubitState<f64> {
        match self {
            QubitInit::Plus => QubitState::Plus,
            QubitInit::G => QubitState::Ground,
            QubitInit::E => QubitState::Excited,
        }
    }
}

fn invalid(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{path}: {msg}"))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Validation(format!("{path}: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Range checks that the type system cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        self.circuit.validate().map_err(|e| invalid("circuit", e))?;
        self.bath.validate().map_err(|e| invalid("bath", e))?;
        if let Some(g) = self.overrides.gf_prime {
            if !g.is_finite() || g < 0.0 {
                return Err(invalid("overrides.gf_prime", format!("must be non-negative, got {g}")));
            }
        }
        if let Some(g) = self.overrides.gamma_prime {
            if !g.is_finite() || g < 0.0 {
                return Err(invalid(
                    "overrides.gamma_prime",
                    format!("must be non-negative, got {g}"),
                ));
            }
        }
        let sim = &self.simulation;
        if let Some(s) = sim.s {
            if s < 2 {
                return Err(invalid("simulation.S", format!("must be at least 2, got {s}")));
            }
        }
        if !(sim.p_max > 0.0 && sim.p_max < 1.0) {
            return Err(invalid(
                "simulation.p_max",
                format!("must lie in (0, 1), got {}", sim.p_max),
            ));
        }
        if let Some(t) = sim.t_max {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid("simulation.t_max_omegaA", format!("must be positive, got {t}")));
            }
        }
        if sim.n_times < 2 {
            return Err(invalid(
                "simulation.n_times",
                format!("must be at least 2, got {}", sim.n_times),
            ));
        }
        if !(sim.eps_overlap >= 0.0) {
            return Err(invalid("simulation.eps_overlap", "must be non-negative"));
        }
        if let Some(sw) = &self.sweep {
            if sw.points == 0 {
                return Err(invalid("sweep.points", "must be at least 1"));
            }
            if !(sw.min.is_finite() && sw.max.is_finite()) || sw.min > sw.max {
                return Err(invalid("sweep.max", format!("range [{}, {}] is empty", sw.min, sw.max)));
            }
            if (sw.grid == Grid::Log && sw.min <= 0.0) || sw.min < 0.0 {
                return Err(invalid(
                    "sweep.min",
                    format!("must be non-negative, and positive on a log grid; got {}", sw.min),
                ));
            }
        }
        if self.initial.resonator == ResonatorInit::Coherent && !self.initial.alpha.iter().all(|a| a.is_finite()) {
            return Err(invalid("initial.alpha", "must be finite"));
        }
        Ok(())
    }

    /// Circuit-derived couplings for the configured bath.
    pub fn derive(&self) -> Result<DerivedParams, CliError> {
        self.derive_at(&self.bath)
    }

    pub fn derive_at(&self, bath: &BathSpec) -> Result<DerivedParams, CliError> {
        ddq::circuit::derive_params(&self.circuit, bath).map_err(CliError::from)
    }

    /// Dimensionless parameters after overrides. An override equal to the
    /// derived value leaves the parameters untouched.
    pub fn system(&self, derived: &DerivedParams) -> Result<SystemParams, CliError> {
        let mut p = derived.system();
        if let Some(g) = self.overrides.gf_prime {
            if g != p.g {
                p = p.with_g(g);
            }
        }
        if let Some(gamma) = self.overrides.gamma_prime {
            p = p.with_gamma(gamma);
        }
        p.validate().map_err(CliError::from)?;
        Ok(p)
    }

    /// Configured truncation, or the occupancy-bound choice for `n_bar`.
    pub fn truncation(&self, n_bar: f64) -> Result<usize, CliError> {
        let auto = truncation_for_n_bar(n_bar, self.simulation.p_max)?;
        match self.simulation.s {
            Some(s) => {
                if s < auto {
                    log::warn!(
                        "S = {s} is below {auto}, the truncation meeting the p_max = {:e} occupancy bound at n_bar = {n_bar:.6}",
                        self.simulation.p_max
                    );
                }
                Ok(s)
            }
            None => Ok(auto),
        }
    }
}
