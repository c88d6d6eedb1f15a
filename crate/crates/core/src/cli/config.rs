use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact::Convention;
use crate::dsl::Ordering;
use crate::potentials::{GasParams, ThermoError};
use crate::quantum::{Box2, QuadratureRule, QuantumError, QuantumParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid config field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<ComplexValue> for Complex64 {
    fn from(c: ComplexValue) -> Self {
        Complex64::new(c.re, c.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumConfig {
    #[serde(rename = "T_B")]
    pub t_bath: f64,
    pub z: ComplexValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub seed: u64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionChoice {
    Paper,
    Standard,
    #[default]
    Both,
}

impl ConventionChoice {
    pub fn conventions(self) -> Vec<Convention> {
        match self {
            ConventionChoice::Paper => vec![Convention::Paper],
            ConventionChoice::Standard => vec![Convention::Standard],
            ConventionChoice::Both => vec![Convention::Paper, Convention::Standard],
        }
    }
}

impl fmt::Display for ConventionChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConventionChoice::Paper => "paper",
            ConventionChoice::Standard => "standard",
            ConventionChoice::Both => "both",
        })
    }
}

impl FromStr for ConventionChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(ConventionChoice::Paper),
            "standard" => Ok(ConventionChoice::Standard),
            "both" => Ok(ConventionChoice::Both),
            other => Err(format!(
                "unknown convention '{other}' (expected paper, standard or both)"
            )),
        }
    }
}

fn default_fd() -> f64 {
    1e-6
}

fn default_ode() -> f64 {
    1e-10
}

fn default_order() -> f64 {
    0.2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Pointwise identities, relative with floor 1.
    pub residual: f64,
    /// Quadrature self-convergence and integration-by-parts agreement.
    pub quadrature: f64,
    /// Imaginary parts of expectations that should be real.
    pub imag: f64,
    /// Automatic versus finite-difference derivatives.
    #[serde(default = "default_fd")]
    pub fd: f64,
    /// RK4 against the closed form.
    #[serde(default = "default_ode")]
    pub ode: f64,
    /// Distance of the empirical RK4 order from 4.
    #[serde(default = "default_order")]
    pub order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gas: GasParams,
    pub quantum: QuantumConfig,
    #[serde(rename = "box")]
    pub domain: Box2,
    pub quadrature: QuadratureRule,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub convention: ConventionChoice,
    #[serde(default)]
    pub ordering: Ordering,
    pub tolerances: Tolerances,
}

impl RunConfig {
    /// The unit configuration with the default box and quadrature.
    pub fn unit() -> Self {
        Self {
            gas: GasParams::unit(),
            quantum: QuantumConfig {
                t_bath: 1.0,
                z: ComplexValue { re: 1.0, im: 0.0 },
            },
            domain: Box2::unit(),
            quadrature: QuadratureRule::default(),
            sweep: SweepConfig {
                seed: 42,
                count: 100,
            },
            convention: ConventionChoice::Both,
            ordering: Ordering::Vp,
            tolerances: Tolerances {
                residual: 1e-12,
                quadrature: 1e-9,
                imag: 1e-10,
                fd: default_fd(),
                ode: default_ode(),
                order: default_order(),
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Err(ThermoError::NonPositive { field, value }) = self.gas.validate() {
            return Err(invalid(
                &format!("gas.{field}"),
                format!("must be > 0, got {value}"),
            ));
        }

        let d = &self.domain;
        for (name, x) in [
            ("Slo", d.s_lo),
            ("Shi", d.s_hi),
            ("Vlo", d.v_lo),
            ("Vhi", d.v_hi),
        ] {
            if !x.is_finite() {
                return Err(invalid(&format!("box.{name}"), "must be finite"));
            }
        }
        if !(d.v_lo > 0.0) {
            return Err(invalid("box.Vlo", format!("must be > 0, got {}", d.v_lo)));
        }
        if !(d.s_lo < d.s_hi) {
            return Err(invalid("box.Shi", format!("must exceed Slo = {}", d.s_lo)));
        }
        if !(d.v_lo < d.v_hi) {
            return Err(invalid("box.Vhi", format!("must exceed Vlo = {}", d.v_lo)));
        }

        if self.quadrature.panels == 0 {
            return Err(invalid("quadrature.panels", "must be >= 1"));
        }
        if !QuadratureRule::ORDERS.contains(&self.quadrature.order) {
            return Err(invalid(
                "quadrature.order",
                format!("must be 4, 8 or 16, got {}", self.quadrature.order),
            ));
        }

        if self.sweep.count == 0 {
            return Err(invalid("sweep.count", "must be >= 1"));
        }

        match self.quantum_params() {
            Err(QuantumError::NonPositive { value, .. }) => {
                return Err(invalid("quantum.T_B", format!("must be > 0, got {value}")))
            }
            Err(_) => return Err(invalid("quantum.z", "must be finite and nonzero")),
            Ok(_) => {}
        }

        let t = &self.tolerances;
        for (name, x) in [
            ("residual", t.residual),
            ("quadrature", t.quadrature),
            ("imag", t.imag),
            ("fd", t.fd),
            ("ode", t.ode),
            ("order", t.order),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(invalid(
                    &format!("tolerances.{name}"),
                    format!("must be > 0, got {x}"),
                ));
            }
        }
        Ok(())
    }

    pub fn quantum_params(&self) -> Result<QuantumParams, QuantumError> {
        QuantumParams::new(&self.gas, self.quantum.t_bath, self.quantum.z.into())
    }
}
