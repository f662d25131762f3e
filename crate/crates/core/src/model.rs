//! Model parameters and the closed-form critical coupling.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Physical parameters of the damped two-mode model, in units of `omega_b`.
///
/// `omega_m` is the Lorentzian cutoff of the bath density. `None` means an
/// infinite cutoff, which is what every kernel except the principal-value
/// oracle assumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub omega_a: f64,
    pub omega_b: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub s: f64,
    pub omega_m: Option<f64>,
    pub y: f64,
}

impl Default for ModelParams {
    /// `omega_a = kappa = 2`, `omega_b = 1`, `gamma = 0.5`, `s = 0.8`, `y = 0`.
    fn default() -> Self {
        Self {
            omega_a: 2.0,
            omega_b: 1.0,
            kappa: 2.0,
            gamma: 0.5,
            s: 0.8,
            omega_m: None,
            y: 0.0,
        }
    }
}

/// A single violated parameter constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    NonFinite(&'static str),
    NotPositive { name: &'static str, value: f64 },
    Negative { name: &'static str, value: f64 },
    ExponentOutOfRange { s: f64 },
    AboveCritical { y: f64, y_c: f64 },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonFinite(name) => write!(f, "{name} is not finite"),
            Self::NotPositive { name, value } => write!(f, "{name} = {value} must be > 0"),
            Self::Negative { name, value } => write!(f, "{name} = {value} must be >= 0"),
            Self::ExponentOutOfRange { s } => {
                write!(f, "s out of open interval (0,1): s = {s}")
            }
            Self::AboveCritical { y, y_c } => write!(f, "y ≥ y_c = {y_c} (y = {y})"),
        }
    }
}

impl ModelParams {
    pub fn with_y(self, y: f64) -> Self {
        Self { y, ..self }
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }

    pub fn with_s(self, s: f64) -> Self {
        Self { s, ..self }
    }

    /// Every violated invariant; an empty list means the parameters are usable.
    pub fn validate(&self) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        let fields = [
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("s", self.s),
            ("y", self.y),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                issues.push(ValidationIssue::NonFinite(name));
            }
        }
        for (name, value) in [("omega_a", self.omega_a), ("omega_b", self.omega_b)] {
            if value.is_finite() && value <= 0.0 {
                issues.push(ValidationIssue::NotPositive { name, value });
            }
        }
        for (name, value) in [("kappa", self.kappa), ("gamma", self.gamma), ("y", self.y)] {
            if value.is_finite() && value < 0.0 {
                issues.push(ValidationIssue::Negative { name, value });
            }
        }
        if let Some(m) = self.omega_m {
            if !m.is_finite() {
                issues.push(ValidationIssue::NonFinite("omega_m"));
            } else if m <= 0.0 {
                issues.push(ValidationIssue::NotPositive {
                    name: "omega_m",
                    value: m,
                });
            }
        }
        // With gamma = 0 the exponent only feeds the quadrature mesh, so s = 1 is harmless.
        let s_ok = if self.gamma > 0.0 {
            self.s > 0.0 && self.s < 1.0
        } else {
            self.s > 0.0 && self.s <= 1.0
        };
        if self.s.is_finite() && !s_ok {
            issues.push(ValidationIssue::ExponentOutOfRange { s: self.s });
        }
        if let Ok(y_c) = self.critical_coupling() {
            if y_c.is_finite() && self.y.is_finite() && self.y >= y_c {
                issues.push(ValidationIssue::AboveCritical { y: self.y, y_c });
            }
        }
        issues
    }

    pub fn validated(self) -> Result<Self> {
        let issues = self.validate();
        if issues.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidParams(issues))
        }
    }

    /// Validates everything except the `y < y_c` bound.
    pub fn validated_ignoring_y(self) -> Result<Self> {
        self.with_y(0.0).validated().map(|_| self)
    }

    /// `y_c = sqrt((omega_a^2 + kappa^2) / omega_a * omega_b)`.
    ///
    /// The bath drops out because the level shift vanishes at zero frequency,
    /// so the result is independent of `gamma` and `s`.
    pub fn critical_coupling(&self) -> Result<f64> {
        if !(self.omega_a > 0.0) {
            return Err(Error::Domain(format!(
                "critical coupling needs omega_a > 0, got {}",
                self.omega_a
            )));
        }
        Ok(
            ((self.omega_a * self.omega_a + self.kappa * self.kappa) / self.omega_a * self.omega_b)
                .sqrt(),
        )
    }

    /// Relative distance from criticality, `1 - y / y_c`.
    pub fn epsilon(&self) -> Result<f64> {
        Ok(1.0 - self.y / self.critical_coupling()?)
    }

    /// Sets one field from its configuration key. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let value = value.trim();
        if key == "omega_m" {
            self.omega_m = match value.to_ascii_lowercase().as_str() {
                "inf" | "infinite" | "infinity" | "none" => None,
                _ => Some(parse_real(key, value)?),
            };
            return Ok(());
        }
        let slot = match key {
            "omega_a" => &mut self.omega_a,
            "omega_b" => &mut self.omega_b,
            "kappa" => &mut self.kappa,
            "gamma" => &mut self.gamma,
            "s" => &mut self.s,
            "y" => &mut self.y,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        };
        *slot = parse_real(key, value)?;
        Ok(())
    }

    /// Applies a flat `key = value` document on top of `self`.
    ///
    /// Blank lines and lines starting with `#` are skipped.
    pub fn apply_config(mut self, text: &str) -> Result<Self> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected key=value, got '{line}'",
                    lineno + 1
                ))
            })?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(self)
    }
}

impl FromStr for ModelParams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelParams::default().apply_config(s)
    }
}

fn parse_real(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: '{value}' is not a number")))
}
