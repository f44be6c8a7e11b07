use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    FocalScan,
    Index,
    Split,
    TautCheck,
    Cycles,
    FiberProbe,
}

impl Operation {
    pub fn name(self) -> &'static str {
        match self {
            Operation::FocalScan => "focal-scan",
            Operation::Index => "index",
            Operation::Split => "split",
            Operation::TautCheck => "taut-check",
            Operation::Cycles => "cycles",
            Operation::FiberProbe => "fiber-probe",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Local error tolerance of geodesic integration.
    pub ode: f64,
    /// Residual at which Newton/shooting iterations stop.
    pub newton: f64,
    /// Minimum singular-value gap for a rank decision.
    pub gap_ratio: f64,
    /// Relative threshold below which a singular value counts as zero.
    pub zero_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ode: 1e-10,
            newton: 1e-10,
            gap_ratio: 1e3,
            zero_rel: 1e-6,
        }
    }
}

/// A normal vector given by patch parameters and normal-frame coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorSpec {
    pub param: Vec<f64>,
    pub coeffs: Vec<f64>,
}

/// One experiment. Every field except `scenario` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operation: Option<Operation>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Energy cap for shooting; the scenario default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
    /// Target points in ambient coordinates.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<Vec<f64>>,
    /// Normal vectors to analyse.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vectors: Vec<VectorSpec>,
    /// Random geodesics drawn by `split`.
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    /// Directions sampled by `focal-scan`.
    #[serde(default = "default_directions")]
    pub directions: usize,
    /// Focal times reported per direction.
    #[serde(default = "default_count")]
    pub focal_count: usize,
    /// Integration horizon of `focal-scan`, in units of arc length.
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// Fiber samples per level for `cycles`, per probe for `fiber-probe`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Seeds per parameter axis for shooting.
    #[serde(default = "default_density")]
    pub density: usize,
    /// Reference Betti table id; the scenario default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

fn default_seeds() -> usize {
    50
}
fn default_directions() -> usize {
    16
}
fn default_count() -> usize {
    3
}
fn default_horizon() -> f64 {
    10.0
}
fn default_samples() -> usize {
    4
}
fn default_density() -> usize {
    4
}

/// A configuration problem, located by field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.into(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn new(scenario: &str, operation: Operation) -> Self {
        Self {
            operation: Some(operation),
            ..serde_json::from_str::<Self>(&format!("{{\"scenario\":{scenario:?}}}")).expect("minimal config")
        }
    }

    /// Parses JSON; syntax and type errors are located by line and column.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            err(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| err(path.display().to_string(), e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.scenario.is_empty() {
            return Err(err("scenario", "must not be empty"));
        }
        let t = &self.tolerances;
        for (name, value) in [
            ("ode", t.ode),
            ("newton", t.newton),
            ("gap_ratio", t.gap_ratio),
            ("zero_rel", t.zero_rel),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(err(format!("tolerances.{name}"), format!("must be positive, got {value}")));
            }
        }
        if t.gap_ratio <= 1.0 {
            return Err(err("tolerances.gap_ratio", "must exceed 1"));
        }
        if let Some(cap) = self.cap {
            if !(cap.is_finite() && cap > 0.0) {
                return Err(err("cap", format!("must be positive and finite, got {cap}")));
            }
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(err("horizon", format!("must be positive, got {}", self.horizon)));
        }
        for (name, value) in [
            ("seeds", self.seeds),
            ("directions", self.directions),
            ("focal_count", self.focal_count),
            ("samples", self.samples),
            ("density", self.density),
        ] {
            if value == 0 {
                return Err(err(name, "must be at least 1"));
            }
        }
        for (i, p) in self.targets.iter().enumerate() {
            if p.iter().any(|x| !x.is_finite()) {
                return Err(err(format!("targets[{i}]"), "non-finite coordinate"));
            }
        }
        for (i, v) in self.vectors.iter().enumerate() {
            if v.param.iter().chain(&v.coeffs).any(|x| !x.is_finite()) {
                return Err(err(format!("vectors[{i}]"), "non-finite entry"));
            }
        }
        Ok(())
    }

    /// Multiplies the integration and Newton tolerances by `factor`.
    pub fn scale_tolerances(&mut self, factor: f64) -> Result<(), ConfigError> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(err("tol_scale", format!("must be positive, got {factor}")));
        }
        self.tolerances.ode *= factor;
        self.tolerances.newton *= factor;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(r#"{"scenario": "sphere-point-s2", "operation": "taut-check"}"#).unwrap();
        assert_eq!(c.operation, Some(Operation::TautCheck));
        assert_eq!(c.seeds, 50);
        assert_eq!(c.tolerances, Tolerances::default());
    }

    #[test]
    fn negative_tolerance_names_the_field() {
        let e = ExperimentConfig::from_json(r#"{"scenario": "x", "tolerances": {"ode": -1e-9}}"#).unwrap_err();
        assert_eq!(e.path, "tolerances.ode");
    }

    #[test]
    fn unknown_field_located() {
        let e = ExperimentConfig::from_json("{\"scenario\": \"x\",\n \"bogus\": 1}").unwrap_err();
        assert!(e.path.starts_with("line 2"), "{e}");
        assert!(e.message.contains("bogus"));
    }

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::new("hopf-fiber-s3", Operation::Split);
        c.vectors.push(VectorSpec {
            param: vec![0.1],
            coeffs: vec![1.0, 0.0],
        });
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
