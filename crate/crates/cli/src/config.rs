//! Run configuration files. A config is checked against the JSON schema
//! generated from [`RunConfig`] before it is deserialized.

use std::path::{Path, PathBuf};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Evenly spaced grid `start, …, stop` with `points` entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    #[schemars(range(min = 1))]
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points).map(|i| if i + 1 == self.points { self.stop } else { self.start + step * i as f64 }).collect()
    }

    /// `0, π/40, …, π/2`.
    pub fn quarter_turn() -> Self {
        Self { start: 0.0, stop: std::f64::consts::FRAC_PI_2, points: 21 }
    }
}

/// Every field is optional; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
#[schemars(title = "pamcert run configuration")]
pub struct RunConfig {
    /// Built-in polyhedron name (octahedron, icosahedron, rhombicuboctahedron,
    /// tetrahedron) or path to a `{"vertices": [[x, y, z], ...]}` file.
    pub polyhedron: Option<String>,
    /// Overrides the inscribed radius computed from the polyhedron.
    #[schemars(range(min = 0.0, max = 1.0))]
    pub eta: Option<f64>,
    pub seed: Option<u64>,
    #[schemars(range(min = 1))]
    pub batch_size: Option<usize>,
    #[schemars(range(min = 1))]
    pub max_iters: Option<usize>,
    #[schemars(range(min = 1))]
    pub stall_rounds: Option<usize>,
    #[schemars(range(min = 0.0))]
    pub alpha_tol: Option<f64>,
    /// Strategies added per round by dual pricing; 0 disables pricing.
    pub pricing_columns: Option<usize>,
    pub exclude_active: Option<bool>,
    /// Certify against all POVMs instead of projective measurements.
    pub povm: Option<bool>,
    #[schemars(range(min = 0.0, max = 1.0))]
    pub t: Option<f64>,
    #[schemars(range(min = 1))]
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub theta_grid: Option<GridSpec>,
    pub phi_grid: Option<GridSpec>,
    /// Bloch vectors of the preparations to certify.
    pub preparations: Option<Vec<[f64; 3]>>,
    /// Factor applied to every preparation Bloch vector.
    #[schemars(range(min = 0.0, max = 1.0))]
    pub visibility: Option<f64>,
    /// Unit Bloch vectors of binary projective measurements.
    pub measurements: Option<Vec<[f64; 3]>>,
    /// Shrinking factor of the activation family for `rac`.
    #[schemars(range(min = 0.0, max = 1.0))]
    pub alpha: Option<f64>,
    /// Angle of the activation family for `rac`, or of the mirror-symmetric
    /// triple for `certify-measurements`.
    #[schemars(range(min = 0.0, max = std::f64::consts::FRAC_PI_2))]
    pub theta: Option<f64>,
    /// Bisection gap for incompatibility robustness.
    #[schemars(range(min = 0.0))]
    pub gap_tol: Option<f64>,
}

/// The published schema as JSON.
pub fn schema() -> serde_json::Value {
    serde_json::to_value(schemars::schema_for!(RunConfig)).expect("schema serializes")
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("config is not JSON: {e}")))?;
        let schema = schema();
        let validator = jsonschema::validator_for(&schema)
            .map_err(|e| CliError::Input(format!("config schema is invalid: {e}")))?;
        let problems: Vec<String> =
            validator.iter_errors(&value).map(|e| format!("{} at `{}`", e, e.instance_path)).collect();
        if !problems.is_empty() {
            return Err(CliError::Input(format!("config does not match the schema: {}", problems.join("; "))));
        }
        serde_json::from_value(value).map_err(|e| CliError::Input(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
