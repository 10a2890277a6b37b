//! Run configuration: grid, seed, output path and a per-command parameter block.
//!
//! A config file is one JSON document of the [`RunConfig`] shape; command-line
//! flags override the values it contains.

use std::path::{Path, PathBuf};

use mlab_core::{GridSpec, LabError};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_GRID: GridConfig = GridConfig {
    dim: 1,
    half_width: 8.0,
    samples: 256,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub samples: usize,
}

impl GridConfig {
    pub fn spec(&self) -> Result<GridSpec, LabError> {
        GridSpec::new(self.dim, self.half_width, self.samples)
    }
}

/// Parses `dim,L,N`.
pub fn parse_grid(text: &str) -> Result<GridConfig, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [dim, l, n] = parts.as_slice() else {
        return Err(format!("expected dim,L,N, got '{text}'"));
    };
    let grid = GridConfig {
        dim: dim.parse().map_err(|e| format!("dim: {e}"))?,
        half_width: l.parse().map_err(|e| format!("L: {e}"))?,
        samples: n.parse().map_err(|e| format!("N: {e}"))?,
    };
    grid.spec().map_err(|e| e.to_string())?;
    Ok(grid)
}

/// File form of a run; every field is optional so flags can fill the gaps.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub grid: Option<GridConfig>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
    }

    /// The parameter block decoded as the command's parameter type.
    pub fn params<P: for<'de> Deserialize<'de> + Default>(&self) -> Result<P, CliError> {
        if self.params.is_empty() {
            return Ok(P::default());
        }
        serde_json::from_value(serde_json::Value::Object(self.params.clone()))
            .map_err(|e| CliError::Validation(format!("config params: {e}")))
    }
}

/// The resolved configuration echoed in every JSON envelope.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig<P> {
    pub grid: GridConfig,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub params: P,
}

/// Copies every flag that was given over the file value.
macro_rules! override_fields {
    ($params:expr, $args:expr; $($field:ident),* $(,)?) => {
        $(
            if let Some(v) = $args.$field.clone() {
                $params.$field = v.into();
            }
        )*
    };
}
pub(crate) use override_fields;

/// `Option<f64>` with `+inf` written as `"inf"`.
pub mod extended_real_option {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => mlab_core::rearrangement::extended_real::serialize(x, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "mlab_core::rearrangement::extended_real")] f64);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}
