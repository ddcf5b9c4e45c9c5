//! The five SSP-RCP benchmark pathways as validated parameter overrides
//! with uncertainty ranges.
//!
//! A pathway file is TOML with three sections:
//!
//! ```toml
//! [meta]
//! id = "GreenRecovery"
//! label = "SSP1-2.6"
//! forcing = "../data/forcing/ssp126.csv"   # relative to the pathway file
//! description = "..."
//!
//! [overrides]
//! "fertility.scale" = 0.85
//!
//! [[uncertainty]]
//! name = "fertility.scale"
//! low = 0.75
//! high = 0.95
//! distribution = "uniform"
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sectors::{parse_forcing_csv, ParameterSet, Registry};

/// Name of the table holding the exogenous non-CO2 forcing series.
pub const FORCING_TABLE: &str = "climate.nonco2_forcing";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: {message}")]
    Parse { file: String, message: String },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("parameter `{name}`: {reason}")]
    OutOfRange { name: String, reason: String },
    #[error("pathway `{id}` must carry label `{expected}`, found `{found}`")]
    BadLabel {
        id: String,
        expected: String,
        found: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PathwayId {
    #[serde(rename = "BAU")]
    Bau,
    GreenRecovery,
    FragmentedWorld,
    Inequality,
    FossilFueled,
}

impl PathwayId {
    pub const ALL: [PathwayId; 5] = [
        PathwayId::Bau,
        PathwayId::GreenRecovery,
        PathwayId::FragmentedWorld,
        PathwayId::Inequality,
        PathwayId::FossilFueled,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PathwayId::Bau => "BAU",
            PathwayId::GreenRecovery => "GreenRecovery",
            PathwayId::FragmentedWorld => "FragmentedWorld",
            PathwayId::Inequality => "Inequality",
            PathwayId::FossilFueled => "FossilFueled",
        }
    }

    /// The SSP-RCP combination each pathway stands for.
    pub fn label(self) -> &'static str {
        match self {
            PathwayId::Bau => "SSP2-4.5",
            PathwayId::GreenRecovery => "SSP1-2.6",
            PathwayId::FragmentedWorld => "SSP3-7.0",
            PathwayId::Inequality => "SSP4-6.0",
            PathwayId::FossilFueled => "SSP5-8.5",
        }
    }
}

impl fmt::Display for PathwayId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PathwayId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PathwayId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown pathway id `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    #[default]
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRange {
    pub name: String,
    pub low: f64,
    pub high: f64,
    #[serde(default)]
    pub distribution: Distribution,
}

impl ParameterRange {
    pub fn new(name: &str, low: f64, high: f64) -> Self {
        Self {
            name: name.to_string(),
            low,
            high,
            distribution: Distribution::Uniform,
        }
    }

    /// Maps a unit-interval coordinate onto the range.
    pub fn scale(&self, u: f64) -> f64 {
        self.low + (self.high - self.low) * u
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathwayMeta {
    pub id: PathwayId,
    pub label: String,
    /// Path of the `year,forcing_wm2` series, relative to the pathway file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing: Option<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PathwayFile {
    meta: PathwayMeta,
    #[serde(default)]
    overrides: BTreeMap<String, f64>,
    #[serde(default)]
    uncertainty: Vec<ParameterRange>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathwaySpec {
    pub meta: PathwayMeta,
    pub overrides: BTreeMap<String, f64>,
    pub uncertainty: Vec<ParameterRange>,
    /// The resolved forcing series, when the pathway names one.
    pub forcing: Option<Vec<[f64; 2]>>,
}

impl PathwaySpec {
    pub fn id(&self) -> PathwayId {
        self.meta.id
    }

    /// Parses and validates a pathway. `base_dir` resolves the forcing file;
    /// without it a forcing reference is kept but not loaded.
    pub fn from_toml_str(
        src: &str,
        registry: &Registry,
        file: &str,
        base_dir: Option<&Path>,
    ) -> Result<Self, ScenarioError> {
        let parsed: PathwayFile = toml::from_str(src).map_err(|e| ScenarioError::Parse {
            file: file.to_string(),
            message: e.to_string(),
        })?;
        let forcing = match (&parsed.meta.forcing, base_dir) {
            (Some(rel), Some(dir)) => {
                let path = dir.join(rel);
                let text = std::fs::read_to_string(&path).map_err(|source| ScenarioError::Io {
                    path: path.clone(),
                    source,
                })?;
                Some(parse_forcing_csv(&text).map_err(|e| ScenarioError::Parse {
                    file: path.display().to_string(),
                    message: e.to_string(),
                })?)
            }
            _ => None,
        };
        let spec = PathwaySpec {
            meta: parsed.meta,
            overrides: parsed.overrides,
            uncertainty: parsed.uncertainty,
            forcing,
        };
        spec.validate(registry)?;
        Ok(spec)
    }

    pub fn validate(&self, registry: &Registry) -> Result<(), ScenarioError> {
        let id = self.meta.id;
        if self.meta.label != id.label() {
            return Err(ScenarioError::BadLabel {
                id: id.to_string(),
                expected: id.label().to_string(),
                found: self.meta.label.clone(),
            });
        }
        for (name, value) in &self.overrides {
            let entry = registry
                .parameter(name)
                .ok_or_else(|| ScenarioError::UnknownParameter(name.clone()))?;
            let [lo, hi] = entry.range;
            if !(lo <= *value && *value <= hi) {
                return Err(ScenarioError::OutOfRange {
                    name: name.clone(),
                    reason: format!("override {value} outside admissible range [{lo}, {hi}]"),
                });
            }
        }
        validate_ranges(&self.uncertainty, registry)
    }

    pub fn to_toml_string(&self) -> String {
        let file = PathwayFile {
            meta: self.meta.clone(),
            overrides: self.overrides.clone(),
            uncertainty: self.uncertainty.clone(),
        };
        toml::to_string(&file).expect("pathway serializes")
    }
}

fn validate_ranges(ranges: &[ParameterRange], registry: &Registry) -> Result<(), ScenarioError> {
    let mut seen = std::collections::HashSet::new();
    for r in ranges {
        let entry = registry
            .parameter(&r.name)
            .ok_or_else(|| ScenarioError::UnknownParameter(r.name.clone()))?;
        if !seen.insert(r.name.as_str()) {
            return Err(ScenarioError::OutOfRange {
                name: r.name.clone(),
                reason: "uncertainty range given twice".into(),
            });
        }
        if !(r.low <= r.high) {
            return Err(ScenarioError::OutOfRange {
                name: r.name.clone(),
                reason: format!("range low {} exceeds high {}", r.low, r.high),
            });
        }
        let [lo, hi] = entry.range;
        if r.low < lo || r.high > hi {
            return Err(ScenarioError::OutOfRange {
                name: r.name.clone(),
                reason: format!(
                    "range [{}, {}] leaves admissible range [{lo}, {hi}]",
                    r.low, r.high
                ),
            });
        }
    }
    Ok(())
}

#[derive(Deserialize)]
struct RangeFile {
    uncertainty: Vec<ParameterRange>,
}

/// Parses a file holding only `[[uncertainty]]` tables.
pub fn parse_ranges(
    src: &str,
    registry: &Registry,
    file: &str,
) -> Result<Vec<ParameterRange>, ScenarioError> {
    let parsed: RangeFile = toml::from_str(src).map_err(|e| ScenarioError::Parse {
        file: file.to_string(),
        message: e.to_string(),
    })?;
    validate_ranges(&parsed.uncertainty, registry)?;
    Ok(parsed.uncertainty)
}

/// Every registry parameter over its full admissible range.
pub fn registry_ranges(registry: &Registry) -> Vec<ParameterRange> {
    registry
        .parameters
        .iter()
        .map(|p| ParameterRange::new(&p.name, p.range[0], p.range[1]))
        .collect()
}

pub fn load_pathway(path: &Path, registry: &Registry) -> Result<PathwaySpec, ScenarioError> {
    let src = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    PathwaySpec::from_toml_str(&src, registry, &path.display().to_string(), path.parent())
}

/// The parameter set with the pathway's overrides and forcing series in
/// place of the base values.
pub fn apply_pathway(base: &ParameterSet, spec: &PathwaySpec) -> ParameterSet {
    let mut out = base.clone();
    for (name, value) in &spec.overrides {
        out.set(name, *value);
    }
    if let Some(forcing) = &spec.forcing {
        out.tables
            .insert(FORCING_TABLE.to_string(), forcing.clone());
    }
    out
}

/// Replaces the sampled parameters of `base` with the values in `row`.
pub fn apply_sample(base: &ParameterSet, ranges: &[ParameterRange], row: &[f64]) -> ParameterSet {
    let mut out = base.clone();
    for (r, v) in ranges.iter().zip(row) {
        out.set(&r.name, *v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const BAU: &str = r#"
        [meta]
        id = "BAU"
        label = "SSP2-4.5"
    "#;

    #[test]
    fn empty_bau_is_registry_nominal() {
        let reg = Registry::builtin();
        let spec = PathwaySpec::from_toml_str(BAU, &reg, "bau", None).unwrap();
        assert_eq!(apply_pathway(&reg.nominal_set(), &spec), reg.nominal_set());
    }

    #[test]
    fn validation_errors() {
        let reg = Registry::builtin();
        let unknown = format!("{BAU}\n[overrides]\n\"fusion.cost\" = 1.0\n");
        assert!(matches!(
            PathwaySpec::from_toml_str(&unknown, &reg, "x", None),
            Err(ScenarioError::UnknownParameter(n)) if n == "fusion.cost"
        ));
        let inverted =
            format!("{BAU}\n[[uncertainty]]\nname = \"fertility.scale\"\nlow = 1.2\nhigh = 0.9\n");
        assert!(matches!(
            PathwaySpec::from_toml_str(&inverted, &reg, "x", None),
            Err(ScenarioError::OutOfRange { name, .. }) if name == "fertility.scale"
        ));
        let wide = format!("{BAU}\n[overrides]\n\"fertility.scale\" = 9.0\n");
        assert!(matches!(
            PathwaySpec::from_toml_str(&wide, &reg, "x", None),
            Err(ScenarioError::OutOfRange { .. })
        ));
        let label = "[meta]\nid = \"BAU\"\nlabel = \"SSP1-2.6\"\n";
        assert!(matches!(
            PathwaySpec::from_toml_str(label, &reg, "x", None),
            Err(ScenarioError::BadLabel { .. })
        ));
        assert!(matches!(
            PathwaySpec::from_toml_str("[meta\nid=", &reg, "x", None),
            Err(ScenarioError::Parse { .. })
        ));
    }

    #[test]
    fn apply_is_targeted_and_idempotent() {
        let reg = Registry::builtin();
        let base = reg.nominal_set();
        let src = format!("{BAU}\n[overrides]\n\"fertility.scale\" = 0.8\n");
        let spec = PathwaySpec::from_toml_str(&src, &reg, "x", None).unwrap();
        let once = apply_pathway(&base, &spec);
        assert_eq!(apply_pathway(&once, &spec), once);
        let differing: Vec<_> = base
            .scalars
            .iter()
            .filter(|(k, v)| once.scalars[*k] != **v)
            .collect();
        assert_eq!(differing.len(), 1);
        assert_eq!(once.get("fertility.scale"), Some(0.8));
    }
}
