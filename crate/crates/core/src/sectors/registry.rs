//! Parameter registry: every scalar and table the world model reads, with
//! nominal values, units, admissible ranges and sector tags.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SectorError;
use crate::engine::Table;

pub const BUILTIN_REGISTRY: &str = include_str!("../../../../data/registry.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterEntry {
    pub name: String,
    pub nominal: f64,
    #[serde(default)]
    pub units: String,
    /// Admissible `[low, high]`.
    pub range: [f64; 2],
    pub sector: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub name: String,
    pub points: Vec<[f64; 2]>,
    #[serde(default)]
    pub units: String,
    pub sector: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registry {
    #[serde(rename = "parameter", default)]
    pub parameters: Vec<ParameterEntry>,
    #[serde(rename = "table", default)]
    pub tables: Vec<TableEntry>,
}

impl Registry {
    /// The registry shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_toml_str(BUILTIN_REGISTRY).expect("shipped registry is valid")
    }

    pub fn from_toml_str(src: &str) -> Result<Self, SectorError> {
        let reg: Registry =
            toml::from_str(src).map_err(|e| SectorError::Registry(e.to_string()))?;
        reg.validate()?;
        Ok(reg)
    }

    pub fn validate(&self) -> Result<(), SectorError> {
        let mut seen = std::collections::HashSet::new();
        for name in self
            .parameters
            .iter()
            .map(|p| &p.name)
            .chain(self.tables.iter().map(|t| &t.name))
        {
            if !seen.insert(name.as_str()) {
                return Err(SectorError::Registry(format!("`{name}` is declared twice")));
            }
        }
        for p in &self.parameters {
            let [lo, hi] = p.range;
            if !(lo <= p.nominal && p.nominal <= hi) {
                return Err(SectorError::Registry(format!(
                    "nominal {} of `{}` lies outside its range [{lo}, {hi}]",
                    p.nominal, p.name
                )));
            }
        }
        for t in &self.tables {
            Table::new(&t.name, t.points.clone())
                .validate()
                .map_err(|e| SectorError::Registry(e.to_string()))?;
        }
        Ok(())
    }

    pub fn parameter(&self, name: &str) -> Option<&ParameterEntry> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&TableEntry> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn nominal_set(&self) -> ParameterSet {
        ParameterSet {
            scalars: self
                .parameters
                .iter()
                .map(|p| (p.name.clone(), p.nominal))
                .collect(),
            tables: self
                .tables
                .iter()
                .map(|t| (t.name.clone(), t.points.clone()))
                .collect(),
        }
    }
}

/// A complete set of scalar values and tables for one world-model run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub scalars: BTreeMap<String, f64>,
    pub tables: BTreeMap<String, Vec<[f64; 2]>>,
}

impl ParameterSet {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.scalars.get(name).copied()
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.scalars.insert(name.to_string(), value);
    }

    pub fn table(&self, name: &str) -> Option<&[[f64; 2]]> {
        self.tables.get(name).map(Vec::as_slice)
    }

    /// Removes a scalar or table; returns whether anything was removed.
    pub fn remove(&mut self, name: &str) -> bool {
        self.scalars.remove(name).is_some() | self.tables.remove(name).is_some()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.scalars.contains_key(name) || self.tables.contains_key(name)
    }
}

/// Reads a `year,forcing_wm2` series.
pub fn parse_forcing_csv(text: &str) -> Result<Vec<[f64; 2]>, SectorError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().unwrap_or_default();
    if header.trim() != "year,forcing_wm2" {
        return Err(SectorError::Registry(format!(
            "forcing series header must be `year,forcing_wm2`, got `{header}`"
        )));
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        let bad = || SectorError::Registry(format!("forcing series line {}: `{line}`", i + 2));
        let (y, f) = line.split_once(',').ok_or_else(bad)?;
        let y: f64 = y.trim().parse().map_err(|_| bad())?;
        let f: f64 = f.trim().parse().map_err(|_| bad())?;
        points.push([y, f]);
    }
    Table::new("forcing", points.clone())
        .validate()
        .map_err(|e| SectorError::Registry(e.to_string()))?;
    Ok(points)
}
