use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Ambition, Goal, SdgError};
use crate::ensemble::MILESTONES;

/// Shipped indicator catalog.
pub const BUILTIN_CATALOG: &str = include_str!("../../../../data/indicators.toml");
/// Shipped target set.
pub const BUILTIN_TARGETS: &str = include_str!("../../../../data/targets.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorDef {
    pub id: String,
    pub goal: Goal,
    #[serde(default)]
    pub name: String,
    /// Model output the indicator reads.
    pub variable: String,
    #[serde(default)]
    pub units: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    #[serde(rename = "indicator")]
    pub indicators: Vec<IndicatorDef>,
}

impl Catalog {
    pub fn builtin() -> Self {
        Self::from_toml_str(BUILTIN_CATALOG, "indicators.toml").expect("shipped catalog is valid")
    }

    pub fn from_toml_str(src: &str, file: &str) -> Result<Self, SdgError> {
        let cat: Catalog = toml::from_str(src).map_err(|e| SdgError::Parse {
            file: file.to_string(),
            message: e.to_string(),
        })?;
        let mut seen = HashSet::new();
        for ind in &cat.indicators {
            if !seen.insert(ind.id.as_str()) {
                return Err(SdgError::Catalog(format!(
                    "indicator `{}` declared twice",
                    ind.id
                )));
            }
        }
        Ok(cat)
    }

    /// Model variables the catalog reads, without duplicates, in order.
    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for ind in &self.indicators {
            if !out.contains(&ind.variable) {
                out.push(ind.variable.clone());
            }
        }
        out
    }

    /// Fails on the first indicator whose variable `has` rejects.
    pub fn check_variables(&self, has: impl Fn(&str) -> bool) -> Result<(), SdgError> {
        match self.indicators.iter().find(|i| !has(&i.variable)) {
            Some(i) => Err(SdgError::MissingVariable(i.variable.clone())),
            None => Ok(()),
        }
    }

    pub fn goals(&self) -> Vec<Goal> {
        Goal::ALL
            .into_iter()
            .filter(|g| self.indicators.iter().any(|i| i.goal == *g))
            .collect()
    }
}

pub fn load_catalog(path: &Path) -> Result<Catalog, SdgError> {
    let src = std::fs::read_to_string(path)?;
    Catalog::from_toml_str(&src, &path.display().to_string())
}

/// How a target value was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    SdgAbsolute,
    TechnicalOptimum,
    LeaveNoOneBehind,
    SensibleImprovement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increase,
    Decrease,
}

/// Targets of one indicator for 2030, 2050 and 2100 per ambition level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEntry {
    pub indicator: String,
    pub basis: Basis,
    pub direction: Direction,
    /// 2015 value the targets were set against.
    pub base: f64,
    pub weak: [f64; 3],
    pub moderate: [f64; 3],
    pub ambitious: [f64; 3],
}

impl TargetEntry {
    pub fn levels(&self, ambition: Ambition) -> [f64; 3] {
        match ambition {
            Ambition::Weak => self.weak,
            Ambition::Moderate => self.moderate,
            Ambition::Ambitious => self.ambitious,
        }
    }

    pub fn target(&self, ambition: Ambition, milestone: f64) -> Option<f64> {
        let k = MILESTONES.iter().position(|m| *m == milestone)?;
        Some(self.levels(ambition)[k])
    }

    /// Whether `a` is at least as good as `b`.
    fn not_worse(&self, a: f64, b: f64) -> bool {
        match self.direction {
            Direction::Increase => a >= b,
            Direction::Decrease => a <= b,
        }
    }

    fn validate(&self) -> Result<(), SdgError> {
        let fail = |detail: String| SdgError::NonMonotoneAmbition {
            indicator: self.indicator.clone(),
            detail,
        };
        for ambition in Ambition::ALL {
            let t = self.levels(ambition);
            for (k, v) in t.iter().enumerate() {
                if !v.is_finite() {
                    return Err(SdgError::Parse {
                        file: String::new(),
                        message: format!("indicator `{}`: non-finite target", self.indicator),
                    });
                }
                if *v == self.base {
                    return Err(SdgError::DegenerateTarget {
                        indicator: self.indicator.clone(),
                        value: self.base,
                    });
                }
                if !self.not_worse(*v, self.base) {
                    return Err(fail(format!(
                        "{ambition} {} target {v} does not improve on base {}",
                        MILESTONES[k], self.base
                    )));
                }
            }
            for k in 1..3 {
                if !self.not_worse(t[k], t[k - 1]) {
                    return Err(fail(format!(
                        "{ambition} target for {} ({}) is less ambitious than for {} ({})",
                        MILESTONES[k],
                        t[k],
                        MILESTONES[k - 1],
                        t[k - 1]
                    )));
                }
            }
        }
        for k in 0..3 {
            let (w, m, a) = (self.weak[k], self.moderate[k], self.ambitious[k]);
            if !(self.not_worse(m, w) && self.not_worse(a, m)) {
                return Err(fail(format!(
                    "{} targets are not ordered weak <= moderate <= ambitious",
                    MILESTONES[k]
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSet {
    #[serde(rename = "target")]
    pub entries: Vec<TargetEntry>,
}

impl TargetSet {
    pub fn builtin() -> Self {
        Self::from_toml_str(BUILTIN_TARGETS, "targets.toml").expect("shipped targets are valid")
    }

    pub fn from_toml_str(src: &str, file: &str) -> Result<Self, SdgError> {
        let set: TargetSet = toml::from_str(src).map_err(|e| SdgError::Parse {
            file: file.to_string(),
            message: e.to_string(),
        })?;
        let mut seen = HashSet::new();
        for e in &set.entries {
            if !seen.insert(e.indicator.as_str()) {
                return Err(SdgError::Parse {
                    file: file.to_string(),
                    message: format!("indicator `{}` has two target entries", e.indicator),
                });
            }
            e.validate()?;
        }
        Ok(set)
    }

    pub fn get(&self, indicator: &str) -> Option<&TargetEntry> {
        self.entries.iter().find(|e| e.indicator == indicator)
    }

    /// Number of indicators per target basis.
    pub fn basis_counts(&self) -> BTreeMap<Basis, usize> {
        let mut out = BTreeMap::new();
        for e in &self.entries {
            *out.entry(e.basis).or_insert(0) += 1;
        }
        out
    }
}

pub fn load_targets(path: &Path) -> Result<TargetSet, SdgError> {
    let src = std::fs::read_to_string(path)?;
    TargetSet::from_toml_str(&src, &path.display().to_string())
}
