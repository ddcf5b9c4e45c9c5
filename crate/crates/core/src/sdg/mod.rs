//! SDG progress assessment: indicator normalization against targets, goal
//! indices, progress levels and systems-change deltas between ensembles.

mod catalog;
mod delta;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use catalog::{
    load_catalog, load_targets, Basis, Catalog, Direction, IndicatorDef, TargetEntry, TargetSet,
    BUILTIN_CATALOG, BUILTIN_TARGETS,
};
pub use delta::{
    format_delta, systems_change, write_delta_csv, EntryPoint, SigmaSource, SystemsChangeDelta,
    ENTRY_POINT_VARIABLES,
};
pub use report::{score_ensemble, GoalSummary, IndicatorSummary, ProgressReport};

#[derive(Debug, Error)]
pub enum SdgError {
    #[error("indicator `{indicator}`: target equals the base value {value}")]
    DegenerateTarget { indicator: String, value: f64 },
    #[error("goal index of an empty indicator set")]
    EmptyGoal,
    #[error("ensemble lacks variable `{0}`")]
    MissingVariable(String),
    #[error(
        "milestone {0} is not available (scoring uses 2030, 2050 or 2100 and needs 2015 values)"
    )]
    MissingMilestone(f64),
    #[error("no target for indicator `{0}`")]
    MissingTarget(String),
    #[error("reference mean of `{variable}` is zero in {year}")]
    ZeroReference { variable: String, year: f64 },
    #[error("indicator `{indicator}`: {detail}")]
    NonMonotoneAmbition { indicator: String, detail: String },
    #[error("{file}: {message}")]
    Parse { file: String, message: String },
    #[error("catalog: {0}")]
    Catalog(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Goal {
    SDG2,
    SDG3,
    SDG4,
    SDG7,
    SDG8,
    SDG12,
    SDG13,
    SDG15,
}

impl Goal {
    pub const ALL: [Goal; 8] = [
        Goal::SDG2,
        Goal::SDG3,
        Goal::SDG4,
        Goal::SDG7,
        Goal::SDG8,
        Goal::SDG12,
        Goal::SDG13,
        Goal::SDG15,
    ];
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ambition {
    Weak,
    Moderate,
    Ambitious,
}

impl Ambition {
    pub const ALL: [Ambition; 3] = [Ambition::Weak, Ambition::Moderate, Ambition::Ambitious];

    pub fn as_str(self) -> &'static str {
        match self {
            Ambition::Weak => "weak",
            Ambition::Moderate => "moderate",
            Ambition::Ambitious => "ambitious",
        }
    }
}

impl fmt::Display for Ambition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ambition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ambition::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("ambition must be weak, moderate or ambitious, got `{s}`"))
    }
}

/// Progress classes in increasing order of achievement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgressLevel {
    Deteriorating,
    Stagnating,
    Improving,
    OnTrack,
}

impl ProgressLevel {
    pub const ALL: [ProgressLevel; 4] = [
        ProgressLevel::Deteriorating,
        ProgressLevel::Stagnating,
        ProgressLevel::Improving,
        ProgressLevel::OnTrack,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProgressLevel::Deteriorating => "deteriorating",
            ProgressLevel::Stagnating => "stagnating",
            ProgressLevel::Improving => "improving",
            ProgressLevel::OnTrack => "on_track",
        }
    }
}

impl fmt::Display for ProgressLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Share of realizations per level, in [`ProgressLevel::ALL`] order.
pub type LevelShares = [f64; 4];

/// Percent of the way from base `w` to target `t` reached by `x`.
/// Unclamped: below 0 is regress, above 100 overshoot.
pub fn normalize(x: f64, w: f64, t: f64) -> Result<f64, SdgError> {
    if t == w {
        return Err(SdgError::DegenerateTarget {
            indicator: String::new(),
            value: w,
        });
    }
    Ok((x - w) / (t - w) * 100.0)
}

/// Equal-weight mean of the indicator scores of one goal.
pub fn goal_index(scores: &[f64]) -> Result<f64, SdgError> {
    if scores.is_empty() {
        return Err(SdgError::EmptyGoal);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// `<= 0` deteriorating, `(0, 50)` stagnating, `[50, 100)` improving,
/// `>= 100` on track.
pub fn classify(score: f64) -> ProgressLevel {
    if score <= 0.0 {
        ProgressLevel::Deteriorating
    } else if score < 50.0 {
        ProgressLevel::Stagnating
    } else if score < 100.0 {
        ProgressLevel::Improving
    } else {
        ProgressLevel::OnTrack
    }
}

/// Most frequent level and the share of each level. Ties go to the lower
/// (more pessimistic) level. An empty input yields deteriorating with all
/// shares zero.
pub fn modal_progress(levels: &[ProgressLevel]) -> (ProgressLevel, LevelShares) {
    let mut counts = [0usize; 4];
    for l in levels {
        counts[*l as usize] += 1;
    }
    let mut modal = 0;
    for i in 1..4 {
        if counts[i] > counts[modal] {
            modal = i;
        }
    }
    let n = levels.len().max(1) as f64;
    (ProgressLevel::ALL[modal], counts.map(|c| c as f64 / n))
}
