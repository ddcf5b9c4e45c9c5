use std::io::Write;

use serde::Serialize;

use super::{
    classify, goal_index, modal_progress, normalize, Ambition, Catalog, Goal, LevelShares,
    ProgressLevel, SdgError, TargetSet,
};
use crate::ensemble::{EnsembleResult, BASE_YEAR, MILESTONES};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorSummary {
    pub id: String,
    pub goal: Goal,
    pub variable: String,
    pub target: f64,
    /// One score per realization.
    pub scores: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub modal: ProgressLevel,
    pub shares: LevelShares,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoalSummary {
    pub goal: Goal,
    pub indicators: Vec<String>,
    /// Goal index per realization.
    pub index: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub modal: ProgressLevel,
    pub shares: LevelShares,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProgressReport {
    pub pathway: String,
    pub milestone: f64,
    pub ambition: Ambition,
    pub realizations: usize,
    pub indicators: Vec<IndicatorSummary>,
    pub goals: Vec<GoalSummary>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Scores every realization of `ens` at `milestone` against the matching
/// targets, normalizing each indicator by the realization's own 2015 value.
pub fn score_ensemble(
    ens: &EnsembleResult,
    catalog: &Catalog,
    targets: &TargetSet,
    ambition: Ambition,
    milestone: f64,
) -> Result<ProgressReport, SdgError> {
    if !MILESTONES.contains(&milestone) {
        return Err(SdgError::MissingMilestone(milestone));
    }
    let ret = &ens.retained;
    let k_m = ret
        .year_index(milestone)
        .ok_or(SdgError::MissingMilestone(milestone))?;
    let k_0 = ret
        .year_index(BASE_YEAR)
        .ok_or(SdgError::MissingMilestone(BASE_YEAR))?;
    let n = ens.realizations;
    if n == 0 {
        return Err(SdgError::Catalog("ensemble has no realizations".into()));
    }

    let mut indicators = Vec::with_capacity(catalog.indicators.len());
    for ind in &catalog.indicators {
        let v = ret
            .variable_index(&ind.variable)
            .ok_or_else(|| SdgError::MissingVariable(ind.variable.clone()))?;
        let t = targets
            .get(&ind.id)
            .ok_or_else(|| SdgError::MissingTarget(ind.id.clone()))?
            .target(ambition, milestone)
            .ok_or(SdgError::MissingMilestone(milestone))?;
        let scores = (0..n)
            .map(|r| {
                normalize(ret.value(r, v, k_m), ret.value(r, v, k_0), t).map_err(|_| {
                    SdgError::DegenerateTarget {
                        indicator: ind.id.clone(),
                        value: t,
                    }
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let (mean, std) = mean_std(&scores);
        let levels: Vec<ProgressLevel> = scores.iter().map(|s| classify(*s)).collect();
        let (modal, shares) = modal_progress(&levels);
        indicators.push(IndicatorSummary {
            id: ind.id.clone(),
            goal: ind.goal,
            variable: ind.variable.clone(),
            target: t,
            scores,
            mean,
            std,
            modal,
            shares,
        });
    }

    let mut goals = Vec::new();
    for goal in catalog.goals() {
        let members: Vec<&IndicatorSummary> =
            indicators.iter().filter(|i| i.goal == goal).collect();
        let index = (0..n)
            .map(|r| goal_index(&members.iter().map(|i| i.scores[r]).collect::<Vec<_>>()))
            .collect::<Result<Vec<f64>, _>>()?;
        let (mean, std) = mean_std(&index);
        let levels: Vec<ProgressLevel> = index.iter().map(|s| classify(*s)).collect();
        let (modal, shares) = modal_progress(&levels);
        goals.push(GoalSummary {
            goal,
            indicators: members.iter().map(|i| i.id.clone()).collect(),
            index,
            mean,
            std,
            modal,
            shares,
        });
    }

    Ok(ProgressReport {
        pathway: ens.pathway.clone(),
        milestone,
        ambition,
        realizations: n,
        indicators,
        goals,
    })
}

const REPORT_HEADER: [&str; 12] = [
    "pathway",
    "goal",
    "indicator",
    "milestone",
    "ambition",
    "score_mean",
    "score_std",
    "modal_level",
    "share_deteriorating",
    "share_stagnating",
    "share_improving",
    "share_on_track",
];

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn io_err(e: csv::Error) -> SdgError {
    SdgError::Io(std::io::Error::other(e))
}

impl ProgressReport {
    fn row(
        &self,
        goal: Goal,
        indicator: &str,
        mean: f64,
        std: f64,
        modal: ProgressLevel,
        shares: &LevelShares,
    ) -> Vec<String> {
        let mut row = vec![
            self.pathway.clone(),
            goal.to_string(),
            indicator.to_string(),
            self.milestone.to_string(),
            self.ambition.to_string(),
            mean.to_string(),
            std.to_string(),
            modal.to_string(),
        ];
        row.extend(shares.iter().map(|s| s.to_string()));
        row
    }

    /// One row per indicator.
    pub fn write_csv<W: Write>(&self, out: W, header: bool) -> Result<(), SdgError> {
        let mut w = csv_writer(out);
        if header {
            w.write_record(REPORT_HEADER).map_err(io_err)?;
        }
        for i in &self.indicators {
            w.write_record(self.row(i.goal, &i.id, i.mean, i.std, i.modal, &i.shares))
                .map_err(io_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Goal-level summary in the same layout, with `indicator` set to
    /// `index`.
    pub fn write_goal_csv<W: Write>(&self, out: W, header: bool) -> Result<(), SdgError> {
        let mut w = csv_writer(out);
        if header {
            w.write_record(REPORT_HEADER).map_err(io_err)?;
        }
        for g in &self.goals {
            w.write_record(self.row(g.goal, "index", g.mean, g.std, g.modal, &g.shares))
                .map_err(io_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Long format for stacked bars: `pathway,goal,indicator,milestone,ambition,level,share`.
    pub fn write_level_shares_csv<W: Write>(&self, out: W, header: bool) -> Result<(), SdgError> {
        let mut w = csv_writer(out);
        if header {
            w.write_record([
                "pathway",
                "goal",
                "indicator",
                "milestone",
                "ambition",
                "level",
                "share",
            ])
            .map_err(io_err)?;
        }
        let rows = self
            .indicators
            .iter()
            .map(|i| (i.goal, i.id.as_str(), &i.shares))
            .chain(self.goals.iter().map(|g| (g.goal, "index", &g.shares)));
        for (goal, id, shares) in rows {
            for (level, share) in ProgressLevel::ALL.iter().zip(shares.iter()) {
                w.write_record([
                    self.pathway.as_str(),
                    &goal.to_string(),
                    id,
                    &self.milestone.to_string(),
                    self.ambition.as_str(),
                    level.as_str(),
                    &share.to_string(),
                ])
                .map_err(io_err)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
