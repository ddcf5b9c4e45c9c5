use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use super::SdgError;
use crate::ensemble::{EnsembleError, EnsembleResult};

/// Lenses through which pathway differences are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryPoint {
    WellBeing,
    Food,
    Energy,
    Economy,
}

impl EntryPoint {
    pub fn as_str(self) -> &'static str {
        match self {
            EntryPoint::WellBeing => "well-being",
            EntryPoint::Food => "food",
            EntryPoint::Energy => "energy",
            EntryPoint::Economy => "economy",
        }
    }
}

impl fmt::Display for EntryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Two representative model variables per entry point.
pub const ENTRY_POINT_VARIABLES: [(EntryPoint, &str); 8] = [
    (EntryPoint::WellBeing, "population.total"),
    (EntryPoint::WellBeing, "education.no_education_share"),
    (EntryPoint::Food, "land.cropland_pasture"),
    (EntryPoint::Food, "food.animal_kcal"),
    (EntryPoint::Energy, "energy.demand"),
    (EntryPoint::Energy, "energy.production_fossil"),
    (EntryPoint::Economy, "economy.gwp_per_capita"),
    (EntryPoint::Economy, "carbon.co2_ppm"),
];

/// Which ensemble's standard deviation sets the band.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SigmaSource {
    #[default]
    Alternative,
    /// `sqrt((σ_ref² + σ_alt²) / 2)`.
    Pooled,
}

impl FromStr for SigmaSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "alt" | "alternative" => Ok(SigmaSource::Alternative),
            "pooled" => Ok(SigmaSource::Pooled),
            _ => Err(format!("sigma source must be `alt` or `pooled`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemsChangeDelta {
    pub entry_point: Option<EntryPoint>,
    pub variable: String,
    pub year: f64,
    pub mean_pct: f64,
    pub lo_pct: f64,
    pub hi_pct: f64,
}

impl SystemsChangeDelta {
    /// `mean% (lo%–hi%)` with whole percentages.
    pub fn annotation(&self) -> String {
        format_delta(self.mean_pct, self.lo_pct, self.hi_pct)
    }
}

fn whole(x: f64) -> String {
    // + 0.0 turns a rounded -0 into 0
    format!("{}%", x.round() + 0.0)
}

pub fn format_delta(mean: f64, lo: f64, hi: f64) -> String {
    format!("{} ({}\u{2013}{})", whole(mean), whole(lo), whole(hi))
}

fn lookup(ens: &EnsembleResult, variable: &str, year: f64) -> Result<(f64, f64), SdgError> {
    ens.envelope(variable, year).map_err(|e| match e {
        EnsembleError::UnknownYear(y) => SdgError::MissingMilestone(y),
        _ => SdgError::MissingVariable(variable.to_string()),
    })
}

/// Percentage deviation of the alternative ensemble mean from the reference
/// mean, with a one-standard-deviation band.
pub fn systems_change(
    reference: &EnsembleResult,
    alternative: &EnsembleResult,
    variable: &str,
    year: f64,
    sigma: SigmaSource,
) -> Result<SystemsChangeDelta, SdgError> {
    let (m_ref, s_ref) = lookup(reference, variable, year)?;
    let (m_alt, s_alt) = lookup(alternative, variable, year)?;
    if m_ref == 0.0 {
        return Err(SdgError::ZeroReference {
            variable: variable.to_string(),
            year,
        });
    }
    let s = match sigma {
        SigmaSource::Alternative => s_alt,
        SigmaSource::Pooled => ((s_ref * s_ref + s_alt * s_alt) / 2.0).sqrt(),
    };
    let mean_pct = (m_alt - m_ref) / m_ref.abs() * 100.0;
    let band = 100.0 * s / m_ref.abs();
    Ok(SystemsChangeDelta {
        entry_point: ENTRY_POINT_VARIABLES
            .iter()
            .find(|(_, v)| *v == variable)
            .map(|(e, _)| *e),
        variable: variable.to_string(),
        year,
        mean_pct,
        lo_pct: mean_pct - band,
        hi_pct: mean_pct + band,
    })
}

/// `entry_point,variable,year,mean_pct,lo_pct,hi_pct`.
pub fn write_delta_csv<W: Write>(deltas: &[SystemsChangeDelta], out: W) -> Result<(), SdgError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let err = |e: csv::Error| SdgError::Io(std::io::Error::other(e));
    w.write_record([
        "entry_point",
        "variable",
        "year",
        "mean_pct",
        "lo_pct",
        "hi_pct",
    ])
    .map_err(err)?;
    for d in deltas {
        w.write_record([
            d.entry_point.map_or("", |e| e.as_str()),
            &d.variable,
            &d.year.to_string(),
            &d.mean_pct.to_string(),
            &d.lo_pct.to_string(),
            &d.hi_pct.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annotation_style() {
        assert_eq!(format_delta(9.6, 5.2, 14.0), "10% (5%–14%)");
        assert_eq!(format_delta(-26.0, -35.4, -16.2), "-26% (-35%–-16%)");
        assert_eq!(format_delta(-0.3, -1.0, 0.4), "0% (-1%–0%)");
    }
}
