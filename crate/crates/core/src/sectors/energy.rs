//! Cost competition between three fossil and three renewable sources.

use serde::{Deserialize, Serialize};

use super::SectorError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergySource {
    Coal,
    Oil,
    Gas,
    Solar,
    Wind,
    Biomass,
}

impl EnergySource {
    pub const ALL: [EnergySource; 6] = [
        EnergySource::Coal,
        EnergySource::Oil,
        EnergySource::Gas,
        EnergySource::Solar,
        EnergySource::Wind,
        EnergySource::Biomass,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnergySource::Coal => "coal",
            EnergySource::Oil => "oil",
            EnergySource::Gas => "gas",
            EnergySource::Solar => "solar",
            EnergySource::Wind => "wind",
            EnergySource::Biomass => "biomass",
        }
    }

    pub fn is_fossil(self) -> bool {
        matches!(
            self,
            EnergySource::Coal | EnergySource::Oil | EnergySource::Gas
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceState {
    pub source: EnergySource,
    /// US$ per GJ.
    pub unit_cost: f64,
    /// Remaining identified resource (fossil, EJ) or installed capacity
    /// (renewable, EJ/yr).
    pub reserve_or_capacity: f64,
    pub market_share: f64,
    /// EJ/yr.
    pub production: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySourceState {
    pub sources: Vec<SourceState>,
    /// EJ/yr.
    pub demand: f64,
}

/// Logit market shares: `exp(-gamma * c_i) / sum_j exp(-gamma * c_j)`.
pub fn energy_market_shares(costs: &[f64], gamma: f64) -> Result<Vec<f64>, SectorError> {
    if costs.is_empty() {
        return Err(SectorError::Domain("no energy sources".into()));
    }
    if let Some(c) = costs.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
        return Err(SectorError::Domain(format!(
            "costs must be positive, got {c}"
        )));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(SectorError::Domain(format!(
            "cost sensitivity must be >= 0, got {gamma}"
        )));
    }
    // shifting by the cheapest cost leaves the ratios unchanged and keeps
    // every exponent <= 0
    let cheapest = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = costs
        .iter()
        .map(|c| (-gamma * (c - cheapest)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Cost multiplier of a one-factor learning curve with the given learning
/// rate (fractional cost drop per doubling of cumulative output).
pub fn learning_multiplier(cumulative: f64, cumulative0: f64, learning_rate: f64) -> f64 {
    let exponent = -(1.0 - learning_rate).log2();
    (cumulative / cumulative0).powf(-exponent)
}
