//! CO2 forcing and a surface box coupled to a four-layer deep ocean.

use serde::{Deserialize, Serialize};

use super::SectorError;

/// Logarithmic CO2 forcing, W/m2.
pub fn radiative_forcing(c: f64, c_pre: f64, f2x: f64) -> Result<f64, SectorError> {
    if !(c > 0.0 && c_pre > 0.0) {
        return Err(SectorError::Domain(format!(
            "CO2 concentrations must be positive, got {c} and {c_pre}"
        )));
    }
    Ok(f2x * (c / c_pre).ln() / std::f64::consts::LN_2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClimateState {
    pub co2_ppm: f64,
    pub forcing_co2: f64,
    pub forcing_other: f64,
    /// Surface and mixed-layer anomaly, degC.
    pub surface: f64,
    /// Deep-ocean layer anomalies top to bottom, degC.
    pub deep: [f64; 4],
}

impl ClimateState {
    pub fn at_rest(co2_ppm: f64) -> Self {
        Self {
            co2_ppm,
            forcing_co2: 0.0,
            forcing_other: 0.0,
            surface: 0.0,
            deep: [0.0; 4],
        }
    }
}

/// Heat capacities in W yr m-2 K-1 and exchange coefficients in W m-2 K-1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClimateParams {
    /// Equilibrium sensitivity, degC per W/m2.
    pub lambda: f64,
    pub surface_capacity: f64,
    pub deep_capacity: [f64; 4],
    /// Surface to first deep layer, then between consecutive deep layers.
    pub exchange: [f64; 4],
}

/// One Euler step of the temperature boxes under total forcing `forcing`.
///
/// The surface loses `T_s / lambda` to space and `k_0 (T_s - T_1)` to the
/// first deep layer; deep layers exchange heat diffusively down the chain.
pub fn temperature_step(
    clim: &ClimateState,
    p: &ClimateParams,
    forcing: f64,
    dt: f64,
) -> ClimateState {
    let mut t = [0.0; 5];
    t[0] = clim.surface;
    t[1..].copy_from_slice(&clim.deep);
    let heat: [f64; 4] = std::array::from_fn(|i| p.exchange[i] * (t[i] - t[i + 1]));
    let mut next = clim.clone();
    next.surface = t[0] + dt * (forcing - t[0] / p.lambda - heat[0]) / p.surface_capacity;
    for i in 0..4 {
        let below = if i < 3 { heat[i + 1] } else { 0.0 };
        next.deep[i] = t[i + 1] + dt * (heat[i] - below) / p.deep_capacity[i];
    }
    next
}
