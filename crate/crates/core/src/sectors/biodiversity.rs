//! Mean species abundance relaxing toward the species carrying capacity.

use serde::{Deserialize, Serialize};

use super::SectorError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiodiversityState {
    pub msa: f64,
    pub capacity: f64,
}

/// Relaxation rates, 1/yr.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsaRates {
    pub regeneration: f64,
    pub extinction: f64,
}

/// Regeneration applies while capacity exceeds MSA, extinction otherwise.
pub fn msa_step(
    bio: &BiodiversityState,
    capacity: f64,
    rates: &MsaRates,
    dt: f64,
) -> Result<BiodiversityState, SectorError> {
    if !(0.0..=1.0).contains(&capacity) {
        return Err(SectorError::Domain(format!(
            "species carrying capacity must lie in [0, 1], got {capacity}"
        )));
    }
    let rate = if capacity >= bio.msa {
        rates.regeneration
    } else {
        rates.extinction
    };
    Ok(BiodiversityState {
        msa: (bio.msa + dt * rate * (capacity - bio.msa)).clamp(0.0, 1.0),
        capacity,
    })
}
