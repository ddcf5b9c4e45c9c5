//! Ten coupled sector formulations of the world model.
//!
//! The typed step functions in the submodules are the reference forms of
//! each sector's core dynamics. [`assemble_world_model`] writes the same
//! forms as engine equations and wires the sector couplings together.

pub mod biodiversity;
pub mod carbon;
pub mod climate;
pub mod economy;
pub mod education;
pub mod energy;
pub mod food;
pub mod land;
pub mod population;
mod registry;
pub mod water;
mod world;

use thiserror::Error;

use crate::engine::EngineError;

pub use biodiversity::{msa_step, BiodiversityState, MsaRates};
pub use carbon::{carbon_step, CarbonExchange, CarbonReservoirs};
pub use climate::{radiative_forcing, temperature_step, ClimateParams, ClimateState};
pub use economy::{cobb_douglas_gwp, human_development_index, EconomyState};
pub use education::EducationState;
pub use energy::{energy_market_shares, EnergySource, EnergySourceState};
pub use food::{diet_shift_step, FoodDietState};
pub use land::LandAccount;
pub use population::{population_step, CohortGrid, VitalFlows, COHORTS};
pub use registry::{
    parse_forcing_csv, ParameterEntry, ParameterSet, Registry, TableEntry, BUILTIN_REGISTRY,
};
pub use water::WaterState;
pub use world::{assemble_world_model, WorldModel, REQUIRED_OUTPUTS};

#[derive(Debug, Error)]
pub enum SectorError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{} cohort {cohort} would become negative ({value})", if *.female { "female" } else { "male" })]
    NegativePopulation {
        cohort: usize,
        female: bool,
        value: f64,
    },
    #[error("carbon reservoir `{reservoir}` would become negative ({value})")]
    NegativeReservoir { reservoir: String, value: f64 },
    #[error("missing parameter `{0}`")]
    MissingParameter(String),
    #[error("world model does not define output `{0}`")]
    MissingOutput(String),
    #[error("invalid parameter registry: {0}")]
    Registry(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}
