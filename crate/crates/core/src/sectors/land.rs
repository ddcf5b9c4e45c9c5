use serde::{Deserialize, Serialize};

/// Land classes in billion hectares.
pub const LAND_CLASSES: [&str; 6] = [
    "arable",
    "permanent_crops",
    "pasture",
    "forest",
    "urban",
    "other",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandAccount {
    /// Areas in [`LAND_CLASSES`] order, Gha.
    pub area: [f64; 6],
    /// t/ha/yr.
    pub crop_yield: f64,
    /// Mt/yr.
    pub nitrogen: f64,
    pub phosphorus: f64,
}

impl LandAccount {
    pub fn total(&self) -> f64 {
        self.area.iter().sum()
    }

    pub fn agricultural(&self) -> f64 {
        self.area[0] + self.area[1] + self.area[2]
    }
}
