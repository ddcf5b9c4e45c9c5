use serde::{Deserialize, Serialize};

/// Withdrawals and supply in km3/yr.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaterState {
    pub agriculture: f64,
    pub industry: f64,
    pub domestic: f64,
    pub supply: f64,
}

impl WaterState {
    pub fn withdrawal(&self) -> f64 {
        self.agriculture + self.industry + self.domestic
    }

    pub fn scarcity(&self) -> f64 {
        self.withdrawal() / self.supply
    }
}
