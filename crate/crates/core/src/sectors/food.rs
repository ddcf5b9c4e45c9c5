//! Food supply and demand accounts and sustainable-diet adoption.

use serde::{Deserialize, Serialize};

use super::SectorError;

/// Food categories in kcal/person/day order used by [`FoodDietState`].
pub const FOOD_CATEGORIES: [&str; 4] = ["crop_meat", "pasture_meat", "dairy_eggs", "plant"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoodDietState {
    /// kcal/person/day per category.
    pub supply: [f64; 4],
    pub demand: [f64; 4],
    pub waste_fraction: f64,
    /// Share of the population following the sustainable diet.
    pub adopters: f64,
}

impl FoodDietState {
    pub fn validate(&self) -> Result<(), SectorError> {
        if self.supply.iter().chain(&self.demand).any(|v| !(*v >= 0.0)) {
            return Err(SectorError::Domain(
                "food supply and demand must be >= 0".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.waste_fraction) {
            return Err(SectorError::Domain(format!(
                "waste fraction must lie in [0, 1), got {}",
                self.waste_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.adopters) {
            return Err(SectorError::Domain(format!(
                "adopter share must lie in [0, 1], got {}",
                self.adopters
            )));
        }
        Ok(())
    }
}

/// Adoption rate `(1 - a) (contact a + risk)` with the per-step transfer
/// capped at the non-adopting share, so `a` never leaves [0, 1].
pub fn diet_shift_rate(a: f64, contact: f64, risk: f64, dt: f64) -> f64 {
    (1.0 - a) * (contact * a + risk).min(1.0 / dt)
}

pub fn diet_shift_step(
    state: &FoodDietState,
    contact: f64,
    risk: f64,
    dt: f64,
) -> Result<FoodDietState, SectorError> {
    if !(contact >= 0.0 && risk >= 0.0) {
        return Err(SectorError::Domain(format!(
            "contact ({contact}) and risk ({risk}) must be >= 0"
        )));
    }
    state.validate()?;
    let a = state.adopters;
    let mut next = state.clone();
    next.adopters = (a + dt * diet_shift_rate(a, contact, risk, dt)).min(1.0);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(a: f64) -> FoodDietState {
        FoodDietState {
            supply: [400.0, 150.0, 300.0, 2100.0],
            demand: [380.0, 140.0, 290.0, 2000.0],
            waste_fraction: 0.2,
            adopters: a,
        }
    }

    #[test]
    fn no_drivers_no_change() {
        assert_eq!(
            diet_shift_step(&state(0.3), 0.0, 0.0, 1.0).unwrap(),
            state(0.3)
        );
    }

    #[test]
    fn saturated_share_stays() {
        for (c, r) in [(0.5, 0.0), (5.0, 3.0), (0.0, 100.0)] {
            assert_eq!(
                diet_shift_step(&state(1.0), c, r, 1.0).unwrap().adopters,
                1.0
            );
        }
    }

    #[test]
    fn logistic_recurrence() {
        let mut s = state(0.1);
        let mut a: f64 = 0.1;
        for _ in 0..10 {
            s = diet_shift_step(&s, 0.5, 0.0, 1.0).unwrap();
            a += 0.5 * a * (1.0 - a);
            assert!((s.adopters - a).abs() < 1e-15);
        }
    }

    #[test]
    fn large_drivers_stay_bounded() {
        let s = diet_shift_step(&state(0.4), 50.0, 20.0, 1.0).unwrap();
        assert!(s.adopters <= 1.0);
        assert!(diet_shift_step(&state(1.2), 0.0, 0.0, 1.0).is_err());
        assert!(diet_shift_step(&state(0.2), -1.0, 0.0, 1.0).is_err());
    }
}
