//! Graduate stocks by level and sex.

use serde::{Deserialize, Serialize};

use super::SectorError;

pub const EDUCATION_LEVELS: [&str; 3] = ["primary", "secondary", "tertiary"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EducationState {
    /// Persons whose highest completed level is primary, secondary, tertiary.
    pub female: [f64; 3],
    pub male: [f64; 3],
    pub enrollment: [f64; 3],
    pub graduation: [f64; 3],
}

impl EducationState {
    /// Checks rates and that graduates fit in the adult population of each sex.
    pub fn validate(&self, adult_female: f64, adult_male: f64) -> Result<(), SectorError> {
        for r in self.enrollment.iter().chain(&self.graduation) {
            if !(0.0..=1.0).contains(r) {
                return Err(SectorError::Domain(format!(
                    "education rate {r} outside [0, 1]"
                )));
            }
        }
        let f: f64 = self.female.iter().sum();
        let m: f64 = self.male.iter().sum();
        if f > adult_female || m > adult_male {
            return Err(SectorError::Domain(format!(
                "graduates ({f}, {m}) exceed adult population ({adult_female}, {adult_male})"
            )));
        }
        Ok(())
    }
}
