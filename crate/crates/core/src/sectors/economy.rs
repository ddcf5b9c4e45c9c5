//! Cobb-Douglas production with a climate damage multiplier on productivity.

use serde::{Deserialize, Serialize};

use super::SectorError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomyState {
    /// Capital in the energy sector, trillion US$.
    pub capital_energy: f64,
    /// Capital outside the energy sector, trillion US$.
    pub capital_other: f64,
    pub productivity: f64,
    /// Labor force, billion persons.
    pub labor: f64,
    /// Gross world product, trillion US$ per year.
    pub gwp: f64,
    /// US$ per person per year.
    pub gwp_per_capita: f64,
}

/// `A * K^alpha * L^(1 - alpha)`.
pub fn cobb_douglas_gwp(
    productivity: f64,
    capital: f64,
    labor: f64,
    alpha: f64,
) -> Result<f64, SectorError> {
    if !(productivity > 0.0 && capital > 0.0 && labor > 0.0) {
        return Err(SectorError::Domain(format!(
            "Cobb-Douglas inputs must be positive (A={productivity}, K={capital}, L={labor})"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SectorError::Domain(format!(
            "capital elasticity must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(productivity * capital.powf(alpha) * labor.powf(1.0 - alpha))
}

/// Geometric mean of the life-expectancy, education and income sub-indices.
pub fn human_development_index(life: f64, education: f64, income: f64) -> f64 {
    (life * education * income).cbrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_inputs() {
        assert_eq!(cobb_douglas_gwp(1.0, 1.0, 1.0, 0.3).unwrap(), 1.0);
    }

    #[test]
    fn constant_returns_to_scale() {
        let y = cobb_douglas_gwp(2.0, 300.0, 3.2, 0.3).unwrap();
        let y2 = cobb_douglas_gwp(2.0, 600.0, 6.4, 0.3).unwrap();
        assert!((y2 - 2.0 * y).abs() < 1e-12 * y2);
    }

    #[test]
    fn direct_evaluation() {
        let y = cobb_douglas_gwp(1.0, 8.0, 1.0, 0.3).unwrap();
        assert!((y - 1.866066).abs() < 1e-6);
    }

    #[test]
    fn rejects_non_positive_inputs() {
        assert!(cobb_douglas_gwp(0.0, 1.0, 1.0, 0.3).is_err());
        assert!(cobb_douglas_gwp(1.0, -1.0, 1.0, 0.3).is_err());
        assert!(cobb_douglas_gwp(1.0, 1.0, 0.0, 0.3).is_err());
        assert!(cobb_douglas_gwp(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(cobb_douglas_gwp(f64::NAN, 1.0, 1.0, 0.3).is_err());
    }

    #[test]
    fn hdi_of_equal_components() {
        assert!((human_development_index(0.7, 0.7, 0.7) - 0.7).abs() < 1e-15);
    }
}
