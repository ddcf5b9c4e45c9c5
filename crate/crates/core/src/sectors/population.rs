//! Aging chain of 5-year cohorts per sex, ages 0 to 100+.

use serde::{Deserialize, Serialize};

use super::SectorError;

/// Number of 5-year cohorts per sex; the last one is the open 100+ cohort.
pub const COHORTS: usize = 21;
/// Years spent in each non-terminal cohort.
pub const COHORT_SPAN: f64 = 5.0;

/// Persons per sex and cohort. The same shape carries per-cohort rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortGrid {
    pub female: [f64; COHORTS],
    pub male: [f64; COHORTS],
}

impl CohortGrid {
    pub fn zeros() -> Self {
        Self {
            female: [0.0; COHORTS],
            male: [0.0; COHORTS],
        }
    }

    /// The same value in every cell, typically a uniform rate.
    pub fn uniform(value: f64) -> Self {
        Self {
            female: [value; COHORTS],
            male: [value; COHORTS],
        }
    }

    pub fn total(&self) -> f64 {
        self.female.iter().chain(self.male.iter()).sum()
    }

    fn sexes_mut(&mut self) -> [&mut [f64; COHORTS]; 2] {
        [&mut self.female, &mut self.male]
    }
}

/// Births and deaths accompanying one step, for accounting checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VitalFlows {
    pub births: f64,
    pub deaths: f64,
}

/// One Euler step of the aging chain.
///
/// Each cohort below 100+ matures into the next at `1/5` per year, every
/// cohort loses `persons * mortality` to deaths, and the 0-5 cohorts gain
/// births split by `female_birth_fraction`.
pub fn population_step(
    cohorts: &CohortGrid,
    births: f64,
    female_birth_fraction: f64,
    mortality: &CohortGrid,
    dt: f64,
) -> Result<(CohortGrid, VitalFlows), SectorError> {
    if !(births >= 0.0) {
        return Err(SectorError::Domain(format!(
            "births must be >= 0, got {births}"
        )));
    }
    if !(0.0..=1.0).contains(&female_birth_fraction) {
        return Err(SectorError::Domain(format!(
            "female birth fraction must lie in [0, 1], got {female_birth_fraction}"
        )));
    }
    let rates = [&mortality.female, &mortality.male];
    if let Some(r) = rates.iter().flat_map(|r| r.iter()).find(|r| !(**r >= 0.0)) {
        return Err(SectorError::Domain(format!(
            "mortality must be >= 0, got {r}"
        )));
    }

    let mut next = cohorts.clone();
    let sources = [&cohorts.female, &cohorts.male];
    let newborns = [
        births * female_birth_fraction,
        births * (1.0 - female_birth_fraction),
    ];
    let mut deaths = 0.0;
    for (sex, out) in next.sexes_mut().into_iter().enumerate() {
        let pop = sources[sex];
        for c in 0..COHORTS {
            let inflow = if c == 0 {
                newborns[sex]
            } else {
                pop[c - 1] / COHORT_SPAN
            };
            let maturation = if c + 1 < COHORTS {
                pop[c] / COHORT_SPAN
            } else {
                0.0
            };
            let dying = pop[c] * rates[sex][c];
            deaths += dying;
            out[c] = pop[c] + dt * (inflow - maturation - dying);
            if out[c] < 0.0 {
                return Err(SectorError::NegativePopulation {
                    cohort: c,
                    female: sex == 0,
                    value: out[c],
                });
            }
        }
    }
    Ok((next, VitalFlows { births, deaths }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maturation_moves_a_fifth() {
        let mut g = CohortGrid::zeros();
        g.female[0] = 100.0;
        let (next, _) = population_step(&g, 0.0, 0.5, &CohortGrid::zeros(), 1.0).unwrap();
        assert_eq!(next.female[0], 80.0);
        assert_eq!(next.female[1], 20.0);
        assert_eq!(next.total(), 100.0);
    }

    #[test]
    fn uniform_mortality_shrinks_total_by_rate() {
        let mut g = CohortGrid::zeros();
        for c in 0..COHORTS {
            g.female[c] = 10.0 + c as f64;
            g.male[c] = 12.0 + 2.0 * c as f64;
        }
        let before = g.total();
        let (next, flows) = population_step(&g, 0.0, 0.5, &CohortGrid::uniform(0.01), 1.0).unwrap();
        assert!((next.total() - 0.99 * before).abs() < 1e-12 * before);
        assert!((flows.deaths - 0.01 * before).abs() < 1e-12 * before);
    }

    #[test]
    fn constant_births_reach_chain_equilibrium() {
        // inflow B = outflow x/5 in every non-terminal cohort => x = 5B
        let births = 1000.0;
        let mut g = CohortGrid::zeros();
        for _ in 0..400 {
            g = population_step(&g, births, 1.0, &CohortGrid::zeros(), 1.0)
                .unwrap()
                .0;
        }
        for c in 0..COHORTS - 1 {
            assert!(
                (g.female[c] - 5.0 * births).abs() < 1e-6,
                "cohort {c}: {}",
                g.female[c]
            );
        }
    }

    #[test]
    fn accounting_is_exact() {
        let mut g = CohortGrid::uniform(1e8);
        let mut rates = CohortGrid::zeros();
        for c in 0..COHORTS {
            rates.female[c] = 0.001 * (c as f64 + 1.0);
            rates.male[c] = 0.0012 * (c as f64 + 1.0);
        }
        for _ in 0..50 {
            let before = g.total();
            let (next, flows) = population_step(&g, 1.3e8, 0.49, &rates, 1.0).unwrap();
            let change = next.total() - before;
            assert!((change - (flows.births - flows.deaths)).abs() <= 1e-9 * before);
            g = next;
        }
    }

    #[test]
    fn negative_cohort_is_an_error() {
        let g = CohortGrid::uniform(10.0);
        let err = population_step(&g, 0.0, 0.5, &CohortGrid::uniform(0.9), 1.0).unwrap_err();
        assert!(matches!(
            err,
            SectorError::NegativePopulation { cohort: 0, .. }
        ));
        assert!(population_step(&g, -1.0, 0.5, &CohortGrid::zeros(), 1.0).is_err());
    }
}
