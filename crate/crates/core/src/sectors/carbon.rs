//! Linear donor-controlled carbon exchange between the atmosphere, the
//! land biosphere and five ocean layers.
//!
//! Every exchange is a pair of first-order fluxes, e.g. atmosphere to mixed
//! layer `k_am * C_atm` and back `k_ma * C_mixed`. Emissions enter the
//! atmosphere from outside the system and carbon capture removes part of
//! them, so total carbon changes by exactly `(emissions - ccs) * dt`.

use serde::{Deserialize, Serialize};

use super::SectorError;

/// Ocean layer depth bounds in metres, mixed layer first.
pub const OCEAN_LAYERS: [(f64, f64); 5] = [
    (0.0, 100.0),
    (100.0, 400.0),
    (400.0, 700.0),
    (700.0, 2000.0),
    (2000.0, 2800.0),
];

/// Carbon mass in GtC per reservoir.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarbonReservoirs {
    pub atmosphere: f64,
    pub biosphere: f64,
    /// Mixed layer first, then the four deep layers top to bottom.
    pub ocean: [f64; 5],
}

impl CarbonReservoirs {
    pub fn total(&self) -> f64 {
        self.atmosphere + self.biosphere + self.ocean.iter().sum::<f64>()
    }

    /// Reservoirs as a vector: atmosphere, biosphere, ocean layers.
    pub fn to_vec(&self) -> [f64; 7] {
        let o = self.ocean;
        [
            self.atmosphere,
            self.biosphere,
            o[0],
            o[1],
            o[2],
            o[3],
            o[4],
        ]
    }

    pub fn from_slice(v: &[f64; 7]) -> Self {
        Self {
            atmosphere: v[0],
            biosphere: v[1],
            ocean: [v[2], v[3], v[4], v[5], v[6]],
        }
    }
}

/// First-order exchange coefficients, 1/yr.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarbonExchange {
    pub atm_to_bio: f64,
    pub bio_to_atm: f64,
    pub atm_to_ocean: f64,
    pub ocean_to_atm: f64,
    /// Layer `i` to layer `i + 1`, mixed layer first.
    pub down: [f64; 4],
    /// Layer `i + 1` to layer `i`.
    pub up: [f64; 4],
}

impl CarbonExchange {
    fn validate(&self) -> Result<(), SectorError> {
        let all = [
            self.atm_to_bio,
            self.bio_to_atm,
            self.atm_to_ocean,
            self.ocean_to_atm,
        ]
        .into_iter()
        .chain(self.down)
        .chain(self.up);
        for k in all {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(SectorError::Domain(format!(
                    "carbon exchange coefficients must be >= 0, got {k}"
                )));
            }
        }
        Ok(())
    }

    /// Linear system matrix `M` with `dC/dt = M C` over the reservoir vector
    /// of [`CarbonReservoirs::to_vec`].
    pub fn flux_matrix(&self) -> [[f64; 7]; 7] {
        let mut m = [[0.0; 7]; 7];
        let mut link = |from: usize, to: usize, k: f64| {
            m[from][from] -= k;
            m[to][from] += k;
        };
        link(0, 1, self.atm_to_bio);
        link(1, 0, self.bio_to_atm);
        link(0, 2, self.atm_to_ocean);
        link(2, 0, self.ocean_to_atm);
        for i in 0..4 {
            link(2 + i, 3 + i, self.down[i]);
            link(3 + i, 2 + i, self.up[i]);
        }
        m
    }

    /// Reservoirs in exchange equilibrium holding `total` GtC.
    pub fn equilibrium(&self, total: f64) -> CarbonReservoirs {
        let bio = self.atm_to_bio / self.bio_to_atm;
        let mut ocean = [self.atm_to_ocean / self.ocean_to_atm, 0.0, 0.0, 0.0, 0.0];
        for i in 0..4 {
            ocean[i + 1] = ocean[i] * self.down[i] / self.up[i];
        }
        let scale = total / (1.0 + bio + ocean.iter().sum::<f64>());
        CarbonReservoirs {
            atmosphere: scale,
            biosphere: bio * scale,
            ocean: ocean.map(|o| o * scale),
        }
    }
}

/// Net exchange fluxes between reservoirs, GtC/yr, positive downward or
/// into the biosphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarbonFluxes {
    pub atm_to_bio: f64,
    pub atm_to_ocean: f64,
    pub down: [f64; 4],
}

pub fn carbon_fluxes(res: &CarbonReservoirs, k: &CarbonExchange) -> CarbonFluxes {
    let o = &res.ocean;
    CarbonFluxes {
        atm_to_bio: k.atm_to_bio * res.atmosphere - k.bio_to_atm * res.biosphere,
        atm_to_ocean: k.atm_to_ocean * res.atmosphere - k.ocean_to_atm * o[0],
        down: std::array::from_fn(|i| k.down[i] * o[i] - k.up[i] * o[i + 1]),
    }
}

/// One Euler step of the reservoir chain with `emissions` entering and `ccs`
/// captured, both GtC/yr.
pub fn carbon_step(
    res: &CarbonReservoirs,
    k: &CarbonExchange,
    emissions: f64,
    ccs: f64,
    dt: f64,
) -> Result<CarbonReservoirs, SectorError> {
    if !(emissions >= 0.0 && ccs >= 0.0) {
        return Err(SectorError::Domain(format!(
            "emissions ({emissions}) and capture ({ccs}) must be >= 0"
        )));
    }
    k.validate()?;
    let f = carbon_fluxes(res, k);
    let mut ocean = res.ocean;
    ocean[0] += dt * (f.atm_to_ocean - f.down[0]);
    for i in 1..4 {
        ocean[i] += dt * (f.down[i - 1] - f.down[i]);
    }
    ocean[4] += dt * f.down[3];
    let next = CarbonReservoirs {
        atmosphere: res.atmosphere + dt * (emissions - ccs - f.atm_to_bio - f.atm_to_ocean),
        biosphere: res.biosphere + dt * f.atm_to_bio,
        ocean,
    };
    let names = [
        "atmosphere",
        "biosphere",
        "ocean 0-100 m",
        "ocean 100-400 m",
        "ocean 400-700 m",
        "ocean 700-2000 m",
        "ocean 2000-2800 m",
    ];
    for (name, v) in names.iter().zip(next.to_vec()) {
        if v < 0.0 {
            return Err(SectorError::NegativeReservoir {
                reservoir: (*name).to_string(),
                value: v,
            });
        }
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn exchange() -> CarbonExchange {
        CarbonExchange {
            atm_to_bio: 0.02,
            bio_to_atm: 0.02 * 590.0 / 2300.0,
            atm_to_ocean: 0.1,
            ocean_to_atm: 0.1 * 590.0 / 900.0,
            down: [0.03, 0.01, 0.006, 0.002],
            up: [0.01, 0.01, 0.006 * 300.0 / 1300.0, 0.002 * 1300.0 / 800.0],
        }
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let k = exchange();
        let eq = k.equilibrium(40_000.0);
        assert!((eq.total() - 40_000.0).abs() < 1e-8);
        let next = carbon_step(&eq, &k, 0.0, 0.0, 1.0).unwrap();
        for (a, b) in eq.to_vec().iter().zip(next.to_vec()) {
            assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn mass_balance_of_one_step() {
        let k = exchange();
        let res = CarbonReservoirs {
            atmosphere: 850.0,
            biosphere: 2500.0,
            ocean: [1200.0, 2800.0, 2700.0, 11_800.0, 7_300.0],
        };
        let next = carbon_step(&res, &k, 11.0, 0.0, 1.0).unwrap();
        assert!((next.total() - res.total() - 11.0).abs() < 1e-9 * res.total());
        let next = carbon_step(&res, &k, 11.0, 2.5, 1.0).unwrap();
        assert!((next.total() - res.total() - 8.5).abs() < 1e-9 * res.total());
    }

    #[test]
    fn flux_matrix_columns_sum_to_zero() {
        let m = exchange().flux_matrix();
        for col in 0..7 {
            let s: f64 = (0..7).map(|row| m[row][col]).sum();
            assert!(s.abs() < 1e-15);
        }
    }

    #[test]
    fn negative_inputs_and_reservoirs() {
        let k = exchange();
        let res = k.equilibrium(1000.0);
        assert!(carbon_step(&res, &k, -1.0, 0.0, 1.0).is_err());
        let err = carbon_step(&res, &k, 0.0, 1e6, 1.0).unwrap_err();
        assert!(matches!(err, SectorError::NegativeReservoir { .. }));
        let mut bad = k.clone();
        bad.down[2] = -0.1;
        assert!(carbon_step(&res, &bad, 0.0, 0.0, 1.0).is_err());
    }
}
