//! Assembly of the coupled world model from a parameter set.

use std::collections::{BTreeMap, BTreeSet};

use super::population::COHORTS;
use super::{ParameterSet, SectorError};
use crate::engine::{compile_model, lookup_eval, parse, ExecutableModel, ModelDefinition};

/// Variables the indicator catalog and the systems-change entry points read.
pub const REQUIRED_OUTPUTS: &[&str] = &[
    "population.total",
    "population.life_expectancy",
    "education.access",
    "education.secondary_share",
    "education.no_education_share",
    "economy.gwp",
    "economy.gwp_per_capita",
    "economy.hdi",
    "energy.demand",
    "energy.coal.production",
    "energy.oil.production",
    "energy.gas.production",
    "energy.solar.production",
    "energy.wind.production",
    "energy.biomass.production",
    "energy.production_fossil",
    "energy.renewable_share",
    "food.supply_crop_meat",
    "food.supply_pasture_meat",
    "food.supply_dairy_eggs",
    "food.supply_plant",
    "food.animal_kcal",
    "land.cropland",
    "land.pasture",
    "land.forest",
    "land.cropland_pasture",
    "land.crop_yield",
    "land.nitrogen",
    "land.phosphorus",
    "carbon.emissions_total",
    "carbon.co2_ppm",
    "climate.forcing",
    "climate.temperature",
    "biodiversity.msa",
    "water.scarcity",
];

pub const FOSSIL: [&str; 3] = ["coal", "oil", "gas"];
pub const RENEWABLE: [&str; 3] = ["solar", "wind", "biomass"];
pub const LAND_STOCKS: [&str; 6] = [
    "land.arable",
    "land.permanent_crops",
    "land.pasture",
    "land.forest",
    "land.urban",
    "land.other",
];
pub const CARBON_STOCKS: [&str; 7] = [
    "carbon.atmosphere",
    "carbon.biosphere",
    "carbon.ocean.mixed",
    "carbon.ocean.deep1",
    "carbon.ocean.deep2",
    "carbon.ocean.deep3",
    "carbon.ocean.deep4",
];

const SEXES: [(&str, &str); 2] = [
    ("f", "population.female_share0"),
    ("m", "(1 - population.female_share0)"),
];
const FIRST_ADULT: usize = 3;
const FIRST_RETIRED: usize = 13;
const FERTILE: std::ops::Range<usize> = 3..10;

fn cohort(sex: &str, c: usize) -> String {
    format!("population.{sex}.c{c:02}")
}

fn sum_of(names: impl IntoIterator<Item = String>) -> String {
    names.into_iter().collect::<Vec<_>>().join(" + ")
}

/// Builds the world model definition. Every scalar of `params` becomes a
/// model parameter, so a compiled model can be re-parameterized without
/// recompiling as long as the tables stay the same.
pub fn assemble_world_model(params: &ParameterSet) -> Result<ModelDefinition, SectorError> {
    let age_table = params
        .table("population.initial_age_table")
        .ok_or_else(|| SectorError::MissingParameter("population.initial_age_table".into()))?;
    let weights: Vec<f64> = (0..COHORTS)
        .map(|c| lookup_eval(age_table, c as f64))
        .collect();
    let total_weight: f64 = weights.iter().sum();
    if !(total_weight > 0.0) {
        return Err(SectorError::Domain("initial age table sums to zero".into()));
    }
    let share: Vec<f64> = weights.iter().map(|w| w / total_weight).collect();
    let adult_share: f64 = share[FIRST_ADULT..].iter().sum();
    let working_share: f64 = share[FIRST_ADULT..FIRST_RETIRED].iter().sum();

    let mut d = ModelDefinition::default();
    d.aux(
        "scenario.ramp",
        "min(1, max(0, (time - 2015) / scenario.phase_in))",
    );
    population(&mut d, &share);
    education(&mut d, adult_share);
    economy(&mut d, working_share);
    energy(&mut d);
    food(&mut d);
    land(&mut d);
    water(&mut d);
    carbon(&mut d);
    climate(&mut d);
    biodiversity(&mut d);

    let variables: BTreeSet<&str> = d
        .stocks
        .iter()
        .map(|s| s.name.as_str())
        .chain(d.auxiliaries.iter().map(|a| a.name.as_str()))
        .chain(d.flows.iter().map(|f| f.name.as_str()))
        .collect();
    for out in REQUIRED_OUTPUTS {
        if !variables.contains(out) {
            return Err(SectorError::MissingOutput((*out).to_string()));
        }
    }

    let mut sources: Vec<&str> = d.auxiliaries.iter().map(|a| a.equation.as_str()).collect();
    sources.extend(d.flows.iter().map(|f| f.rate.as_str()));
    sources.extend(d.stocks.iter().filter_map(|s| match &s.initial {
        crate::engine::Initial::Expression(e) => Some(e.as_str()),
        crate::engine::Initial::Value(_) => None,
    }));
    let mut external: BTreeSet<String> = BTreeSet::new();
    for src in sources {
        let expr = parse(src).map_err(|e| SectorError::Domain(format!("`{src}`: {e}")))?;
        for name in expr.references() {
            if !variables.contains(name) && name != "time" && name != "dt" {
                external.insert(name.to_string());
            }
        }
    }
    if let Some(missing) = external.iter().find(|n| !params.contains(n.as_str())) {
        return Err(SectorError::MissingParameter(missing.clone()));
    }
    for (name, value) in &params.scalars {
        d.param(name, *value);
    }
    for (name, points) in &params.tables {
        if external.contains(name.as_str()) {
            d.table(name, points.clone());
        }
    }
    Ok(d)
}

fn population(d: &mut ModelDefinition, share: &[f64]) {
    for (sex, sex_share) in SEXES {
        for (c, s) in share.iter().enumerate() {
            d.stock(
                &cohort(sex, c),
                format!("population.initial * {sex_share} * {s:e}"),
            );
        }
        let factor = if sex == "f" {
            "mortality.female_factor"
        } else {
            "mortality.male_factor"
        };
        for c in 0..COHORTS {
            let name = cohort(sex, c);
            d.flow(
                &format!("population.{sex}.deaths.c{c:02}"),
                Some(&name),
                None,
                format!("{name} * lookup(mortality.age_table, {c}) * population.mortality_multiplier * {factor}"),
            );
            if c + 1 < COHORTS {
                d.flow(
                    &format!("population.{sex}.aging.c{c:02}"),
                    Some(&name),
                    Some(&cohort(sex, c + 1)),
                    format!("{name} / 5"),
                );
            }
        }
        let birth_share = if sex == "f" {
            "population.female_birth_fraction"
        } else {
            "(1 - population.female_birth_fraction)"
        };
        d.flow(
            &format!("population.{sex}.births"),
            None,
            Some(&cohort(sex, 0)),
            format!("population.births * {birth_share}"),
        );
        d.aux(
            &format!("population.{sex}.total"),
            sum_of((0..COHORTS).map(|c| cohort(sex, c))),
        );
        d.aux(
            &format!("population.{sex}.adults"),
            sum_of((FIRST_ADULT..COHORTS).map(|c| cohort(sex, c))),
        );
        d.aux(
            &format!("population.{sex}.adult_deaths"),
            sum_of((FIRST_ADULT..COHORTS).map(|c| format!("population.{sex}.deaths.c{c:02}"))),
        );
        d.aux(
            &format!("population.{sex}.deaths"),
            sum_of((0..COHORTS).map(|c| format!("population.{sex}.deaths.c{c:02}"))),
        );
    }
    d.aux(
        "population.total",
        "population.f.total + population.m.total",
    );
    d.aux(
        "population.deaths",
        "population.f.deaths + population.m.deaths",
    );
    d.aux(
        "population.working_age",
        sum_of((FIRST_ADULT..FIRST_RETIRED).flat_map(|c| [cohort("f", c), cohort("m", c)])),
    );
    d.aux(
        "population.fertile_women",
        sum_of(FERTILE.map(|c| cohort("f", c))),
    );
    d.aux(
        "population.tfr",
        "(1 + (fertility.scale - 1) * scenario.ramp) * lookup(fertility.table, economy.gwp_per_capita) \
         * lookup(fertility.education_table, education.f.secondary_share)",
    );
    d.aux(
        "population.births",
        format!(
            "population.tfr / {} * population.fertile_women",
            5 * FERTILE.len()
        ),
    );
    d.aux(
        "population.mortality_multiplier",
        "(1 + (mortality.scale - 1) * scenario.ramp) * lookup(mortality.income_table, economy.gwp_per_capita) \
         * lookup(mortality.food_table, food.sufficiency) \
         * lookup(mortality.climate_table, climate.temperature)",
    );
    // period life table on the sex-averaged rates
    for c in 0..COHORTS {
        d.aux(
            &format!("population.rate.c{c:02}"),
            format!(
                "lookup(mortality.age_table, {c}) * population.mortality_multiplier \
                 * (mortality.female_factor + mortality.male_factor) / 2"
            ),
        );
    }
    d.aux("population.survival.c00", "1");
    for c in 1..COHORTS {
        d.aux(
            &format!("population.survival.c{c:02}"),
            format!(
                "population.survival.c{:02} * exp(-5 * population.rate.c{:02})",
                c - 1,
                c - 1
            ),
        );
    }
    let years = sum_of((0..COHORTS - 1).map(|c| {
        format!(
            "2.5 * (population.survival.c{c:02} + population.survival.c{:02})",
            c + 1
        )
    }));
    d.aux(
        "population.life_expectancy",
        format!(
            "{years} + population.survival.c{last:02} / population.rate.c{last:02}",
            last = COHORTS - 1
        ),
    );
}

fn education(d: &mut ModelDefinition, adult_share: f64) {
    let rate = |table: &str| {
        format!("min(1, education.access_scale * lookup(education.{table}, economy.gwp_per_capita)) * education.persistence")
    };
    d.aux("education.primary_completion", rate("primary_table"));
    d.aux("education.secondary_transition", rate("secondary_table"));
    d.aux("education.tertiary_transition", rate("tertiary_table"));
    d.aux(
        "education.access",
        "education.primary_completion * education.secondary_transition",
    );
    for (sex, sex_share) in SEXES {
        let gap = if sex == "f" {
            " * education.female_parity"
        } else {
            ""
        };
        let entrants = format!("population.{sex}.aging.c{:02}", FIRST_ADULT - 1);
        let s = format!("(education.secondary_transition{gap})");
        let t = format!("(education.tertiary_transition{gap})");
        let inflow = [
            format!("{entrants} * education.primary_completion * (1 - {s})"),
            format!("{entrants} * education.primary_completion * {s} * (1 - {t})"),
            format!("{entrants} * education.primary_completion * {s} * {t}"),
        ];
        d.aux(
            &format!("education.{sex}.adult_death_rate"),
            format!("population.{sex}.adult_deaths / population.{sex}.adults"),
        );
        for (level, inflow) in ["primary", "secondary", "tertiary"].into_iter().zip(inflow) {
            let stock = format!("education.{sex}.{level}");
            d.stock(
                &stock,
                format!(
                    "population.initial * {sex_share} * {adult_share:e} * education.{level}_share0"
                ),
            );
            d.flow(&format!("{stock}.graduation"), None, Some(&stock), inflow);
            d.flow(
                &format!("{stock}.deaths"),
                Some(&stock),
                None,
                format!("{stock} * education.{sex}.adult_death_rate"),
            );
        }
        d.aux(
            &format!("education.{sex}.secondary_share"),
            format!(
                "(education.{sex}.secondary + education.{sex}.tertiary) / population.{sex}.adults"
            ),
        );
    }
    d.aux(
        "population.adults",
        "population.f.adults + population.m.adults",
    );
    for level in ["primary", "secondary", "tertiary"] {
        d.aux(
            &format!("education.{level}_only_share"),
            format!("(education.f.{level} + education.m.{level}) / population.adults"),
        );
    }
    d.aux(
        "education.secondary_share",
        "education.secondary_only_share + education.tertiary_only_share",
    );
    d.aux("education.tertiary_share", "education.tertiary_only_share");
    d.aux(
        "education.no_education_share",
        "1 - education.primary_only_share - education.secondary_share",
    );
    d.aux(
        "education.mean_years",
        "6 * education.primary_only_share + 12 * education.secondary_only_share \
         + 16 * education.tertiary_only_share",
    );
}

fn economy(d: &mut ModelDefinition, working_share: f64) {
    let labor0 = format!(
        "(economy.participation * population.initial * {working_share:e} \
         * exp(economy.schooling_return * (6 * education.primary_share0 \
         + 12 * education.secondary_share0 + 16 * education.tertiary_share0 - 8)) / 1e9)"
    );
    let damage0 = "(lookup(economy.damage_table, climate.surface0) \
                   * lookup(economy.ecosystem_table, biodiversity.msa0))";
    d.stock(
        "economy.tfp",
        format!(
            "economy.gwp0 / (economy.capital0 ^ economy.alpha * {labor0} ^ (1 - economy.alpha) * {damage0})"
        ),
    );
    d.stock(
        "economy.capital_energy",
        "economy.capital0 * economy.energy_capital_share",
    );
    d.stock(
        "economy.capital_other",
        "economy.capital0 * (1 - economy.energy_capital_share)",
    );
    d.aux(
        "economy.human_capital",
        "exp(economy.schooling_return * (education.mean_years - 8))",
    );
    d.aux(
        "economy.labor",
        "economy.participation * population.working_age * economy.human_capital / 1e9",
    );
    d.aux(
        "economy.capital",
        "economy.capital_energy + economy.capital_other",
    );
    d.aux(
        "economy.damage",
        "lookup(economy.damage_table, climate.temperature) \
         * lookup(economy.ecosystem_table, biodiversity.msa)",
    );
    d.aux(
        "economy.gwp",
        "economy.tfp * economy.capital ^ economy.alpha * economy.labor ^ (1 - economy.alpha) * economy.damage",
    );
    d.aux(
        "economy.gwp_per_capita",
        "economy.gwp * 1e12 / population.total",
    );
    d.aux("economy.investment", "economy.savings_rate * economy.gwp");
    d.flow(
        "economy.capital_energy.investment",
        None,
        Some("economy.capital_energy"),
        "economy.investment * economy.energy_capital_share",
    );
    d.flow(
        "economy.capital_other.investment",
        None,
        Some("economy.capital_other"),
        "economy.investment * (1 - economy.energy_capital_share)",
    );
    d.flow(
        "economy.capital_energy.depreciation",
        Some("economy.capital_energy"),
        None,
        "economy.capital_energy * economy.depreciation",
    );
    d.flow(
        "economy.capital_other.depreciation",
        Some("economy.capital_other"),
        None,
        "economy.capital_other * economy.depreciation",
    );
    d.flow(
        "economy.tfp.growth",
        None,
        Some("economy.tfp"),
        "economy.tfp * economy.tfp_growth * exp(-economy.tfp_convergence * (time - 2015))",
    );
    d.aux(
        "economy.hdi",
        "(max(0.01, (population.life_expectancy - 20) / 65) \
         * max(0.01, min(1, education.mean_years / 15)) \
         * max(0.01, min(1, (ln(economy.gwp_per_capita) - ln(100)) / (ln(75000) - ln(100))))) ^ (1 / 3)",
    );
}

fn energy(d: &mut ModelDefinition) {
    d.aux(
        "energy.efficiency",
        "exp(-energy.efficiency_rate * (time - 2015))",
    );
    d.aux(
        "energy.demand",
        "(1 + (energy.demand_scale - 1) * scenario.ramp) * population.total * lookup(energy.per_capita_table, economy.gwp_per_capita) \
         * energy.efficiency / 1e9",
    );
    d.aux(
        "energy.demand_per_capita",
        "energy.demand * 1e9 / population.total",
    );
    d.aux(
        "energy.carbon_price",
        "energy.carbon_price_scale * lookup(energy.carbon_price_table, time)",
    );
    d.aux(
        "energy.ccs_fraction",
        "min(0.9, energy.ccs_scale * lookup(energy.ccs_table, time))",
    );
    // energy capital per unit output relative to 2015 limits fossil supply
    // when underinvested
    d.aux(
        "energy.investment_effect",
        "lookup(energy.investment_table, economy.capital_energy / economy.gwp \
         / (economy.capital0 * economy.energy_capital_share / economy.gwp0))",
    );
    for src in FOSSIL {
        let p = format!("energy.{src}");
        d.stock(&format!("{p}.resource"), format!("{p}.resource0"));
        d.aux(
            &format!("{p}.remaining"),
            format!("max(0, {p}.resource / {p}.resource0)"),
        );
        d.aux(
            &format!("{p}.cost"),
            format!(
                "{p}.base_cost * lookup(energy.depletion_table, {p}.remaining) \
                 + energy.carbon_price * {p}.intensity * (1 - energy.ccs_fraction)"
            ),
        );
        d.aux(
            &format!("{p}.availability"),
            format!(
                "min(1, {p}.resource / (energy.reserve_years * {p}.capacity)) * energy.investment_effect"
            ),
        );
        d.flow(
            &format!("{p}.extraction"),
            Some(&format!("{p}.resource")),
            None,
            format!("{p}.production"),
        );
        d.flow(
            &format!("{p}.discovery"),
            None,
            Some(&format!("{p}.resource")),
            format!(
                "{p}.production * energy.discovery_scale * lookup(energy.discovery_table, time)"
            ),
        );
    }
    for src in RENEWABLE {
        let p = format!("energy.{src}");
        d.stock(&format!("{p}.cumulative"), format!("{p}.cumulative0"));
        d.aux(
            &format!("{p}.cost"),
            format!(
                "max({p}.floor_cost, {p}.base_cost * ({p}.cumulative / {p}.cumulative0) \
                 ^ (ln(1 - {p}.learning_rate) / ln(2)))"
            ),
        );
        d.aux(&format!("{p}.availability"), "1");
        d.flow(
            &format!("{p}.learning"),
            None,
            Some(&format!("{p}.cumulative")),
            format!("{p}.production"),
        );
    }
    let all: Vec<&str> = FOSSIL.iter().chain(RENEWABLE.iter()).copied().collect();
    d.aux(
        "energy.min_cost",
        format!(
            "min({})",
            all.iter()
                .map(|s| format!("energy.{s}.cost"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );
    for src in &all {
        d.aux(
            &format!("energy.{src}.weight"),
            format!("exp(-energy.cost_sensitivity * (energy.{src}.cost - energy.min_cost))"),
        );
    }
    d.aux(
        "energy.weight_total",
        sum_of(all.iter().map(|s| format!("energy.{s}.weight"))),
    );
    d.aux(
        "energy.capacity_total",
        sum_of(all.iter().map(|s| format!("energy.{s}.capacity"))),
    );
    d.aux(
        "energy.available_capacity",
        sum_of(
            all.iter()
                .map(|s| format!("energy.{s}.capacity * energy.{s}.availability")),
        ),
    );
    d.aux(
        "energy.retirement_total",
        sum_of(all.iter().map(|s| format!("energy.{s}.retirement"))),
    );
    d.aux(
        "energy.construction",
        "max(0, (energy.demand - energy.capacity_total) / energy.adjustment_time + energy.retirement_total)",
    );
    for src in &all {
        let p = format!("energy.{src}");
        let lifetime = if FOSSIL.contains(src) {
            "energy.fossil_lifetime"
        } else {
            "energy.renewable_lifetime"
        };
        d.stock(&format!("{p}.capacity"), format!("{p}.production0"));
        d.aux(
            &format!("{p}.market_share"),
            format!("{p}.weight / energy.weight_total"),
        );
        d.flow(
            &format!("{p}.retirement"),
            Some(&format!("{p}.capacity")),
            None,
            format!("{p}.capacity / {lifetime}"),
        );
        d.flow(
            &format!("{p}.construction"),
            None,
            Some(&format!("{p}.capacity")),
            format!("energy.construction * {p}.market_share"),
        );
        d.aux(
            &format!("{p}.production"),
            format!("energy.demand * {p}.capacity * {p}.availability / energy.available_capacity"),
        );
    }
    d.aux(
        "energy.production_fossil",
        sum_of(FOSSIL.iter().map(|s| format!("energy.{s}.production"))),
    );
    d.aux(
        "energy.production_renewable",
        sum_of(RENEWABLE.iter().map(|s| format!("energy.{s}.production"))),
    );
    d.aux(
        "energy.renewable_share",
        "energy.production_renewable / energy.demand",
    );
    d.aux(
        "energy.emissions_gross",
        sum_of(
            FOSSIL
                .iter()
                .map(|s| format!("energy.{s}.production * energy.{s}.intensity")),
        ),
    );
    d.aux("energy.ccs", "energy.ccs_fraction * energy.emissions_gross");
    d.aux("energy.intensity", "energy.demand / economy.gwp");
}

fn food(d: &mut ModelDefinition) {
    d.aux(
        "food.waste",
        "food.waste_fraction0 + (food.waste_fraction - food.waste_fraction0) * scenario.ramp",
    );
    d.stock("food.adopters", "food.adopters0");
    d.aux(
        "food.intake",
        "(1 + (food.intake_scale - 1) * scenario.ramp) * lookup(food.intake_table, economy.gwp_per_capita)",
    );
    d.aux(
        "food.animal_share",
        "(1 + (food.animal_scale - 1) * scenario.ramp) * ((1 - food.adopters) * lookup(food.animal_share_table, economy.gwp_per_capita) \
         + food.adopters * food.sustainable_animal_share)",
    );
    d.aux("food.demand_animal", "food.intake * food.animal_share");
    d.aux("food.demand_plant", "food.intake * (1 - food.animal_share)");
    d.aux(
        "food.demand_crop_meat",
        "food.demand_animal * food.crop_meat_fraction",
    );
    d.aux(
        "food.demand_pasture_meat",
        "food.demand_animal * food.pasture_meat_fraction",
    );
    d.aux(
        "food.demand_dairy_eggs",
        "food.demand_animal * (1 - food.crop_meat_fraction - food.pasture_meat_fraction)",
    );
    // calorie flows needed from land, Pkcal/yr, before waste
    d.aux(
        "food.crop_requirement",
        "population.total * 365 / (1 - food.waste) * (food.demand_plant \
         + food.feed_ratio * (food.demand_crop_meat + food.dairy_feed_share * food.demand_dairy_eggs)) / 1e15",
    );
    d.aux(
        "food.pasture_requirement",
        "population.total * 365 / (1 - food.waste) * (food.demand_pasture_meat \
         + (1 - food.dairy_feed_share) * food.demand_dairy_eggs) / 1e15",
    );
    d.aux(
        "food.crop_sufficiency",
        "land.cropland * land.crop_kcal_yield * 1e9 / 1e15 / food.crop_requirement",
    );
    d.aux(
        "food.pasture_sufficiency",
        "land.pasture * land.pasture_kcal_yield * 1e9 / 1e15 / food.pasture_requirement",
    );
    d.aux(
        "food.sufficiency",
        "min(food.crop_sufficiency, food.pasture_sufficiency)",
    );
    let supply = |demand: &str, suff: &str| format!("{demand} / (1 - food.waste) * min(1, {suff})");
    d.aux(
        "food.supply_plant",
        supply("food.demand_plant", "food.crop_sufficiency"),
    );
    d.aux(
        "food.supply_crop_meat",
        supply("food.demand_crop_meat", "food.crop_sufficiency"),
    );
    d.aux(
        "food.supply_pasture_meat",
        supply("food.demand_pasture_meat", "food.pasture_sufficiency"),
    );
    d.aux(
        "food.supply_dairy_eggs",
        supply("food.demand_dairy_eggs", "food.sufficiency"),
    );
    d.aux(
        "food.supply_total",
        "food.supply_plant + food.supply_crop_meat + food.supply_pasture_meat + food.supply_dairy_eggs",
    );
    d.aux(
        "food.animal_kcal",
        "(food.supply_crop_meat + food.supply_pasture_meat + food.supply_dairy_eggs) * (1 - food.waste)",
    );
    d.aux(
        "food.contact",
        "food.contact_rate * max(0, 1 + food.education_effect * (education.tertiary_share - 0.15))",
    );
    d.aux(
        "food.risk",
        "food.risk_sensitivity * max(0, climate.temperature - food.risk_threshold)",
    );
    d.flow(
        "food.adoption",
        None,
        Some("food.adopters"),
        "(1 - food.adopters) * min(1 / dt, food.contact * food.adopters + food.risk)",
    );
}

fn land(d: &mut ModelDefinition) {
    for stock in &LAND_STOCKS[..5] {
        d.stock(stock, format!("{stock}0"));
    }
    d.stock(
        "land.other",
        "land.total - land.arable0 - land.permanent_crops0 - land.pasture0 - land.forest0 - land.urban0",
    );
    d.aux("land.cropland", "land.arable + land.permanent_crops");
    d.aux("land.cropland_pasture", "land.cropland + land.pasture");
    d.aux(
        "land.area",
        sum_of(LAND_STOCKS.iter().map(|s| s.to_string())),
    );

    d.aux(
        "land.nitrogen_intensity",
        "(1 + (land.fertilizer_scale - 1) * scenario.ramp) * lookup(land.nitrogen_table, economy.gwp_per_capita)",
    );
    d.aux(
        "land.crop_yield",
        "land.crop_yield0 * exp(land.yield_growth * (time - 2015)) \
         * lookup(land.management_table, economy.gwp_per_capita) \
         * lookup(land.fertilizer_yield_table, land.nitrogen_intensity) \
         * lookup(land.water_yield_table, water.scarcity) \
         * lookup(land.climate_yield_table, climate.temperature) \
         * (1 + land.co2_fertilization * ln(carbon.co2_ppm / 400))",
    );
    d.aux(
        "land.crop_kcal_yield",
        "land.crop_yield * land.kcal_per_tonne",
    );
    d.aux(
        "land.pasture_kcal_yield",
        "land.pasture_yield0 * exp(land.livestock_yield_growth * (time - 2015)) \
         * lookup(land.climate_yield_table, climate.temperature)",
    );
    d.aux(
        "land.desired_cropland",
        "food.crop_requirement * 1e15 / land.crop_kcal_yield / 1e9",
    );
    d.aux(
        "land.desired_pasture",
        "food.pasture_requirement * 1e15 / land.pasture_kcal_yield / 1e9",
    );
    d.aux(
        "land.desired_arable",
        "land.desired_cropland * land.arable_fraction",
    );
    d.aux(
        "land.desired_permanent_crops",
        "land.desired_cropland * (1 - land.arable_fraction)",
    );
    for class in ["arable", "permanent_crops", "pasture"] {
        let stock = format!("land.{class}");
        d.aux(
            &format!("{stock}.expansion"),
            format!("max(0, land.desired_{class} - {stock}) / land.adjustment_time"),
        );
        d.flow(
            &format!("{stock}.from_forest"),
            Some("land.forest"),
            Some(&stock),
            format!("min({stock}.expansion * land.forest_conversion_share, land.forest * land.max_conversion)"),
        );
        d.flow(
            &format!("{stock}.from_other"),
            Some("land.other"),
            Some(&stock),
            format!("min({stock}.expansion * (1 - land.forest_conversion_share), land.other * land.max_conversion)"),
        );
        d.flow(
            &format!("{stock}.abandonment"),
            Some(&stock),
            Some("land.other"),
            format!("max(0, {stock} - land.desired_{class}) / land.adjustment_time"),
        );
    }
    d.flow(
        "land.forest.harvest",
        Some("land.forest"),
        Some("land.other"),
        "min(energy.biomass.production * land.biomass_forest_area + land.forest * land.degradation_rate, \
         land.forest * land.max_conversion)",
    );
    d.flow(
        "land.forest.regrowth",
        Some("land.other"),
        Some("land.forest"),
        "land.other * land.regrowth_rate * lookup(land.msa_fertility_table, biodiversity.msa)",
    );
    d.flow(
        "land.urban.expansion",
        Some("land.other"),
        Some("land.urban"),
        "min(max(0, land.urban_per_capita * population.total / 1e9 - land.urban) / land.adjustment_time, \
         land.other * land.max_conversion)",
    );
    d.aux(
        "land.deforestation",
        "land.arable.from_forest + land.permanent_crops.from_forest + land.pasture.from_forest + land.forest.harvest",
    );
    d.aux(
        "land.emissions",
        "land.deforestation * land.forest_carbon_density + land.agri_emission_factor * land.cropland_pasture",
    );
    d.aux(
        "land.manure_nitrogen",
        "land.manure_factor * population.total * 365 * food.demand_animal / 1e15",
    );
    d.aux(
        "land.nitrogen",
        "land.nitrogen_intensity * land.cropland + land.manure_nitrogen",
    );
    d.aux(
        "land.phosphorus",
        "land.phosphorus_ratio * land.nitrogen_intensity * land.cropland + land.manure_phosphorus_ratio * land.manure_nitrogen",
    );
}

fn water(d: &mut ModelDefinition) {
    d.aux(
        "water.efficiency",
        "exp(-water.efficiency_rate * (time - 2015))",
    );
    d.aux(
        "water.agriculture",
        "water.irrigation_intensity * land.cropland * water.efficiency",
    );
    d.aux(
        "water.industry",
        "water.industry_intensity * economy.gwp * water.efficiency",
    );
    d.aux(
        "water.domestic",
        "water.domestic_per_capita * population.total * lookup(water.domestic_table, economy.gwp_per_capita) / 1e9",
    );
    d.aux(
        "water.withdrawal",
        "water.agriculture + water.industry + water.domestic",
    );
    d.aux(
        "water.drought",
        "water.drought_scale * lookup(water.drought_table, climate.temperature)",
    );
    d.aux(
        "water.supply",
        "water.resources * (1 - water.drought) + water.recovery_fraction * (water.industry + water.domestic)",
    );
    d.aux("water.scarcity", "water.withdrawal / water.supply");
}

fn carbon(d: &mut ModelDefinition) {
    for stock in CARBON_STOCKS {
        d.stock(stock, format!("{stock}0"));
    }
    d.flow(
        "carbon.emissions.energy",
        None,
        Some("carbon.atmosphere"),
        "energy.emissions_gross",
    );
    d.flow(
        "carbon.emissions.land",
        None,
        Some("carbon.atmosphere"),
        "land.emissions",
    );
    d.flow(
        "carbon.capture",
        Some("carbon.atmosphere"),
        None,
        "energy.ccs",
    );
    d.flow(
        "carbon.uptake.biosphere",
        Some("carbon.atmosphere"),
        Some("carbon.biosphere"),
        "carbon.k_atm_bio * carbon.atmosphere",
    );
    d.flow(
        "carbon.release.biosphere",
        Some("carbon.biosphere"),
        Some("carbon.atmosphere"),
        "carbon.k_bio_atm * carbon.biosphere",
    );
    d.flow(
        "carbon.uptake.ocean",
        Some("carbon.atmosphere"),
        Some("carbon.ocean.mixed"),
        "carbon.k_atm_ocean * carbon.atmosphere",
    );
    d.flow(
        "carbon.release.ocean",
        Some("carbon.ocean.mixed"),
        Some("carbon.atmosphere"),
        "carbon.k_ocean_atm * carbon.ocean.mixed",
    );
    for i in 0..4 {
        let upper = CARBON_STOCKS[2 + i];
        let lower = CARBON_STOCKS[3 + i];
        d.flow(
            &format!("carbon.sinking{}", i + 1),
            Some(upper),
            Some(lower),
            format!("carbon.k_down{} * {upper}", i + 1),
        );
        d.flow(
            &format!("carbon.upwelling{}", i + 1),
            Some(lower),
            Some(upper),
            format!("carbon.k_up{} * {lower}", i + 1),
        );
    }
    d.aux(
        "carbon.emissions_total",
        "energy.emissions_gross + land.emissions - energy.ccs",
    );
    d.aux("carbon.intensity", "carbon.emissions_total / economy.gwp");
    d.aux("carbon.co2_ppm", "carbon.atmosphere / carbon.gtc_per_ppm");
    d.aux(
        "carbon.total",
        sum_of(CARBON_STOCKS.iter().map(|s| s.to_string())),
    );
}

fn climate(d: &mut ModelDefinition) {
    d.stock("climate.surface", "climate.surface0");
    for i in 1..=4 {
        d.stock(&format!("climate.deep{i}"), format!("climate.deep{i}_0"));
    }
    d.aux(
        "climate.forcing_co2",
        "climate.f2x * ln(carbon.co2_ppm / climate.co2_preindustrial) / ln(2)",
    );
    d.aux(
        "climate.forcing_other",
        "lookup(climate.nonco2_forcing, time)",
    );
    d.aux(
        "climate.forcing",
        "climate.forcing_co2 + climate.forcing_other",
    );
    d.aux("climate.temperature", "climate.surface");
    let layer = |i: usize| {
        if i == 0 {
            "climate.surface".to_string()
        } else {
            format!("climate.deep{i}")
        }
    };
    for i in 0..4 {
        d.aux(
            &format!("climate.heat{}", i + 1),
            format!(
                "climate.exchange{} * ({} - {})",
                i + 1,
                layer(i),
                layer(i + 1)
            ),
        );
    }
    d.flow(
        "climate.surface.warming",
        None,
        Some("climate.surface"),
        "(climate.forcing - climate.surface / climate.lambda - climate.heat1) / climate.surface_capacity",
    );
    for i in 1..=4 {
        let below = if i < 4 {
            format!(" - climate.heat{}", i + 1)
        } else {
            String::new()
        };
        d.flow(
            &format!("climate.deep{i}.warming"),
            None,
            Some(&format!("climate.deep{i}")),
            format!("(climate.heat{i}{below}) / climate.deep_capacity{i}"),
        );
    }
}

fn biodiversity(d: &mut ModelDefinition) {
    d.stock("biodiversity.msa", "biodiversity.msa0");
    d.aux(
        "biodiversity.capacity",
        "max(0, min(1, biodiversity.intact_capacity \
         - biodiversity.agri_impact * land.cropland_pasture / land.total \
         - biodiversity.urban_impact * land.urban / land.total \
         - biodiversity.climate_impact * max(0, climate.temperature)))",
    );
    d.flow(
        "biodiversity.change",
        None,
        Some("biodiversity.msa"),
        "if(biodiversity.capacity >= biodiversity.msa, biodiversity.regeneration_rate, biodiversity.extinction_rate) \
         * (biodiversity.capacity - biodiversity.msa)",
    );
}

/// Compiles the world model once and re-parameterizes it per run.
#[derive(Debug, Clone)]
pub struct WorldModel {
    model: ExecutableModel,
    tables: BTreeMap<String, Vec<[f64; 2]>>,
}

impl WorldModel {
    pub fn new(params: &ParameterSet) -> Result<Self, SectorError> {
        let def = assemble_world_model(params)?;
        Ok(Self {
            model: compile_model(&def)?,
            tables: params.tables.clone(),
        })
    }

    pub fn model(&self) -> &ExecutableModel {
        &self.model
    }

    /// A runnable model for `params`. Scalars are swapped into the shared
    /// compiled plan; different tables trigger a fresh compile.
    pub fn instantiate(&self, params: &ParameterSet) -> Result<ExecutableModel, SectorError> {
        if params.tables != self.tables {
            return Ok(Self::new(params)?.model);
        }
        let mut model = self.model.clone();
        for (name, value) in &params.scalars {
            model.set_parameter(name, *value)?;
        }
        if model.parameter_names().len() != params.scalars.len() {
            // parameters of the compiled set that `params` does not define
            let missing = model
                .parameter_names()
                .iter()
                .find(|n| !params.scalars.contains_key(*n))
                .cloned()
                .unwrap_or_default();
            return Err(SectorError::MissingParameter(missing));
        }
        Ok(model)
    }
}
