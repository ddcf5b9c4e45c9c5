//! Prints selected Business As Usual outputs every ten years.

use sdgsim_core::engine::TimeGrid;
use sdgsim_core::sectors::{Registry, WorldModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let vars: Vec<String> = std::env::args().skip(1).collect();
    let vars = if vars.is_empty() {
        [
            "population.total",
            "population.tfr",
            "population.life_expectancy",
            "economy.gwp",
            "economy.gwp_per_capita",
            "energy.demand",
            "energy.renewable_share",
            "carbon.emissions_total",
            "carbon.co2_ppm",
            "climate.temperature",
            "land.cropland",
            "land.pasture",
            "land.forest",
            "biodiversity.msa",
            "water.scarcity",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    } else {
        vars
    };
    let world = WorldModel::new(&Registry::builtin().nominal_set())?;
    let traj = world.model().run(&TimeGrid::default())?;
    print!("{:>32}", "year");
    for year in (2015..=2100).step_by(10).chain([2100]) {
        print!("{year:>11}");
    }
    println!();
    for v in &vars {
        let series = traj.series(v).ok_or_else(|| format!("no variable {v}"))?;
        print!("{v:>32}");
        for year in (2015..=2100).step_by(10).chain([2100]) {
            print!("{:>11.4}", series[(year - 2015) as usize]);
        }
        println!();
    }
    Ok(())
}
