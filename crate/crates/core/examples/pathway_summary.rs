use std::path::Path;

use sdgsim_core::engine::TimeGrid;
use sdgsim_core::scenarios::{apply_pathway, load_pathway};
use sdgsim_core::sectors::{Registry, WorldModel};

fn main() {
    let reg = Registry::builtin();
    let base = reg.nominal_set();
    let world = WorldModel::new(&base).unwrap();
    let extra: Vec<String> = std::env::args().skip(1).collect();
    let default = [
        "population.total",
        "economy.gwp_per_capita",
        "energy.demand",
        "energy.renewable_share",
        "carbon.emissions_total",
        "carbon.co2_ppm",
        "climate.temperature",
        "land.cropland_pasture",
        "food.animal_kcal",
        "education.no_education_share",
        "biodiversity.msa",
    ];
    let vars: Vec<&str> = if extra.is_empty() {
        default.to_vec()
    } else {
        extra.iter().map(|s| s.as_str()).collect()
    };
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../pathways");
    for stem in [
        "bau",
        "green_recovery",
        "fragmented_world",
        "inequality",
        "fossil_fueled",
    ] {
        let spec = load_pathway(&dir.join(format!("{stem}.toml")), &reg).unwrap();
        let params = apply_pathway(&base, &spec);
        let traj = world
            .instantiate(&params)
            .unwrap()
            .run(&TimeGrid::default())
            .unwrap();
        println!("{}", spec.id());
        for v in &vars {
            let s: Vec<String> = [2015.0, 2030.0, 2050.0, 2100.0]
                .iter()
                .map(|t| format!(" {:>12.5e}", traj.value(v, *t).unwrap()))
                .collect();
            println!("  {v:<30}{}", s.join(""));
        }
    }
}
