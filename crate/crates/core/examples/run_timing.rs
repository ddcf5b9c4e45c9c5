//! Times repeated Business As Usual runs of the world model.

use std::time::Instant;

use sdgsim_core::engine::TimeGrid;
use sdgsim_core::sectors::{Registry, WorldModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let runs: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(200);
    let params = Registry::builtin().nominal_set();
    let world = WorldModel::new(&params)?;
    let grid = TimeGrid::default();
    let m = world.model();
    println!(
        "{} variables, {} stocks, {} parameters",
        m.variable_names().len(),
        m.stock_names().len(),
        m.parameter_names().len()
    );
    let start = Instant::now();
    for _ in 0..runs {
        let model = world.instantiate(&params)?;
        std::hint::black_box(model.run(&grid)?);
    }
    let per = start.elapsed().as_secs_f64() / runs as f64;
    println!("{:.3} ms per run", per * 1e3);
    Ok(())
}
