mod output;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};
use sdgsim_core::engine::{EngineError, TimeGrid};
use sdgsim_core::ensemble::{
    lhs_sample, read_ensemble, run_ensemble, screen_then_range, write_envelope_csv,
    write_indicator_csv, EnsembleError, EnsembleRequest, EnsembleResult, ScreenConfig, BASE_YEAR,
    DEFAULT_REALIZATIONS, MILESTONES,
};
use sdgsim_core::scenarios::{
    apply_pathway, load_pathway, parse_ranges, registry_ranges, ParameterRange, ScenarioError,
};
use sdgsim_core::sdg::{
    score_ensemble, systems_change, write_delta_csv, Ambition, Catalog, SdgError, SigmaSource,
    TargetSet, ENTRY_POINT_VARIABLES,
};
use sdgsim_core::sectors::{ParameterSet, Registry, SectorError, WorldModel};

use output::{digest, RunManifest, ScreenedParameter, Staged};

#[derive(Parser)]
#[command(
    name = "sdgsim",
    version,
    about = "World-model pathways, ensembles and SDG progress scoring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one pathway at its nominal parameters and write the trajectory.
    Simulate(SimulateArgs),
    /// Screen, sample and run a pathway ensemble.
    Ensemble(EnsembleArgs),
    /// Score ensembles against SDG targets at one milestone.
    Score(ScoreArgs),
    /// Percentage deviation of an alternative ensemble from a reference.
    Delta(DeltaArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Pathway file.
    #[arg(long)]
    pathway: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Parameter registry replacing the built-in one.
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Integration step in years.
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
}

#[derive(Args)]
struct EnsembleArgs {
    /// Pathway file.
    #[arg(long)]
    pathway: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Number of realizations.
    #[arg(long, default_value_t = DEFAULT_REALIZATIONS)]
    n: usize,
    /// Seed of the screening and sampling streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads [default: available cores].
    #[arg(long, env = "SDGSIM_WORKERS")]
    workers: Option<usize>,
    /// Parameters kept after Morris screening.
    #[arg(long, default_value_t = 20)]
    screen_k: usize,
    /// Output whose 2100 value is the screening objective.
    #[arg(long, default_value = "climate.temperature")]
    screen_output: String,
    /// Morris trajectories.
    #[arg(long, default_value_t = 20)]
    screen_trajectories: usize,
    /// Sample the candidate ranges directly, without screening.
    #[arg(long)]
    no_screen: bool,
    /// File of `[[uncertainty]]` ranges replacing the pathway's own.
    #[arg(long)]
    ranges: Option<PathBuf>,
    /// Parameter registry replacing the built-in one.
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Indicator catalog whose variables are kept per realization.
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Also write SVG envelope charts of the entry-point variables.
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct ScoreArgs {
    /// Ensemble output directories.
    #[arg(long, num_args = 1.., required = true)]
    ensemble: Vec<PathBuf>,
    /// Target file [default: built-in targets].
    #[arg(long)]
    targets: Option<PathBuf>,
    /// Indicator catalog [default: built-in catalog].
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Target ambition: weak, moderate or ambitious.
    #[arg(long, default_value = "moderate")]
    ambition: Ambition,
    /// Milestone year: 2030, 2050 or 2100.
    #[arg(long, default_value_t = 2030.0)]
    milestone: f64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DeltaArgs {
    /// Reference ensemble directory.
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Alternative ensemble directory.
    #[arg(long)]
    alt: PathBuf,
    /// Comma-separated variables [default: the eight entry-point variables].
    #[arg(long, value_delimiter = ',')]
    vars: Vec<String>,
    /// Comma-separated years.
    #[arg(long, value_delimiter = ',', default_value = "2030,2050,2100")]
    years: Vec<f64>,
    /// Band width source: `alt` or `pooled`.
    #[arg(long, default_value = "alt")]
    sigma: SigmaSource,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

/// An error with its exit code: 2 for input problems, 3 for numeric
/// failures at run time.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn input(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: e.into(),
    }
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 3,
        error: e.into(),
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        input(e)
    }
}

impl From<SectorError> for Failure {
    fn from(e: SectorError) -> Self {
        match e {
            SectorError::Engine(EngineError::NonFiniteValue { .. })
            | SectorError::NegativePopulation { .. }
            | SectorError::NegativeReservoir { .. } => runtime(e),
            _ => input(e),
        }
    }
}

impl From<EnsembleError> for Failure {
    fn from(e: EnsembleError) -> Self {
        match e {
            EnsembleError::RealizationFailure { .. } | EnsembleError::ObjectiveFailure { .. } => {
                runtime(e)
            }
            _ => input(e),
        }
    }
}

impl From<SdgError> for Failure {
    fn from(e: SdgError) -> Self {
        match e {
            SdgError::ZeroReference { .. } => runtime(e),
            _ => input(e),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| input(anyhow!("cannot read {}: {e}", path.display())))
}

fn load_registry(path: Option<&Path>, manifest: &mut RunManifest) -> Result<Registry, Failure> {
    match path {
        None => {
            manifest.inputs.push(digest(
                "<builtin registry>",
                sdgsim_core::sectors::BUILTIN_REGISTRY.as_bytes(),
            ));
            Ok(Registry::builtin())
        }
        Some(p) => {
            let bytes = read(p)?;
            manifest
                .inputs
                .push(digest(&p.display().to_string(), &bytes));
            let text =
                String::from_utf8(bytes).map_err(|e| input(anyhow!("{}: {e}", p.display())))?;
            Registry::from_toml_str(&text).map_err(|e| input(anyhow!("{}: {e}", p.display())))
        }
    }
}

/// Registry, pathway and the pathway's nominal parameter set.
fn load_inputs(
    registry: Option<&Path>,
    pathway: &Path,
    manifest: &mut RunManifest,
) -> Result<(Registry, sdgsim_core::scenarios::PathwaySpec, ParameterSet), Failure> {
    let reg = load_registry(registry, manifest)?;
    let bytes = read(pathway)?;
    manifest
        .inputs
        .push(digest(&pathway.display().to_string(), &bytes));
    let spec = load_pathway(pathway, &reg)?;
    if let (Some(rel), Some(dir)) = (&spec.meta.forcing, pathway.parent()) {
        let path = dir.join(rel);
        manifest
            .inputs
            .push(digest(&path.display().to_string(), &read(&path)?));
    }
    manifest.pathway = Some(spec.id().to_string());
    let params = apply_pathway(&reg.nominal_set(), &spec);
    Ok((reg, spec, params))
}

fn load_catalog(path: Option<&Path>, manifest: &mut RunManifest) -> Result<Catalog, Failure> {
    match path {
        None => {
            manifest.inputs.push(digest(
                "<builtin catalog>",
                sdgsim_core::sdg::BUILTIN_CATALOG.as_bytes(),
            ));
            Ok(Catalog::builtin())
        }
        Some(p) => {
            manifest
                .inputs
                .push(digest(&p.display().to_string(), &read(p)?));
            Ok(sdgsim_core::sdg::load_catalog(p)?)
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("simulate");
    let (_, _, params) = load_inputs(args.registry.as_deref(), &args.pathway, &mut manifest)?;
    let grid = TimeGrid::new(2015.0, 2100.0, args.dt).map_err(input)?;
    let world = WorldModel::new(&params)?;
    let traj = world.model().run(&grid).map_err(|e| match e {
        EngineError::NonFiniteValue { .. } => runtime(e),
        other => input(other),
    })?;
    let mut csv = Vec::new();
    traj.write_csv(&mut csv, None).map_err(runtime)?;
    let mut staged = Staged::new(&args.out);
    staged.add("trajectory.csv", csv);
    staged.commit(manifest).map_err(runtime)?;
    Ok(())
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn ensemble(args: EnsembleArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("ensemble");
    let (reg, spec, params) = load_inputs(args.registry.as_deref(), &args.pathway, &mut manifest)?;
    let catalog = load_catalog(args.catalog.as_deref(), &mut manifest)?;
    let workers = args.workers.unwrap_or_else(default_workers);
    if workers == 0 || args.n == 0 {
        return Err(input(anyhow!("--n and --workers must be >= 1")));
    }
    let candidates: Vec<ParameterRange> = match &args.ranges {
        Some(p) => {
            let bytes = read(p)?;
            manifest
                .inputs
                .push(digest(&p.display().to_string(), &bytes));
            let text =
                String::from_utf8(bytes).map_err(|e| input(anyhow!("{}: {e}", p.display())))?;
            parse_ranges(&text, &reg, &p.display().to_string())?
        }
        None if spec.uncertainty.is_empty() => registry_ranges(&reg),
        None => spec.uncertainty.clone(),
    };
    let world = WorldModel::new(&params)?;
    let factory = |p: &ParameterSet| world.instantiate(p);
    let grid = TimeGrid::default();

    let mut screening_csv = None;
    let kept = if args.no_screen {
        manifest.screened_parameters = candidates
            .iter()
            .map(|r| ScreenedParameter {
                name: r.name.clone(),
                low: r.low,
                high: r.high,
                mu_star: None,
            })
            .collect();
        candidates
    } else {
        let config = ScreenConfig {
            output: args.screen_output.clone(),
            year: 2100.0,
            trajectories: args.screen_trajectories,
            levels: 4,
            seed: args.seed,
            keep: args.screen_k,
            grid,
            workers,
        };
        let s = screen_then_range(factory, &params, &candidates, &config)?;
        let m = &s.morris;
        let mut text = String::from("parameter,mu_star,mu,sigma,kept\n");
        for i in m.ranking() {
            let kept = s.kept.iter().any(|r| r.name == m.names[i]);
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                m.names[i], m.mu_star[i], m.mu[i], m.sigma[i], kept
            ));
        }
        screening_csv = Some(text.into_bytes());
        manifest.screened_parameters = s
            .kept
            .iter()
            .map(|r| {
                let i = m
                    .names
                    .iter()
                    .position(|n| *n == r.name)
                    .expect("kept name is screened");
                ScreenedParameter {
                    name: r.name.clone(),
                    low: r.low,
                    high: r.high,
                    mu_star: Some(m.mu_star[i]),
                }
            })
            .collect();
        s.kept
    };

    let samples = lhs_sample(&kept, args.n, args.seed)?;
    let mut retained = catalog.variables();
    for (_, v) in ENTRY_POINT_VARIABLES {
        if !retained.iter().any(|r| r == v) {
            retained.push(v.to_string());
        }
    }
    let mut years = vec![BASE_YEAR];
    years.extend(MILESTONES);
    let pathway = spec.id().to_string();
    let req = EnsembleRequest {
        pathway: &pathway,
        base: &params,
        samples: &samples,
        workers,
        grid,
        envelope: None,
        retained,
        retained_years: years,
    };
    let ens = run_ensemble(factory, &req)?;

    let mut staged = Staged::new(&args.out);
    let mut env = Vec::new();
    write_envelope_csv(&ens, &mut env)?;
    staged.add("envelope.csv", env);
    let mut ind = Vec::new();
    write_indicator_csv(&ens, &mut ind)?;
    staged.add("indicators.csv", ind);
    let mut sample_csv = String::from("realization");
    for r in &samples.ranges {
        sample_csv.push(',');
        sample_csv.push_str(&r.name);
    }
    sample_csv.push('\n');
    for i in 0..samples.rows {
        sample_csv.push_str(&i.to_string());
        for v in samples.row(i) {
            sample_csv.push_str(&format!(",{v}"));
        }
        sample_csv.push('\n');
    }
    staged.add("samples.csv", sample_csv.into_bytes());
    if let Some(s) = screening_csv {
        staged.add("screening.csv", s);
    }
    if args.svg {
        for (_, var) in ENTRY_POINT_VARIABLES {
            let v = ens
                .variable_index(var)
                .expect("entry-point variable is enveloped");
            let ny = ens.years.len();
            let chart = svg::envelope_chart(
                &format!("{pathway}: {var}"),
                &ens.years,
                &ens.mean[v * ny..(v + 1) * ny],
                &ens.std[v * ny..(v + 1) * ny],
            );
            staged.add(&format!("envelope_{var}.svg"), chart.into_bytes());
        }
    }
    manifest.seed = Some(args.seed);
    manifest.realizations = Some(ens.realizations);
    manifest.workers = Some(workers);
    staged.commit(manifest).map_err(runtime)?;
    Ok(())
}

fn load_ensemble(dir: &Path, manifest: &mut RunManifest) -> Result<EnsembleResult, Failure> {
    let env = read(&dir.join("envelope.csv"))?;
    let ind = read(&dir.join("indicators.csv"))?;
    manifest.inputs.push(digest(
        &dir.join("envelope.csv").display().to_string(),
        &env,
    ));
    manifest.inputs.push(digest(
        &dir.join("indicators.csv").display().to_string(),
        &ind,
    ));
    let seed = match fs::read(dir.join("manifest.json")) {
        Ok(bytes) => serde_json::from_slice::<serde_json::Value>(&bytes)
            .ok()
            .and_then(|v| v.get("seed").and_then(|s| s.as_u64()))
            .unwrap_or(0),
        Err(_) => 0,
    };
    read_ensemble(&env[..], &ind[..], seed).map_err(|e| input(anyhow!("{}: {e}", dir.display())))
}

fn score(args: ScoreArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("score");
    if !MILESTONES.contains(&args.milestone) {
        return Err(SdgError::MissingMilestone(args.milestone).into());
    }
    let catalog = load_catalog(args.catalog.as_deref(), &mut manifest)?;
    let targets = match &args.targets {
        None => {
            manifest.inputs.push(digest(
                "<builtin targets>",
                sdgsim_core::sdg::BUILTIN_TARGETS.as_bytes(),
            ));
            TargetSet::builtin()
        }
        Some(p) => {
            manifest
                .inputs
                .push(digest(&p.display().to_string(), &read(p)?));
            sdgsim_core::sdg::load_targets(p)?
        }
    };
    let mut reports = Vec::new();
    for dir in &args.ensemble {
        let ens = load_ensemble(dir, &mut manifest)?;
        let report = score_ensemble(&ens, &catalog, &targets, args.ambition, args.milestone)
            .map_err(|e| input(anyhow!("{}: {e}", dir.display())))?;
        reports.push(report);
    }
    let (mut csv, mut goals, mut shares) = (Vec::new(), Vec::new(), Vec::new());
    for (i, r) in reports.iter().enumerate() {
        r.write_csv(&mut csv, i == 0)?;
        r.write_goal_csv(&mut goals, i == 0)?;
        r.write_level_shares_csv(&mut shares, i == 0)?;
    }
    let json = serde_json::to_vec_pretty(&reports).map_err(runtime)?;
    let mut staged = Staged::new(&args.out);
    staged.add("report.csv", csv);
    staged.add("goals.csv", goals);
    staged.add("level_shares.csv", shares);
    staged.add("report.json", json);
    staged.commit(manifest).map_err(runtime)?;
    Ok(())
}

fn delta(args: DeltaArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("delta");
    let reference = load_ensemble(&args.reference, &mut manifest)?;
    let alt = load_ensemble(&args.alt, &mut manifest)?;
    let vars: Vec<String> = if args.vars.is_empty() {
        ENTRY_POINT_VARIABLES
            .iter()
            .map(|(_, v)| v.to_string())
            .collect()
    } else {
        args.vars.clone()
    };
    let mut deltas = Vec::new();
    for var in &vars {
        for year in &args.years {
            deltas.push(systems_change(&reference, &alt, var, *year, args.sigma)?);
        }
    }
    let mut csv = Vec::new();
    write_delta_csv(&deltas, &mut csv)?;
    let mut summary = format!("{} relative to {}\n", alt.pathway, reference.pathway);
    for d in &deltas {
        let entry = d.entry_point.map_or(String::new(), |e| format!("[{e}] "));
        summary.push_str(&format!(
            "{entry}{} {}: {}\n",
            d.variable,
            d.year,
            d.annotation()
        ));
    }
    print!("{summary}");
    let mut staged = Staged::new(&args.out);
    staged.add("delta.csv", csv);
    staged.add("summary.txt", summary.into_bytes());
    staged.commit(manifest).map_err(runtime)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Ensemble(a) => ensemble(a),
        Command::Score(a) => score(a),
        Command::Delta(a) => delta(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
