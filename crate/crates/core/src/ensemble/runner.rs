use std::collections::HashMap;
use std::fmt::Display;

use rayon::prelude::*;

use super::{lhs_sample, morris_screen, EnsembleError, MorrisResult, SampleMatrix};
use crate::engine::{ExecutableModel, TimeGrid};
use crate::scenarios::{apply_sample, ParameterRange};
use crate::sectors::ParameterSet;

/// Realizations per reduction chunk. Fixed so that statistics do not depend
/// on the worker count.
pub const CHUNK_SIZE: usize = 32;

/// Everything a pathway ensemble needs besides the model factory.
#[derive(Debug, Clone)]
pub struct EnsembleRequest<'a> {
    pub pathway: &'a str,
    /// Pathway nominal parameters; sampled values replace entries per row.
    pub base: &'a ParameterSet,
    pub samples: &'a SampleMatrix,
    pub workers: usize,
    pub grid: TimeGrid,
    /// Variables receiving envelopes; `None` keeps every model variable.
    pub envelope: Option<Vec<String>>,
    /// Variables whose per-realization values are kept.
    pub retained: Vec<String>,
    pub retained_years: Vec<f64>,
}

/// Per-realization values: `values[(r * variables + v) * years + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Retained {
    pub variables: Vec<String>,
    pub years: Vec<f64>,
    pub values: Vec<f64>,
}

impl Retained {
    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn year_index(&self, year: f64) -> Option<usize> {
        self.years.iter().position(|y| *y == year)
    }

    pub fn value(&self, realization: usize, var: usize, year: usize) -> f64 {
        let (nv, ny) = (self.variables.len(), self.years.len());
        self.values[(realization * nv + var) * ny + year]
    }

    /// Values of one variable at one year across realizations.
    pub fn across(&self, name: &str, year: f64) -> Option<Vec<f64>> {
        let v = self.variable_index(name)?;
        let k = self.year_index(year)?;
        let n = self.values.len() / (self.variables.len() * self.years.len()).max(1);
        Some((0..n).map(|r| self.value(r, v, k)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub pathway: String,
    pub seed: u64,
    pub realizations: usize,
    pub years: Vec<f64>,
    pub variables: Vec<String>,
    /// Variable-major: `mean[v * years.len() + k]`.
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub retained: Retained,
}

impl EnsembleResult {
    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn year_index(&self, year: f64) -> Option<usize> {
        self.years.iter().position(|y| *y == year)
    }

    /// Ensemble mean and standard deviation of `name` at `year`.
    pub fn envelope(&self, name: &str, year: f64) -> Result<(f64, f64), EnsembleError> {
        let v = self
            .variable_index(name)
            .ok_or_else(|| EnsembleError::UnknownVariable(name.to_string()))?;
        let k = self
            .year_index(year)
            .ok_or(EnsembleError::UnknownYear(year))?;
        let at = v * self.years.len() + k;
        Ok((self.mean[at], self.std[at]))
    }
}

struct Moments {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    /// Two-pass mean and sum of squared deviations of `rows` equally long
    /// series.
    fn of(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let width = rows[0].len();
        let mut mean = vec![0.0; width];
        for row in rows {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut m2 = vec![0.0; width];
        for row in rows {
            for ((s, x), m) in m2.iter_mut().zip(row).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        Moments { n, mean, m2 }
    }

    /// Pairwise combination of two partial results.
    fn merge(self, other: Moments) -> Moments {
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let mut mean = self.mean;
        let mut m2 = self.m2;
        for i in 0..mean.len() {
            let delta = other.mean[i] - mean[i];
            mean[i] += delta * nb / n;
            m2[i] += other.m2[i] + delta * delta * na * nb / n;
        }
        Moments {
            n: self.n + other.n,
            mean,
            m2,
        }
    }
}

struct ChunkOutput {
    moments: Moments,
    retained: Vec<f64>,
}

/// Runs every sample row through a freshly parameterized model.
///
/// Rows are processed in fixed chunks of [`CHUNK_SIZE`]; per-chunk moments
/// are merged in chunk order, so results are identical for any worker count.
/// The first failing realization (lowest index) aborts the ensemble.
pub fn run_ensemble<F, E>(
    factory: F,
    req: &EnsembleRequest,
) -> Result<EnsembleResult, EnsembleError>
where
    F: Fn(&ParameterSet) -> Result<ExecutableModel, E> + Sync,
    E: Display,
{
    let samples = req.samples;
    if samples.rows == 0 {
        return Err(EnsembleError::InvalidInput(
            "ensemble needs >= 1 realization".into(),
        ));
    }
    if req.workers == 0 {
        return Err(EnsembleError::InvalidInput("workers must be >= 1".into()));
    }
    let years: Vec<f64> = req.grid.times().collect();
    let year_idx: Vec<usize> = req
        .retained_years
        .iter()
        .map(|y| req.grid.index_of(*y).ok_or(EnsembleError::UnknownYear(*y)))
        .collect::<Result<_, _>>()?;

    let probe = factory(req.base).map_err(|e| EnsembleError::InvalidInput(e.to_string()))?;
    let lookup: HashMap<&str, usize> = probe
        .variable_names()
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let resolve = |names: &[String]| -> Result<Vec<usize>, EnsembleError> {
        names
            .iter()
            .map(|n| {
                lookup
                    .get(n.as_str())
                    .copied()
                    .ok_or_else(|| EnsembleError::UnknownVariable(n.clone()))
            })
            .collect()
    };
    let variables: Vec<String> = match &req.envelope {
        Some(v) => v.clone(),
        None => probe.variable_names().to_vec(),
    };
    let env_idx = resolve(&variables)?;
    let ret_idx = resolve(&req.retained)?;

    let run_one = |i: usize| -> Result<(Vec<f64>, Vec<f64>), EnsembleError> {
        let row = samples.row(i);
        let fail = |message: String| EnsembleError::RealizationFailure {
            index: i,
            parameters: samples
                .ranges
                .iter()
                .zip(row)
                .map(|(r, v)| (r.name.clone(), *v))
                .collect(),
            message,
        };
        let params = apply_sample(req.base, &samples.ranges, row);
        let model = factory(&params).map_err(|e| fail(e.to_string()))?;
        let traj = model.run(&req.grid).map_err(|e| fail(e.to_string()))?;
        let mut env = Vec::with_capacity(env_idx.len() * years.len());
        for &v in &env_idx {
            env.extend_from_slice(traj.series_at(v));
        }
        let mut kept = Vec::with_capacity(ret_idx.len() * year_idx.len());
        for &v in &ret_idx {
            let s = traj.series_at(v);
            kept.extend(year_idx.iter().map(|k| s[*k]));
        }
        Ok((env, kept))
    };

    let chunks: Vec<(usize, usize)> = (0..samples.rows)
        .step_by(CHUNK_SIZE)
        .map(|s| (s, (s + CHUNK_SIZE).min(samples.rows)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(req.workers)
        .build()
        .map_err(|e| EnsembleError::InvalidInput(e.to_string()))?;
    let outputs: Vec<Result<ChunkOutput, EnsembleError>> = pool.install(|| {
        chunks
            .par_iter()
            .map(|&(start, end)| {
                let mut rows = Vec::with_capacity(end - start);
                let mut retained = Vec::new();
                for i in start..end {
                    let (env, kept) = run_one(i)?;
                    rows.push(env);
                    retained.extend(kept);
                }
                Ok(ChunkOutput {
                    moments: Moments::of(&rows),
                    retained,
                })
            })
            .collect()
    });

    let mut total: Option<Moments> = None;
    let mut retained = Vec::with_capacity(samples.rows * ret_idx.len() * year_idx.len());
    for out in outputs {
        let out = out?;
        retained.extend(out.retained);
        total = Some(match total {
            None => out.moments,
            Some(acc) => acc.merge(out.moments),
        });
    }
    let total = total.expect("at least one chunk");
    let std = if total.n > 1 {
        total
            .m2
            .iter()
            .map(|s| (s / (total.n - 1) as f64).sqrt())
            .collect()
    } else {
        vec![0.0; total.m2.len()]
    };
    Ok(EnsembleResult {
        pathway: req.pathway.to_string(),
        seed: samples.seed,
        realizations: samples.rows,
        years,
        variables,
        mean: total.mean,
        std,
        retained: Retained {
            variables: req.retained.clone(),
            years: req.retained_years.clone(),
            values: retained,
        },
    })
}

#[derive(Debug, Clone)]
pub struct ScreenConfig {
    /// Output whose value at `year` is the screening objective.
    pub output: String,
    pub year: f64,
    pub trajectories: usize,
    pub levels: usize,
    pub seed: u64,
    pub keep: usize,
    pub grid: TimeGrid,
    pub workers: usize,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        Self {
            output: "climate.temperature".into(),
            year: 2100.0,
            trajectories: 20,
            levels: 4,
            seed: 0,
            keep: 20,
            grid: TimeGrid::default(),
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Screening {
    /// The `keep` candidates with the largest μ*, in ranking order.
    pub kept: Vec<ParameterRange>,
    pub morris: MorrisResult,
}

/// Morris-screens `candidates` on one model output and keeps the most
/// influential ones.
pub fn screen_then_range<F, E>(
    factory: F,
    base: &ParameterSet,
    candidates: &[ParameterRange],
    config: &ScreenConfig,
) -> Result<Screening, EnsembleError>
where
    F: Fn(&ParameterSet) -> Result<ExecutableModel, E> + Sync,
    E: Display,
{
    if config.keep == 0 {
        return Err(EnsembleError::InvalidInput(
            "keep count must be >= 1".into(),
        ));
    }
    let k = config
        .grid
        .index_of(config.year)
        .ok_or(EnsembleError::UnknownYear(config.year))?;
    let objective = |x: &[f64]| -> Result<f64, String> {
        let params = apply_sample(base, candidates, x);
        let model = factory(&params).map_err(|e| e.to_string())?;
        let traj = model.run(&config.grid).map_err(|e| e.to_string())?;
        traj.series(&config.output)
            .map(|s| s[k])
            .ok_or_else(|| format!("unknown output `{}`", config.output))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| EnsembleError::InvalidInput(e.to_string()))?;
    let morris = pool.install(|| {
        morris_screen(
            objective,
            candidates,
            config.trajectories,
            config.levels,
            config.seed,
        )
    })?;
    let kept = morris
        .ranking()
        .into_iter()
        .take(config.keep)
        .map(|i| candidates[i].clone())
        .collect();
    Ok(Screening { kept, morris })
}

/// Convenience: LHS rows for `ranges` followed by [`run_ensemble`].
pub fn sample_and_run<F, E>(
    factory: F,
    req_template: &EnsembleRequest,
    ranges: &[ParameterRange],
    n: usize,
    seed: u64,
) -> Result<EnsembleResult, EnsembleError>
where
    F: Fn(&ParameterSet) -> Result<ExecutableModel, E> + Sync,
    E: Display,
{
    let samples = lhs_sample(ranges, n, seed)?;
    let req = EnsembleRequest {
        samples: &samples,
        ..req_template.clone()
    };
    run_ensemble(factory, &req)
}
