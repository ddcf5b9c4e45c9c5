use std::fmt::Display;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::EnsembleError;
use crate::scenarios::ParameterRange;

#[derive(Debug, Clone, PartialEq)]
pub struct MorrisResult {
    pub names: Vec<String>,
    /// Mean absolute elementary effect.
    pub mu_star: Vec<f64>,
    pub mu: Vec<f64>,
    /// Sample standard deviation of the elementary effects.
    pub sigma: Vec<f64>,
    pub trajectories: usize,
    pub levels: usize,
}

impl MorrisResult {
    /// Parameter indices by descending μ*, ties in declaration order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.names.len()).collect();
        idx.sort_by(|a, b| self.mu_star[*b].total_cmp(&self.mu_star[*a]));
        idx
    }
}

/// Elementary-effects screening with `r` one-at-a-time trajectories on a
/// `p`-level grid, step `Δ = p / (2(p - 1))`.
///
/// Trajectory `t` draws from ChaCha20 stream `t`. Base points take levels
/// from the lower half of the grid so every step is `+Δ`. The objective
/// receives parameter values mapped onto `ranges`; effects are measured in
/// unit coordinates.
pub fn morris_screen<F, E>(
    objective: F,
    ranges: &[ParameterRange],
    r: usize,
    p: usize,
    seed: u64,
) -> Result<MorrisResult, EnsembleError>
where
    F: Fn(&[f64]) -> Result<f64, E> + Sync,
    E: Display,
{
    if r < 2 {
        return Err(EnsembleError::InvalidInput(format!(
            "need r >= 2 trajectories, got {r}"
        )));
    }
    if p < 4 || !p.is_multiple_of(2) {
        return Err(EnsembleError::InvalidInput(format!(
            "levels p must be even and >= 4, got {p}"
        )));
    }
    if ranges.is_empty() {
        return Err(EnsembleError::InvalidInput(
            "no parameters to screen".into(),
        ));
    }
    let k = ranges.len();
    let delta = p as f64 / (2.0 * (p as f64 - 1.0));
    let eval = |unit: &[f64]| -> Result<f64, EnsembleError> {
        let point: Vec<f64> = ranges.iter().zip(unit).map(|(r, u)| r.scale(*u)).collect();
        match objective(&point) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(v) => Err(EnsembleError::ObjectiveFailure {
                point,
                message: format!("non-finite objective value {v}"),
            }),
            Err(e) => Err(EnsembleError::ObjectiveFailure {
                point,
                message: e.to_string(),
            }),
        }
    };

    let effects: Vec<Vec<f64>> = (0..r)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let mut x: Vec<f64> = (0..k)
                .map(|_| rng.gen_range(0..p / 2) as f64 / (p as f64 - 1.0))
                .collect();
            let mut order: Vec<usize> = (0..k).collect();
            order.shuffle(&mut rng);
            let mut ee = vec![0.0; k];
            let mut f_prev = eval(&x)?;
            for i in order {
                x[i] += delta;
                let f_next = eval(&x)?;
                ee[i] = (f_next - f_prev) / delta;
                f_prev = f_next;
            }
            Ok(ee)
        })
        .collect::<Result<_, EnsembleError>>()?;

    let rf = r as f64;
    let mut mu_star = vec![0.0; k];
    let mut mu = vec![0.0; k];
    let mut sigma = vec![0.0; k];
    for i in 0..k {
        mu[i] = effects.iter().map(|e| e[i]).sum::<f64>() / rf;
        mu_star[i] = effects.iter().map(|e| e[i].abs()).sum::<f64>() / rf;
        let ss: f64 = effects.iter().map(|e| (e[i] - mu[i]).powi(2)).sum();
        sigma[i] = (ss / (rf - 1.0)).sqrt();
    }
    Ok(MorrisResult {
        names: ranges.iter().map(|r| r.name.clone()).collect(),
        mu_star,
        mu,
        sigma,
        trajectories: r,
        levels: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(p: usize) -> Vec<ParameterRange> {
        (0..p)
            .map(|j| ParameterRange::new(&format!("x{j}"), 0.0, 1.0))
            .collect()
    }

    #[test]
    fn constant_objective_has_no_effects() {
        let m = morris_screen(|_: &[f64]| Ok::<_, String>(4.2), &unit(3), 10, 4, 1).unwrap();
        assert!(m.mu_star.iter().chain(&m.sigma).all(|v| *v == 0.0));
    }

    #[test]
    fn linear_effects_are_exact() {
        let f = |x: &[f64]| Ok::<_, String>(3.0 * x[0] + 0.0 * x[1]);
        let m = morris_screen(f, &unit(2), 20, 4, 9).unwrap();
        assert!((m.mu_star[0] - 3.0).abs() < 1e-12);
        assert!(m.sigma[0] < 1e-12);
        assert_eq!(m.mu_star[1], 0.0);
    }

    #[test]
    fn effects_scale_with_range_width() {
        // f(x) = x on [0, 10] moves 10 per unit coordinate
        let f = |x: &[f64]| Ok::<_, String>(x[0]);
        let m = morris_screen(f, &[ParameterRange::new("a", 0.0, 10.0)], 4, 4, 0).unwrap();
        assert!((m.mu_star[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn failures_carry_the_point() {
        let f = |x: &[f64]| if x[0] > 0.5 { Err("boom") } else { Ok(x[0]) };
        let err = morris_screen(f, &unit(1), 5, 4, 0).unwrap_err();
        match err {
            EnsembleError::ObjectiveFailure { point, .. } => assert!(point[0] > 0.5),
            other => panic!("{other}"),
        }
        let nan = |_: &[f64]| Ok::<_, String>(f64::NAN);
        assert!(morris_screen(nan, &unit(1), 2, 4, 0).is_err());
        assert!(morris_screen(|_: &[f64]| Ok::<_, String>(0.0), &unit(1), 1, 4, 0).is_err());
        assert!(morris_screen(|_: &[f64]| Ok::<_, String>(0.0), &unit(1), 2, 5, 0).is_err());
    }
}
