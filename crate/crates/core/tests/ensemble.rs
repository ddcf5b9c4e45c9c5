use sdgsim_core::engine::{compile_model, EngineError, ExecutableModel, ModelDefinition, TimeGrid};
use sdgsim_core::ensemble::{
    lhs_sample, read_ensemble, run_ensemble, screen_then_range, write_envelope_csv,
    write_indicator_csv, EnsembleError, EnsembleRequest, ScreenConfig,
};
use sdgsim_core::scenarios::ParameterRange;
use sdgsim_core::sectors::ParameterSet;

fn toy() -> ExecutableModel {
    let mut d = ModelDefinition::default();
    d.param("k", 0.05)
        .param("a", 2.0)
        .param("b", 1.0)
        .param("dead", 0.0)
        .stock("S", 100.0)
        .flow("decay", Some("S"), None, "k * S")
        .aux("y", "a * S + b + 0 * dead")
        .aux("z", "ln(S) / k");
    compile_model(&d).unwrap()
}

fn factory(
    model: &ExecutableModel,
) -> impl Fn(&ParameterSet) -> Result<ExecutableModel, EngineError> + Sync + '_ {
    move |p: &ParameterSet| model.with_parameters(p.scalars.iter().map(|(n, v)| (n.as_str(), *v)))
}

fn base() -> ParameterSet {
    let mut p = ParameterSet::default();
    for (n, v) in [("k", 0.05), ("a", 2.0), ("b", 1.0), ("dead", 0.0)] {
        p.set(n, v);
    }
    p
}

fn ranges() -> Vec<ParameterRange> {
    vec![
        ParameterRange::new("k", 0.01, 0.1),
        ParameterRange::new("a", 1.0, 3.0),
        ParameterRange::new("dead", -1.0, 1.0),
    ]
}

fn grid() -> TimeGrid {
    TimeGrid::new(2015.0, 2100.0, 1.0).unwrap()
}

fn request<'a>(
    base: &'a ParameterSet,
    samples: &'a sdgsim_core::ensemble::SampleMatrix,
    workers: usize,
) -> EnsembleRequest<'a> {
    EnsembleRequest {
        pathway: "Toy",
        base,
        samples,
        workers,
        grid: grid(),
        envelope: None,
        retained: vec!["y".into(), "S".into()],
        retained_years: vec![2015.0, 2030.0, 2050.0, 2100.0],
    }
}

#[test]
fn single_realization_has_zero_spread() {
    let model = toy();
    let b = base();
    let samples = lhs_sample(&ranges(), 1, 5).unwrap();
    let ens = run_ensemble(factory(&model), &request(&b, &samples, 1)).unwrap();
    let mut params = b.clone();
    for (r, v) in samples.ranges.iter().zip(samples.row(0)) {
        params.set(&r.name, *v);
    }
    let traj = factory(&model)(&params).unwrap().run(&grid()).unwrap();
    for name in ["S", "y", "z"] {
        for (k, t) in grid().times().enumerate() {
            let (m, s) = ens.envelope(name, t).unwrap();
            assert_eq!(m, traj.series(name).unwrap()[k]);
            assert_eq!(s, 0.0);
        }
    }
}

#[test]
fn statistics_match_a_direct_two_pass_oracle() {
    let model = toy();
    let b = base();
    let samples = lhs_sample(&ranges(), 100, 42).unwrap();
    let ens = run_ensemble(factory(&model), &request(&b, &samples, 3)).unwrap();
    let runs: Vec<_> = (0..100)
        .map(|i| {
            let mut p = b.clone();
            for (r, v) in samples.ranges.iter().zip(samples.row(i)) {
                p.set(&r.name, *v);
            }
            toy()
                .with_parameters(p.scalars.iter().map(|(n, v)| (n.as_str(), *v)))
                .unwrap()
                .run(&grid())
                .unwrap()
        })
        .collect();
    for name in ["S", "y", "z", "decay"] {
        for (k, t) in grid().times().enumerate() {
            let xs: Vec<f64> = runs.iter().map(|r| r.series(name).unwrap()[k]).collect();
            let mean = xs.iter().sum::<f64>() / 100.0;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 99.0;
            let (m, s) = ens.envelope(name, t).unwrap();
            assert!(
                (m - mean).abs() <= 1e-12 * mean.abs().max(1.0),
                "{name} {t}: {m} vs {mean}"
            );
            assert!(
                (s - var.sqrt()).abs() <= 1e-12 * var.sqrt().max(1.0),
                "{name} {t}"
            );
        }
    }
    let y2100 = ens.retained.across("y", 2100.0).unwrap();
    for (i, r) in runs.iter().enumerate() {
        assert_eq!(y2100[i], r.value("y", 2100.0).unwrap());
    }
}

#[test]
fn worker_count_does_not_change_any_bit() {
    let model = toy();
    let b = base();
    let samples = lhs_sample(&ranges(), 150, 7).unwrap();
    let reference = run_ensemble(factory(&model), &request(&b, &samples, 1)).unwrap();
    for workers in [2, 8] {
        let other = run_ensemble(factory(&model), &request(&b, &samples, workers)).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&reference.mean), bits(&other.mean));
        assert_eq!(bits(&reference.std), bits(&other.std));
        assert_eq!(
            bits(&reference.retained.values),
            bits(&other.retained.values)
        );
    }
}

#[test]
fn failing_realization_is_reported_by_lowest_index() {
    let model = toy();
    let b = base();
    // k = 1.5 drives S negative at the first step, ln(S) becomes NaN
    let r = vec![ParameterRange::new("k", 0.0, 2.0)];
    let samples = lhs_sample(&r, 64, 3).unwrap();
    let first_bad = (0..64).find(|i| samples.row(*i)[0] > 1.0).unwrap();
    let err = run_ensemble(factory(&model), &request(&b, &samples, 4)).unwrap_err();
    match err {
        EnsembleError::RealizationFailure {
            index, parameters, ..
        } => {
            assert_eq!(index, first_bad);
            assert_eq!(parameters[0].0, "k");
            assert_eq!(parameters[0].1, samples.row(first_bad)[0]);
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn csv_round_trip_preserves_the_result() {
    let model = toy();
    let b = base();
    let samples = lhs_sample(&ranges(), 40, 1).unwrap();
    let ens = run_ensemble(factory(&model), &request(&b, &samples, 2)).unwrap();
    let mut env = Vec::new();
    let mut ind = Vec::new();
    write_envelope_csv(&ens, &mut env).unwrap();
    write_indicator_csv(&ens, &mut ind).unwrap();
    let text = String::from_utf8(env.clone()).unwrap();
    assert!(text.starts_with("pathway,variable,year,mean,std\nToy,S,2015,100,0\n"));
    assert!(!text.contains('\r'));
    let back = read_ensemble(&env[..], &ind[..], 1).unwrap();
    assert_eq!(back, ens);
}

#[test]
fn screening_ranks_dead_parameter_last() {
    let model = toy();
    let b = base();
    let config = ScreenConfig {
        output: "y".into(),
        year: 2050.0,
        keep: 3,
        grid: grid(),
        ..ScreenConfig::default()
    };
    let s = screen_then_range(factory(&model), &b, &ranges(), &config).unwrap();
    assert_eq!(s.kept.len(), 3);
    assert_eq!(s.kept[2].name, "dead");
    assert_eq!(s.morris.mu_star[2], 0.0);
    let two = screen_then_range(
        factory(&model),
        &b,
        &ranges(),
        &ScreenConfig {
            keep: 2,
            ..config.clone()
        },
    )
    .unwrap();
    assert_eq!(two.kept, s.kept[..2].to_vec());
    let all = screen_then_range(
        factory(&model),
        &b,
        &ranges(),
        &ScreenConfig { keep: 10, ..config },
    )
    .unwrap();
    assert_eq!(all.kept.len(), 3);
}
