use rftfm_core::attribute::{
    attribute, attribute_standardized, feature_names, fingerprint, fingerprint_feature_names,
    fingerprint_with, fit_attributor, temporal_features, AttributeError, Attribution,
    AttributionModel, FaultFingerprint, FingerprintOptions, Granularity, FINGERPRINT_DIM,
    TEMPORAL_DIM,
};
use rftfm_core::detect::{calibrate, NormalProfile};
use rftfm_core::eval::kfold_split;
use rftfm_core::inject::{
    build_schedule, curate_benchmark, inject, load_benchmark, BenchmarkPlan, FaultSpec,
    ScheduleParams,
};
use rftfm_core::model::Channel;
use rftfm_core::sim::{simulate_healthy, SimConfig};
use rftfm_core::{DifficultyRegime, FaultLabel, FaultType, Signal, TrainStepRecord, TrainingRun};

fn profile(steps: usize) -> NormalProfile {
    let ns: Vec<_> = (0..11)
        .map(|s| simulate_healthy(&SimConfig::with_steps(steps), 300 + s))
        .collect();
    calibrate(&ns, 20).unwrap()
}

fn constant_run() -> TrainingRun {
    let rec = |t: u64| TrainStepRecord {
        step: t,
        reward_mean: 0.5,
        kl_mean: 0.02,
        entropy_mean: 1.0,
        return_mean: 0.5,
        value_mean: 0.5,
        advantage_mean: 0.0,
        advantage_std: 0.5,
        response_length_mean: 200.0,
        policy_loss: 0.3,
        tool_error_rate: 0.02,
        truncation_rate: 0.01,
    };
    TrainingRun::new(
        "flat",
        FaultLabel::of(FaultType::Normal),
        None,
        0,
        (0..20).map(rec).collect(),
        None,
    )
    .unwrap()
}

#[test]
fn constant_run_has_no_slope_or_fluctuation() {
    let t = temporal_features(&constant_run(), &profile(20), 20).unwrap();
    assert_eq!(t.values.len(), TEMPORAL_DIM);
    for c in Channel::ALL {
        assert_eq!(t.get(c, "slope"), Some(0.0), "{c:?}");
        assert_eq!(t.get(c, "fluctuation"), Some(0.0), "{c:?}");
    }
}

#[test]
fn delayed_kl_explosion_onset_is_located() {
    let cfg = SimConfig::with_steps(40);
    let p = profile(40);
    for seed in 0..20 {
        let spec = FaultSpec::unchecked(
            FaultType::KlExplosion,
            DifficultyRegime::Hard,
            ScheduleParams::delayed(1.0, 10),
        );
        let run = inject(&cfg, &spec, &build_schedule(&spec, 40, seed).unwrap(), seed).unwrap();
        let onset = temporal_features(&run, &p, 20)
            .unwrap()
            .get(Channel::Signal(Signal::Kl), "onset")
            .unwrap();
        assert!((9.0..=12.0).contains(&onset), "seed {seed}: onset {onset}");
    }
}

#[test]
fn horizon_preconditions() {
    let p = profile(20);
    let run = constant_run();
    assert_eq!(
        temporal_features(&run, &p, 5),
        Err(AttributeError::HorizonTooSmall(5))
    );
    assert!(matches!(fingerprint(&run, &p, 20), Ok(_)));
}

#[test]
fn fingerprint_dimensions_and_determinism() {
    let p = profile(20);
    let run = simulate_healthy(&SimConfig::healthy_defaults(), 5);
    let fp = fingerprint(&run, &p, 20).unwrap();
    assert_eq!(fp.dim(), 98);
    assert_eq!(FINGERPRINT_DIM, 98);
    assert_eq!(fingerprint_feature_names().len(), 98);
    assert_eq!(feature_names().len(), TEMPORAL_DIM);
    assert!(fp.values.iter().all(|x| x.is_finite()));

    let parsed = rftfm_core::parse_run(&rftfm_core::serialize_run(&run)).unwrap();
    assert_eq!(fingerprint(&parsed, &p, 20).unwrap(), fp);

    let fgf_off = FingerprintOptions {
        no_fingerprint: true,
        ..Default::default()
    };
    assert_eq!(fingerprint_with(&run, &p, 20, fgf_off).unwrap().dim(), 18);
    let td_off = FingerprintOptions {
        no_temporal: true,
        ..Default::default()
    };
    let f = fingerprint_with(&run, &p, 20, td_off).unwrap();
    assert_eq!(f.dim(), 98);
    assert!(f.values[..TEMPORAL_DIM].iter().all(|&x| x == 0.0));
    assert_eq!(&f.values[TEMPORAL_DIM..], &fp.values[TEMPORAL_DIM..]);
}

fn fp(values: Vec<f64>) -> FaultFingerprint {
    FaultFingerprint { values }
}

#[test]
fn singleton_classes_and_ties() {
    let data: Vec<(FaultFingerprint, FaultLabel)> = FaultType::ALL
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            (
                fp(vec![i as f64, (i * i) as f64 % 7.0, -(i as f64)]),
                FaultLabel::of(f),
            )
        })
        .collect();
    let m = fit_attributor(&data, Granularity::Type).unwrap();
    assert_eq!(m.classes.len(), 16);
    for (x, label) in &data {
        let c = m
            .classes
            .iter()
            .find(|c| c.class == Attribution::Type(label.fault_type()))
            .unwrap();
        assert_eq!(c.centroid, m.standardize(&x.values));
        assert_eq!(
            attribute(&m, x).unwrap(),
            Attribution::Type(label.fault_type())
        );
        assert_eq!(attribute_standardized(&m, &c.centroid).unwrap(), c.class);
    }
    assert_eq!(fit_attributor(&data, Granularity::Type).unwrap(), m);

    let pair = vec![
        (fp(vec![1.0]), FaultLabel::of(FaultType::RewardCollapse)),
        (fp(vec![-1.0]), FaultLabel::of(FaultType::RewardSpike)),
    ];
    let m = fit_attributor(&pair, Granularity::Type).unwrap();
    assert_eq!(
        attribute(&m, &fp(vec![0.0])).unwrap(),
        Attribution::Type(FaultType::RewardSpike)
    );
    assert_eq!(
        attribute(&m, &fp(vec![0.0, 1.0])),
        Err(AttributeError::DimensionMismatch {
            expected: 1,
            found: 2
        })
    );
    assert_eq!(
        fit_attributor(&[], Granularity::Type),
        Err(AttributeError::EmptyTrainingSet)
    );
    let normal = vec![(fp(vec![0.0]), FaultLabel::of(FaultType::Normal))];
    assert!(matches!(
        fit_attributor(&normal, Granularity::Family),
        Err(AttributeError::EmptyClass(_))
    ));
}

#[test]
fn easy_benchmark_attribution() {
    let dir = tempfile::tempdir().unwrap();
    curate_benchmark(&BenchmarkPlan::uniform(42, 20, 0, 11), dir.path()).unwrap();
    let bench = load_benchmark(dir.path()).unwrap();
    let normals: Vec<TrainingRun> = bench.normals().into_iter().cloned().collect();
    let p = calibrate(&normals, 20).unwrap();
    let easy: Vec<TrainingRun> = bench
        .faulty(DifficultyRegime::Easy)
        .into_iter()
        .cloned()
        .collect();
    let labeled: Vec<_> = easy
        .iter()
        .map(|r| (fingerprint(r, &p, 20).unwrap(), r.label()))
        .collect();

    let full = fit_attributor(&labeled, Granularity::Type).unwrap();
    assert_eq!(full.classes.len(), 16);
    let path = dir.path().join("model.json");
    full.save(&path).unwrap();
    assert_eq!(AttributionModel::load(&path).unwrap(), full);

    let folds = kfold_split(&easy, 5, 42).unwrap();
    let (train, test): (Vec<_>, Vec<_>) = easy
        .iter()
        .zip(&labeled)
        .partition(|(r, _)| folds.fold_of(r.run_id()) != Some(0));
    let model = fit_attributor(
        &train.iter().map(|(_, l)| (*l).clone()).collect::<Vec<_>>(),
        Granularity::Type,
    )
    .unwrap();
    let od1: Vec<_> = test
        .iter()
        .filter(|(r, _)| r.label().fault_type() == FaultType::KlExplosion)
        .collect();
    assert!(!od1.is_empty());
    for (r, (x, _)) in od1 {
        assert_eq!(
            attribute(&model, x).unwrap(),
            Attribution::Type(FaultType::KlExplosion),
            "{}",
            r.run_id()
        );
    }
}
