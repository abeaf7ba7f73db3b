use rftfm_core::detect::{
    calibrate, compute_threshold, detect, extract_deviations, severity, DetectError, DetectOptions,
    Invariant, NormalProfile, Statistic,
};
use rftfm_core::inject::{
    build_schedule, curate_benchmark, inject, load_benchmark, BenchmarkPlan, FaultSpec,
    ScheduleParams,
};
use rftfm_core::remediate::{build_state, RFTConfig};
use rftfm_core::sim::{simulate_healthy, SimConfig};
use rftfm_core::{DifficultyRegime, FaultType, TrainingRun};

const H: usize = 20;

fn normals(base: u64, n: u64) -> Vec<TrainingRun> {
    (base..base + n)
        .map(|s| simulate_healthy(&SimConfig::healthy_defaults(), s).with_id(format!("normal_{s}")))
        .collect()
}

fn easy(fault: FaultType, seed: u64) -> TrainingRun {
    let cfg = SimConfig::healthy_defaults();
    let spec = FaultSpec::new(
        fault,
        DifficultyRegime::Easy,
        ScheduleParams::always_on(1.0),
    )
    .unwrap();
    inject(
        &cfg,
        &spec,
        &build_schedule(&spec, cfg.steps, seed).unwrap(),
        seed,
    )
    .unwrap()
}

fn reference() -> (NormalProfile, f64, Vec<TrainingRun>) {
    let ns = normals(100, 11);
    let profile = calibrate(&ns, H).unwrap();
    let tau = compute_threshold(&profile, &ns, 2.0, H, DetectOptions::default()).unwrap();
    (profile, tau, ns)
}

#[test]
fn calibration_examples() {
    let ns = normals(0, 11);
    let p = calibrate(&ns, H).unwrap();
    assert_eq!(p.run_count, 11);
    assert_eq!(p.horizon, H);
    assert_eq!(p.statistics.len(), 18);

    let doubled: Vec<_> = ns.iter().chain(ns.iter()).cloned().collect();
    let pd = calibrate(&doubled, H).unwrap();
    assert_eq!(pd.statistics, p.statistics);
    assert_eq!(pd.bands, p.bands);
    assert_eq!(pd.temporal, p.temporal);

    let mut rev = ns.clone();
    rev.reverse();
    let pr = calibrate(&rev, H).unwrap();
    assert_eq!(pr.statistics, p.statistics);
    assert_eq!(pr.temporal, p.temporal);

    assert_eq!(
        calibrate(&ns[..2], H),
        Err(DetectError::TooFewRuns { needed: 3, got: 2 })
    );
    assert!(matches!(
        calibrate(&ns, 21),
        Err(DetectError::RunTooShort { .. })
    ));
}

#[test]
fn statistics_partition_into_five_invariants() {
    let mut sizes = [0usize; 5];
    for s in Statistic::ALL {
        sizes[Invariant::ALL
            .iter()
            .position(|&i| i == s.invariant())
            .unwrap()] += 1;
    }
    assert_eq!(sizes, [3, 3, 3, 4, 5]);
}

#[test]
fn profile_median_run_scores_zero() {
    let run = simulate_healthy(&SimConfig::healthy_defaults(), 9);
    let copies: Vec<_> = (0..3)
        .map(|i| run.clone().with_id(format!("c{i}")))
        .collect();
    let p = calibrate(&copies, H).unwrap();
    let dev = extract_deviations(&run, &p, H).unwrap();
    assert!(dev.values().iter().all(|&z| z == 0.0));
    let d = detect(&run, &p, 1e-9, H, DetectOptions::default()).unwrap();
    assert_eq!(d.severity.overall, 0.0);
    assert!(!d.is_anomalous);
}

#[test]
fn reward_collapse_is_led_by_reward_mean() {
    let (profile, _, _) = reference();
    for seed in 0..10 {
        let dev = extract_deviations(&easy(FaultType::RewardCollapse, seed), &profile, H).unwrap();
        let top = dev
            .entries
            .iter()
            .max_by(|a, b| a.value.total_cmp(&b.value))
            .unwrap();
        assert_eq!(top.name, "reward_mean", "seed {seed}");
        assert!(dev.entries.iter().all(|e| e.value >= 0.0));
    }
}

#[test]
fn kl_explosion_is_flagged_only_with_calibration() {
    let (profile, tau, ns) = reference();
    let raw = DetectOptions {
        no_calibration: true,
        ..Default::default()
    };
    let tau_raw = compute_threshold(&profile, &ns, 2.0, H, raw).unwrap();
    let mut hit = 0;
    let mut raw_hit = 0;
    for seed in 0..20 {
        let run = easy(FaultType::KlExplosion, seed);
        hit += detect(&run, &profile, tau, H, DetectOptions::default())
            .unwrap()
            .is_anomalous as usize;
        raw_hit += detect(&run, &profile, tau_raw, H, raw)
            .unwrap()
            .is_anomalous as usize;
    }
    assert_eq!(hit, 20);
    assert!(raw_hit < hit, "uncalibrated detector flagged {raw_hit}/20");
}

// 100-run samples swing by about 3 points around the rate, so it is
// estimated on 1000 fresh runs
#[test]
fn healthy_holdout_false_positive_rate() {
    let dir = tempfile::tempdir().unwrap();
    curate_benchmark(&BenchmarkPlan::uniform(42, 0, 0, 11), dir.path()).unwrap();
    let ns: Vec<TrainingRun> = load_benchmark(dir.path()).unwrap().runs;
    assert_eq!(ns.len(), 11);
    let profile = calibrate(&ns, H).unwrap();
    let tau = compute_threshold(&profile, &ns, 2.0, H, DetectOptions::default()).unwrap();
    let flagged = normals(10_000, 1000)
        .iter()
        .filter(|r| {
            detect(r, &profile, tau, H, DetectOptions::default())
                .unwrap()
                .is_anomalous
        })
        .count();
    assert!(
        flagged <= 100,
        "{flagged}/1000 healthy runs flagged at tau {tau}"
    );
}

#[test]
fn decisions_are_deterministic_and_consistent() {
    let (profile, tau, _) = reference();
    for fault in FaultType::ALL {
        let run = easy(fault, 4);
        let a = detect(&run, &profile, tau, H, DetectOptions::default()).unwrap();
        let b = detect(&run, &profile, tau, H, DetectOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.is_anomalous, a.severity.overall > tau);
        let mean = a.severity.per_invariant.iter().sum::<f64>() / 5.0;
        assert!((a.severity.overall - mean).abs() < 1e-12);
    }
}

#[test]
fn dis_off_uses_one_group() {
    let (profile, _, _) = reference();
    let opts = DetectOptions {
        no_invariants: true,
        ..Default::default()
    };
    let s = severity(&easy(FaultType::LengthLong, 1), &profile, H, opts).unwrap();
    assert_eq!(s.per_invariant.len(), 1);
    assert_eq!(s.overall, s.per_invariant[0]);
}

#[test]
fn profile_file_round_trip_and_horizon_checks() {
    let (profile, _, _) = reference();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("profile.json");
    profile.save(&path).unwrap();
    assert_eq!(NormalProfile::load(&path).unwrap(), profile);
    let run = easy(FaultType::RewardSpike, 2);
    assert!(matches!(
        extract_deviations(&run, &profile, 10),
        Err(DetectError::HorizonMismatch {
            profile: 20,
            requested: 10
        })
    ));
    assert!(matches!(
        NormalProfile::load(&dir.path().join("missing.json")),
        Err(DetectError::Io(_))
    ));
}

#[test]
fn kl_explosion_state_names_a_kl_statistic() {
    let (profile, _, _) = reference();
    let run = easy(FaultType::KlExplosion, 6);
    let dev = extract_deviations(&run, &profile, H).unwrap();
    let sev = severity(&run, &profile, H, DetectOptions::default()).unwrap();
    let state = build_state(
        &run,
        FaultType::KlExplosion,
        &dev,
        &sev,
        &RFTConfig::baseline(),
    )
    .unwrap();
    assert_eq!(state.top_deviations.len(), 3);
    assert!(
        state
            .top_deviations
            .iter()
            .any(|d| d.name.starts_with("kl_")),
        "{:?}",
        state.top_deviations
    );
}
