use std::path::Path;

use rftfm_core::detect::Statistic;
use rftfm_core::inject::{
    build_schedule, curate_benchmark, inject, load_benchmark, verification_profile, verify,
    verify_with_bound, BenchmarkManifest, BenchmarkPlan, Direction, FaultSpec, InjectError,
    ScheduleParams,
};
use rftfm_core::sim::{simulate_healthy, SimConfig};
use rftfm_core::{DifficultyRegime, FaultFamily, FaultType, TrainingRun};

fn easy_run(fault: FaultType, params: ScheduleParams, seed: u64) -> TrainingRun {
    let cfg = SimConfig::healthy_defaults();
    let spec = FaultSpec::unchecked(fault, DifficultyRegime::Easy, params);
    let sched = build_schedule(&spec, cfg.steps, seed).unwrap();
    inject(&cfg, &spec, &sched, seed).unwrap()
}

#[test]
fn collapsed_reward_stays_near_zero() {
    for seed in 0..200 {
        let run = easy_run(
            FaultType::RewardCollapse,
            ScheduleParams::always_on(1.0),
            seed,
        );
        for (t, r) in run.steps().iter().enumerate() {
            assert!(
                r.reward_mean <= 0.02,
                "seed {seed} step {t}: {}",
                r.reward_mean
            );
        }
    }
}

#[test]
fn kl_explosion_ramp_ends_far_above_profile() {
    let profile = verification_profile(42).unwrap();
    let kl_mean = profile.statistic(Statistic::KlMean).unwrap().location;
    for seed in 0..20 {
        let run = easy_run(
            FaultType::KlExplosion,
            ScheduleParams::ramp(1.0, 0, 5),
            seed,
        );
        let last = run.steps().last().unwrap().kl_mean;
        assert!(last > 10.0 * kl_mean, "seed {seed}: {last} vs {kl_mean}");
    }
}

#[test]
fn verifier_examples() {
    let profile = verification_profile(42).unwrap();
    let healthy = simulate_healthy(&SimConfig::healthy_defaults(), 3);
    let rf1 = FaultSpec::new(
        FaultType::RewardSpike,
        DifficultyRegime::Easy,
        ScheduleParams::always_on(1.0),
    )
    .unwrap();
    assert!(!verify(&healthy, &rf1, &profile).unwrap().passed);

    let run = easy_run(FaultType::RewardSpike, ScheduleParams::always_on(1.0), 3);
    let r = verify(&run, &rf1, &profile).unwrap();
    assert!(r.passed);
    assert!(r.statistic_value >= 3.0);
    assert_eq!(r.direction, Direction::AtLeast);

    let pg1 = FaultSpec::new(
        FaultType::EmptyResponse,
        DifficultyRegime::Easy,
        ScheduleParams::always_on(1.0),
    )
    .unwrap();
    let run = easy_run(FaultType::EmptyResponse, ScheduleParams::always_on(1.0), 3);
    assert!(verify(&run, &pg1, &profile).unwrap().passed);
}

fn salience(
    run: &TrainingRun,
    fault: FaultType,
    profile: &rftfm_core::detect::NormalProfile,
) -> f64 {
    let r = verify_with_bound(run, fault, DifficultyRegime::Easy, profile).unwrap();
    match r.direction {
        Direction::AtLeast => r.statistic_value,
        Direction::AtMost => -r.statistic_value,
    }
}

#[test]
fn salience_grows_with_strength() {
    let profile = verification_profile(42).unwrap();
    for fault in FaultType::ALL {
        let mean_at = |u: f64| {
            let total: f64 = (0..20)
                .map(|seed| {
                    salience(
                        &easy_run(fault, ScheduleParams::always_on(u), seed),
                        fault,
                        &profile,
                    )
                })
                .sum();
            total / 20.0
        };
        let (a, b, c) = (mean_at(0.25), mean_at(0.5), mean_at(1.0));
        assert!(a <= b && b <= c, "{fault}: {a} {b} {c}");
    }
}

#[test]
fn verification_is_sound() {
    let profile = verification_profile(42).unwrap();
    let mut passed = 0;
    let mut total = 0;
    for fault in FaultType::ALL {
        for seed in 0..8u64 {
            let spec = FaultSpec::realize(fault, DifficultyRegime::Easy, 9000 + seed);
            let sched = build_schedule(&spec, 20, 9000 + seed).unwrap();
            let run = inject(&SimConfig::healthy_defaults(), &spec, &sched, 9000 + seed).unwrap();
            total += 1;
            passed += verify(&run, &spec, &profile).unwrap().passed as usize;
        }
    }
    assert!(passed as f64 >= 0.95 * total as f64, "{passed}/{total}");

    let mut false_pass = 0;
    for seed in 0..100 {
        let run = simulate_healthy(&SimConfig::healthy_defaults(), 50_000 + seed);
        let any = FaultType::ALL.iter().any(|&f| {
            verify_with_bound(&run, f, DifficultyRegime::Easy, &profile)
                .unwrap()
                .passed
        });
        false_pass += any as usize;
    }
    assert!(false_pass <= 5, "{false_pass}/100 healthy runs pass a rule");
}

fn small_plan(seed: u64) -> BenchmarkPlan {
    BenchmarkPlan::uniform(seed, 1, 1, 3)
}

#[test]
fn curation_is_a_function_of_the_plan() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = curate_benchmark(&small_plan(5), a.path()).unwrap();
    let mb = curate_benchmark(&small_plan(5), b.path()).unwrap();
    assert_eq!(ma, mb);
    assert_eq!(ma.runs.len(), 16 + 16 + 3);
    for e in &ma.runs {
        assert_eq!(
            std::fs::read(a.path().join(&e.path)).unwrap(),
            std::fs::read(b.path().join(&e.path)).unwrap()
        );
    }
    let read = |p: &Path| std::fs::read(p.join(BenchmarkManifest::FILE)).unwrap();
    assert_eq!(read(a.path()), read(b.path()));

    let loaded = load_benchmark(a.path()).unwrap();
    assert_eq!(loaded.runs.len(), 35);
    assert_eq!(loaded.normals().len(), 3);
    assert!(loaded
        .faulty(DifficultyRegime::Hard)
        .iter()
        .all(|r| r.len() == 40));
    assert!(loaded
        .faulty(DifficultyRegime::Easy)
        .iter()
        .all(|r| r.len() == 20));
}

#[test]
fn empty_plan_gives_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let m = curate_benchmark(&BenchmarkPlan::uniform(1, 0, 0, 0), dir.path()).unwrap();
    assert!(m.runs.is_empty());
    assert_eq!(m.fault_count(DifficultyRegime::Easy), 0);
}

#[test]
fn easy_family_record_counts() {
    let dir = tempfile::tempdir().unwrap();
    let plan = BenchmarkPlan::uniform(42, 20, 0, 0);
    curate_benchmark(&plan, dir.path()).unwrap();
    let bench = load_benchmark(dir.path()).unwrap();
    let rf: Vec<_> = bench
        .faulty(DifficultyRegime::Easy)
        .into_iter()
        .filter(|r| r.label().family() == FaultFamily::Reward)
        .collect();
    assert_eq!(rf.len(), 60);
    assert_eq!(rf.iter().map(|r| r.len()).sum::<usize>(), 1200);
}

#[test]
fn loading_reports_missing_and_broken_files() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        load_benchmark(dir.path()),
        Err(InjectError::ManifestMissing(_))
    ));
    curate_benchmark(&BenchmarkPlan::uniform(2, 0, 0, 3), dir.path()).unwrap();
    std::fs::write(dir.path().join("normal/normal_001.jsonl"), "not json\n").unwrap();
    assert!(matches!(
        load_benchmark(dir.path()),
        Err(InjectError::Run { .. })
    ));
    std::fs::write(dir.path().join(BenchmarkManifest::FILE), "{").unwrap();
    assert!(matches!(
        load_benchmark(dir.path()),
        Err(InjectError::Manifest(_))
    ));
}

#[test]
fn hard_specs_stay_in_band() {
    for seed in 0..200 {
        let spec = FaultSpec::realize(FaultType::ToolCallError, DifficultyRegime::Hard, seed);
        assert!((0.25..=0.5).contains(&spec.params.base_strength));
        assert!((5..=20).contains(&spec.params.onset_step));
        assert!(FaultSpec::new(spec.fault_type, spec.regime, spec.params).is_ok());
    }
    assert!(FaultSpec::new(
        FaultType::Normal,
        DifficultyRegime::Easy,
        ScheduleParams::always_on(1.0)
    )
    .is_err());
    assert!(FaultSpec::new(
        FaultType::KlExplosion,
        DifficultyRegime::Easy,
        ScheduleParams::always_on(0.5)
    )
    .is_err());
}
