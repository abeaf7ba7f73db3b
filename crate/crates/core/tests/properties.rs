use proptest::prelude::*;

use rftfm_core::attribute::signed_log;
use rftfm_core::detect::{calibrate, score, DeviationEntry, DeviationVector};
use rftfm_core::eval::{kfold_split, macro_prf, per_class_prf, prf};
use rftfm_core::inject::{build_schedule, inject, FaultSpec, ScheduleParams};
use rftfm_core::remediate::{
    mitigation_metrics, parse_reply, InterventionAction, Knob, RemediationOutcome,
};
use rftfm_core::sim::{simulate_healthy, SimConfig};
use rftfm_core::{
    parse_run, serialize_run, DifficultyRegime, FaultLabel, FaultType, InjectionSchedule,
    ScheduleMode, TrainStepRecord, TrainingRun,
};

fn record(t: u64, v: &[f64; 11]) -> TrainStepRecord {
    TrainStepRecord {
        step: t,
        reward_mean: v[0],
        kl_mean: v[1].abs(),
        entropy_mean: v[2].abs(),
        return_mean: v[3],
        value_mean: v[4],
        advantage_mean: v[5],
        advantage_std: v[6].abs(),
        response_length_mean: v[7].abs() * 100.0,
        policy_loss: v[8],
        tool_error_rate: v[9].abs().fract(),
        truncation_rate: v[10].abs().fract(),
    }
}

fn fault_type() -> impl Strategy<Value = FaultType> {
    (0..16usize).prop_map(|i| FaultType::ALL[i])
}

fn regime() -> impl Strategy<Value = DifficultyRegime> {
    prop_oneof![Just(DifficultyRegime::Easy), Just(DifficultyRegime::Hard)]
}

fn labelled_run(id: String, f: FaultType, r: DifficultyRegime) -> TrainingRun {
    let steps = (0..3).map(|t| record(t, &[0.5; 11])).collect();
    TrainingRun::new(
        id,
        FaultLabel::of(f),
        Some(r),
        0,
        steps,
        Some(InjectionSchedule::inactive(3)),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn run_files_round_trip(
        rows in prop::collection::vec(prop::array::uniform11(-1e6f64..1e6), 1..30),
        f in fault_type(),
        rg in regime(),
        seed in any::<u64>(),
    ) {
        let steps: Vec<_> = rows.iter().enumerate().map(|(t, v)| record(t as u64, v)).collect();
        let sched = InjectionSchedule::inactive(steps.len());
        let run = TrainingRun::new("r", FaultLabel::of(f), Some(rg), seed, steps, Some(sched)).unwrap();
        let bytes = serialize_run(&run);
        prop_assert_eq!(bytes.clone(), serialize_run(&run));
        prop_assert_eq!(parse_run(&bytes).unwrap(), run);
    }

    #[test]
    fn schedules_respect_onset_and_strength(
        steps in 1usize..60,
        onset_frac in 0.0f64..1.0,
        u in 0.01f64..=1.0,
        mode in 0..4usize,
        duty in 0.05f64..=1.0,
        ramp in 1usize..20,
        seed in any::<u64>(),
    ) {
        let onset = ((steps as f64) * onset_frac) as usize;
        let params = match mode {
            0 => ScheduleParams::always_on(u),
            1 => ScheduleParams::delayed(u, onset),
            2 => ScheduleParams::ramp(u, onset, ramp),
            _ => ScheduleParams::intermittent(u, onset, duty),
        };
        let spec = FaultSpec::unchecked(FaultType::KlExplosion, DifficultyRegime::Hard, params);
        let s = build_schedule(&spec, steps, seed).unwrap();
        prop_assert_eq!(s.len(), steps);
        let start = params.onset_step;
        for t in 0..steps {
            let x = s.strength(t);
            prop_assert!((0.0..=u).contains(&x));
            if t < start {
                prop_assert_eq!(x, 0.0);
            }
        }
        match s.mode {
            ScheduleMode::AlwaysOn | ScheduleMode::Delayed => {
                prop_assert!((start..steps).all(|t| s.strength(t) == u));
            }
            ScheduleMode::Ramp => {
                prop_assert!((start + 1..steps).all(|t| s.strength(t) >= s.strength(t - 1)));
            }
            ScheduleMode::Intermittent => {
                prop_assert_eq!(s.first_active(), Some(start));
                prop_assert!(s.active_steps().iter().all(|&t| s.strength(t) == u));
            }
        }
        prop_assert_eq!(build_schedule(&spec, steps, seed).unwrap(), s);
    }

    #[test]
    fn zero_strength_and_delayed_prefix(seed in any::<u64>(), f in fault_type(), onset in 1usize..39) {
        let cfg = SimConfig::with_steps(40);
        let spec = FaultSpec::unchecked(f, DifficultyRegime::Hard, ScheduleParams::delayed(0.5, onset));
        let sched = build_schedule(&spec, 40, seed).unwrap();
        let healthy = simulate_healthy(&cfg, seed);
        let off = inject(&cfg, &spec, &sched.scaled(0.0), seed).unwrap();
        prop_assert_eq!(off.steps(), healthy.steps());
        let on = inject(&cfg, &spec, &sched, seed).unwrap();
        prop_assert_eq!(&on.steps()[..onset], &healthy.steps()[..onset]);
    }

    #[test]
    fn severity_is_monotone_and_order_free(
        entries in prop::collection::vec((0..5usize, 0.0f64..100.0), 1..25),
        bump_at in any::<prop::sample::Index>(),
        bump in 0.0f64..50.0,
    ) {
        let dev = |es: &[(usize, f64)]| DeviationVector {
            entries: es.iter().enumerate().map(|(i, &(g, v))| DeviationEntry { name: format!("s{i}"), group: g, value: v }).collect(),
            group_count: 5,
        };
        let s = score(&dev(&entries));
        prop_assert!(s.overall >= 0.0);
        let mut maxima = [0.0f64; 5];
        for &(g, v) in &entries {
            maxima[g] = maxima[g].max(v);
        }
        prop_assert_eq!(s.per_invariant.clone(), maxima.to_vec());
        prop_assert!((s.overall - maxima.iter().sum::<f64>() / 5.0).abs() < 1e-12);

        let mut bumped = entries.clone();
        bumped[bump_at.index(entries.len())].1 += bump;
        prop_assert!(score(&dev(&bumped)).overall >= s.overall);

        let mut shuffled = entries.clone();
        shuffled.reverse();
        prop_assert_eq!(score(&dev(&shuffled)).overall, s.overall);
    }

    #[test]
    fn f1_is_the_harmonic_mean(tp in 0usize..50, fp in 0usize..50, fn_ in 0usize..50) {
        let m = prf(tp, fp, fn_);
        for v in [m.precision, m.recall, m.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        let h = if m.precision + m.recall == 0.0 { 0.0 } else { 2.0 * m.precision * m.recall / (m.precision + m.recall) };
        prop_assert!((m.f1 - h).abs() < 1e-12);
    }

    #[test]
    fn macro_f1_is_the_mean_of_class_f1(pairs in prop::collection::vec((0..4u8, prop::option::of(0..4u8)), 1..40)) {
        let classes: Vec<u8> = (0..4).collect();
        let per = per_class_prf(&pairs, &classes);
        let mean = per.iter().map(|(_, p)| p.f1).sum::<f64>() / 4.0;
        let m = macro_prf(&per.iter().map(|(_, p)| *p).collect::<Vec<_>>());
        prop_assert!((m.f1 - mean).abs() < 1e-12);
    }

    #[test]
    fn folds_are_balanced_per_stratum(
        counts in prop::collection::vec((fault_type(), regime(), 1usize..13), 1..6),
        k in 2usize..6,
        seed in any::<u64>(),
    ) {
        let mut runs = Vec::new();
        for (i, &(f, r, n)) in counts.iter().enumerate() {
            for j in 0..n {
                runs.push(labelled_run(format!("{i}_{j}"), f, r));
            }
        }
        let a = kfold_split(&runs, k, seed).unwrap();
        prop_assert_eq!(a.folds.len(), runs.len());
        prop_assert_eq!(&kfold_split(&runs, k, seed).unwrap(), &a);
        let mut strata: std::collections::BTreeMap<(FaultType, Option<DifficultyRegime>), Vec<usize>> = Default::default();
        for r in &runs {
            let sizes = strata.entry((r.label().fault_type(), r.regime())).or_insert_with(|| vec![0; k]);
            sizes[a.fold_of(r.run_id()).unwrap()] += 1;
        }
        for sizes in strata.values() {
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
        let total = a.sizes();
        prop_assert!(total.iter().max().unwrap() - total.iter().min().unwrap() <= 1);
    }

    #[test]
    fn clamped_knobs_are_in_bounds(i in 0..12usize, x in -1e3f64..1e3) {
        let k = Knob::ALL[i];
        prop_assert!(k.in_bounds(k.clamp(x)));
    }

    #[test]
    fn replies_never_yield_invalid_actions(text in ".{0,80}") {
        if let Some(a) = parse_reply(&text) {
            prop_assert!(!a.is_empty());
            prop_assert!(a.knobs().is_ok());
        }
    }

    #[test]
    fn object_replies_are_clamped(vals in prop::collection::vec((0..12usize, -100.0f64..100.0), 1..6)) {
        let obj: serde_json::Map<String, serde_json::Value> =
            vals.iter().map(|&(i, v)| (Knob::ALL[i].name().to_string(), serde_json::json!(v))).collect();
        let a = parse_reply(&serde_json::Value::Object(obj.clone()).to_string()).unwrap();
        prop_assert_eq!(a.changes.len(), obj.len().min(3));
        prop_assert!(a.knobs().unwrap().len() <= 3);
    }

    #[test]
    fn mitigation_rate_and_sign(sev in prop::collection::vec((0.01f64..10.0, 0.0f64..10.0), 1..20)) {
        let outcomes: Vec<_> = sev.iter().map(|&(b, a)| RemediationOutcome {
            run_id: "r".into(),
            fault_type: FaultType::RewardSpike,
            original_severity: b,
            post_severity: a,
            mitigated: a < b,
            action: InterventionAction::empty(),
            post_run_id: "p".into(),
        }).collect();
        let m = mitigation_metrics(&outcomes).unwrap();
        prop_assert!((0.0..=1.0).contains(&m.mitigation_rate));
        if sev.iter().all(|&(b, a)| a < b) {
            prop_assert!(m.median_severity_change > 0.0);
        }
        if sev.iter().all(|&(b, a)| a > b) {
            prop_assert!(m.median_severity_change < 0.0);
        }
    }

    #[test]
    fn signed_log_is_odd_and_monotone(a in -1e6f64..1e6, b in -1e6f64..1e6) {
        prop_assert_eq!(signed_log(-a), -signed_log(a));
        if a <= b {
            prop_assert!(signed_log(a) <= signed_log(b));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn calibration_ignores_order_and_duplication(seeds in prop::collection::vec(any::<u64>(), 3..8), rot in 0usize..8) {
        let runs: Vec<_> = seeds.iter().map(|&s| simulate_healthy(&SimConfig::healthy_defaults(), s)).collect();
        let p = calibrate(&runs, 20).unwrap();
        let mut rotated = runs.clone();
        rotated.rotate_left(rot % runs.len());
        rotated.extend(runs.iter().cloned());
        let q = calibrate(&rotated, 20).unwrap();
        prop_assert_eq!(&p.statistics, &q.statistics);
        prop_assert_eq!(&p.signal_means, &q.signal_means);
        prop_assert_eq!(&p.bands, &q.bands);
        prop_assert_eq!(&p.temporal, &q.temporal);
    }
}
