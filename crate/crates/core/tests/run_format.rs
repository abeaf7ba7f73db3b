use rftfm_core::inject::{build_schedule, inject, FaultSpec};
use rftfm_core::sim::SimConfig;
use rftfm_core::{
    parse_run, serialize_run, DifficultyRegime, FaultFamily, FaultLabel, FaultType, RunError,
};

#[test]
fn hard_reward_spike_run_round_trips() {
    let spec = FaultSpec::realize(FaultType::RewardSpike, DifficultyRegime::Hard, 21);
    let sched = build_schedule(&spec, 40, 21).unwrap();
    let run = inject(&SimConfig::with_steps(40), &spec, &sched, 21).unwrap();
    let bytes = serialize_run(&run);
    assert_eq!(
        String::from_utf8(bytes.clone()).unwrap().lines().count(),
        41
    );
    let back = parse_run(&bytes).unwrap();
    assert_eq!(back, run);
    assert_eq!(back.injection(), Some(&sched));
    assert_eq!(serialize_run(&back), bytes);
}

#[test]
fn taxonomy_is_closed() {
    assert_eq!(FaultType::ALL.len(), 16);
    let mut ids: Vec<_> = FaultType::ALL.iter().map(|f| f.id()).collect();
    ids.sort_unstable();
    ids.dedup();
    assert_eq!(ids.len(), 16);
    let per_family: Vec<usize> = FaultFamily::FAULTY
        .iter()
        .map(|f| f.types().count())
        .collect();
    assert_eq!(per_family.iter().sum::<usize>(), 16);
    for f in FaultType::ALL {
        assert_eq!(FaultLabel::new(f.family(), f).unwrap().fault_type(), f);
        for other in FaultFamily::FAULTY.iter().filter(|&&g| g != f.family()) {
            assert!(FaultLabel::new(*other, f).is_err());
        }
    }
    assert!(FaultLabel::of(FaultType::Normal).is_normal());
}

#[test]
fn header_label_mismatch_names_line_one() {
    let spec = FaultSpec::realize(FaultType::EmptyResponse, DifficultyRegime::Easy, 2);
    let run = inject(
        &SimConfig::healthy_defaults(),
        &spec,
        &build_schedule(&spec, 20, 2).unwrap(),
        2,
    )
    .unwrap();
    let text = String::from_utf8(serialize_run(&run)).unwrap();
    let broken = text.replacen("\"PG\"", "\"RF\"", 1);
    assert!(matches!(
        parse_run(broken.as_bytes()),
        Err(RunError::LabelFamilyMismatch { line: 1, .. })
    ));
}
