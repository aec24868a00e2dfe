use twistlab_core::layout::{build_double_sided, build_square, build_wide, Variant};
use twistlab_core::scheduler::*;
use twistlab_core::surgery::MergeKind;

fn builder_layouts(d: usize) -> Vec<SchedLayout> {
    let mut v = vec![
        SchedLayout::from_patch("square", &build_square(d).unwrap()),
        SchedLayout::from_patch("wide", &build_wide(d).unwrap()),
        SchedLayout::from_patch("double-sided-A", &build_double_sided(d, Variant::A).unwrap()),
        SchedLayout::from_patch("double-sided-B", &build_double_sided(d, Variant::B).unwrap()),
    ];
    for k in [MergeKind::ZZ, MergeKind::XX, MergeKind::XZDislocation, MergeKind::YXTwist, MergeKind::YZTwist] {
        v.push(SchedLayout::merge_example(d, k).unwrap());
    }
    v
}

#[test]
fn every_builder_layout_gets_a_valid_schedule() {
    for d in [3, 5] {
        for l in builder_layouts(d) {
            let s = synthesize_schedule(&l).unwrap_or_else(|e| panic!("{} d={d}: {e}", l.name));
            assert!(s.steps() <= MAX_STEPS);
            assert_eq!(validate_schedule(&s, &l), vec![], "{} d={d}", l.name);
            let ok = check_readout(&s, &l, d as u64).unwrap();
            assert!(ok.iter().all(|b| *b), "{} d={d}: readout not deterministic", l.name);
        }
    }
}

#[test]
fn schedules_round_trip_through_json() {
    let l = SchedLayout::from_patch("double-sided-A", &build_double_sided(3, Variant::A).unwrap());
    let s = synthesize_schedule(&l).unwrap();
    assert_eq!(Schedule::from_json(&s.to_json()).unwrap(), s);
    assert_eq!(SchedLayout::from_json(&l.to_json()).unwrap(), l);
    assert!(Schedule::from_json("{\"circuits\": 3}").is_err());
}

#[test]
fn tampering_is_detected() {
    let l = SchedLayout::from_patch("square", &build_square(3).unwrap());
    let good = synthesize_schedule(&l).unwrap();

    let mut s = good.clone();
    s.orientation[0] = s.orientation[0].flipped();
    assert!(validate_schedule(&s, &l).iter().any(|v| matches!(v, ScheduleViolation::Orientation { .. })));

    // Reverse one bulk circuit: its order no longer follows its shape.
    let mut s = good.clone();
    let k = s.circuits.iter().position(|c| c.gates.len() == 4).unwrap();
    let steps: Vec<u8> = s.circuits[k].gates.iter().map(|g| g.1).rev().collect();
    for (g, t) in s.circuits[k].gates.iter_mut().zip(steps) {
        g.1 = t;
    }
    assert!(!validate_schedule(&s, &l).is_empty());

    // Put every gate at step 1.
    let mut s = good;
    for c in &mut s.circuits {
        for g in &mut c.gates {
            g.1 = 1;
        }
    }
    let v = validate_schedule(&s, &l);
    assert!(v.iter().any(|v| matches!(v, ScheduleViolation::DataQubit { .. })));
}

#[test]
fn hook_witnesses_replay_to_logicals() {
    for l in builder_layouts(3) {
        let s = synthesize_schedule(&l).unwrap();
        let r = analyze_hook_faults(&l, &s, 3).unwrap();
        let w = r.min_fault_weight_to_logical.expect("some logical within three faults at d=3");
        assert_eq!(r.witness.len(), w);
        assert!(is_nontrivial_logical(&l, &combined_residual(&s, &r.witness)), "{}", l.name);
    }
}

#[test]
fn compliant_patches_keep_hook_distance() {
    for name in ["square", "wide", "double-sided-A"] {
        let l = builder_layouts(3).into_iter().find(|l| l.name == name).unwrap();
        let s = synthesize_schedule(&l).unwrap();
        let r = analyze_hook_faults(&l, &s, 3).unwrap();
        assert_eq!(r.min_fault_weight_to_logical, Some(3), "{name}");
    }
    // The d-row variant has Z-distance d-1 as a code, without any hook.
    let l = builder_layouts(3).into_iter().find(|l| l.name == "double-sided-B").unwrap();
    let s = synthesize_schedule(&l).unwrap();
    let r = analyze_hook_faults(&l, &s, 3).unwrap();
    assert_eq!(r.min_fault_weight_to_logical, Some(2));
    assert!(r.witness.iter().all(|f| matches!(f, Fault::Data { .. })));
}

#[test]
fn svg_has_numbered_arrows() {
    let l = SchedLayout::from_patch("square", &build_square(3).unwrap());
    let s = synthesize_schedule(&l).unwrap();
    let svg = schedule_svg(&l, &s);
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("marker-end").count(), s.circuits.iter().map(|c| c.gates.len()).sum::<usize>());
}

