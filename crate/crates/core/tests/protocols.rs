use twistlab_core::edge_tracker::{FrameGate, SignedPauli};
use twistlab_core::protocols::{cnot_truth_table, distill_skeleton, run_cnot_case, Workspace};
use twistlab_core::surgery::Target;

fn sp(s: &str) -> SignedPauli {
    s.parse().unwrap()
}

fn plain(n: usize) -> Vec<Vec<FrameGate>> {
    vec![Vec::new(); n]
}

#[test]
fn nearest_and_long_range_truth_tables() {
    for (slots, label) in [(vec![1, 0], "nearest"), (vec![4, 0], "separation 3")] {
        for seed in 0..3 {
            let t = cnot_truth_table(3, &slots, &plain(2), seed).unwrap();
            assert_eq!(t.matches(), 16, "{label} seed {seed}: {:?}", t.rows.iter().find(|r| !r.matched));
        }
    }
}

#[test]
fn multi_target_in_rotated_frames() {
    let frames: [&[FrameGate]; 3] = [&[], &[FrameGate::H], &[FrameGate::H, FrameGate::S]];
    for frame in frames {
        // Plain control, every target in the same frame.
        let mut all = vec![Vec::new()];
        all.extend(vec![frame.to_vec(); 3]);
        let t = cnot_truth_table(3, &[3, 2, 1, 0], &all, 5).unwrap();
        assert_eq!(t.matches(), 16, "{frame:?}");
        let row = run_cnot_case(3, &[3, 2, 1, 0], &all, &["+", "-", "0", "+"], 9).unwrap();
        assert!(row.matched, "{frame:?} mixed: {:?}", row.mismatch);
    }
}

#[test]
fn multi_target_with_one_target_per_seam_type() {
    // Plain XX, XZ-dislocation and YX-twist merges in one fan-out.
    let frames = vec![vec![], vec![], vec![FrameGate::H], vec![FrameGate::H, FrameGate::S]];
    for seed in 0..2 {
        let t = cnot_truth_table(3, &[3, 2, 1, 0], &frames, seed).unwrap();
        assert_eq!(t.matches(), 16, "seed {seed}");
    }
}

#[test]
fn long_range_trace_is_deterministic() {
    let run = |seed| {
        let mut ws = Workspace::new(3, 5, seed).unwrap();
        let c = ws.place_data("c", 4).unwrap();
        let t = ws.place_data("t", 0).unwrap();
        ws.prepare(c, sp("+X")).unwrap();
        ws.prepare(t, sp("+Z")).unwrap();
        ws.long_range_cnot(c, t).unwrap();
        ws.trace_json()
    };
    assert_eq!(run(11), run(11));
}

#[test]
fn pauli_product_measurement() {
    for seed in 0..4 {
        let mut ws = Workspace::new(3, 4, seed).unwrap();
        let a = ws.place_data("a", 0).unwrap();
        let b = ws.place_data("b", 1).unwrap();
        let c = ws.place_data("c", 2).unwrap();
        let aux = ws.place_data("aux", 3).unwrap();
        ws.prepare(a, sp("-X")).unwrap();
        ws.prepare(b, sp("+Y")).unwrap();
        ws.prepare(c, sp("-Z")).unwrap();
        let v = ws.measure_pauli_product(aux, &[(a, sp("+X")), (b, sp("+Y")), (c, sp("+Z"))]).unwrap();
        assert_eq!(v, 1, "seed {seed}");
        assert_eq!(ws.board.peek_logical(&[Target::new(b, sp("+Y"))]).unwrap(), Some(1));
    }
}

#[test]
fn distillation_skeleton_accepts_and_rejects() {
    let (ok, _) = distill_skeleton(3, 1, &[]).unwrap();
    assert!(ok.accepted);
    assert_eq!(ok.cnot_count, 34);
    assert_eq!(ok.group_count, 5);
    for l in [1u8, 7, 15] {
        let (bad, _) = distill_skeleton(3, 2, &[l]).unwrap();
        assert!(!bad.accepted, "Z error on {l} accepted");
    }
}

#[test]
fn rotated_targets_use_dislocation_and_twist_seams() {
    use twistlab_core::protocols::TraceEvent;
    use twistlab_core::surgery::MergeKind;
    let mut ws = Workspace::new(3, 4, 0).unwrap();
    let ids: Vec<_> = (0..4).map(|i| ws.place_data(&format!("q{i}"), 3 - i).unwrap()).collect();
    ws.apply_gate(ids[2], FrameGate::H);
    ws.apply_gate(ids[3], FrameGate::H);
    ws.apply_gate(ids[3], FrameGate::S);
    for id in &ids {
        ws.prepare(*id, sp("+Z")).unwrap();
    }
    ws.multi_target_cnot(ids[0], &ids[1..]).unwrap();
    let kinds: Vec<MergeKind> = ws.trace.iter().filter_map(|e| match e { TraceEvent::Merge { kind, .. } => Some(*kind), _ => None }).collect();
    assert_eq!(kinds, vec![MergeKind::MultiZZ, MergeKind::XX, MergeKind::XZDislocation, MergeKind::YXTwist]);
}

#[test]
fn control_with_z_on_its_x_edge_is_refused() {
    let frames = vec![vec![FrameGate::H], vec![]];
    let err = cnot_truth_table(3, &[1, 0], &frames, 0).unwrap_err();
    assert!(err.to_string().contains("no connector fits"), "{err}");
}
