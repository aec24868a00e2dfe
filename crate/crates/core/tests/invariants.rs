use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twistlab_core::edge_tracker::{default_frame, EdgeFrame, FrameGate};
use twistlab_core::gf2;
use twistlab_core::layout::{build_double_sided, build_square, build_wide, validate, Patch, Variant};
use twistlab_core::{Basis, Gate, PauliOperator, StabilizerState};

const N: usize = 6;

fn gate() -> impl Strategy<Value = Gate> {
    (0..8u8, 0..N, 1..N).prop_map(|(k, a, off)| {
        let b = (a + off) % N;
        match k {
            0 => Gate::H(a),
            1 => Gate::S(a),
            2 => Gate::Sdg(a),
            3 => Gate::X(a),
            4 => Gate::Y(a),
            5 => Gate::Z(a),
            6 => Gate::Cnot(a, b),
            _ => Gate::Cz(a, b),
        }
    })
}

fn pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
    (prop::collection::vec(0..4u8, n), 0..4u8).prop_map(move |(letters, phase)| {
        let factors: Vec<(usize, Basis)> = letters
            .iter()
            .enumerate()
            .filter_map(|(q, l)| [None, Some(Basis::X), Some(Basis::Y), Some(Basis::Z)][*l as usize].map(|b| (q, b)))
            .collect();
        PauliOperator::from_sparse(n, &factors).times_i_pow(phase)
    })
}

fn frame_gate() -> impl Strategy<Value = FrameGate> {
    prop_oneof![Just(FrameGate::H), Just(FrameGate::S), Just(FrameGate::X), Just(FrameGate::Y), Just(FrameGate::Z)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tableau_stays_a_valid_stabilizer_state(ops in prop::collection::vec((gate(), pauli(N), any::<bool>()), 0..80), seed in any::<u64>()) {
        let mut s = StabilizerState::zeros(N).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (g, p, measure) in ops {
            s.apply(g).unwrap();
            if measure && p.is_hermitian() && !p.is_identity() {
                let o = s.measure(&p, &mut rng).unwrap();
                // A repeated measurement returns the same value.
                prop_assert_eq!(s.peek(&p).unwrap(), Some(o.flipped));
            }
        }
        prop_assert_eq!(s.check_invariants(), Ok(()));
        let stabs = s.stabilizers();
        for (i, a) in stabs.iter().enumerate() {
            prop_assert_eq!(s.peek(a).unwrap(), Some(false));
            for b in &stabs[i + 1..] {
                prop_assert!(a.commutes_with(b));
            }
        }
    }

    #[test]
    fn pauli_products_are_associative(a in pauli(4), b in pauli(4), c in pauli(4)) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn swapping_factors_flips_sign_exactly_on_anticommutation(a in pauli(5), b in pauli(5)) {
        let ab = &a * &b;
        let ba = &b * &a;
        prop_assert!(ab.same_letters(&ba));
        let expect = if a.commutes_with(&b) { ba.clone() } else { ba.negated() };
        prop_assert_eq!(ab, expect);
    }

    #[test]
    fn solve_system_returns_a_solution(rows in prop::collection::vec(any::<u16>(), 1..12), x in any::<u16>()) {
        let n = 16;
        let m: Vec<Vec<u64>> = rows.iter().map(|r| vec![*r as u64]).collect();
        let rhs: Vec<bool> = rows.iter().map(|r| (r & x).count_ones() % 2 == 1).collect();
        let y = gf2::solve_system(&m, &rhs, n).expect("consistent system");
        for (r, b) in m.iter().zip(&rhs) {
            prop_assert_eq!(gf2::dot(r, &y), *b);
        }
    }

    #[test]
    fn frame_words_and_inverses_cancel(word in prop::collection::vec(frame_gate(), 0..12)) {
        let f = default_frame().track_all(&word);
        prop_assert!(EdgeFrame::new(f.x_edge, f.z_edge).is_ok());
        // H, X, Y, Z are involutions and S has order four.
        let mut back = f;
        for g in word.iter().rev() {
            let inv: &[FrameGate] = if *g == FrameGate::S { &[FrameGate::S, FrameGate::S, FrameGate::S] } else { std::slice::from_ref(g) };
            back = back.track_all(inv);
        }
        prop_assert_eq!(back, default_frame());
    }

    #[test]
    fn translated_patches_stay_valid(dr in 0..4i32, dc in 0..4i32, which in 0..4usize) {
        let p: Patch = match which {
            0 => build_square(3).unwrap(),
            1 => build_wide(3).unwrap(),
            2 => build_double_sided(3, Variant::A).unwrap(),
            _ => build_double_sided(3, Variant::B).unwrap(),
        };
        // Even offsets keep the checkerboard; odd ones must be refused.
        match p.translated(2 * dr, 2 * dc) {
            Ok(t) => {
                prop_assert!(validate(&t).is_valid());
                prop_assert_eq!(Patch::from_json(&t.to_json()).unwrap(), t);
            }
            Err(e) => prop_assert!(false, "even translation refused: {}", e),
        }
        prop_assert!(p.translated(2 * dr + 1, 2 * dc).is_err());
    }
}

#[test]
fn solve_system_reports_inconsistency() {
    let rows = vec![vec![0b011u64], vec![0b101], vec![0b110]];
    assert!(gf2::solve_system(&rows, &[true, true, true], 3).is_none());
    let y = gf2::solve_system(&rows, &[true, true, false], 3).unwrap();
    assert!(gf2::dot(&rows[0], &y) && gf2::dot(&rows[1], &y) && !gf2::dot(&rows[2], &y));
}
