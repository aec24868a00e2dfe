#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use twistlab_core::edge_tracker::{reachable_frames, FrameGate, SignedPauli};
use twistlab_core::layout::{Coord, Stabilizer};
use twistlab_core::oracle::DenseState;
use twistlab_core::protocols::{compare_with_oracle, Workspace};
use twistlab_core::surgery::{merge_example, MergeKind};
use twistlab_core::{Basis, Gate, InitBasis, PauliOperator, StabilizerState};

pub const TOL: f64 = 1e-9;

pub fn eigenstates() -> Vec<SignedPauli> {
    [Basis::X, Basis::Y, Basis::Z].into_iter().flat_map(|b| [SignedPauli::plus(b), SignedPauli::minus(b)]).collect()
}

pub fn frame_gate(g: FrameGate, q: usize) -> Gate {
    match g {
        FrameGate::H => Gate::H(q),
        FrameGate::S => Gate::S(q),
        FrameGate::X => Gate::X(q),
        FrameGate::Y => Gate::Y(q),
        FrameGate::Z => Gate::Z(q),
    }
}

/// Dense product state with qubit `i` in the +1 eigenstate of `states[i]`.
pub fn dense_eigenstate(states: &[SignedPauli]) -> DenseState {
    let bases: Vec<InitBasis> = states.iter().map(|s| if s.letter == Basis::Z { InitBasis::Zero } else { InitBasis::Plus }).collect();
    let mut d = DenseState::new(&bases).unwrap();
    for (q, s) in states.iter().enumerate() {
        let fix = match (s.letter, s.negative) {
            (Basis::Z, true) => Some(Gate::X(q)),
            (Basis::X, true) => Some(Gate::Z(q)),
            (Basis::Y, false) => Some(Gate::S(q)),
            (Basis::Y, true) => Some(Gate::Sdg(q)),
            _ => None,
        };
        if let Some(g) = fix {
            d.apply(g.into()).unwrap();
        }
    }
    d
}

fn signed(n: usize, factors: &[(usize, SignedPauli)]) -> PauliOperator {
    let op = PauliOperator::from_sparse(n, &factors.iter().map(|(q, s)| (*q, s.letter)).collect::<Vec<_>>());
    if factors.iter().filter(|(_, s)| s.negative).count() % 2 == 1 {
        op.negated()
    } else {
        op
    }
}

/// Checks an observed `+1/-1` outcome against the dense probability of `+1`:
/// deterministic cases must agree, random ones must be fair.
fn outcome_consistent(p_plus: f64, value: i8) -> Result<(), String> {
    let deterministic = p_plus < TOL || p_plus > 1.0 - TOL;
    if deterministic {
        let expect = if p_plus > 0.5 { 1 } else { -1 };
        if value != expect {
            return Err(format!("deterministic outcome {expect} expected, got {value}"));
        }
    } else if (p_plus - 0.5).abs() > TOL {
        return Err(format!("stabilizer outcome probabilities are 0, 1/2 or 1, oracle gave {p_plus}"));
    }
    Ok(())
}

#[derive(Debug, Default)]
pub struct FrameReport {
    pub frames: usize,
    pub cases: usize,
    pub failures: Vec<String>,
}

/// For every reachable edge frame at distance `d`: prepare each of the six
/// eigenstates both before and after the frame's gate word, compare all
/// logical expectations with the dense oracle, then measure X, Y and Z by
/// surgery and follow the oracle through each projection.
pub fn frame_consistency(d: usize, seed: u64) -> FrameReport {
    let mut report = FrameReport::default();
    let frames = reachable_frames();
    report.frames = frames.len();
    for (fi, (frame, word)) in frames.iter().enumerate() {
        for (si, s) in eigenstates().into_iter().enumerate() {
            for prepare_first in [true, false] {
                let case_seed = seed.wrapping_add((fi * 100 + si * 2 + prepare_first as usize) as u64);
                report.cases += 1;
                let tag = format!("frame {frame:?} word {word:?} state {s} prepare_first {prepare_first}");
                if let Err(e) = frame_case(d, word, s, prepare_first, case_seed) {
                    report.failures.push(format!("{tag}: {e}"));
                }
            }
        }
    }
    report
}

fn frame_case(d: usize, word: &[FrameGate], s: SignedPauli, prepare_first: bool, seed: u64) -> Result<(), String> {
    let mut ws = Workspace::new(d, 1, seed).map_err(|e| e.to_string())?;
    let id = ws.place_data("q", 0).map_err(|e| e.to_string())?;
    let mut dense = dense_eigenstate(&[s]);
    if prepare_first {
        ws.prepare(id, s).map_err(|e| e.to_string())?;
        for g in word {
            ws.apply_gate(id, *g);
            dense.apply(frame_gate(*g, 0).into()).unwrap();
        }
    } else {
        for g in word {
            ws.apply_gate(id, *g);
        }
        ws.prepare(id, s).map_err(|e| e.to_string())?;
    }
    if let Some(m) = compare_with_oracle(&ws.board, &[id], &dense).map_err(|e| e.to_string())? {
        return Err(format!("after preparation: {m}"));
    }
    for b in [Basis::X, Basis::Y, Basis::Z] {
        let p = SignedPauli::plus(b);
        let op = signed(1, &[(0, p)]);
        let p_plus = dense.prob_plus(&op).unwrap();
        let v = ws.measure_logical(id, p).map_err(|e| e.to_string())?;
        outcome_consistent(p_plus, v).map_err(|e| format!("measuring {b:?}: {e}"))?;
        dense.project(&op, v == -1).map_err(|e| e.to_string())?;
        if let Some(m) = compare_with_oracle(&ws.board, &[id], &dense).map_err(|e| e.to_string())? {
            return Err(format!("after measuring {b:?}: {m}"));
        }
    }
    Ok(())
}

pub const CHECKED_MERGES: [MergeKind; 4] = [MergeKind::ZZ, MergeKind::XX, MergeKind::XZDislocation, MergeKind::YXTwist];

#[derive(Debug, Default)]
pub struct MergeReport {
    pub preps: usize,
    pub commuting: bool,
    pub rank_rise: i64,
    pub boundary_deterministic: bool,
    pub failures: Vec<String>,
}

/// Runs a two-patch merge of `kind` on all 36 eigenstate pairs and checks
/// the algebra, the determinism of the merged boundary, the parity against
/// the dense oracle and the post-split logical state.
pub fn merge_oracle(d: usize, kind: MergeKind, seed: u64) -> MergeReport {
    let mut report = MergeReport { commuting: true, rank_rise: 1, boundary_deterministic: true, ..Default::default() };
    let states = eigenstates();
    for (i, s1) in states.iter().enumerate() {
        for (j, s2) in states.iter().enumerate() {
            report.preps += 1;
            let case_seed = seed.wrapping_mul(64).wrapping_add((i * 6 + j) as u64);
            if let Err(e) = merge_case(d, kind, *s1, *s2, case_seed, &mut report) {
                report.failures.push(format!("{} {s1} {s2}: {e}", kind.name()));
            }
        }
    }
    report
}

fn merge_case(d: usize, kind: MergeKind, s1: SignedPauli, s2: SignedPauli, seed: u64, report: &mut MergeReport) -> Result<(), String> {
    let err = |e: twistlab_core::Error| e.to_string();
    let (mut board, w, a, spec) = merge_example(d, kind, seed).map_err(err)?;
    board.prepare(w, &[s1]).map_err(err)?;
    board.prepare(a, &[s2]).map_err(err)?;
    let check = board.merge_check(&spec).map_err(err)?;
    report.commuting &= check.commuting;
    if check.rank_rise != 1 || check.expected_rise != 1 {
        report.rank_rise = check.rank_rise;
        return Err(format!("rank rise {} (expected {})", check.rank_rise, check.expected_rise));
    }
    let r = match board.execute_merge(&spec) {
        Ok(r) => r,
        Err(e) => {
            report.boundary_deterministic = false;
            return Err(e.to_string());
        }
    };
    if r.boundary_outcomes.iter().any(|&v| v != 1) {
        report.boundary_deterministic = false;
        return Err(format!("merged-boundary outcomes {:?}", r.boundary_outcomes));
    }
    for (stab, &raw) in spec.new_stabilizers().iter().zip(&r.raw_outcomes) {
        let op = board.operator(&stab.support).map_err(err)?;
        let again = board.state().peek(&op).map_err(err)?;
        if again != Some(raw == -1) {
            return Err(format!("new stabilizer {:?} re-measures as {again:?}, first outcome {raw}", stab.support));
        }
    }
    let parity = r.parity(0, 1).ok_or("no pair parity")?;
    let targets: Vec<(usize, SignedPauli)> = spec.participants.iter().enumerate().map(|(k, p)| (k, p.target)).collect();
    let mut dense = dense_eigenstate(&[s1, s2]);
    let op = signed(2, &targets);
    outcome_consistent(dense.prob_plus(&op).unwrap(), parity)?;
    dense.project(&op, parity == -1).map_err(err)?;
    board.split(&spec).map_err(err)?;
    if let Some(m) = compare_with_oracle(&board, &[w, a], &dense).map_err(err)? {
        return Err(format!("after split: {m}"));
    }
    board.state().check_invariants()?;
    Ok(())
}

/// The weight-5 stabilizers of a spec, with their Y positions.
pub fn weight_five(spec_stabs: &[Stabilizer]) -> Vec<(Vec<(Coord, Basis)>, Vec<Coord>)> {
    spec_stabs
        .iter()
        .filter(|s| s.weight() == 5)
        .map(|s| (s.support.clone(), s.support.iter().filter(|(_, b)| *b == Basis::Y).map(|(q, _)| *q).collect()))
        .collect()
}

#[derive(Debug, Default)]
pub struct CliffordReport {
    pub circuits: usize,
    pub gates: usize,
    pub measurements: usize,
    pub deterministic: usize,
    pub random: usize,
    pub mismatches: Vec<String>,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn random_gate<R: Rng>(n: usize, rng: &mut R) -> Gate {
    let a = rng.gen_range(0..n);
    if n > 1 && rng.gen_bool(0.35) {
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        return if rng.gen_bool(0.5) { Gate::Cnot(a, b) } else { Gate::Cz(a, b) };
    }
    match rng.gen_range(0..6) {
        0 => Gate::H(a),
        1 => Gate::S(a),
        2 => Gate::Sdg(a),
        3 => Gate::X(a),
        4 => Gate::Y(a),
        _ => Gate::Z(a),
    }
}

fn random_pauli<R: Rng>(n: usize, rng: &mut R) -> PauliOperator {
    let w = rng.gen_range(1..=n.min(3));
    let qubits = rand::seq::index::sample(rng, n, w);
    let factors: Vec<(usize, Basis)> = qubits.iter().map(|q| (q, [Basis::X, Basis::Y, Basis::Z][rng.gen_range(0..3)])).collect();
    let op = PauliOperator::from_sparse(n, &factors);
    if rng.gen_bool(0.5) {
        op.negated()
    } else {
        op
    }
}

/// Cross-validates the tableau against the dense simulator on random
/// Clifford circuits with interleaved Pauli measurements, then samples the
/// final Z marginal of up to three qubits and pools a chi-square test over
/// every random outcome.
pub fn random_clifford_check(circuits: usize, max_qubits: usize, max_gates: usize, shots: usize, seed: u64) -> CliffordReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CliffordReport { circuits, ..Default::default() };
    let (mut flips, mut coin_tosses) = (0usize, 0usize);
    for c in 0..circuits {
        let n = rng.gen_range(1..=max_qubits);
        let len = rng.gen_range(1..=max_gates);
        let mut tab = StabilizerState::zeros(n).unwrap();
        let mut dense = DenseState::zeros(n).unwrap();
        let mut fail = |msg: String| report.mismatches.push(format!("circuit {c} (n={n}): {msg}"));
        for step in 0..len {
            if rng.gen_bool(0.1) {
                let p = random_pauli(n, &mut rng);
                let p_plus = dense.prob_plus(&p).unwrap();
                let o = tab.measure(&p, &mut rng).unwrap();
                report.measurements += 1;
                if o.deterministic {
                    report.deterministic += 1;
                    let agrees = (p_plus < TOL || p_plus > 1.0 - TOL) && (p_plus > 0.5) != o.flipped;
                    if !agrees {
                        fail(format!("step {step}: tableau deterministic {} vs oracle p+ {p_plus}", o.value()));
                    }
                } else {
                    report.random += 1;
                    coin_tosses += 1;
                    flips += o.flipped as usize;
                    if (p_plus - 0.5).abs() > TOL {
                        fail(format!("step {step}: tableau random vs oracle p+ {p_plus}"));
                    }
                }
                if dense.project(&p, o.flipped).is_err() {
                    fail(format!("step {step}: outcome has zero oracle probability"));
                    break;
                }
            } else {
                let g = random_gate(n, &mut rng);
                report.gates += 1;
                tab.apply(g).unwrap();
                dense.apply(g.into()).unwrap();
            }
        }
        if let Err(e) = tab.check_invariants() {
            fail(format!("tableau invariants: {e}"));
        }
        for g in tab.stabilizers() {
            let e = dense.expectation(&g).unwrap();
            if (e - 1.0).abs() > 1e-8 {
                fail(format!("stabilizer {g:?} has oracle expectation {e}"));
            }
        }
        let k = n.min(3);
        let mut expected = vec![0.0f64; 1 << k];
        for (bits, e) in expected.iter_mut().enumerate() {
            let mut branch = dense.clone();
            let mut prob = 1.0;
            for q in 0..k {
                match branch.project(&PauliOperator::single(n, q, Basis::Z), (bits >> q) & 1 == 1) {
                    Ok(p) => prob *= p,
                    Err(_) => {
                        prob = 0.0;
                        break;
                    }
                }
            }
            *e = prob;
        }
        let mut observed = vec![0usize; 1 << k];
        for _ in 0..shots {
            let mut t = tab.clone();
            let mut bits = 0;
            for q in 0..k {
                if t.measure(&PauliOperator::single(n, q, Basis::Z), &mut rng).unwrap().flipped {
                    bits |= 1 << q;
                }
            }
            observed[bits] += 1;
        }
        let mut bins = 0;
        for (o, p) in observed.iter().zip(&expected) {
            if *p < TOL {
                if *o > 0 {
                    fail("sampled a bitstring with zero oracle probability".into());
                }
                continue;
            }
            let e = p * shots as f64;
            report.chi2 += (*o as f64 - e).powi(2) / e;
            bins += 1;
        }
        report.dof += bins.max(1) - 1;
    }
    if coin_tosses > 0 {
        let e = coin_tosses as f64 / 2.0;
        report.chi2 += (flips as f64 - e).powi(2) / e + ((coin_tosses - flips) as f64 - e).powi(2) / e;
        report.dof += 1;
    }
    report.p_value = if report.dof == 0 { 1.0 } else { 1.0 - ChiSquared::new(report.dof as f64).unwrap().cdf(report.chi2) };
    report
}
