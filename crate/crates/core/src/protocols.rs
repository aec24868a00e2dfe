//! Multi-patch protocols built from merges and splits: CNOT variants,
//! Pauli-product measurement, Y-basis measurement and the physical skeleton
//! of 15-to-1 distillation.
//!
//! Data patches (wide patches) sit in one row with their access side facing
//! down. Below them is a single gap row and then a lane of ancilla
//! rectangles. A CNOT joins the control to a connector ancilla whose top
//! edge has an X-edge tail on the left and a Z-edge under the control; the
//! connector reaches left to one exact ancilla under each target, with
//! bridge ancillas between targets. Targets therefore sit to the left of
//! their control.

use serde::{Deserialize, Serialize};

use crate::distill::{cnot_groups, plus_labels, syndrome};
use crate::edge_tracker::{EdgeFrame, EdgeSelector, FrameGate, SignedPauli};
use crate::error::{invalid, Result};
use crate::layout::{build_wide, wide_junction, Coord, EdgeType};
use crate::oracle::DenseState;
use crate::pauli::PauliOperator;
use crate::tableau::{Gate, InitBasis};
use crate::pauli::Basis;
use crate::surgery::{connector_patch, rect_patch, Board, MergeKind, MergeSpec, ParityResult, PatchId, Target};

/// One entry of a protocol trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Place { patch: String, origin: Coord },
    Prepare { patch: String, state: String },
    Gate { patch: String, gate: FrameGate },
    Merge { kind: MergeKind, participants: Vec<String>, seam_parities: Vec<i8>, raw_outcomes: Vec<i8> },
    Split { byproducts: Vec<(String, Basis)> },
    Readout { patch: String, operator: String, value: i8 },
    Correction { patch: String, pauli: Basis, cause: String },
}

/// A board laid out for protocols at code distance `d`.
pub struct Workspace {
    pub board: Board,
    pub d: usize,
    pub trace: Vec<TraceEvent>,
    lane_serial: usize,
}

fn plus(b: Basis) -> SignedPauli {
    SignedPauli::plus(b)
}

fn bit(v: i8) -> bool {
    v < 0
}

impl Workspace {
    /// Column distance between neighbouring data slots.
    pub fn pitch(d: usize) -> usize {
        2 * d + 4
    }

    pub fn new(d: usize, slots: usize, seed: u64) -> Result<Workspace> {
        if d < 3 || d % 2 == 0 {
            return invalid(format!("distance must be odd and at least 3, got {d}"));
        }
        if slots == 0 {
            return invalid("a workspace needs at least one slot");
        }
        let board = Board::new(2 * d + 1, slots * Self::pitch(d), seed)?;
        Ok(Workspace { board, d, trace: Vec::new(), lane_serial: 0 })
    }

    fn name(&self, id: PatchId) -> String {
        self.board.patch(id).name.clone()
    }

    /// Places a wide data patch in slot `slot`.
    pub fn place_data(&mut self, name: &str, slot: usize) -> Result<PatchId> {
        let col = (slot * Self::pitch(self.d)) as i32;
        let p = build_wide(self.d)?.translated(0, col)?;
        let id = self.board.add_patch(name, p)?;
        self.trace.push(TraceEvent::Place { patch: name.into(), origin: Coord::new(0, col) });
        Ok(id)
    }

    pub fn prepare(&mut self, id: PatchId, state: SignedPauli) -> Result<()> {
        self.board.prepare(id, &[state])?;
        self.trace.push(TraceEvent::Prepare { patch: self.name(id), state: state.to_string() });
        Ok(())
    }

    /// Applies a single-qubit logical Clifford by frame tracking only.
    pub fn apply_gate(&mut self, id: PatchId, gate: FrameGate) {
        let f = self.board.frame(id, 0).track(gate);
        self.board.set_frame(id, 0, f);
        self.trace.push(TraceEvent::Gate { patch: self.name(id), gate });
    }

    pub fn frame(&self, id: PatchId) -> EdgeFrame {
        self.board.frame(id, 0)
    }

    fn correct(&mut self, id: PatchId, pauli: Basis, cause: &str) {
        self.board.apply_logical_pauli(id, 0, pauli);
        self.trace.push(TraceEvent::Correction { patch: self.name(id), pauli, cause: cause.into() });
    }

    /// Destructive logical readout.
    pub fn read(&mut self, id: PatchId, op: SignedPauli) -> Result<i8> {
        let name = self.name(id);
        let value = self.board.read_out(id, 0, op)?;
        self.trace.push(TraceEvent::Readout { patch: name, operator: op.to_string(), value });
        Ok(value)
    }

    /// Plans, executes and splits a merge over the given chain.
    pub fn merge_split(&mut self, kind: Option<MergeKind>, chain: &[Target]) -> Result<(MergeSpec, ParityResult)> {
        let spec = match kind {
            Some(k) => self.board.plan_merge(k, chain)?,
            None => self.board.plan(chain)?,
        };
        let r = self.board.execute_merge(&spec)?;
        self.trace.push(TraceEvent::Merge {
            kind: spec.kind,
            participants: spec.participants.iter().map(|p| p.name.clone()).collect(),
            seam_parities: r.seam_parities.clone(),
            raw_outcomes: r.raw_outcomes.clone(),
        });
        let by = self.board.split(&spec)?;
        self.trace.push(TraceEvent::Split { byproducts: by.iter().map(|b| (self.name(b.patch), b.pauli)).collect() });
        Ok((spec, r))
    }

    /// Columns of the access-side segment realizing `op` on a data patch.
    fn segment(&self, id: PatchId, op: SignedPauli) -> (i32, i32) {
        let p = &self.board.patch(id).patch;
        let c0 = p.rect.origin.col;
        let j = wide_junction(self.d) as i32;
        let w = p.rect.cols as i32;
        match self.frame(id).resolve(op).selector {
            EdgeSelector::ZEdge => (c0, c0 + j),
            EdgeSelector::XEdge => (c0 + j, c0 + w - 1),
            EdgeSelector::Twist => (c0, c0 + w - 1),
        }
    }

    /// Column offset of a lane edge of type `lane_top` facing `op`: a
    /// dislocation seam needs the lane edge one column to the right.
    fn lane_offset(&self, id: PatchId, op: SignedPauli, lane_top: EdgeType) -> i32 {
        match (self.frame(id).resolve(op).selector, lane_top) {
            (EdgeSelector::ZEdge, EdgeType::X) | (EdgeSelector::XEdge, EdgeType::Z) => 1,
            _ => 0,
        }
    }

    fn lane_patch(&mut self, kind: &str, patch: crate::layout::Patch) -> Result<PatchId> {
        self.lane_serial += 1;
        let name = format!("{kind}{}", self.lane_serial);
        let origin = patch.rect.origin;
        let id = self.board.add_patch(name.clone(), patch)?;
        self.trace.push(TraceEvent::Place { patch: name, origin });
        Ok(id)
    }

    fn is_data_row(&self, id: PatchId) -> bool {
        self.board.patch(id).patch.rect.origin.row == 0
    }

    /// CNOT from `control` onto every target. Targets must be data patches
    /// to the left of the control. Returns the measured values.
    pub fn multi_target_cnot(&mut self, control: PatchId, targets: &[PatchId]) -> Result<CnotRecord> {
        if targets.is_empty() {
            return invalid("a CNOT needs at least one target");
        }
        let cc = self.board.patch(control).patch.rect.origin.col;
        let mut ts = targets.to_vec();
        ts.sort_by_key(|t| std::cmp::Reverse(self.board.patch(*t).patch.rect.origin.col));
        ts.dedup();
        if ts.len() != targets.len() || ts.contains(&control) {
            return invalid("CNOT targets must be distinct and differ from the control");
        }
        for &t in &ts {
            if !self.is_data_row(t) || self.board.patch(t).patch.rect.origin.col >= cc {
                return invalid(format!("target {} must be a data patch left of the control", self.name(t)));
            }
        }
        let d = self.d;
        let lane = d as i32 + 1;
        let (s0, s1) = self.segment(control, plus(Basis::Z));
        // An offset Z-top would put the connector's tail corner on the wrong
        // checkerboard parity.
        if self.lane_offset(control, plus(Basis::Z), EdgeType::Z) != 0 {
            return invalid(format!("control {} has Z_L on its X-edge; no connector fits under it", self.name(control)));
        }

        let mut ancillas = Vec::new();
        for &t in &ts {
            let (t0, t1) = self.segment(t, plus(Basis::X));
            let o = self.lane_offset(t, plus(Basis::X), EdgeType::X);
            let p = rect_patch(Coord::new(lane, t0 + o), d, (t1 - t0 + 1) as usize, [EdgeType::X, EdgeType::X, EdgeType::Z, EdgeType::Z])?;
            ancillas.push((t, p));
        }
        let x = ancillas[0].1.rect.right_col() + 2;
        if x >= s0 {
            return invalid("no room for the connector ancilla");
        }
        let connector = connector_patch(Coord::new(lane, x), d, (s1 - x + 1) as usize, (s0 - x) as usize)?;
        let mut bridges = Vec::new();
        for k in 0..ancillas.len() - 1 {
            let lo = ancillas[k + 1].1.rect.right_col() + 2;
            let hi = ancillas[k].1.rect.origin.col - 2;
            if lo > hi {
                return invalid("targets are too close for a bridge ancilla");
            }
            bridges.push(rect_patch(Coord::new(lane, lo), d, (hi - lo + 1) as usize, [EdgeType::X, EdgeType::X, EdgeType::Z, EdgeType::Z])?);
        }

        let a1 = self.lane_patch("connector", connector)?;
        let mut anc_ids = Vec::new();
        for (_, p) in ancillas {
            anc_ids.push(self.lane_patch("ancilla", p)?);
        }
        let mut bridge_ids = Vec::new();
        for p in bridges {
            bridge_ids.push(self.lane_patch("bridge", p)?);
        }
        for &id in std::iter::once(&a1).chain(&anc_ids).chain(&bridge_ids) {
            self.prepare(id, plus(Basis::X))?;
        }

        // Chain: control, connector, ancilla 0, bridge 0, ancilla 1, ...
        let mut chain = vec![Target::new(control, plus(Basis::Z)), Target::new(a1, plus(Basis::Z))];
        let mut anc_pos = Vec::new();
        for (k, &a) in anc_ids.iter().enumerate() {
            anc_pos.push(chain.len());
            chain.push(Target::new(a, plus(Basis::Z)));
            if k < bridge_ids.len() {
                chain.push(Target::new(bridge_ids[k], plus(Basis::Z)));
            }
        }
        let (_, zz) = self.merge_split(Some(MergeKind::MultiZZ), &chain)?;
        let s1: Vec<i8> = anc_pos.iter().map(|&p| zz.parity(0, p).expect("chain parity")).collect();

        let mut m = Vec::new();
        for &id in std::iter::once(&a1).chain(&bridge_ids) {
            m.push(self.read(id, plus(Basis::X))?);
        }
        let mut s2 = Vec::new();
        let mut s3 = Vec::new();
        for (k, &a) in anc_ids.iter().enumerate() {
            let (_, xx) = self.merge_split(None, &[Target::new(ts[k], plus(Basis::X)), Target::new(a, plus(Basis::X))])?;
            s2.push(xx.parity(0, 1).expect("pair parity"));
            s3.push(self.read(a, plus(Basis::Z))?);
        }

        let z_control = m.iter().chain(&s2).fold(false, |acc, v| acc ^ bit(*v));
        if z_control {
            self.correct(control, Basis::Z, "Z^(s2 + m)");
        }
        for k in 0..ts.len() {
            if bit(s1[k]) ^ bit(s3[k]) {
                self.correct(ts[k], Basis::X, "X^(s1 + s3)");
            }
        }
        Ok(CnotRecord { control, targets: ts, s1, s2, s3, m })
    }

    pub fn cnot(&mut self, control: PatchId, target: PatchId) -> Result<CnotRecord> {
        self.multi_target_cnot(control, &[target])
    }

    /// CNOT across any number of intermediate slots; the connector spans them.
    pub fn long_range_cnot(&mut self, control: PatchId, target: PatchId) -> Result<CnotRecord> {
        self.multi_target_cnot(control, &[target])
    }

    /// Non-destructive measurement of a logical Pauli through a surgery
    /// merge with a fresh lane ancilla whose top edge is a Z-edge.
    pub fn measure_logical(&mut self, id: PatchId, op: SignedPauli) -> Result<i8> {
        if !self.is_data_row(id) {
            return invalid("only data patches can be measured by surgery");
        }
        let (t0, t1) = self.segment(id, op);
        let o = self.lane_offset(id, op, EdgeType::Z);
        let p = rect_patch(Coord::new(self.d as i32 + 1, t0 + o), self.d, (t1 - t0 + 1) as usize, [EdgeType::Z, EdgeType::Z, EdgeType::X, EdgeType::X])?;
        let a = self.lane_patch("probe", p)?;
        self.prepare(a, plus(Basis::Z))?;
        let (_, r) = self.merge_split(None, &[Target::new(id, op), Target::new(a, plus(Basis::Z))])?;
        let z = self.read(a, plus(Basis::Z))?;
        Ok(r.parity(0, 1).expect("pair parity") * z)
    }

    pub fn measure_y_basis(&mut self, id: PatchId) -> Result<i8> {
        self.measure_logical(id, plus(Basis::Y))
    }

    /// Measures a product of signed logical Paulis on data patches with an
    /// auxiliary data patch `aux` to the right of all factors: `aux` starts
    /// in `|+>`, controls a rotated multi-target CNOT and is read in X.
    pub fn measure_pauli_product(&mut self, aux: PatchId, factors: &[(PatchId, SignedPauli)]) -> Result<i8> {
        if factors.is_empty() {
            return invalid("empty Pauli product");
        }
        self.prepare(aux, plus(Basis::X))?;
        let rot = |b: Basis| -> (Vec<FrameGate>, Vec<FrameGate>) {
            match b {
                Basis::X => (vec![], vec![]),
                Basis::Z => (vec![FrameGate::H], vec![FrameGate::H]),
                Basis::Y => (vec![FrameGate::S, FrameGate::S, FrameGate::S], vec![FrameGate::S]),
            }
        };
        for (id, p) in factors {
            for g in rot(p.letter).0 {
                self.apply_gate(*id, g);
            }
        }
        let ids: Vec<PatchId> = factors.iter().map(|(id, _)| *id).collect();
        self.multi_target_cnot(aux, &ids)?;
        for (id, p) in factors {
            for g in rot(p.letter).1 {
                self.apply_gate(*id, g);
            }
        }
        let v = self.read(aux, plus(Basis::X))?;
        let sign = factors.iter().fold(1i8, |acc, (_, p)| acc * p.sign());
        Ok(v * sign)
    }

    pub fn trace_json(&self) -> String {
        serde_json::to_string_pretty(&self.trace).expect("trace serializes")
    }
}

/// Measured values of one (multi-target) CNOT, all as `+1/-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CnotRecord {
    pub control: PatchId,
    /// Targets in lane order (right to left).
    pub targets: Vec<PatchId>,
    /// `Z_control Z_ancilla` parity per target.
    pub s1: Vec<i8>,
    /// `X_ancilla X_target` parity per target.
    pub s2: Vec<i8>,
    /// Z readout of each target ancilla.
    pub s3: Vec<i8>,
    /// X readouts of the connector and bridges.
    pub m: Vec<i8>,
}

const LETTERS: [Option<Basis>; 4] = [None, Some(Basis::X), Some(Basis::Y), Some(Basis::Z)];

/// Compares every logical Pauli expectation of the patches `ids` (logical 0
/// of each) with a dense state over the same qubits in the same order.
/// Returns the first mismatch.
pub fn compare_with_oracle(board: &Board, ids: &[PatchId], dense: &DenseState) -> Result<Option<String>> {
    let n = ids.len();
    for code in 1..4usize.pow(n as u32) {
        let mut terms = Vec::new();
        let mut factors = Vec::new();
        let mut c = code;
        for (i, id) in ids.iter().enumerate() {
            if let Some(b) = LETTERS[c % 4] {
                terms.push(Target::new(*id, plus(b)));
                factors.push((i, b));
            }
            c /= 4;
        }
        let e = dense.expectation(&PauliOperator::from_sparse(n, &factors))?;
        let b = board.peek_logical(&terms)?.map_or(0.0, f64::from);
        if (e - b).abs() > 1e-9 {
            return Ok(Some(format!("{factors:?}: oracle {e}, board {b}")));
        }
    }
    Ok(None)
}

/// Input state names accepted by truth tables: `0`, `1`, `+`, `-`.
/// The returned gate (on qubit 0) turns the basis state into the input.
pub fn input_state(s: &str) -> Result<(SignedPauli, InitBasis, Option<Gate>)> {
    Ok(match s {
        "0" => (plus(Basis::Z), InitBasis::Zero, None),
        "1" => (SignedPauli::minus(Basis::Z), InitBasis::Zero, Some(Gate::X(0))),
        "+" => (plus(Basis::X), InitBasis::Plus, None),
        "-" => (SignedPauli::minus(Basis::X), InitBasis::Plus, Some(Gate::Z(0))),
        other => return invalid(format!("unknown input state {other:?}")),
    })
}

fn retarget(g: Gate, q: usize) -> Gate {
    match g {
        Gate::X(_) => Gate::X(q),
        _ => Gate::Z(q),
    }
}

/// One row of a CNOT truth table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub inputs: Vec<String>,
    pub seed: u64,
    pub matched: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mismatch: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthTable {
    pub slots: Vec<usize>,
    pub frames: Vec<Vec<FrameGate>>,
    pub rows: Vec<TruthRow>,
}

impl TruthTable {
    pub fn matches(&self) -> usize {
        self.rows.iter().filter(|r| r.matched).count()
    }
}

/// Runs a fan-out CNOT from the patch in `slots[0]` onto the others, with
/// the given inputs and per-patch edge frames, and checks the result
/// against the dense oracle.
pub fn run_cnot_case(d: usize, slots: &[usize], frames: &[Vec<FrameGate>], inputs: &[&str], seed: u64) -> Result<TruthRow> {
    let n = slots.len();
    if n < 2 || inputs.len() != n || frames.len() != n {
        return invalid("a CNOT case needs a control, at least one target, and one input and frame per patch");
    }
    let mut ws = Workspace::new(d, slots.iter().max().unwrap() + 1, seed)?;
    let mut bases = Vec::new();
    let mut fixes = Vec::new();
    let mut ids = Vec::new();
    for (i, ((&slot, s), frame)) in slots.iter().zip(inputs).zip(frames).enumerate() {
        let id = ws.place_data(&format!("q{i}"), slot)?;
        for g in frame {
            ws.apply_gate(id, *g);
        }
        let (p, b, fix) = input_state(s)?;
        ws.prepare(id, p)?;
        bases.push(b);
        fixes.extend(fix.map(|g| retarget(g, i)));
        ids.push(id);
    }
    let mut dense = DenseState::new(&bases)?;
    for g in fixes {
        dense.apply(g.into())?;
    }
    for t in 1..n {
        dense.apply(Gate::Cnot(0, t).into())?;
    }
    ws.multi_target_cnot(ids[0], &ids[1..])?;
    let mismatch = compare_with_oracle(&ws.board, &ids, &dense)?;
    Ok(TruthRow { inputs: inputs.iter().map(|s| s.to_string()).collect(), seed, matched: mismatch.is_none(), mismatch })
}

/// All 16 input combinations: `{0,1,+,-}` on control and target for a
/// single-target CNOT, `{0,1}` on all four patches for three targets.
pub fn truth_table_inputs(patches: usize) -> Result<Vec<Vec<&'static str>>> {
    match patches {
        2 => Ok(["0", "1", "+", "-"].iter().flat_map(|a| ["0", "1", "+", "-"].iter().map(move |b| vec![*a, *b])).collect()),
        4 => Ok((0..16u32).map(|m| (0..4).map(|i| if m >> (3 - i) & 1 == 1 { "1" } else { "0" }).collect()).collect()),
        n => invalid(format!("truth tables cover 2 or 4 patches, got {n}")),
    }
}

/// The 16-row truth table of a CNOT layout at one seed.
pub fn cnot_truth_table(d: usize, slots: &[usize], frames: &[Vec<FrameGate>], seed: u64) -> Result<TruthTable> {
    let mut rows = Vec::new();
    for (k, inputs) in truth_table_inputs(slots.len())?.iter().enumerate() {
        rows.push(run_cnot_case(d, slots, frames, inputs, seed.wrapping_mul(1000).wrapping_add(k as u64))?);
    }
    Ok(TruthTable { slots: slots.to_vec(), frames: frames.to_vec(), rows })
}

/// Data-slot order for the distillation skeleton: every group's control
/// sits to the right of its targets.
pub const DISTILL_ORDER: [u8; 15] = [3, 5, 6, 7, 9, 10, 11, 12, 13, 14, 15, 8, 4, 2, 1];

/// Labels stored with an inverted encoding (edge frame rotated by H), so
/// their CNOTs exercise dislocation seams.
pub const INVERTED_LABELS: [u8; 3] = [5, 9, 11];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistillRun {
    pub outcomes: Vec<i8>,
    pub syndrome: [bool; 4],
    pub accepted: bool,
    pub cnot_count: usize,
    pub group_count: usize,
}

/// Physical skeleton of 15-to-1 distillation on wide patches: encoder
/// preparation, the five multi-target CNOT groups and X readout of all
/// fifteen patches. `z_errors` lists labels that receive a logical Z error
/// (applied physically) before readout.
pub fn distill_skeleton(d: usize, seed: u64, z_errors: &[u8]) -> Result<(DistillRun, Workspace)> {
    if let Some(l) = z_errors.iter().find(|l| !(1..=15).contains(*l)) {
        return invalid(format!("label {l} is outside 1..=15"));
    }
    let mut ws = Workspace::new(d, 15, seed)?;
    let mut ids = [0usize; 16];
    for (slot, &label) in DISTILL_ORDER.iter().enumerate() {
        ids[label as usize] = ws.place_data(&format!("q{label}"), slot)?;
    }
    for label in 1..=15u8 {
        let id = ids[label as usize];
        if INVERTED_LABELS.contains(&label) {
            ws.apply_gate(id, FrameGate::H);
        }
        let state = if plus_labels().contains(&label) { plus(Basis::X) } else { plus(Basis::Z) };
        ws.prepare(id, state)?;
    }
    let mut cnot_count = 0;
    let groups = cnot_groups();
    for g in &groups {
        let targets: Vec<PatchId> = g.targets.iter().map(|t| ids[*t as usize]).collect();
        ws.multi_target_cnot(ids[g.control as usize], &targets)?;
        cnot_count += targets.len();
    }
    for &l in z_errors {
        let op = ws.board.logical_operator(ids[l as usize], 0, plus(Basis::Z))?;
        ws.board.apply_physical(&op)?;
        ws.trace.push(TraceEvent::Correction { patch: format!("q{l}"), pauli: Basis::Z, cause: "injected error".into() });
    }
    let mut outcomes = Vec::new();
    let mut flips = [false; 15];
    for label in 1..=15u8 {
        let v = ws.read(ids[label as usize], plus(Basis::X))?;
        flips[label as usize - 1] = bit(v);
        outcomes.push(v);
    }
    let syn = syndrome(&flips);
    let accepted = syn.iter().all(|b| !b);
    Ok((DistillRun { outcomes, syndrome: syn, accepted, cnot_count, group_count: groups.len() }, ws))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(s: &str) -> SignedPauli {
        s.parse().unwrap()
    }

    #[test]
    fn nearest_cnot_flips_target() {
        for seed in 0..4 {
            let mut ws = Workspace::new(3, 2, seed).unwrap();
            let t = ws.place_data("t", 0).unwrap();
            let c = ws.place_data("c", 1).unwrap();
            ws.prepare(c, sp("-Z")).unwrap();
            ws.prepare(t, sp("+Z")).unwrap();
            ws.cnot(c, t).unwrap();
            assert_eq!(ws.board.peek_logical(&[Target::new(c, sp("+Z"))]).unwrap(), Some(-1));
            assert_eq!(ws.board.peek_logical(&[Target::new(t, sp("+Z"))]).unwrap(), Some(-1), "seed {seed}");
        }
    }

    #[test]
    fn y_measurement_is_repeatable() {
        let mut ws = Workspace::new(3, 1, 5).unwrap();
        let q = ws.place_data("q", 0).unwrap();
        ws.prepare(q, sp("-Y")).unwrap();
        assert_eq!(ws.measure_y_basis(q).unwrap(), -1);
        assert_eq!(ws.measure_y_basis(q).unwrap(), -1);
    }
}
