//! Ancilla-based stabilizer readout: circuit construction, the three
//! ordering conditions, schedule synthesis in at most five time steps and
//! exhaustive hook-fault analysis.
//!
//! Each stabilizer is read by one measurement qubit. X-type stabilizers use
//! CNOTs from the measurement qubit (prepared in `|+>`, read in X); Z-type
//! ones use CNOTs onto it (prepared in `|0>`, read in Z); mixed and twist
//! stabilizers use controlled-P gates from the measurement qubit, with the
//! controlled-Y built as `S CNOT S^dagger` on the data qubit.
//!
//! Orientation fixes the order in which a circuit visits its data qubits:
//! a Z-shape visits row by row, an N-shape column by column. The last two
//! qubits visited are where a mid-circuit fault spreads, so a Z-shape leaves
//! horizontal hooks and an N-shape vertical ones.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::gf2;
use crate::layout::{Coord, EdgeType, Indexer, Patch, PatchKind, Stabilizer, StabilizerKind};
use crate::pauli::{Basis, PauliOperator};
use crate::surgery::{merge_example, Board, MergeKind, MergeSpec};
use crate::tableau::{Gate, StabilizerState};

pub const MAX_STEPS: u8 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shape {
    #[serde(rename = "Z-shape")]
    ZShape,
    #[serde(rename = "N-shape")]
    NShape,
}

impl Shape {
    pub fn flipped(self) -> Shape {
        match self {
            Shape::ZShape => Shape::NShape,
            Shape::NShape => Shape::ZShape,
        }
    }
}

/// Orientation rule for the stabilizers whose centre falls in a box.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    /// Inclusive bounds on the doubled centre coordinates.
    pub rows: (i32, i32),
    pub cols: (i32, i32),
    pub x_type: Shape,
    pub z_type: Shape,
    /// Mixed and twist stabilizers.
    pub other: Shape,
}

impl Region {
    fn contains(&self, c: Coord) -> bool {
        c.row >= self.rows.0 && c.row <= self.rows.1 && c.col >= self.cols.0 && c.col <= self.cols.1
    }

    fn shape_for(&self, kind: StabilizerKind) -> Shape {
        match kind {
            StabilizerKind::XType => self.x_type,
            StabilizerKind::ZType => self.z_type,
            _ => self.other,
        }
    }
}

/// Stabilizers plus the region annotation used to orient their circuits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchedLayout {
    pub name: String,
    pub data_qubits: Vec<Coord>,
    pub stabilizers: Vec<Stabilizer>,
    pub regions: Vec<Region>,
}

/// Centre of a stabilizer in doubled coordinates (twice the mean position).
pub fn centre(s: &Stabilizer) -> Coord {
    let n = s.weight() as i32;
    let (r, c) = s.qubits().fold((0, 0), |(r, c), q| (r + q.row, c + q.col));
    Coord::new((2 * r + n / 2).div_euclid(n), (2 * c + n / 2).div_euclid(n))
}

const ALL: (i32, i32) = (i32::MIN / 4, i32::MAX / 4);

fn region(name: &str, rows: (i32, i32), cols: (i32, i32), x_type: Shape, z_type: Shape, other: Shape) -> Region {
    Region { name: name.into(), rows, cols, x_type, z_type, other }
}

/// Region annotation for the builder layouts, in doubled coordinates.
///
/// A hook must lie across the logical string of its own letter. In these
/// layouts the square's Z logical runs along a row, so Z-type circuits are
/// N-shaped and X-type circuits Z-shaped. The double-sided patch follows the
/// square on its right half and its transpose on its left half, where the Z
/// string runs down the side. On the wide patch both strings run along the
/// bottom, so everything is N-shaped. Crossover columns around the junction
/// use Z-shapes throughout.
pub fn default_regions(patch: &Patch) -> Vec<Region> {
    use Shape::*;
    let r0 = 2 * patch.rect.origin.row;
    let rows = (r0, r0 + 2 * (patch.rect.rows as i32 - 1));
    let c0 = 2 * patch.rect.origin.col;
    let w = patch.rect.cols as i32;
    match patch.kind {
        PatchKind::Square | PatchKind::Ancilla => {
            // The string of the top edge's type runs along the rows.
            if patch.rect.top.first() == Some(&EdgeType::X) {
                vec![region("bulk", rows, ALL, NShape, ZShape, ZShape)]
            } else {
                vec![region("bulk", rows, ALL, ZShape, NShape, ZShape)]
            }
        }
        PatchKind::Wide => {
            // Both logical strings run along the bottom row.
            let j = c0 + 2 * (w / 2);
            vec![
                region("left", rows, (ALL.0, j - 2), NShape, NShape, ZShape),
                region("crossover", rows, (j - 1, j + 1), ZShape, ZShape, ZShape),
                region("right", rows, (j + 2, ALL.1), NShape, NShape, ZShape),
            ]
        }
        PatchKind::DoubleSidedA | PatchKind::DoubleSidedB => {
            let j = c0 + 2 * (w / 2);
            vec![
                region("left", rows, (ALL.0, j - 2), NShape, ZShape, ZShape),
                region("crossover", rows, (j - 1, j + 1), ZShape, ZShape, ZShape),
                region("right", rows, (j + 2, ALL.1), ZShape, NShape, ZShape),
            ]
        }
    }
}

impl SchedLayout {
    pub fn from_patch(name: &str, patch: &Patch) -> SchedLayout {
        SchedLayout {
            name: name.into(),
            data_qubits: patch.data_qubits.clone(),
            stabilizers: patch.stabilizers.clone(),
            regions: default_regions(patch),
        }
    }

    /// The merged code of a planned merge. Seam stabilizers fall outside
    /// the participants' regions; the merged logical runs along the gap row,
    /// so uniform and dislocation faces are N-shaped. Faces of a twist seam
    /// keep Z-shapes, which the twist's neighbours need to fit in five steps.
    pub fn from_merge(name: &str, board: &Board, spec: &MergeSpec) -> Result<SchedLayout> {
        let (data_qubits, stabilizers) = board.merged_code(spec)?;
        let mut regions: Vec<Region> = Vec::new();
        for p in &spec.participants {
            let patch = &board.patch(p.patch).patch;
            for r in default_regions(patch) {
                if !regions.contains(&r) {
                    regions.push(r);
                }
            }
        }
        let twist = spec.seams.iter().any(|s| matches!(s.kind, MergeKind::YXTwist | MergeKind::YZTwist));
        let other = if twist { Shape::ZShape } else { Shape::NShape };
        regions.push(region("seam", ALL, ALL, Shape::NShape, Shape::NShape, other));
        Ok(SchedLayout { name: name.into(), data_qubits, stabilizers, regions })
    }

    /// Layout of the merged code for a two-patch merge of `kind`.
    pub fn merge_example(d: usize, kind: MergeKind) -> Result<SchedLayout> {
        let (board, _, _, spec) = merge_example(d, kind, 0)?;
        SchedLayout::from_merge(&format!("{}-merge", kind.name()), &board, &spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }

    pub fn from_json(s: &str) -> Result<SchedLayout> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// One readout circuit; `gates` holds `(data qubit, time step, letter)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadoutCircuit {
    pub stabilizer: Stabilizer,
    /// Doubled coordinates of the measurement qubit (the stabilizer centre).
    pub measurement_qubit: Coord,
    pub gates: Vec<(Coord, u8, Basis)>,
    pub meas_basis: Basis,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub circuits: Vec<ReadoutCircuit>,
    pub orientation: Vec<Shape>,
}

impl Schedule {
    pub fn steps(&self) -> u8 {
        self.circuits.iter().flat_map(|c| c.gates.iter().map(|g| g.1)).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    pub fn from_json(s: &str) -> Result<Schedule> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn visit_order(s: &Stabilizer, shape: Shape) -> Vec<(Coord, Basis)> {
    let mut v = s.support.clone();
    match shape {
        Shape::ZShape => v.sort_by_key(|(q, _)| (q.row, q.col)),
        Shape::NShape => v.sort_by_key(|(q, _)| (q.col, q.row)),
    }
    v
}

/// Readout circuit with gates at steps `1..=w` in the orientation's order.
pub fn build_readout_circuit(stabilizer: &Stabilizer, shape: Shape) -> Result<ReadoutCircuit> {
    let w = stabilizer.weight();
    if !(2..=5).contains(&w) {
        return Err(Error::InvalidParameter(format!("unsupported stabilizer weight {w}")));
    }
    let gates = visit_order(stabilizer, shape).into_iter().enumerate().map(|(i, (q, b))| (q, i as u8 + 1, b)).collect();
    let meas_basis = if stabilizer.kind == StabilizerKind::ZType { Basis::Z } else { Basis::X };
    Ok(ReadoutCircuit { stabilizer: stabilizer.clone(), measurement_qubit: centre(stabilizer), gates, meas_basis })
}

/// Orientation of every stabilizer from the layout's regions.
pub fn assign_orientations(layout: &SchedLayout) -> Result<Vec<Shape>> {
    if layout.regions.is_empty() {
        return Err(Error::InvalidParameter(format!("layout {} has no region annotation", layout.name)));
    }
    layout
        .stabilizers
        .iter()
        .map(|s| {
            let c = centre(s);
            layout
                .regions
                .iter()
                .find(|r| r.contains(c))
                .map(|r| r.shape_for(s.kind))
                .ok_or_else(|| Error::InvalidParameter(format!("stabilizer centred at {c:?} lies in no region")))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum ScheduleViolation {
    /// Condition (a): orientation differs from the region rule, or the gate
    /// order does not follow the orientation.
    Orientation { stabilizer: usize, detail: String },
    /// Condition (b): two gates on one data qubit share a time step.
    DataQubit { qubit: Coord, step: u8, stabilizers: (usize, usize) },
    /// Condition (c): neighbouring circuits cross on their shared qubits.
    SharedEdge { stabilizers: (usize, usize), qubits: Vec<Coord> },
    StepRange { stabilizer: usize, step: u8 },
    Structure { detail: String },
}

/// Shared qubits of two stabilizers: `(qubit, position in a, position in b, letters anticommute)`.
type Shared = Vec<(Coord, usize, usize, bool)>;

fn neighbours(stabs: &[Vec<(Coord, Basis)>]) -> Vec<(usize, usize, Shared)> {
    let mut by_qubit: HashMap<Coord, Vec<(usize, usize)>> = HashMap::new();
    for (i, s) in stabs.iter().enumerate() {
        for (p, (q, _)) in s.iter().enumerate() {
            by_qubit.entry(*q).or_default().push((i, p));
        }
    }
    let mut pairs: BTreeMap<(usize, usize), Shared> = BTreeMap::new();
    for (q, list) in &by_qubit {
        for (x, &(i, pi)) in list.iter().enumerate() {
            for &(j, pj) in &list[x + 1..] {
                let anti = stabs[i][pi].1.anticommutes(stabs[j][pj].1);
                let (a, b, pa, pb) = if i < j { (i, j, pi, pj) } else { (j, i, pj, pi) };
                pairs.entry((a, b)).or_default().push((*q, pa, pb, anti));
            }
        }
    }
    pairs.into_iter().map(|((a, b), mut s)| {
        s.sort_by_key(|x| x.0);
        (a, b, s)
    }).collect()
}

/// Checks conditions (a), (b) and (c). An empty report means valid.
pub fn validate_schedule(schedule: &Schedule, layout: &SchedLayout) -> Vec<ScheduleViolation> {
    let mut out = Vec::new();
    if schedule.circuits.len() != layout.stabilizers.len() || schedule.orientation.len() != layout.stabilizers.len() {
        out.push(ScheduleViolation::Structure { detail: "one circuit and orientation per stabilizer required".into() });
        return out;
    }
    match assign_orientations(layout) {
        Ok(want) => {
            for (i, (w, got)) in want.iter().zip(&schedule.orientation).enumerate() {
                if w != got {
                    out.push(ScheduleViolation::Orientation { stabilizer: i, detail: format!("region asks for {w:?}, schedule uses {got:?}") });
                }
            }
        }
        Err(e) => out.push(ScheduleViolation::Structure { detail: e.to_string() }),
    }
    let mut stabs = Vec::new();
    for (i, (c, s)) in schedule.circuits.iter().zip(&layout.stabilizers).enumerate() {
        let mut support: Vec<(Coord, Basis)> = c.gates.iter().map(|g| (g.0, g.2)).collect();
        support.sort();
        if c.stabilizer != *s || support != s.support {
            out.push(ScheduleViolation::Structure { detail: format!("circuit {i} does not read stabilizer {i}") });
            return out;
        }
        for g in &c.gates {
            if g.1 == 0 || g.1 > MAX_STEPS {
                out.push(ScheduleViolation::StepRange { stabilizer: i, step: g.1 });
            }
        }
        let order = visit_order(s, schedule.orientation[i]);
        let step_of: HashMap<Coord, u8> = c.gates.iter().map(|g| (g.0, g.1)).collect();
        if order.windows(2).any(|w| step_of[&w[0].0] >= step_of[&w[1].0]) {
            out.push(ScheduleViolation::Orientation { stabilizer: i, detail: "gate order does not follow the orientation".into() });
        }
        stabs.push(c.gates.clone());
    }
    let mut seen: HashMap<(Coord, u8), usize> = HashMap::new();
    for (i, gates) in stabs.iter().enumerate() {
        for g in gates {
            if let Some(&j) = seen.get(&(g.0, g.1)) {
                out.push(ScheduleViolation::DataQubit { qubit: g.0, step: g.1, stabilizers: (j, i) });
            } else {
                seen.insert((g.0, g.1), i);
            }
        }
    }
    let sparse: Vec<Vec<(Coord, Basis)>> = stabs.iter().map(|g| g.iter().map(|x| (x.0, x.2)).collect()).collect();
    for (a, b, shared) in neighbours(&sparse) {
        let crossing = shared.iter().filter(|(_, pa, pb, anti)| *anti && stabs[a][*pa].1 < stabs[b][*pb].1).count();
        if crossing % 2 == 1 {
            out.push(ScheduleViolation::SharedEdge { stabilizers: (a, b), qubits: shared.iter().filter(|x| x.3).map(|x| x.0).collect() });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum ScheduleError {
    #[error("{0}")]
    Layout(String),
    #[error("no schedule within {steps} steps; conflicting stabilizers {core:?}")]
    Unsatisfiable { steps: u8, core: Vec<usize> },
}

impl From<ScheduleError> for Error {
    fn from(e: ScheduleError) -> Error {
        match e {
            ScheduleError::Layout(m) => Error::InvalidParameter(m),
            ScheduleError::Unsatisfiable { .. } => Error::Integrity(e.to_string()),
        }
    }
}

fn increasing_tuples(w: usize, steps: u8) -> Vec<Vec<u8>> {
    fn rec(start: u8, w: usize, steps: u8, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == w {
            out.push(cur.clone());
            return;
        }
        for t in start..=steps {
            cur.push(t);
            rec(t + 1, w, steps, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, w, steps, &mut Vec::new(), &mut out);
    out
}

struct Csp {
    domains: Vec<Vec<Vec<u8>>>,
    adj: Vec<Vec<(usize, Shared, bool)>>,
}

fn compatible(ti: &[u8], tj: &[u8], shared: &Shared, i_is_a: bool) -> bool {
    let mut crossing = 0;
    for (_, pa, pb, anti) in shared {
        let (x, y) = if i_is_a { (ti[*pa], tj[*pb]) } else { (tj[*pa], ti[*pb]) };
        if x == y {
            return false;
        }
        if *anti && x < y {
            crossing += 1;
        }
    }
    crossing % 2 == 0
}

impl Csp {
    fn new(orders: &[Vec<(Coord, Basis)>], steps: u8, subset: &BTreeSet<usize>) -> Csp {
        let domains = orders.iter().map(|o| increasing_tuples(o.len(), steps)).collect();
        let mut adj = vec![Vec::new(); orders.len()];
        for (a, b, shared) in neighbours(orders) {
            if subset.contains(&a) && subset.contains(&b) {
                adj[a].push((b, shared.clone(), true));
                adj[b].push((a, shared, false));
            }
        }
        Csp { domains, adj }
    }

    fn solve(&self, subset: &BTreeSet<usize>, budget: &mut u64) -> Option<Vec<Vec<u8>>> {
        let mut doms: Vec<Vec<Vec<u8>>> = self.domains.clone();
        let mut assigned: Vec<Option<Vec<u8>>> = vec![None; doms.len()];
        if self.dfs(subset, &mut doms, &mut assigned, budget) {
            Some(assigned.into_iter().map(|a| a.unwrap_or_default()).collect())
        } else {
            None
        }
    }

    fn dfs(&self, subset: &BTreeSet<usize>, doms: &mut Vec<Vec<Vec<u8>>>, assigned: &mut Vec<Option<Vec<u8>>>, budget: &mut u64) -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        // Most constrained unassigned stabilizer, lowest index on ties.
        let Some(v) = subset.iter().copied().filter(|&i| assigned[i].is_none()).min_by_key(|&i| (doms[i].len(), i)) else {
            return true;
        };
        for cand in doms[v].clone() {
            let mut saved = Vec::new();
            let mut ok = true;
            for (u, shared, v_is_a) in &self.adj[v] {
                if assigned[*u].is_some() {
                    continue;
                }
                let keep: Vec<Vec<u8>> = doms[*u].iter().filter(|tu| compatible(&cand, tu, shared, *v_is_a)).cloned().collect();
                if keep.is_empty() {
                    ok = false;
                }
                saved.push((*u, std::mem::replace(&mut doms[*u], keep)));
                if !ok {
                    break;
                }
            }
            if ok {
                assigned[v] = Some(cand);
                if self.dfs(subset, doms, assigned, budget) {
                    return true;
                }
                assigned[v] = None;
            }
            for (u, d) in saved.into_iter().rev() {
                doms[u] = d;
            }
        }
        false
    }
}

const SEARCH_BUDGET: u64 = 2_000_000;

/// Backtracking search for time steps satisfying all three conditions,
/// trying the smallest step count first (never more than five).
pub fn synthesize_schedule(layout: &SchedLayout) -> std::result::Result<Schedule, ScheduleError> {
    let shapes = assign_orientations(layout).map_err(|e| ScheduleError::Layout(e.to_string()))?;
    for s in &layout.stabilizers {
        if !(2..=5).contains(&s.weight()) {
            return Err(ScheduleError::Layout(format!("unsupported stabilizer weight {}", s.weight())));
        }
    }
    let orders: Vec<Vec<(Coord, Basis)>> = layout.stabilizers.iter().zip(&shapes).map(|(s, sh)| visit_order(s, *sh)).collect();
    let all: BTreeSet<usize> = (0..orders.len()).collect();
    let min_steps = orders.iter().map(|o| o.len()).max().unwrap_or(1).max(4) as u8;
    for steps in min_steps..=MAX_STEPS {
        let csp = Csp::new(&orders, steps, &all);
        let mut budget = SEARCH_BUDGET;
        if let Some(times) = csp.solve(&all, &mut budget) {
            let circuits = layout
                .stabilizers
                .iter()
                .zip(&orders)
                .zip(&times)
                .map(|((s, o), t)| ReadoutCircuit {
                    stabilizer: s.clone(),
                    measurement_qubit: centre(s),
                    gates: o.iter().zip(t).map(|((q, b), step)| (*q, *step, *b)).collect(),
                    meas_basis: if s.kind == StabilizerKind::ZType { Basis::Z } else { Basis::X },
                })
                .collect();
            return Ok(Schedule { circuits, orientation: shapes });
        }
    }
    Err(ScheduleError::Unsatisfiable { steps: MAX_STEPS, core: unsat_core(&orders) })
}

/// Deletion-based shrinking of the stabilizer set to a set that is still
/// unsatisfiable in five steps.
fn unsat_core(orders: &[Vec<(Coord, Basis)>]) -> Vec<usize> {
    let mut core: BTreeSet<usize> = (0..orders.len()).collect();
    for i in 0..orders.len() {
        let mut trial = core.clone();
        trial.remove(&i);
        let csp = Csp::new(orders, MAX_STEPS, &trial);
        let mut budget = SEARCH_BUDGET;
        if csp.solve(&trial, &mut budget).is_none() {
            core = trial;
        }
    }
    core.into_iter().collect()
}

/// Runs every readout circuit, interleaved by time step, on a code state and
/// returns for each stabilizer whether its outcome was deterministic and
/// equal to the stabilizer's value.
pub fn check_readout(schedule: &Schedule, layout: &SchedLayout, seed: u64) -> Result<Vec<bool>> {
    let nd = layout.data_qubits.len();
    let nm = schedule.circuits.len();
    let idx: HashMap<Coord, usize> = layout.data_qubits.iter().enumerate().map(|(i, q)| (*q, i)).collect();
    let n = nd + nm;
    let mut st = StabilizerState::zeros(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let op_of = |s: &Stabilizer| -> Result<PauliOperator> {
        let f: Option<Vec<(usize, Basis)>> = s.support.iter().map(|(q, b)| idx.get(q).map(|i| (*i, *b))).collect();
        f.map(|f| PauliOperator::from_sparse(n, &f)).ok_or_else(|| Error::InvalidParameter("stabilizer outside the layout".into()))
    };
    let mut expected = Vec::new();
    for s in &layout.stabilizers {
        expected.push(st.measure(&op_of(s)?, &mut rng)?.flipped);
    }
    for (k, c) in schedule.circuits.iter().enumerate() {
        if c.meas_basis == Basis::X {
            st.apply(Gate::H(nd + k))?;
        }
    }
    let mut gates: Vec<(u8, usize, usize, Basis, bool)> = Vec::new();
    for (k, c) in schedule.circuits.iter().enumerate() {
        for g in &c.gates {
            let d = *idx.get(&g.0).ok_or_else(|| Error::InvalidParameter("gate on unknown qubit".into()))?;
            gates.push((g.1, k, d, g.2, c.meas_basis == Basis::Z));
        }
    }
    gates.sort_by_key(|g| (g.0, g.1));
    for (_, k, d, b, onto) in gates {
        let m = nd + k;
        if onto {
            st.apply(Gate::Cnot(d, m))?;
            continue;
        }
        match b {
            Basis::X => st.apply(Gate::Cnot(m, d))?,
            Basis::Z => st.apply(Gate::Cz(m, d))?,
            Basis::Y => {
                st.apply(Gate::Sdg(d))?;
                st.apply(Gate::Cnot(m, d))?;
                st.apply(Gate::S(d))?;
            }
        }
    }
    let mut out = Vec::new();
    for (k, c) in schedule.circuits.iter().enumerate() {
        let o = st.measure(&PauliOperator::single(n, nd + k, c.meas_basis), &mut rng)?;
        out.push(o.deterministic && o.flipped == expected[k]);
    }
    Ok(out)
}

/// A single fault location.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "fault", rename_all = "snake_case")]
pub enum Fault {
    Data { qubit: Coord, pauli: Basis },
    /// Pauli on a measurement qubit right after time step `after_step`.
    Measurement { stabilizer: usize, after_step: u8, pauli: Basis },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaultReport {
    /// Smallest number of faults whose data residual is a nontrivial
    /// logical operator, or `None` if none exists within `searched_up_to`.
    pub min_fault_weight_to_logical: Option<usize>,
    pub searched_up_to: usize,
    pub witness: Vec<Fault>,
    /// Residual data operator of the witness.
    pub logical: Vec<(Coord, Basis)>,
    pub distinct_fault_residuals: usize,
}

/// Data residual of a fault after propagating through the rest of its
/// circuit. Pauli frames are tracked as `(x, z)` bits per qubit.
pub fn propagate_fault(schedule: &Schedule, fault: &Fault) -> Vec<(Coord, Basis)> {
    match fault {
        Fault::Data { qubit, pauli } => vec![(*qubit, *pauli)],
        Fault::Measurement { stabilizer, after_step, pauli } => {
            let c = &schedule.circuits[*stabilizer];
            let (mut mx, mut mz) = pauli.bits();
            let mut data: BTreeMap<Coord, (bool, bool)> = BTreeMap::new();
            let mut later: Vec<&(Coord, u8, Basis)> = c.gates.iter().filter(|g| g.1 > *after_step).collect();
            later.sort_by_key(|g| g.1);
            for (q, _, b) in later {
                let e = data.entry(*q).or_insert((false, false));
                if c.meas_basis == Basis::Z {
                    // CNOT data -> measurement qubit: Z on the target copies to the control.
                    e.1 ^= mz;
                    mx ^= e.0;
                } else {
                    // Controlled-P from the measurement qubit: X on the control copies P.
                    if mx {
                        let (px, pz) = b.bits();
                        e.0 ^= px;
                        e.1 ^= pz;
                    }
                    let (px, pz) = b.bits();
                    // Data errors anticommuting with P kick a Z back onto the control.
                    mz ^= (e.0 && pz) ^ (e.1 && px);
                }
            }
            let _ = (mx, mz);
            data.into_iter().filter_map(|(q, (x, z))| Basis::from_bits(x, z).map(|b| (q, b))).collect()
        }
    }
}

/// All fault locations of the model: single Paulis on every data qubit and
/// on every measurement qubit between consecutive gates of its circuit.
pub fn fault_locations(schedule: &Schedule, layout: &SchedLayout) -> Vec<Fault> {
    let mut out = Vec::new();
    for q in &layout.data_qubits {
        for p in [Basis::X, Basis::Y, Basis::Z] {
            out.push(Fault::Data { qubit: *q, pauli: p });
        }
    }
    for (k, c) in schedule.circuits.iter().enumerate() {
        let mut steps: Vec<u8> = c.gates.iter().map(|g| g.1).collect();
        steps.sort();
        for &t in &steps[..steps.len().saturating_sub(1)] {
            for p in [Basis::X, Basis::Y, Basis::Z] {
                out.push(Fault::Measurement { stabilizer: k, after_step: t, pauli: p });
            }
        }
    }
    out
}

/// Exhaustive search over combinations of up to `max_faults` faults for the
/// smallest one leaving a nontrivial logical operator on the data.
pub fn analyze_hook_faults(layout: &SchedLayout, schedule: &Schedule, max_faults: usize) -> Result<FaultReport> {
    let idx = Indexer::new(&layout.data_qubits);
    let n = idx.n;
    let mut stab_span = gf2::Basis::new();
    let mut stab_swapped = Vec::new();
    for s in &layout.stabilizers {
        let v = idx.vector(&s.support).ok_or_else(|| Error::InvalidParameter("stabilizer outside the layout".into()))?;
        stab_span.insert(&v);
        stab_swapped.push(gf2::swap_halves(&v, n));
    }
    let is_logical = |v: &[u64]| v.iter().any(|w| *w != 0) && stab_swapped.iter().all(|s| !gf2::dot(v, s)) && !stab_span.contains(v);
    // Distinct nonzero residuals modulo stabilizers, each with one fault.
    let mut reps: Vec<(Vec<u64>, Fault)> = Vec::new();
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    for f in fault_locations(schedule, layout) {
        let r = propagate_fault(schedule, &f);
        let v = stab_span.reduce(&idx.vector(&r).ok_or_else(|| Error::InvalidParameter("fault outside the layout".into()))?);
        if v.iter().any(|w| *w != 0) && seen.insert(v.clone()) {
            reps.push((v, f));
        }
    }
    let mut report = FaultReport { min_fault_weight_to_logical: None, searched_up_to: max_faults, witness: Vec::new(), logical: Vec::new(), distinct_fault_residuals: reps.len() };
    let xor = |a: &[u64], b: &[u64]| a.iter().zip(b).map(|(x, y)| x ^ y).collect::<Vec<u64>>();
    let mut found: Option<Vec<usize>> = None;
    'search: for weight in 1..=max_faults.min(3) {
        match weight {
            1 => {
                if let Some(i) = reps.iter().position(|(v, _)| is_logical(v)) {
                    found = Some(vec![i]);
                    break 'search;
                }
            }
            2 => {
                for i in 0..reps.len() {
                    for j in i + 1..reps.len() {
                        if is_logical(&xor(&reps[i].0, &reps[j].0)) {
                            found = Some(vec![i, j]);
                            break 'search;
                        }
                    }
                }
            }
            _ => {
                for i in 0..reps.len() {
                    for j in i + 1..reps.len() {
                        let p = xor(&reps[i].0, &reps[j].0);
                        for k in j + 1..reps.len() {
                            if is_logical(&xor(&p, &reps[k].0)) {
                                found = Some(vec![i, j, k]);
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
    }
    if let Some(ids) = found {
        report.min_fault_weight_to_logical = Some(ids.len());
        report.witness = ids.iter().map(|&i| reps[i].1.clone()).collect();
        report.logical = combined_residual(schedule, &report.witness);
    }
    Ok(report)
}

/// Product of the data residuals of several faults.
pub fn combined_residual(schedule: &Schedule, faults: &[Fault]) -> Vec<(Coord, Basis)> {
    let mut acc: BTreeMap<Coord, (bool, bool)> = BTreeMap::new();
    for f in faults {
        for (q, b) in propagate_fault(schedule, f) {
            let (x, z) = b.bits();
            let e = acc.entry(q).or_insert((false, false));
            e.0 ^= x;
            e.1 ^= z;
        }
    }
    acc.into_iter().filter_map(|(q, (x, z))| Basis::from_bits(x, z).map(|b| (q, b))).collect()
}

/// Whether a data operator is a nontrivial logical of the layout.
pub fn is_nontrivial_logical(layout: &SchedLayout, op: &[(Coord, Basis)]) -> bool {
    let idx = Indexer::new(&layout.data_qubits);
    let Some(v) = idx.vector(op) else { return false };
    let mut span = gf2::Basis::new();
    let mut commutes = true;
    for s in &layout.stabilizers {
        let sv = idx.vector(&s.support).expect("stabilizer in layout");
        commutes &= !gf2::dot(&v, &gf2::swap_halves(&sv, idx.n));
        span.insert(&sv);
    }
    commutes && v.iter().any(|w| *w != 0) && !span.contains(&v)
}

/// SVG of a schedule: stabilizer outlines, data qubits and numbered arrows
/// from each measurement qubit to its data qubits.
pub fn schedule_svg(layout: &SchedLayout, schedule: &Schedule) -> String {
    let s = 60.0;
    let pad = 40.0;
    let (mut rmax, mut cmax, mut rmin, mut cmin) = (0, 0, i32::MAX, i32::MAX);
    for q in &layout.data_qubits {
        rmax = rmax.max(q.row);
        cmax = cmax.max(q.col);
        rmin = rmin.min(q.row);
        cmin = cmin.min(q.col);
    }
    let px = |r: f64, c: f64| (pad + (c - cmin as f64) * s, pad + (r - rmin as f64) * s);
    let (wd, ht) = px(rmax as f64 + 1.0, cmax as f64 + 1.0);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{wd:.0}\" height=\"{ht:.0}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"5\" markerHeight=\"5\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#333\"/></marker></defs>\n"
    );
    for c in &schedule.circuits {
        let color = crate::layout::basis_color(c.stabilizer.kind);
        let pts: Vec<String> = hull(&c.stabilizer).iter().map(|q| {
            let (x, y) = px(q.row as f64, q.col as f64);
            format!("{x:.1},{y:.1}")
        }).collect();
        out.push_str(&format!("<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.35\" stroke=\"#555\"/>\n", pts.join(" ")));
        let (mx, my) = px(c.measurement_qubit.row as f64 / 2.0, c.measurement_qubit.col as f64 / 2.0);
        for (q, step, _) in &c.gates {
            let (x, y) = px(q.row as f64, q.col as f64);
            let (ex, ey) = (mx + 0.8 * (x - mx), my + 0.8 * (y - my));
            out.push_str(&format!("<line x1=\"{mx:.1}\" y1=\"{my:.1}\" x2=\"{ex:.1}\" y2=\"{ey:.1}\" stroke=\"#333\" marker-end=\"url(#arrow)\"/>\n"));
            let (tx, ty) = (mx + 0.55 * (x - mx), my + 0.55 * (y - my));
            out.push_str(&format!("<text x=\"{tx:.1}\" y=\"{ty:.1}\" text-anchor=\"middle\">{step}</text>\n"));
        }
        out.push_str(&format!("<circle cx=\"{mx:.1}\" cy=\"{my:.1}\" r=\"4\" fill=\"#fff\" stroke=\"#333\"/>\n"));
    }
    for q in &layout.data_qubits {
        let (x, y) = px(q.row as f64, q.col as f64);
        out.push_str(&format!("<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"6\" fill=\"#222\"/>\n"));
    }
    out.push_str("</svg>\n");
    out
}

/// Support sorted around its centre, for drawing.
fn hull(s: &Stabilizer) -> Vec<Coord> {
    let c = centre(s);
    let mut v: Vec<Coord> = s.qubits().collect();
    v.sort_by(|a, b| {
        let ang = |q: &Coord| ((2 * q.row - c.row) as f64).atan2((2 * q.col - c.col) as f64);
        ang(a).partial_cmp(&ang(b)).unwrap()
    });
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{build_double_sided, build_square, Variant};

    #[test]
    fn circuits_follow_shapes() {
        let sq = build_square(3).unwrap();
        let bulk = sq.stabilizers.iter().find(|s| s.weight() == 4 && s.kind == StabilizerKind::ZType).unwrap();
        let z = build_readout_circuit(bulk, Shape::ZShape).unwrap();
        let qs: Vec<Coord> = z.gates.iter().map(|g| g.0).collect();
        assert_eq!(qs[0].row, qs[1].row);
        assert_eq!(z.meas_basis, Basis::Z);
        let n = build_readout_circuit(bulk, Shape::NShape).unwrap();
        let qs: Vec<Coord> = n.gates.iter().map(|g| g.0).collect();
        assert_eq!(qs[0].col, qs[1].col);
        let slot = sq.stabilizers.iter().find(|s| s.weight() == 2).unwrap();
        assert_eq!(build_readout_circuit(slot, Shape::ZShape).unwrap().gates.len(), 2);
    }

    #[test]
    fn square_schedule_is_valid_in_four_steps() {
        let l = SchedLayout::from_patch("square", &build_square(3).unwrap());
        let s = synthesize_schedule(&l).unwrap();
        assert!(validate_schedule(&s, &l).is_empty());
        assert!(s.steps() <= 4);
        assert!(check_readout(&s, &l, 1).unwrap().iter().all(|b| *b));
    }

    #[test]
    fn hook_distance_square_and_double_sided() {
        for (name, p) in [("square", build_square(3).unwrap()), ("double", build_double_sided(3, Variant::A).unwrap())] {
            let l = SchedLayout::from_patch(name, &p);
            let s = synthesize_schedule(&l).unwrap();
            let r = analyze_hook_faults(&l, &s, 3).unwrap();
            assert_eq!(r.min_fault_weight_to_logical, Some(3), "{name}: {:?}", r.witness);
        }
    }

    #[test]
    fn merge_configurations_schedule() {
        for d in [3, 5] {
            for kind in [MergeKind::ZZ, MergeKind::XX, MergeKind::XZDislocation, MergeKind::YXTwist] {
                let l = SchedLayout::merge_example(d, kind).unwrap();
                let s = synthesize_schedule(&l).unwrap_or_else(|e| panic!("d={d} {kind:?}: {e}"));
                assert!(validate_schedule(&s, &l).is_empty());
                assert!(s.steps() <= MAX_STEPS);
                assert!(check_readout(&s, &l, 3).unwrap().iter().all(|b| *b), "d={d} {kind:?}");
            }
        }
    }

    #[test]
    fn misoriented_square_has_weight_two_hook() {
        let mut l = SchedLayout::from_patch("square", &build_square(3).unwrap());
        l.regions[0].z_type = Shape::ZShape;
        let s = synthesize_schedule(&l).unwrap();
        let r = analyze_hook_faults(&l, &s, 3).unwrap();
        assert_eq!(r.min_fault_weight_to_logical, Some(2));
        assert!(r.witness.iter().any(|f| matches!(f, Fault::Measurement { .. })));
        assert!(is_nontrivial_logical(&l, &combined_residual(&s, &r.witness)));
    }

    #[test]
    fn crossing_circuits_report_a_core() {
        let row = |r: i32, cols: &[i32], b: Basis| cols.iter().map(|c| (Coord::new(r, *c), b)).collect::<Vec<_>>();
        let s1 = Stabilizer::new(row(0, &[0, 1, 2, 3, 4], Basis::X));
        let mut v = row(-1, &[0, 1], Basis::Z);
        v.extend(row(0, &[0, 4], Basis::Z));
        v.extend(row(1, &[0], Basis::Z));
        let s2 = Stabilizer::new(v);
        let mut qubits: Vec<Coord> = s1.qubits().chain(s2.qubits()).collect();
        qubits.sort();
        qubits.dedup();
        let filler = Stabilizer::new(row(5, &[0, 1], Basis::Z));
        qubits.extend(filler.qubits());
        let l = SchedLayout {
            name: "crossing".into(),
            data_qubits: qubits,
            stabilizers: vec![filler, s1, s2],
            regions: vec![region("all", ALL, ALL, Shape::ZShape, Shape::ZShape, Shape::ZShape)],
        };
        match synthesize_schedule(&l) {
            Err(ScheduleError::Unsatisfiable { core, .. }) => assert_eq!(core, vec![1, 2]),
            other => panic!("expected unsatisfiable, got {other:?}"),
        }
    }

    #[test]
    fn missing_regions_are_rejected() {
        let mut l = SchedLayout::from_patch("square", &build_square(3).unwrap());
        l.regions.clear();
        assert!(matches!(synthesize_schedule(&l), Err(ScheduleError::Layout(_))));
    }
}
