//! Lattice surgery on a board of patches that share one stabilizer tableau.
//!
//! Merges are planned on a canonical horizontal seam (upper patch above a
//! one-row gap, lower patch below); vertical seams are handled by
//! transposing coordinates. Logical byproducts of a merge/split cycle are
//! found by tracking the surviving logical operators through every
//! measurement and comparing them with the canonical representatives after
//! the split; the result is folded into the participants' edge frames.

use std::collections::{BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::edge_tracker::{track_pauli, EdgeExpression, EdgeFrame, EdgeSelector, SignedPauli};
use crate::error::{integrity, invalid, Result};
use crate::gf2;
use crate::layout::{build_wide, face_type, validate, Coord, Edge, EdgeType, Indexer, LogicalPair, Patch, PatchKind, RectSpec, Side, Stabilizer};
use crate::pauli::{Basis, PauliOperator};
use crate::tableau::{InitBasis, StabilizerState};

pub type PatchId = usize;

fn swap_xz(b: Basis) -> Basis {
    match b {
        Basis::X => Basis::Z,
        Basis::Z => Basis::X,
        Basis::Y => Basis::Y,
    }
}

fn letter_product(a: Basis, b: Basis) -> Option<Basis> {
    let (ax, az) = a.bits();
    let (bx, bz) = b.bits();
    Basis::from_bits(ax ^ bx, az ^ bz)
}

/// Sparse product keeping letters only (used for stencil construction).
fn sparse_product(a: &[(Coord, Basis)], b: &[(Coord, Basis)]) -> Vec<(Coord, Basis)> {
    let mut m: HashMap<Coord, Option<Basis>> = a.iter().map(|(q, l)| (*q, Some(*l))).collect();
    for (q, l) in b {
        let e = m.entry(*q).or_insert(None);
        *e = match *e {
            None => Some(*l),
            Some(x) => letter_product(x, *l),
        };
    }
    m.into_iter().filter_map(|(q, l)| l.map(|l| (q, l))).collect()
}

fn transpose_support(s: &[(Coord, Basis)]) -> Vec<(Coord, Basis)> {
    s.iter().map(|(q, b)| (q.transposed(), *b)).collect()
}

fn transpose_stab(s: &Stabilizer) -> Stabilizer {
    Stabilizer { kind: s.kind, support: transpose_support(&s.support), boundary: s.boundary }
}

/// A patch placed on the board.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoardPatch {
    pub name: String,
    pub patch: Patch,
    pub frames: Vec<EdgeFrame>,
    pub live: bool,
}

/// One logical qubit of one patch, addressed by a signed logical Pauli.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Target {
    pub patch: PatchId,
    pub logical: usize,
    pub pauli: SignedPauli,
}

impl Target {
    pub fn new(patch: PatchId, pauli: SignedPauli) -> Self {
        Target { patch, logical: 0, pauli }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MergeKind {
    #[serde(rename = "ZZ")]
    ZZ,
    #[serde(rename = "XX")]
    XX,
    #[serde(rename = "XZ-dislocation")]
    XZDislocation,
    #[serde(rename = "YX-twist")]
    YXTwist,
    #[serde(rename = "YZ-twist")]
    YZTwist,
    #[serde(rename = "multi-ZZ")]
    MultiZZ,
}

impl MergeKind {
    pub const ALL: [MergeKind; 6] = [MergeKind::ZZ, MergeKind::XX, MergeKind::XZDislocation, MergeKind::YXTwist, MergeKind::YZTwist, MergeKind::MultiZZ];

    pub fn name(self) -> &'static str {
        match self {
            MergeKind::ZZ => "ZZ",
            MergeKind::XX => "XX",
            MergeKind::XZDislocation => "XZ-dislocation",
            MergeKind::YXTwist => "YX-twist",
            MergeKind::YZTwist => "YZ-twist",
            MergeKind::MultiZZ => "multi-ZZ",
        }
    }

    pub fn from_name(s: &str) -> Option<MergeKind> {
        MergeKind::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s))
    }

    fn of_seam(upper: EdgeSelector, lower: EdgeType) -> MergeKind {
        match (upper, lower) {
            (EdgeSelector::ZEdge, EdgeType::Z) => MergeKind::ZZ,
            (EdgeSelector::XEdge, EdgeType::X) => MergeKind::XX,
            (EdgeSelector::Twist, EdgeType::X) => MergeKind::YXTwist,
            (EdgeSelector::Twist, EdgeType::Z) => MergeKind::YZTwist,
            _ => MergeKind::XZDislocation,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Participant {
    pub patch: PatchId,
    pub name: String,
    pub logical: usize,
    pub target: SignedPauli,
    pub expression: EdgeExpression,
}

/// One interface between two neighbouring participants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Seam {
    /// Participant indices; `a` is the upper (or left) side.
    pub a: usize,
    pub b: usize,
    pub kind: MergeKind,
    #[serde(with = "sparse_serde")]
    pub a_string: Vec<(Coord, Basis)>,
    #[serde(with = "sparse_serde")]
    pub b_string: Vec<(Coord, Basis)>,
    pub gap: Vec<Coord>,
    /// `X` for gap qubits prepared in `|+>`, `Z` for `|0>`.
    pub gap_basis: Basis,
    pub new_stabilizers: Vec<Stabilizer>,
    pub merged_boundary_stabilizers: Vec<Stabilizer>,
}

impl Seam {
    /// The physical product measured by this seam.
    pub fn product(&self) -> Vec<(Coord, Basis)> {
        self.a_string.iter().chain(&self.b_string).copied().collect()
    }
}

mod sparse_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[(Coord, Basis)], s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<(i32, i32, Basis)> = v.iter().map(|(c, b)| (c.row, c.col, *b)).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<(Coord, Basis)>, D::Error> {
        let rows: Vec<(i32, i32, Basis)> = Vec::deserialize(d)?;
        Ok(rows.into_iter().map(|(r, c, b)| (Coord::new(r, c), b)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeSpec {
    pub kind: MergeKind,
    pub participants: Vec<Participant>,
    pub seams: Vec<Seam>,
}

impl MergeSpec {
    pub fn new_stabilizers(&self) -> Vec<Stabilizer> {
        self.seams.iter().flat_map(|s| s.new_stabilizers.clone()).collect()
    }

    pub fn merged_boundary_stabilizers(&self) -> Vec<Stabilizer> {
        self.seams.iter().flat_map(|s| s.merged_boundary_stabilizers.clone()).collect()
    }

    pub fn gap_qubits(&self) -> Vec<(Coord, Basis)> {
        self.seams.iter().flat_map(|s| s.gap.iter().map(move |q| (*q, s.gap_basis))).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("merge spec serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairParity {
    pub a: usize,
    pub b: usize,
    /// Logical parity `+1` or `-1`.
    pub value: i8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityResult {
    pub kind: MergeKind,
    /// Logical parity of each seam, in seam order.
    pub seam_parities: Vec<i8>,
    pub parities: Vec<PairParity>,
    /// Raw outcomes of the new stabilizers (`+1`/`-1`).
    pub raw_outcomes: Vec<i8>,
    pub boundary_outcomes: Vec<i8>,
}

impl ParityResult {
    /// Logical parity between participants `a` and `b`.
    pub fn parity(&self, a: usize, b: usize) -> Option<i8> {
        self.parities.iter().find(|p| (p.a, p.b) == (a, b) || (p.a, p.b) == (b, a)).map(|p| p.value)
    }
}

/// Algebraic facts about a merge: whether the merged stabilizers commute,
/// how much the independent-stabilizer count grows relative to the separate
/// patches plus initialized gap qubits, and whether each seam product is
/// fixed by the merged group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeCheck {
    pub commuting: bool,
    pub rank_rise: i64,
    pub expected_rise: i64,
    pub products_measured: Vec<bool>,
}

/// A logical Pauli byproduct folded into a frame by a split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Byproduct {
    pub patch: PatchId,
    pub logical: usize,
    pub pauli: Basis,
}

struct Pending {
    spec: MergeSpec,
    /// `(patch, logical)` coordinates of the tracked logical space.
    logicals: Vec<(PatchId, usize)>,
    basis: Vec<Vec<u64>>,
    tracked: Vec<PauliOperator>,
}

fn sign_of(flipped: bool) -> i8 {
    if flipped {
        -1
    } else {
        1
    }
}

/// Patches on a rectangular grid of physical qubits `[0, rows) x [0, cols)`.
pub struct Board {
    rows: i32,
    cols: i32,
    coords: Vec<Coord>,
    index: HashMap<Coord, usize>,
    state: StabilizerState,
    rng: ChaCha8Rng,
    patches: Vec<BoardPatch>,
    owner: HashMap<Coord, PatchId>,
    reserved: BTreeSet<Coord>,
    pending: Vec<Pending>,
}

impl Board {
    pub fn new(rows: usize, cols: usize, seed: u64) -> Result<Board> {
        if rows == 0 || cols == 0 {
            return invalid("board dimensions must be positive");
        }
        let coords: Vec<Coord> = (0..rows as i32).flat_map(|r| (0..cols as i32).map(move |c| Coord::new(r, c))).collect();
        let index = coords.iter().enumerate().map(|(i, q)| (*q, i)).collect();
        Ok(Board {
            rows: rows as i32,
            cols: cols as i32,
            state: StabilizerState::zeros(coords.len())?,
            coords,
            index,
            rng: ChaCha8Rng::seed_from_u64(seed),
            patches: Vec::new(),
            owner: HashMap::new(),
            reserved: BTreeSet::new(),
            pending: Vec::new(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.coords.len()
    }

    pub fn state(&self) -> &StabilizerState {
        &self.state
    }

    pub fn patch(&self, id: PatchId) -> &BoardPatch {
        &self.patches[id]
    }

    pub fn patches(&self) -> &[BoardPatch] {
        &self.patches
    }

    pub fn frame(&self, id: PatchId, logical: usize) -> EdgeFrame {
        self.patches[id].frames[logical]
    }

    pub fn set_frame(&mut self, id: PatchId, logical: usize, frame: EdgeFrame) {
        self.patches[id].frames[logical] = frame;
    }

    pub fn find(&self, name: &str) -> Option<PatchId> {
        self.patches.iter().position(|p| p.live && p.name == name)
    }

    fn in_bounds(&self, q: Coord) -> bool {
        q.row >= 0 && q.col >= 0 && q.row < self.rows && q.col < self.cols
    }

    /// Places a patch; its qubits must be free. The patch is not prepared.
    pub fn add_patch(&mut self, name: impl Into<String>, patch: Patch) -> Result<PatchId> {
        let name = name.into();
        for q in &patch.data_qubits {
            if !self.in_bounds(*q) {
                return invalid(format!("patch {name} leaves the board at {q:?}"));
            }
            if self.owner.contains_key(q) || self.reserved.contains(q) {
                return invalid(format!("patch {name} overlaps an occupied qubit at {q:?}"));
            }
        }
        let id = self.patches.len();
        for q in &patch.data_qubits {
            self.owner.insert(*q, id);
        }
        let frames = vec![EdgeFrame::default(); patch.logical_count];
        self.patches.push(BoardPatch { name, patch, frames, live: true });
        Ok(id)
    }

    /// Frees the qubits of a patch.
    pub fn remove_patch(&mut self, id: PatchId) -> Result<()> {
        self.check_live(id)?;
        for q in &self.patches[id].patch.data_qubits {
            self.owner.remove(q);
        }
        self.patches[id].live = false;
        Ok(())
    }

    fn check_live(&self, id: PatchId) -> Result<()> {
        match self.patches.get(id) {
            Some(p) if p.live => Ok(()),
            Some(p) => invalid(format!("patch {} has been removed", p.name)),
            None => invalid(format!("no patch with id {id}")),
        }
    }

    /// Dense operator over the board from a sparse support.
    pub fn operator(&self, s: &[(Coord, Basis)]) -> Result<PauliOperator> {
        let mut f = Vec::with_capacity(s.len());
        for (q, b) in s {
            match self.index.get(q) {
                Some(&i) => f.push((i, *b)),
                None => return invalid(format!("qubit {q:?} is not on the board")),
            }
        }
        Ok(PauliOperator::from_sparse(self.coords.len(), &f))
    }

    fn logical_pair(&self, id: PatchId, logical: usize) -> Result<&LogicalPair> {
        self.patches[id].patch.logicals.get(logical).ok_or_else(|| crate::error::Error::InvalidParameter(format!("patch has no logical {logical}")))
    }

    /// Sparse physical operator realizing a selector with the canonical
    /// representatives. The twist operator `i X Z` is returned letter-wise.
    pub fn selector_support(&self, id: PatchId, logical: usize, sel: EdgeSelector) -> Result<Vec<(Coord, Basis)>> {
        let l = self.logical_pair(id, logical)?;
        Ok(match sel {
            EdgeSelector::XEdge => l.x.clone(),
            EdgeSelector::ZEdge => l.z.clone(),
            EdgeSelector::Twist => sparse_product(&l.x, &l.z),
        })
    }

    fn selector_operator(&self, id: PatchId, logical: usize, sel: EdgeSelector) -> Result<PauliOperator> {
        let l = self.logical_pair(id, logical)?;
        Ok(match sel {
            EdgeSelector::XEdge => self.operator(&l.x)?,
            EdgeSelector::ZEdge => self.operator(&l.z)?,
            EdgeSelector::Twist => (&self.operator(&l.x)? * &self.operator(&l.z)?).times_i_pow(1),
        })
    }

    /// Physical operator (with sign) whose value is the given logical Pauli.
    pub fn logical_operator(&self, id: PatchId, logical: usize, p: SignedPauli) -> Result<PauliOperator> {
        self.check_live(id)?;
        let expr = self.patches[id].frames[logical].resolve(p);
        let op = self.selector_operator(id, logical, expr.selector)?;
        Ok(if expr.negative { op.negated() } else { op })
    }

    /// Physical operator for a product of logical Paulis on distinct qubits.
    pub fn product_operator(&self, terms: &[Target]) -> Result<PauliOperator> {
        let mut acc = PauliOperator::identity(self.coords.len());
        for t in terms {
            acc = &acc * &self.logical_operator(t.patch, t.logical, t.pauli)?;
        }
        Ok(acc)
    }

    /// Deterministic value of a logical product: `Some(+1/-1)` or `None`.
    pub fn peek_logical(&self, terms: &[Target]) -> Result<Option<i8>> {
        let op = self.product_operator(terms)?;
        Ok(self.state.peek(&op)?.map(sign_of))
    }

    fn measure_sparse(&mut self, s: &[(Coord, Basis)], tracked: &mut [PauliOperator]) -> Result<(bool, bool)> {
        let op = self.operator(s)?;
        let o = self.state.measure_tracking(&op, &mut self.rng, tracked)?;
        Ok((o.flipped, o.deterministic))
    }

    fn reset(&mut self, q: Coord, basis: Basis) -> Result<()> {
        let i = self.index[&q];
        let b = if basis == Basis::X { InitBasis::Plus } else { InitBasis::Zero };
        self.state.reset(i, b, &mut self.rng)
    }

    /// Prepares logical `logical` of a patch in the +1 eigenstate of `p`
    /// (with the other logicals of the patch prepared as well, one target
    /// per logical).
    pub fn prepare(&mut self, id: PatchId, targets: &[SignedPauli]) -> Result<()> {
        self.check_live(id)?;
        let k = self.patches[id].patch.logical_count;
        if targets.len() != k {
            return invalid(format!("patch {} holds {k} logical qubits, got {} targets", self.patches[id].name, targets.len()));
        }
        let qubits = self.patches[id].patch.data_qubits.clone();
        for q in &qubits {
            self.reset(*q, Basis::Z)?;
        }
        let stabs: Vec<Vec<(Coord, Basis)>> = self.patches[id].patch.stabilizers.iter().map(|s| s.support.clone()).collect();
        for s in &stabs {
            self.measure_sparse(s, &mut [])?;
        }
        for (i, t) in targets.iter().enumerate() {
            let op = self.logical_operator(id, i, *t)?;
            let o = self.state.measure(&op, &mut self.rng)?;
            if o.flipped {
                let expr = self.patches[id].frames[i].resolve(*t);
                let fix = match expr.selector {
                    EdgeSelector::XEdge => EdgeSelector::ZEdge,
                    _ => EdgeSelector::XEdge,
                };
                let f = self.selector_operator(id, i, fix)?;
                self.state.apply_pauli(&f)?;
            }
        }
        self.cleanup(id)
    }

    /// Restores every stabilizer of a patch to +1 with a Pauli that commutes
    /// with the canonical logical representatives.
    pub fn cleanup(&mut self, id: PatchId) -> Result<()> {
        let patch = &self.patches[id].patch;
        let idx = Indexer::new(&patch.data_qubits);
        let n = idx.n;
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let mut any = false;
        for s in &patch.stabilizers {
            let v = self.state.peek(&self.operator(&s.support)?)?;
            let Some(flip) = v else {
                return integrity(format!("stabilizer of {} is not fixed after preparation", self.patches[id].name));
            };
            any |= flip;
            rows.push(gf2::swap_halves(&idx.vector(&s.support).expect("patch stabilizer"), n));
            rhs.push(flip);
        }
        if !any {
            return Ok(());
        }
        for l in &patch.logicals {
            for op in [&l.x, &l.z] {
                rows.push(gf2::swap_halves(&idx.vector(op).expect("patch logical"), n));
                rhs.push(false);
            }
        }
        let Some(e) = gf2::solve_system(&rows, &rhs, 2 * n) else {
            return integrity("no Pauli restores the stabilizer signs");
        };
        let bitv = |i: usize| (e[i / 64] >> (i % 64)) & 1 == 1;
        let mut fix = Vec::new();
        for (i, q) in patch.data_qubits.iter().enumerate() {
            if let Some(b) = Basis::from_bits(bitv(i), bitv(n + i)) {
                fix.push((*q, b));
            }
        }
        let op = self.operator(&fix)?;
        self.state.apply_pauli(&op)
    }

    /// Destructive readout: measures every qubit of the representative in
    /// its own letter and returns the logical value `+1/-1`. The patch is
    /// removed afterwards.
    pub fn read_out(&mut self, id: PatchId, logical: usize, p: SignedPauli) -> Result<i8> {
        self.check_live(id)?;
        let expr = self.patches[id].frames[logical].resolve(p);
        let support = self.selector_support(id, logical, expr.selector)?;
        let mut parity = expr.negative;
        for (q, b) in support {
            let (f, _) = self.measure_sparse(&[(q, b)], &mut [])?;
            parity ^= f;
        }
        self.remove_patch(id)?;
        Ok(sign_of(parity))
    }

    /// Applies a logical Pauli by updating the frame only.
    pub fn apply_logical_pauli(&mut self, id: PatchId, logical: usize, p: Basis) {
        let f = self.patches[id].frames[logical];
        self.patches[id].frames[logical] = track_pauli(f, p);
    }

    /// Plans a merge measuring the product of the targets. Consecutive
    /// targets must sit next to each other with one free row or column
    /// between them.
    pub fn plan_merge(&self, kind: MergeKind, targets: &[Target]) -> Result<MergeSpec> {
        if targets.len() < 2 {
            return invalid("a merge needs at least two participants");
        }
        let mut participants = Vec::new();
        for t in targets {
            self.check_live(t.patch)?;
            if t.logical >= self.patches[t.patch].frames.len() {
                return invalid(format!("patch {} has no logical {}", self.patches[t.patch].name, t.logical));
            }
            let expression = self.patches[t.patch].frames[t.logical].resolve(t.pauli);
            participants.push(Participant { patch: t.patch, name: self.patches[t.patch].name.clone(), logical: t.logical, target: t.pauli, expression });
        }
        let mut seams = Vec::new();
        for i in 0..participants.len() - 1 {
            seams.push(self.plan_seam(&participants, i, i + 1)?);
        }
        let kinds: BTreeSet<_> = seams.iter().map(|s| format!("{:?}", s.kind)).collect();
        let actual = if seams.len() > 1 {
            if seams.iter().any(|s| s.kind != MergeKind::ZZ) && kind != MergeKind::MultiZZ {
                return invalid(format!("merge kind {kind:?} does not match seams {kinds:?}"));
            }
            MergeKind::MultiZZ
        } else {
            seams[0].kind
        };
        if kind != actual && kind != MergeKind::MultiZZ {
            return invalid(format!("requested a {kind:?} merge but the edges give {actual:?}"));
        }
        let spec = MergeSpec { kind, participants, seams };
        self.verify_merge(&spec).map_err(|e| crate::error::Error::Integrity(format!("merge plan fails verification: {e}")))?;
        Ok(spec)
    }

    /// Plans a merge and infers its kind from the seams.
    pub fn plan(&self, targets: &[Target]) -> Result<MergeSpec> {
        self.plan_merge(MergeKind::MultiZZ, targets).map(|mut spec| {
            if spec.seams.len() == 1 {
                spec.kind = spec.seams[0].kind;
            }
            spec
        })
    }

    /// Applies a physical Pauli (its phase is ignored).
    pub fn apply_physical(&mut self, op: &PauliOperator) -> Result<()> {
        self.state.apply_pauli(op)
    }

    fn facing_string(&self, p: &Participant, side: Side) -> Result<(Vec<(Coord, Basis)>, Vec<EdgeType>)> {
        let patch = &self.patches[p.patch].patch;
        let edges: Vec<&Edge> = patch.edges.iter().filter(|e| e.side == side).collect();
        let pick = |t: EdgeType| -> Result<&Edge> {
            let found: Vec<&&Edge> = edges.iter().filter(|e| e.edge_type == t).collect();
            match found.as_slice() {
                [e] => Ok(e),
                [] => invalid(format!("patch {} has no {t:?}-edge on its {side:?} side", p.name)),
                many => Ok(many.iter().max_by_key(|e| e.qubits.len()).unwrap()),
            }
        };
        match p.expression.selector {
            EdgeSelector::XEdge => Ok((pick(EdgeType::X)?.string(), vec![EdgeType::X])),
            EdgeSelector::ZEdge => Ok((pick(EdgeType::Z)?.string(), vec![EdgeType::Z])),
            EdgeSelector::Twist => {
                let (x, z) = (pick(EdgeType::X)?, pick(EdgeType::Z)?);
                if !x.qubits.iter().any(|q| z.qubits.contains(q)) {
                    return invalid(format!("patch {} has no X/Z junction on its {side:?} side", p.name));
                }
                Ok((sparse_product(&x.string(), &z.string()), vec![EdgeType::X, EdgeType::Z]))
            }
        }
    }

    fn plan_seam(&self, parts: &[Participant], i: usize, j: usize) -> Result<Seam> {
        let (pi, pj) = (&self.patches[parts[i].patch].patch, &self.patches[parts[j].patch].patch);
        let (ri, rj) = (&pi.rect, &pj.rect);
        let overlap_cols = ri.origin.col <= rj.right_col() && rj.origin.col <= ri.right_col();
        let overlap_rows = ri.origin.row <= rj.bottom_row() && rj.origin.row <= ri.bottom_row();
        // (upper index, lower index, transposed)
        let (u, l, tr) = if ri.bottom_row() + 2 == rj.origin.row && overlap_cols {
            (i, j, false)
        } else if rj.bottom_row() + 2 == ri.origin.row && overlap_cols {
            (j, i, false)
        } else if ri.right_col() + 2 == rj.origin.col && overlap_rows {
            (i, j, true)
        } else if rj.right_col() + 2 == ri.origin.col && overlap_rows {
            (j, i, true)
        } else {
            return invalid(format!("patches {} and {} are not separated by a single gap", parts[i].name, parts[j].name));
        };
        let (us, ls) = if tr { (Side::Right, Side::Left) } else { (Side::Bottom, Side::Top) };
        let (ustr, _) = self.facing_string(&parts[u], us)?;
        let (lstr, ltypes) = self.facing_string(&parts[l], ls)?;
        if ltypes.len() != 1 {
            return invalid("the lower side of a seam must present a single edge");
        }
        let lower_type = ltypes[0];
        let t = |s: &[(Coord, Basis)]| if tr { transpose_support(s) } else { s.to_vec() };
        let (cu, cl) = (t(&ustr), t(&lstr));
        let r = cu[0].0.row;
        let cols: BTreeSet<i32> = cu.iter().map(|(q, _)| q.col).collect();
        let lcols: BTreeSet<i32> = cl.iter().map(|(q, _)| q.col).collect();
        let (a0, a1) = (*cols.first().unwrap(), *cols.last().unwrap());
        if cols.len() as i32 != a1 - a0 + 1 || cu.iter().any(|(q, _)| q.row != r) || cl.iter().any(|(q, _)| q.row != r + 2) {
            return invalid("seam edges must be straight contiguous segments");
        }
        let mut upper = vec![Basis::X; cols.len()];
        for (q, b) in &cu {
            upper[(q.col - a0) as usize] = *b;
        }
        // A dislocation seam needs the lower edge one column off the upper one.
        let dislocation = !upper.contains(&Basis::Y) && upper[0] != lower_type.string_basis();
        let shift = *lcols.first().unwrap() - a0;
        let aligned = lcols.len() == cols.len() && (lcols.last().unwrap() - lcols.first().unwrap()) as usize + 1 == lcols.len();
        if !aligned || (dislocation && shift.abs() != 1) || (!dislocation && shift != 0) {
            let want = if dislocation { "offset by one column" } else { "aligned" };
            return invalid(format!("edges of {} and {} are not {want}", parts[u].name, parts[l].name));
        }
        let lower_patch = &self.patches[parts[l].patch].patch;
        let lower_set: BTreeSet<Coord> = lower_patch.data_qubits.iter().map(|q| if tr { q.transposed() } else { *q }).collect();
        let canon = Canon { r, a0, a1, shift, upper: upper.clone(), lower: lower_type, lower_has: &|q| lower_set.contains(&q) };

        let removed_of = |p: &Patch, row: i32, lo: i32, hi: i32| -> Vec<Stabilizer> {
            p.stabilizers
                .iter()
                .filter(|s| s.boundary.is_some())
                .filter(|s| {
                    s.qubits().all(|q| {
                        let q = if tr { q.transposed() } else { q };
                        q.row == row && q.col >= lo && q.col <= hi
                    })
                })
                .cloned()
                .collect()
        };
        let upper_patch = &self.patches[parts[u].patch].patch;
        let mut removed = removed_of(upper_patch, r, a0, a1);
        removed.extend(removed_of(lower_patch, r + 2, a0 + shift, a1 + shift));
        let gap_basis = if lower_type == EdgeType::Z { Basis::X } else { Basis::Z };
        let back = |q: Coord| if tr { q.transposed() } else { q };
        let gap: Vec<Coord> = (a0 + shift..=a1 + shift).map(|c| back(Coord::new(r + 1, c))).collect();
        for q in &gap {
            if !self.in_bounds(*q) || self.owner.contains_key(q) {
                return invalid(format!("gap qubit {q:?} is not free"));
            }
        }
        let kind = MergeKind::of_seam(parts[u].expression.selector, lower_type);
        let mut last_err = String::new();
        for (lend, rend) in [(false, true), (true, false), (true, true), (false, false)] {
            let mut new = stencil(&canon, lend, rend);
            if tr {
                new = new.iter().map(transpose_stab).collect();
            }
            let seam = Seam {
                a: u,
                b: l,
                kind,
                a_string: ustr.clone(),
                b_string: lstr.clone(),
                gap: gap.clone(),
                gap_basis,
                new_stabilizers: new,
                merged_boundary_stabilizers: removed.clone(),
            };
            let trial = MergeSpec { kind, participants: parts.to_vec(), seams: vec![seam] };
            match self.verify_seams(&trial, &[parts[u].patch, parts[l].patch]) {
                Ok(()) => return Ok(trial.seams.into_iter().next().unwrap()),
                Err(e) => last_err = e,
            }
        }
        integrity(format!("no stencil verifies for the seam between {} and {}: {last_err}", parts[u].name, parts[l].name))
    }

    fn verify_merge(&self, spec: &MergeSpec) -> std::result::Result<(), String> {
        let ids: Vec<PatchId> = spec.participants.iter().map(|p| p.patch).collect();
        self.verify_seams(spec, &ids)
    }

    /// Algebraic checks: the merged stabilizers commute, the number of
    /// independent stabilizers grows by the number of seams, and each
    /// measured product lies in the merged group.
    fn verify_seams(&self, spec: &MergeSpec, ids: &[PatchId]) -> std::result::Result<(), String> {
        let c = self.merge_check_for(spec, ids)?;
        if !c.commuting {
            return Err("merged stabilizers do not commute".into());
        }
        if c.rank_rise != c.expected_rise {
            return Err(format!("independent stabilizer count rises by {}, expected {}", c.rank_rise, c.expected_rise));
        }
        if let Some(k) = c.products_measured.iter().position(|m| !m) {
            return Err(format!("seam {k} does not measure its product"));
        }
        Ok(())
    }

    /// Data qubits and stabilizers of the code during a planned merge.
    pub fn merged_code(&self, spec: &MergeSpec) -> Result<(Vec<Coord>, Vec<Stabilizer>)> {
        let mut ids: Vec<PatchId> = spec.participants.iter().map(|p| p.patch).collect();
        ids.sort();
        ids.dedup();
        let removed = spec.merged_boundary_stabilizers();
        let mut qubits = Vec::new();
        let mut stabs = Vec::new();
        for id in ids {
            let p = &self.patch(id).patch;
            qubits.extend(p.data_qubits.iter().copied());
            stabs.extend(p.stabilizers.iter().filter(|s| !removed.contains(s)).cloned());
        }
        qubits.extend(spec.gap_qubits().into_iter().map(|(q, _)| q));
        stabs.extend(spec.new_stabilizers());
        Ok((qubits, stabs))
    }

    /// Algebraic summary of a planned merge.
    pub fn merge_check(&self, spec: &MergeSpec) -> Result<MergeCheck> {
        let ids: Vec<PatchId> = spec.participants.iter().map(|p| p.patch).collect();
        self.merge_check_for(spec, &ids).map_err(crate::error::Error::Integrity)
    }

    fn merge_check_for(&self, spec: &MergeSpec, ids: &[PatchId]) -> std::result::Result<MergeCheck, String> {
        let mut uniq: Vec<PatchId> = ids.to_vec();
        uniq.sort();
        uniq.dedup();
        let mut qubits: Vec<Coord> = uniq.iter().flat_map(|&id| self.patches[id].patch.data_qubits.clone()).collect();
        let gaps = spec.gap_qubits();
        qubits.extend(gaps.iter().map(|(q, _)| *q));
        let idx = Indexer::new(&qubits);
        if idx.index.len() != qubits.len() {
            return Err("participants overlap".into());
        }
        let n = idx.n;
        let vec_of = |s: &[(Coord, Basis)]| idx.vector(s).ok_or_else(|| "operator leaves the merged region".to_string());
        let removed: Vec<Stabilizer> = spec.merged_boundary_stabilizers();
        let mut g0 = Vec::new();
        let mut v = Vec::new();
        for &id in &uniq {
            for s in &self.patches[id].patch.stabilizers {
                let x = vec_of(&s.support)?;
                g0.push(x.clone());
                if !removed.contains(s) {
                    v.push(x);
                }
            }
        }
        let patch_rank = gf2::rank(&g0);
        for (q, b) in &gaps {
            g0.push(vec_of(&[(*q, *b)])?);
        }
        for s in spec.new_stabilizers() {
            v.push(vec_of(&s.support)?);
        }
        let sv: Vec<Vec<u64>> = v.iter().map(|x| gf2::swap_halves(x, n)).collect();
        let commuting = (0..v.len()).all(|a| (a + 1..v.len()).all(|b| !gf2::dot(&v[a], &sv[b])));
        let rank_v = gf2::rank(&v);
        let rank_rise = rank_v as i64 - (patch_rank + gaps.len()) as i64;
        // Elements of the pre-merge group that survive the merge.
        let m: Vec<Vec<u64>> = sv
            .iter()
            .map(|s| {
                let mut row = vec![0u64; g0.len().div_ceil(64).max(1)];
                for (i, g) in g0.iter().enumerate() {
                    if gf2::dot(g, s) {
                        row[i / 64] |= 1 << (i % 64);
                    }
                }
                row
            })
            .collect();
        let mut span = gf2::Basis::new();
        for x in &v {
            span.insert(x);
        }
        for c in gf2::kernel(&m, g0.len()) {
            let mut acc = vec![0u64; v[0].len()];
            for (i, g) in g0.iter().enumerate() {
                if (c[i / 64] >> (i % 64)) & 1 == 1 {
                    for (a, b) in acc.iter_mut().zip(g) {
                        *a ^= b;
                    }
                }
            }
            span.insert(&acc);
        }
        let mut products_measured = Vec::new();
        for s in &spec.seams {
            products_measured.push(span.contains(&vec_of(&s.product())?));
        }
        Ok(MergeCheck { commuting, rank_rise, expected_rise: spec.seams.len() as i64, products_measured })
    }

    /// Logical coordinates of the participants and the commutant of the
    /// measured products, as vectors over `[x bits | z bits]` of those logicals.
    fn commutant(&self, spec: &MergeSpec) -> (Vec<(PatchId, usize)>, Vec<Vec<u64>>) {
        let mut logicals: Vec<(PatchId, usize)> = Vec::new();
        for p in &spec.participants {
            if !logicals.contains(&(p.patch, p.logical)) {
                logicals.push((p.patch, p.logical));
            }
        }
        let k = logicals.len();
        let sel_bits = |p: &Participant| -> (usize, bool, bool) {
            let i = logicals.iter().position(|x| *x == (p.patch, p.logical)).unwrap();
            let (x, z) = match p.expression.selector {
                EdgeSelector::XEdge => (true, false),
                EdgeSelector::ZEdge => (false, true),
                EdgeSelector::Twist => (true, true),
            };
            (i, x, z)
        };
        let words = (2 * k).div_ceil(64).max(1);
        let rows: Vec<Vec<u64>> = spec
            .seams
            .iter()
            .map(|s| {
                let mut v = vec![0u64; words];
                for p in [&spec.participants[s.a], &spec.participants[s.b]] {
                    let (i, x, z) = sel_bits(p);
                    // Swapped halves so that the dot product is symplectic.
                    if z {
                        v[i / 64] ^= 1 << (i % 64);
                    }
                    if x {
                        v[(k + i) / 64] ^= 1 << ((k + i) % 64);
                    }
                }
                v
            })
            .collect();
        (logicals.clone(), gf2::kernel(&rows, 2 * k))
    }

    fn logical_vector_operator(&self, logicals: &[(PatchId, usize)], v: &[u64]) -> Result<PauliOperator> {
        let k = logicals.len();
        let bit = |i: usize| (v[i / 64] >> (i % 64)) & 1 == 1;
        let mut acc = PauliOperator::identity(self.coords.len());
        for (i, &(id, l)) in logicals.iter().enumerate() {
            let sel = match (bit(i), bit(k + i)) {
                (true, false) => EdgeSelector::XEdge,
                (false, true) => EdgeSelector::ZEdge,
                (true, true) => EdgeSelector::Twist,
                _ => continue,
            };
            acc = &acc * &self.selector_operator(id, l, sel)?;
        }
        Ok(acc)
    }

    /// Runs a planned merge: prepares the gap, checks the merged boundary
    /// stabilizers, measures the new stabilizers and reads off the parities.
    pub fn execute_merge(&mut self, spec: &MergeSpec) -> Result<ParityResult> {
        for p in &spec.participants {
            self.check_live(p.patch)?;
            let expr = self.patches[p.patch].frames[p.logical].resolve(p.target);
            if expr != p.expression {
                return invalid(format!("frame of {} changed since the merge was planned", p.name));
            }
        }
        let gaps = spec.gap_qubits();
        for (q, _) in &gaps {
            if self.owner.contains_key(q) || self.reserved.contains(q) {
                return invalid(format!("gap qubit {q:?} is in use"));
            }
        }
        for (q, b) in &gaps {
            self.reset(*q, *b)?;
            self.reserved.insert(*q);
        }
        let mut boundary_outcomes = Vec::new();
        for s in spec.merged_boundary_stabilizers() {
            let (f, det) = self.measure_sparse(&s.support, &mut [])?;
            if !det || f {
                self.release(&gaps);
                return integrity(format!("merged boundary stabilizer {:?} gave a non-trivial outcome", s.support));
            }
            boundary_outcomes.push(1);
        }
        let (logicals, basis) = self.commutant(spec);
        let mut tracked = Vec::new();
        for b in &basis {
            tracked.push(self.logical_vector_operator(&logicals, b)?);
        }
        let mut raw_outcomes = Vec::new();
        for s in spec.new_stabilizers() {
            let (f, _) = self.measure_sparse(&s.support, &mut tracked)?;
            raw_outcomes.push(sign_of(f));
        }
        let mut seam_parities = Vec::new();
        for s in &spec.seams {
            let op = self.operator(&s.product())?;
            let Some(f) = self.state.peek(&op)? else {
                return integrity(format!("seam between {} and {} did not fix its product", spec.participants[s.a].name, spec.participants[s.b].name));
            };
            let sign = spec.participants[s.a].expression.sign() * spec.participants[s.b].expression.sign();
            seam_parities.push(sign_of(f) * sign);
        }
        let mut parities = Vec::new();
        let np = spec.participants.len();
        for a in 0..np {
            for b in a + 1..np {
                if let Some(v) = chain_parity(spec, &seam_parities, a, b) {
                    parities.push(PairParity { a, b, value: v });
                }
            }
        }
        self.pending.push(Pending { spec: spec.clone(), logicals, basis, tracked });
        Ok(ParityResult { kind: spec.kind, seam_parities, parities, raw_outcomes, boundary_outcomes })
    }

    fn release(&mut self, gaps: &[(Coord, Basis)]) {
        for (q, _) in gaps {
            self.reserved.remove(q);
        }
    }

    /// Splits a merged configuration: measures out the gap, restores the
    /// boundary stabilizers and folds the logical byproducts into frames.
    pub fn split(&mut self, spec: &MergeSpec) -> Result<Vec<Byproduct>> {
        let Some(pos) = self.pending.iter().position(|p| p.spec == *spec) else {
            return integrity("split requested without a matching merge");
        };
        let Pending { spec, logicals, basis, mut tracked } = self.pending.remove(pos);
        let gaps = spec.gap_qubits();
        for (q, b) in &gaps {
            self.measure_sparse(&[(*q, *b)], &mut tracked)?;
        }
        for s in spec.merged_boundary_stabilizers() {
            self.measure_sparse(&s.support, &mut tracked)?;
        }
        self.release(&gaps);
        let k = logicals.len();
        let mut rows = Vec::new();
        let mut flags = Vec::new();
        for (b, t) in basis.iter().zip(&tracked) {
            let c = self.logical_vector_operator(&logicals, b)?;
            let prod = t * &c;
            let value = if prod.is_identity() { Some(prod.sign() == Some(-1)) } else { self.state.peek(&prod)? };
            let Some(f) = value else {
                return integrity("tracked logical drifted away from its representative");
            };
            let mut row = vec![0u64; (2 * k).div_ceil(64).max(1)];
            for i in 0..2 * k {
                if (b[i / 64] >> (i % 64)) & 1 == 1 {
                    let j = if i < k { i + k } else { i - k };
                    row[j / 64] |= 1 << (j % 64);
                }
            }
            rows.push(row);
            flags.push(f);
        }
        let Some(q) = gf2::solve_system(&rows, &flags, 2 * k) else {
            return integrity("byproduct system has no solution");
        };
        let bit = |i: usize| (q[i / 64] >> (i % 64)) & 1 == 1;
        let mut out = Vec::new();
        for (i, &(id, l)) in logicals.iter().enumerate() {
            let frame = self.patches[id].frames[l];
            let letter = match (bit(i), bit(k + i)) {
                (true, false) => frame.x_edge.letter,
                (false, true) => frame.z_edge.letter,
                (true, true) => frame.twist_image().letter,
                _ => continue,
            };
            self.patches[id].frames[l] = track_pauli(frame, letter);
            out.push(Byproduct { patch: id, logical: l, pauli: letter });
        }
        let ids: BTreeSet<PatchId> = logicals.iter().map(|(id, _)| *id).collect();
        for id in ids {
            self.cleanup(id)?;
        }
        Ok(out)
    }

    /// Whether a merge on these participants is waiting for its split.
    pub fn has_pending(&self) -> bool {
        !self.pending.is_empty()
    }
}

fn chain_parity(spec: &MergeSpec, seam_parities: &[i8], a: usize, b: usize) -> Option<i8> {
    // Seams form a path in participant order; walk it from a to b.
    let mut value = 1;
    let (lo, hi) = (a.min(b), a.max(b));
    for k in lo..hi {
        let s = spec.seams.iter().position(|s| (s.a.min(s.b), s.a.max(s.b)) == (k, k + 1))?;
        value *= seam_parities[s];
    }
    Some(value)
}

/// Canonical horizontal seam: upper boundary row `r`, gap row `r + 1`,
/// lower boundary row `r + 2`, upper columns `a0..=a1`. The gap and the
/// lower edge sit `shift` columns to the right of the upper edge.
struct Canon<'a> {
    r: i32,
    a0: i32,
    a1: i32,
    shift: i32,
    upper: Vec<Basis>,
    lower: EdgeType,
    lower_has: &'a dyn Fn(Coord) -> bool,
}

fn stencil(c: &Canon, lend: bool, rend: bool) -> Vec<Stabilizer> {
    let (r, g, a) = (c.r, c.r + 1, c.r + 2);
    let (b0, b1) = (c.a0 + c.shift, c.a1 + c.shift);
    let tt = |col: i32| face_type(r, col);
    let lb = c.lower.string_basis();
    let pair_in = |row: i32, col: i32, b: Basis, lo: i32, hi: i32| -> Vec<(Coord, Basis)> {
        [col, col + 1].into_iter().filter(|x| *x >= lo && *x <= hi).map(|x| (Coord::new(row, x), b)).collect()
    };
    let pair = |row: i32, col: i32, b: Basis| pair_in(row, col, b, c.a0, c.a1);
    let uniform = |col: i32| -> Vec<(Coord, Basis)> {
        let mut v = pair(r, col, tt(col));
        v.extend(pair(g, col, tt(col)));
        v
    };
    let sheared = |col: i32, s: i32| -> Vec<(Coord, Basis)> {
        let mut v = pair(r, col, tt(col));
        v.extend(pair_in(g, col + s, swap_xz(tt(col)), b0, b1));
        v
    };
    let mut faces: Vec<Vec<(Coord, Basis)>> = Vec::new();
    match c.upper.iter().position(|b| *b == Basis::Y) {
        None => {
            let u = c.upper[0];
            let (lo, hi) = if tt(c.a0 - 1) == u { (c.a0 - 1, c.a1 - 1) } else { (c.a0, c.a1) };
            for col in lo..=hi {
                faces.push(if u == lb { uniform(col) } else { sheared(col, c.shift) });
            }
        }
        Some(off) => {
            let j = c.a0 + off as i32;
            if *c.upper.last().unwrap() == lb {
                faces.extend((c.a0 - 1..=j - 2).map(|col| sheared(col, 1)));
                faces.extend((j + 1..=c.a1).map(uniform));
                faces.push(sparse_product(&uniform(j), &pair(r, j - 1, tt(j - 1))));
            } else {
                faces.extend((c.a0 - 1..=j - 2).map(uniform));
                faces.extend((j + 1..=c.a1).map(|col| sheared(col, -1)));
                faces.push(sparse_product(&uniform(j - 1), &pair(r, j, tt(j))));
            }
        }
    }
    for col in b0 - 1..=b1 {
        let t = face_type(g, col);
        let mut v: Vec<(Coord, Basis)> = pair_in(g, col, t, b0, b1);
        v.extend([col, col + 1].into_iter().map(|x| Coord::new(a, x)).filter(|q| (c.lower_has)(*q)).map(|q| (q, t)));
        let keep = match v.len() {
            4 => true,
            2 => (col < b0 && lend) || (col >= b1 && rend),
            _ => false,
        };
        if keep {
            faces.push(v);
        }
    }
    faces.into_iter().filter(|f| f.len() >= 2).map(Stabilizer::new).collect()
}

/// Rectangular patch at an arbitrary position with uniform sides
/// `[top, bottom, left, right]`. Edges are labeled like `x_top`.
pub fn rect_patch(origin: Coord, rows: usize, cols: usize, sides: [EdgeType; 4]) -> Result<Patch> {
    if rows == 0 || cols == 0 {
        return invalid("rectangle dimensions must be positive");
    }
    let rect = RectSpec::uniform(origin, rows, cols, sides);
    let mut edges = Vec::new();
    for (side, t) in [Side::Top, Side::Bottom, Side::Left, Side::Right].into_iter().zip(sides) {
        let label = format!("{}_{}", if t == EdgeType::X { "x" } else { "z" }, format!("{side:?}").to_lowercase());
        edges.push(Edge { label, edge_type: t, side, qubits: rect.side_qubits(side) });
    }
    let rep = |t: EdgeType| {
        let e = edges.iter().find(|e| e.edge_type == t).expect("both edge types present");
        e.string()
    };
    if !sides.contains(&EdgeType::X) || !sides.contains(&EdgeType::Z) {
        return invalid("a rectangle needs both X and Z edges");
    }
    let logicals = vec![LogicalPair { x: rep(EdgeType::X), z: rep(EdgeType::Z) }];
    let patch = Patch::from_rect(PatchKind::Ancilla, rows.min(cols), rect, edges, logicals);
    check_valid(patch)
}

/// L-shaped-access ancilla: the top side is an X-edge over the first
/// `tail` slots and a Z-edge over the rest; the left side is a Z-edge and
/// the right and bottom sides are X-edges.
pub fn connector_patch(origin: Coord, rows: usize, cols: usize, tail: usize) -> Result<Patch> {
    if tail == 0 || tail + 1 > cols || rows == 0 {
        return invalid(format!("connector needs 0 < tail < cols, got tail {tail} with {cols} columns"));
    }
    use EdgeType::*;
    let rect = RectSpec {
        origin,
        rows,
        cols,
        top: (0..cols - 1).map(|k| if k < tail { X } else { Z }).collect(),
        bottom: vec![X; cols - 1],
        left: vec![Z; rows.saturating_sub(1)],
        right: vec![X; rows.saturating_sub(1)],
    };
    let top = rect.side_qubits(Side::Top);
    // The right and bottom sides form one X-edge running corner to corner.
    let mut outer = rect.side_qubits(Side::Right);
    outer.extend(rect.side_qubits(Side::Bottom).into_iter().rev().skip(1));
    let edges = vec![
        Edge { label: "x_tail".into(), edge_type: X, side: Side::Top, qubits: top[..=tail].to_vec() },
        Edge { label: "z_top".into(), edge_type: Z, side: Side::Top, qubits: top[tail..].to_vec() },
        Edge { label: "z_left".into(), edge_type: Z, side: Side::Left, qubits: rect.side_qubits(Side::Left) },
        Edge { label: "x_outer".into(), edge_type: X, side: Side::Bottom, qubits: outer },
    ];
    let logicals = vec![LogicalPair { x: edges[0].string(), z: edges[2].string() }];
    let patch = Patch::from_rect(PatchKind::Ancilla, rows.min(cols), rect, edges, logicals);
    check_valid(patch)
}

/// A wide patch with an exact ancilla under the part of its access side
/// that a two-patch merge of `kind` uses, plus the planned merge.
pub fn merge_example(d: usize, kind: MergeKind, seed: u64) -> Result<(Board, PatchId, PatchId, MergeSpec)> {
    use EdgeType::{X, Z};
    let (part, top, pw, pa) = match kind {
        MergeKind::ZZ => (EdgeSelector::ZEdge, Z, Basis::Z, Basis::Z),
        MergeKind::XX => (EdgeSelector::XEdge, X, Basis::X, Basis::X),
        MergeKind::XZDislocation => (EdgeSelector::XEdge, Z, Basis::X, Basis::Z),
        MergeKind::YXTwist => (EdgeSelector::Twist, X, Basis::Y, Basis::X),
        MergeKind::YZTwist => (EdgeSelector::Twist, Z, Basis::Y, Basis::Z),
        MergeKind::MultiZZ => return invalid("multi-ZZ needs more than two patches"),
    };
    if d < 3 || d % 2 == 0 {
        return invalid(format!("distance must be odd and at least 3, got {d}"));
    }
    let w = 2 * d - 1;
    let j = d - 1;
    let mut b = Board::new(2 * d + 1, w, seed)?;
    let wide = b.add_patch("wide", build_wide(d)?)?;
    let (c0, c1) = match part {
        EdgeSelector::ZEdge => (0, j),
        EdgeSelector::XEdge => (j, w - 1),
        EdgeSelector::Twist => (0, w - 1),
    };
    // The dislocation seam is offset by one column.
    let shift = if kind == MergeKind::XZDislocation { -1 } else { 0 };
    let anc = rect_patch(Coord::new(d as i32 + 1, c0 as i32 + shift), d, c1 - c0 + 1, [top, top, top.other(), top.other()])?;
    let a = b.add_patch("ancilla", anc)?;
    let spec = b.plan_merge(kind, &[Target::new(wide, SignedPauli::plus(pw)), Target::new(a, SignedPauli::plus(pa))])?;
    Ok((b, wide, a, spec))
}

fn check_valid(patch: Patch) -> Result<Patch> {
    let report = validate(&patch);
    if !report.is_valid() {
        return invalid(format!("patch at {:?} is not a valid code: {:?}", patch.rect.origin, report.violations.first()));
    }
    Ok(patch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::build_wide;
    use Basis::*;

    fn sp(s: &str) -> SignedPauli {
        s.parse().unwrap()
    }

    /// Wide patch on top, an exact ancilla under the chosen part of its
    /// access side.
    fn pair_board(d: usize, part: EdgeSelector, anc_top: EdgeType, seed: u64) -> (Board, PatchId, PatchId) {
        let w = 2 * d - 1;
        let j = d - 1;
        let mut b = Board::new(2 * d + 1, w, seed).unwrap();
        let wide = b.add_patch("w", build_wide(d).unwrap()).unwrap();
        let (c0, c1) = match part {
            EdgeSelector::ZEdge => (0, j),
            EdgeSelector::XEdge => (j, w - 1),
            EdgeSelector::Twist => (0, w - 1),
        };
        let other = anc_top.other();
        let shift = match (part, anc_top) {
            (EdgeSelector::XEdge, EdgeType::Z) => -1,
            (EdgeSelector::ZEdge, EdgeType::X) => 1,
            _ => 0,
        };
        let anc = rect_patch(Coord::new(d as i32 + 1, c0 as i32 + shift), d, c1 - c0 + 1, [anc_top, anc_top, other, other]).unwrap();
        let a = b.add_patch("a", anc).unwrap();
        (b, wide, a)
    }

    #[test]
    fn prepare_sets_logical_values() {
        let (mut b, w, _) = pair_board(3, EdgeSelector::ZEdge, EdgeType::Z, 1);
        for s in ["+Z", "-Z", "+X", "-X", "+Y", "-Y"] {
            b.prepare(w, &[sp(s)]).unwrap();
            assert_eq!(b.peek_logical(&[Target::new(w, sp(s))]).unwrap(), Some(1), "{s}");
        }
    }

    #[test]
    fn four_kinds_plan_and_verify() {
        let cases = [
            (EdgeSelector::ZEdge, EdgeType::Z, "+Z", "+Z", MergeKind::ZZ),
            (EdgeSelector::XEdge, EdgeType::X, "+X", "+X", MergeKind::XX),
            (EdgeSelector::XEdge, EdgeType::Z, "+X", "+Z", MergeKind::XZDislocation),
            (EdgeSelector::Twist, EdgeType::X, "+Y", "+X", MergeKind::YXTwist),
            (EdgeSelector::Twist, EdgeType::Z, "+Y", "+Z", MergeKind::YZTwist),
            (EdgeSelector::ZEdge, EdgeType::X, "+Z", "+X", MergeKind::XZDislocation),
        ];
        for d in [3, 5] {
            for (part, top, pw, pa, kind) in cases {
                let (b, w, a) = pair_board(d, part, top, 0);
                let spec = b.plan_merge(kind, &[Target::new(w, sp(pw)), Target::new(a, sp(pa))]).unwrap_or_else(|e| panic!("d={d} {kind:?}: {e}"));
                let twists = spec.new_stabilizers().iter().filter(|s| s.kind == crate::layout::StabilizerKind::Twist).count();
                let expect = matches!(kind, MergeKind::YXTwist | MergeKind::YZTwist) as usize;
                assert_eq!(twists, expect, "{kind:?}");
            }
        }
    }

    #[test]
    fn merge_measures_parity_and_split_restores() {
        for seed in 0..8 {
            let (mut b, w, a) = pair_board(3, EdgeSelector::Twist, EdgeType::X, seed);
            b.prepare(w, &[sp("+Y")]).unwrap();
            b.prepare(a, &[sp("-X")]).unwrap();
            let spec = b.plan_merge(MergeKind::YXTwist, &[Target::new(w, sp("+Y")), Target::new(a, sp("+X"))]).unwrap();
            let r = b.execute_merge(&spec).unwrap();
            assert_eq!(r.parity(0, 1), Some(-1));
            b.split(&spec).unwrap();
            assert_eq!(b.peek_logical(&[Target::new(w, sp("+Y"))]).unwrap(), Some(1));
            assert_eq!(b.peek_logical(&[Target::new(a, sp("-X"))]).unwrap(), Some(1));
        }
    }

    #[test]
    fn split_without_merge_is_integrity_error() {
        let (mut b, w, a) = pair_board(3, EdgeSelector::ZEdge, EdgeType::Z, 0);
        b.prepare(w, &[sp("+Z")]).unwrap();
        b.prepare(a, &[sp("+Z")]).unwrap();
        let spec = b.plan_merge(MergeKind::ZZ, &[Target::new(w, sp("+Z")), Target::new(a, sp("+Z"))]).unwrap();
        assert!(matches!(b.split(&spec), Err(crate::error::Error::Integrity(_))));
    }

    #[test]
    fn letters() {
        assert_eq!(letter_product(X, Z), Some(Y));
        assert_eq!(letter_product(Y, Y), None);
    }
}
