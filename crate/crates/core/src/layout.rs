//! Patch geometry on the vertex lattice.
//!
//! Physical qubits sit on integer vertices `(row, col)`. A stabilizer face is
//! named by its top-left vertex and the whole plane shares one checkerboard:
//! the face at `(r, c)` is X-type when `r + c` is even. Every patch is a
//! rectangle of vertices whose boundary carries weight-2 slots, and a slot is
//! kept only where its checkerboard type matches the edge type requested for
//! that stretch of boundary. An X-edge carries Z-type slots (an X string runs
//! along it); a Z-edge carries X-type slots.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gf2;
use crate::pauli::Basis;

/// A lattice vertex. Serialized as `[row, col]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(i32, i32)", into = "(i32, i32)")]
pub struct Coord {
    pub row: i32,
    pub col: i32,
}

impl Coord {
    pub const fn new(row: i32, col: i32) -> Self {
        Coord { row, col }
    }

    pub fn offset(self, dr: i32, dc: i32) -> Self {
        Coord { row: self.row + dr, col: self.col + dc }
    }

    pub fn transposed(self) -> Self {
        Coord { row: self.col, col: self.row }
    }
}

impl From<(i32, i32)> for Coord {
    fn from((row, col): (i32, i32)) -> Self {
        Coord { row, col }
    }
}

impl From<Coord> for (i32, i32) {
    fn from(c: Coord) -> Self {
        (c.row, c.col)
    }
}

/// Checkerboard type of the face whose top-left vertex is `(r, c)`.
pub fn face_type(r: i32, c: i32) -> Basis {
    if (r + c).rem_euclid(2) == 0 {
        Basis::X
    } else {
        Basis::Z
    }
}

/// The four vertices of the face at `(r, c)` in reading order.
pub fn face_vertices(r: i32, c: i32) -> [Coord; 4] {
    [Coord::new(r, c), Coord::new(r, c + 1), Coord::new(r + 1, c), Coord::new(r + 1, c + 1)]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeType {
    X,
    Z,
}

impl EdgeType {
    /// Letter of the logical string running along an edge of this type.
    pub fn string_basis(self) -> Basis {
        match self {
            EdgeType::X => Basis::X,
            EdgeType::Z => Basis::Z,
        }
    }

    /// Type of the weight-2 slots that such an edge carries.
    pub fn slot_basis(self) -> Basis {
        match self {
            EdgeType::X => Basis::Z,
            EdgeType::Z => Basis::X,
        }
    }

    pub fn other(self) -> EdgeType {
        match self {
            EdgeType::X => EdgeType::Z,
            EdgeType::Z => EdgeType::X,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Top,
    Bottom,
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilizerKind {
    #[serde(rename = "X-type")]
    XType,
    #[serde(rename = "Z-type")]
    ZType,
    #[serde(rename = "mixed")]
    Mixed,
    #[serde(rename = "twist")]
    Twist,
}

/// A stabilizer generator given by its support.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stabilizer {
    pub kind: StabilizerKind,
    #[serde(with = "support_serde")]
    pub support: Vec<(Coord, Basis)>,
    /// Side of the owning patch for weight-2 boundary slots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Side>,
}

mod support_serde {
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

impl Stabilizer {
    /// Builds a stabilizer and infers its kind from the letters.
    pub fn new(mut support: Vec<(Coord, Basis)>) -> Self {
        support.sort();
        let has = |b: Basis| support.iter().any(|(_, x)| *x == b);
        let kind = if has(Basis::Y) {
            StabilizerKind::Twist
        } else if has(Basis::X) && has(Basis::Z) {
            StabilizerKind::Mixed
        } else if has(Basis::X) {
            StabilizerKind::XType
        } else {
            StabilizerKind::ZType
        };
        Stabilizer { kind, support, boundary: None }
    }

    pub fn uniform(qubits: &[Coord], b: Basis) -> Self {
        Stabilizer::new(qubits.iter().map(|q| (*q, b)).collect())
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn qubits(&self) -> impl Iterator<Item = Coord> + '_ {
        self.support.iter().map(|(c, _)| *c)
    }

    pub fn basis_at(&self, q: Coord) -> Option<Basis> {
        self.support.iter().find(|(c, _)| *c == q).map(|(_, b)| *b)
    }

    pub fn commutes_with(&self, other: &Stabilizer) -> bool {
        sparse_commute(&self.support, &other.support)
    }
}

/// Whether two sparse Pauli strings commute.
pub fn sparse_commute(a: &[(Coord, Basis)], b: &[(Coord, Basis)]) -> bool {
    let mut anti = 0;
    for (qa, ba) in a {
        for (qb, bb) in b {
            if qa == qb && ba.anticommutes(*bb) {
                anti += 1;
            }
        }
    }
    anti % 2 == 0
}

/// A labeled boundary segment with the qubits its logical string covers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub label: String,
    #[serde(rename = "type")]
    pub edge_type: EdgeType,
    pub side: Side,
    pub qubits: Vec<Coord>,
}

impl Edge {
    /// The full string operator along the edge.
    pub fn string(&self) -> Vec<(Coord, Basis)> {
        let b = self.edge_type.string_basis();
        self.qubits.iter().map(|q| (*q, b)).collect()
    }
}

/// Per-slot edge types for each side of a rectangle. Top and bottom hold
/// `cols - 1` entries, left and right `rows - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectSpec {
    pub origin: Coord,
    pub rows: usize,
    pub cols: usize,
    pub top: Vec<EdgeType>,
    pub bottom: Vec<EdgeType>,
    pub left: Vec<EdgeType>,
    pub right: Vec<EdgeType>,
}

impl RectSpec {
    /// Rectangle whose sides each have one uniform edge type.
    pub fn uniform(origin: Coord, rows: usize, cols: usize, sides: [EdgeType; 4]) -> Self {
        let h = cols.saturating_sub(1);
        let v = rows.saturating_sub(1);
        RectSpec {
            origin,
            rows,
            cols,
            top: vec![sides[0]; h],
            bottom: vec![sides[1]; h],
            left: vec![sides[2]; v],
            right: vec![sides[3]; v],
        }
    }

    pub fn qubits(&self) -> Vec<Coord> {
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for r in 0..self.rows as i32 {
            for c in 0..self.cols as i32 {
                out.push(self.origin.offset(r, c));
            }
        }
        out
    }

    pub fn contains(&self, q: Coord) -> bool {
        let (r, c) = (q.row - self.origin.row, q.col - self.origin.col);
        r >= 0 && c >= 0 && (r as usize) < self.rows && (c as usize) < self.cols
    }

    pub fn bottom_row(&self) -> i32 {
        self.origin.row + self.rows as i32 - 1
    }

    pub fn right_col(&self) -> i32 {
        self.origin.col + self.cols as i32 - 1
    }

    /// Bulk faces plus the boundary slots allowed by the side types.
    pub fn stabilizers(&self) -> Vec<Stabilizer> {
        let (r0, c0) = (self.origin.row, self.origin.col);
        let (rows, cols) = (self.rows as i32, self.cols as i32);
        let mut out = Vec::new();
        for r in r0 - 1..r0 + rows {
            for c in c0 - 1..c0 + cols {
                let vs: Vec<Coord> = face_vertices(r, c).into_iter().filter(|q| self.contains(*q)).collect();
                let t = face_type(r, c);
                if vs.len() == 4 {
                    out.push(Stabilizer::uniform(&vs, t));
                } else if vs.len() == 2 {
                    let (side, want) = if vs[0].row == vs[1].row {
                        let j = (c - c0) as usize;
                        if r == r0 - 1 {
                            (Side::Top, self.top[j])
                        } else {
                            (Side::Bottom, self.bottom[j])
                        }
                    } else {
                        let j = (r - r0) as usize;
                        if c == c0 - 1 {
                            (Side::Left, self.left[j])
                        } else {
                            (Side::Right, self.right[j])
                        }
                    };
                    if want.slot_basis() == t {
                        let mut s = Stabilizer::uniform(&vs, t);
                        s.boundary = Some(side);
                        out.push(s);
                    }
                }
            }
        }
        out
    }

    /// Vertices along one side, in increasing coordinate order.
    pub fn side_qubits(&self, side: Side) -> Vec<Coord> {
        let (r0, c0) = (self.origin.row, self.origin.col);
        match side {
            Side::Top => (0..self.cols as i32).map(|c| Coord::new(r0, c0 + c)).collect(),
            Side::Bottom => (0..self.cols as i32).map(|c| Coord::new(self.bottom_row(), c0 + c)).collect(),
            Side::Left => (0..self.rows as i32).map(|r| Coord::new(r0 + r, c0)).collect(),
            Side::Right => (0..self.rows as i32).map(|r| Coord::new(r0 + r, self.right_col())).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatchKind {
    Square,
    Wide,
    #[serde(rename = "DoubleSided-A")]
    DoubleSidedA,
    #[serde(rename = "DoubleSided-B")]
    DoubleSidedB,
    Ancilla,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Representatives of one encoded qubit's logical X and Z.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalPair {
    #[serde(with = "support_serde")]
    pub x: Vec<(Coord, Basis)>,
    #[serde(with = "support_serde")]
    pub z: Vec<(Coord, Basis)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub kind: PatchKind,
    pub distance: usize,
    pub data_qubits: Vec<Coord>,
    pub stabilizers: Vec<Stabilizer>,
    pub edges: Vec<Edge>,
    pub logical_count: usize,
    pub logicals: Vec<LogicalPair>,
    pub rect: RectSpec,
}

fn check_distance(d: usize) -> Result<()> {
    if d < 3 || d % 2 == 0 {
        return invalid(format!("distance must be odd and at least 3, got {d}"));
    }
    Ok(())
}

fn string(qs: &[Coord], b: Basis) -> Vec<(Coord, Basis)> {
    qs.iter().map(|q| (*q, b)).collect()
}

impl Patch {
    /// Assembles a patch from a rectangle spec, edges and logical representatives.
    pub fn from_rect(kind: PatchKind, distance: usize, rect: RectSpec, edges: Vec<Edge>, logicals: Vec<LogicalPair>) -> Self {
        Patch {
            kind,
            distance,
            data_qubits: rect.qubits(),
            stabilizers: rect.stabilizers(),
            edges,
            logical_count: logicals.len(),
            logicals,
            rect,
        }
    }

    pub fn edge(&self, label: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.label == label)
    }

    /// Moves the patch by a lattice vector. The offset must have even parity
    /// so the checkerboard, and hence the stabilizer set, is preserved.
    pub fn translated(&self, dr: i32, dc: i32) -> Result<Patch> {
        if (dr + dc).rem_euclid(2) != 0 {
            return invalid("patch offsets must preserve the checkerboard (even row+col)");
        }
        let mv = |q: &Coord| q.offset(dr, dc);
        let mv_s = |s: &Vec<(Coord, Basis)>| s.iter().map(|(q, b)| (mv(q), *b)).collect::<Vec<_>>();
        let mut p = self.clone();
        p.rect.origin = mv(&p.rect.origin);
        p.data_qubits = p.data_qubits.iter().map(mv).collect();
        for s in &mut p.stabilizers {
            s.support = mv_s(&s.support);
        }
        for e in &mut p.edges {
            e.qubits = e.qubits.iter().map(mv).collect();
        }
        for l in &mut p.logicals {
            l.x = mv_s(&l.x);
            l.z = mv_s(&l.z);
        }
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("patch serializes")
    }

    pub fn from_json(s: &str) -> Result<Patch> {
        serde_json::from_str(s).map_err(|e| crate::error::Error::Parse(e.to_string()))
    }
}

/// Rotated surface code square: Z-edges on top and bottom, X-edges left and right.
pub fn build_square(d: usize) -> Result<Patch> {
    check_distance(d)?;
    use EdgeType::*;
    let rect = RectSpec::uniform(Coord::new(0, 0), d, d, [Z, Z, X, X]);
    let top = rect.side_qubits(Side::Top);
    let left = rect.side_qubits(Side::Left);
    let edges = vec![
        Edge { label: "z_top".into(), edge_type: Z, side: Side::Top, qubits: top.clone() },
        Edge { label: "z_bottom".into(), edge_type: Z, side: Side::Bottom, qubits: rect.side_qubits(Side::Bottom) },
        Edge { label: "x_left".into(), edge_type: X, side: Side::Left, qubits: left.clone() },
        Edge { label: "x_right".into(), edge_type: X, side: Side::Right, qubits: rect.side_qubits(Side::Right) },
    ];
    let logicals = vec![LogicalPair { x: string(&left, Basis::X), z: string(&top, Basis::Z) }];
    Ok(Patch::from_rect(PatchKind::Square, d, rect, edges, logicals))
}

/// Column of the X/Z junction on the access side of a wide patch.
pub fn wide_junction(d: usize) -> usize {
    d - 1
}

/// Wide patch of `d` rows by `2d - 1` columns: two `d x d` blocks sharing
/// one column. The bottom side is the access side, with a Z-edge over
/// columns `0..=d-1` and an X-edge over `d-1..=2d-2`; the two edges share
/// the junction qubit.
pub fn build_wide(d: usize) -> Result<Patch> {
    check_distance(d)?;
    use EdgeType::*;
    let w = 2 * d - 1;
    let j = wide_junction(d);
    let split = |lo: EdgeType, hi: EdgeType| (0..w - 1).map(|k| if k < j { lo } else { hi }).collect::<Vec<_>>();
    let rect = RectSpec {
        origin: Coord::new(0, 0),
        rows: d,
        cols: w,
        top: split(X, Z),
        bottom: split(Z, X),
        left: vec![X; d - 1],
        right: vec![Z; d - 1],
    };
    let bottom = rect.side_qubits(Side::Bottom);
    let zq = bottom[..=j].to_vec();
    let xq = bottom[j..].to_vec();
    let edges = vec![
        Edge { label: "z_edge".into(), edge_type: Z, side: Side::Bottom, qubits: zq.clone() },
        Edge { label: "x_edge".into(), edge_type: X, side: Side::Bottom, qubits: xq.clone() },
    ];
    let logicals = vec![LogicalPair { x: string(&xq, Basis::X), z: string(&zq, Basis::Z) }];
    Ok(Patch::from_rect(PatchKind::Wide, d, rect, edges, logicals))
}

/// Double-sided patch encoding two qubits. The left side is a Z-edge whose
/// string is `Z_L Z_L`; the right side is an X-edge whose string is
/// `X_L X_L`. Qubit 1 owns the top boundary (X-edge then Z-edge), qubit 2 the
/// bottom one.
pub fn build_double_sided(d: usize, variant: Variant) -> Result<Patch> {
    check_distance(d)?;
    use EdgeType::*;
    let w = 2 * d - 1;
    let (rows, top_split, bottom_split, kind) = match variant {
        Variant::A => (d + 1, d - 1, d - 1, PatchKind::DoubleSidedA),
        Variant::B => (d, d - 1, d, PatchKind::DoubleSidedB),
    };
    let split = |s: usize| (0..w - 1).map(|k| if k < s { X } else { Z }).collect::<Vec<_>>();
    let rect = RectSpec {
        origin: Coord::new(0, 0),
        rows,
        cols: w,
        top: split(top_split),
        bottom: split(bottom_split),
        left: vec![Z; rows - 1],
        right: vec![X; rows - 1],
    };
    let top = rect.side_qubits(Side::Top);
    let bottom = rect.side_qubits(Side::Bottom);
    let left = rect.side_qubits(Side::Left);
    let right = rect.side_qubits(Side::Right);
    let edges = vec![
        Edge { label: "zz_left".into(), edge_type: Z, side: Side::Left, qubits: left },
        Edge { label: "xx_right".into(), edge_type: X, side: Side::Right, qubits: right },
        Edge { label: "x1_top".into(), edge_type: X, side: Side::Top, qubits: top[..=top_split].to_vec() },
        Edge { label: "z1_top".into(), edge_type: Z, side: Side::Top, qubits: top[top_split..].to_vec() },
        Edge { label: "x2_bottom".into(), edge_type: X, side: Side::Bottom, qubits: bottom[..=bottom_split].to_vec() },
        Edge { label: "z2_bottom".into(), edge_type: Z, side: Side::Bottom, qubits: bottom[bottom_split..].to_vec() },
    ];
    let logicals = vec![
        LogicalPair { x: string(&top[..=top_split], Basis::X), z: string(&top[top_split..], Basis::Z) },
        LogicalPair { x: string(&bottom[..=bottom_split], Basis::X), z: string(&bottom[bottom_split..], Basis::Z) },
    ];
    Ok(Patch::from_rect(kind, d, rect, edges, logicals))
}

/// Rectangular ancilla. Horizontal ancillas are `width` rows by `length`
/// columns with X-edges on top and bottom and Z-edges on the short sides;
/// vertical ones are the transpose.
pub fn build_ancilla(width: usize, length: usize, orientation: Orientation) -> Result<Patch> {
    if width == 0 || length == 0 {
        return invalid(format!("ancilla dimensions must be positive, got {width}x{length}"));
    }
    if length < width {
        return invalid(format!("ancilla length {length} is shorter than its width {width}"));
    }
    use EdgeType::*;
    let (rows, cols, sides) = match orientation {
        Orientation::Horizontal => (width, length, [X, X, Z, Z]),
        Orientation::Vertical => (length, width, [Z, Z, X, X]),
    };
    let rect = RectSpec::uniform(Coord::new(0, 0), rows, cols, sides);
    let mut edges = Vec::new();
    for (side, t) in [Side::Top, Side::Bottom, Side::Left, Side::Right].into_iter().zip(sides) {
        let label = format!("{}_{}", if t == X { "x" } else { "z" }, format!("{side:?}").to_lowercase());
        edges.push(Edge { label, edge_type: t, side, qubits: rect.side_qubits(side) });
    }
    let (xs, zs) = match orientation {
        Orientation::Horizontal => (rect.side_qubits(Side::Top), rect.side_qubits(Side::Left)),
        Orientation::Vertical => (rect.side_qubits(Side::Left), rect.side_qubits(Side::Top)),
    };
    let logicals = vec![LogicalPair { x: string(&xs, Basis::X), z: string(&zs, Basis::Z) }];
    Ok(Patch::from_rect(PatchKind::Ancilla, width.min(length), rect, edges, logicals))
}

/// Dense symplectic encoding of sparse operators over an explicit qubit index.
pub struct Indexer {
    pub index: HashMap<Coord, usize>,
    pub n: usize,
}

impl Indexer {
    pub fn new(qubits: &[Coord]) -> Self {
        let index = qubits.iter().enumerate().map(|(i, q)| (*q, i)).collect();
        Indexer { index, n: qubits.len() }
    }

    /// `[x-bits | z-bits]` packed into words, or `None` if a qubit is unknown.
    pub fn vector(&self, op: &[(Coord, Basis)]) -> Option<Vec<u64>> {
        let words = (2 * self.n).div_ceil(64).max(1);
        let mut v = vec![0u64; words];
        for (q, b) in op {
            let i = *self.index.get(q)?;
            let (x, z) = b.bits();
            if x {
                v[i / 64] ^= 1 << (i % 64);
            }
            if z {
                let k = self.n + i;
                v[k / 64] ^= 1 << (k % 64);
            }
        }
        Some(v)
    }
}

/// A problem found by [`validate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    DuplicateQubit { qubit: Coord },
    UnknownQubit { stabilizer: usize, qubit: Coord },
    BadWeight { stabilizer: usize, weight: usize },
    KindMismatch { stabilizer: usize },
    NonCommuting { a: usize, b: usize, overlap: Vec<Coord> },
    EdgeAnticommutes { edge: String, stabilizer: usize },
    LogicalCount { expected: usize, found: usize },
    LogicalAlgebra { detail: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub independent_stabilizers: usize,
    pub logical_count: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn kind_ok(s: &Stabilizer) -> bool {
    let ys = s.support.iter().filter(|(_, b)| *b == Basis::Y).count();
    let xs = s.support.iter().filter(|(_, b)| *b == Basis::X).count();
    let zs = s.support.iter().filter(|(_, b)| *b == Basis::Z).count();
    match s.kind {
        StabilizerKind::XType => ys == 0 && zs == 0,
        StabilizerKind::ZType => ys == 0 && xs == 0,
        StabilizerKind::Mixed => ys == 0 && xs > 0 && zs > 0,
        StabilizerKind::Twist => ys == 1 && s.weight() == 5,
    }
}

/// Checks every patch invariant and lists what fails.
pub fn validate(patch: &Patch) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen = BTreeSet::new();
    for q in &patch.data_qubits {
        if !seen.insert(*q) {
            violations.push(Violation::DuplicateQubit { qubit: *q });
        }
    }
    let idx = Indexer::new(&patch.data_qubits);
    let mut vecs = Vec::new();
    for (i, s) in patch.stabilizers.iter().enumerate() {
        if !(2..=5).contains(&s.weight()) {
            violations.push(Violation::BadWeight { stabilizer: i, weight: s.weight() });
        }
        if !kind_ok(s) {
            violations.push(Violation::KindMismatch { stabilizer: i });
        }
        match idx.vector(&s.support) {
            Some(v) => vecs.push(v),
            None => {
                let q = s.qubits().find(|q| !idx.index.contains_key(q)).unwrap();
                violations.push(Violation::UnknownQubit { stabilizer: i, qubit: q });
            }
        }
    }
    for i in 0..patch.stabilizers.len() {
        for j in i + 1..patch.stabilizers.len() {
            let (a, b) = (&patch.stabilizers[i], &patch.stabilizers[j]);
            if !a.commutes_with(b) {
                let overlap = a.qubits().filter(|q| b.basis_at(*q).is_some()).collect();
                violations.push(Violation::NonCommuting { a: i, b: j, overlap });
            }
        }
    }
    for e in &patch.edges {
        let st = e.string();
        for (i, s) in patch.stabilizers.iter().enumerate() {
            if !sparse_commute(&st, &s.support) {
                violations.push(Violation::EdgeAnticommutes { edge: e.label.clone(), stabilizer: i });
            }
        }
    }
    let independent = gf2::rank(&vecs);
    let found = patch.data_qubits.len().saturating_sub(independent);
    if found != patch.logical_count {
        violations.push(Violation::LogicalCount { expected: patch.logical_count, found });
    }
    if let Err(detail) = check_logicals(patch, &idx, &vecs) {
        violations.push(Violation::LogicalAlgebra { detail });
    }
    ValidationReport { independent_stabilizers: independent, logical_count: found, violations }
}

fn check_logicals(patch: &Patch, idx: &Indexer, stabs: &[Vec<u64>]) -> std::result::Result<(), String> {
    let ops: Vec<(String, &Vec<(Coord, Basis)>)> = patch
        .logicals
        .iter()
        .enumerate()
        .flat_map(|(i, l)| [(format!("X{}", i + 1), &l.x), (format!("Z{}", i + 1), &l.z)])
        .collect();
    for (name, op) in &ops {
        if idx.vector(op).is_none() {
            return Err(format!("{name} leaves the patch"));
        }
        if let Some(s) = patch.stabilizers.iter().position(|s| !sparse_commute(op, &s.support)) {
            return Err(format!("{name} anticommutes with stabilizer {s}"));
        }
        let mut rows = stabs.to_vec();
        let v = idx.vector(op).unwrap();
        rows.push(v.clone());
        if gf2::rank(&rows) == gf2::rank(stabs) {
            return Err(format!("{name} is a stabilizer"));
        }
    }
    for (a, (na, oa)) in ops.iter().enumerate() {
        for (nb, ob) in ops.iter().skip(a + 1) {
            let partners = na[1..] == nb[1..] && na[..1] != nb[..1];
            if sparse_commute(oa, ob) == partners {
                return Err(format!("{na} and {nb} have the wrong commutation"));
            }
        }
    }
    Ok(())
}

/// Minimum weight of a nontrivial logical operator of one Pauli letter
/// (`Basis::X` or `Basis::Z`) for a CSS patch, searching up to `max_weight`.
pub fn css_distance(patch: &Patch, letter: Basis, max_weight: usize) -> Option<usize> {
    let n = patch.data_qubits.len();
    let idx: HashMap<Coord, usize> = patch.data_qubits.iter().enumerate().map(|(i, q)| (*q, i)).collect();
    let words = n.div_ceil(64).max(1);
    let to_bits = |s: &Stabilizer| {
        let mut v = vec![0u64; words];
        for q in s.qubits() {
            let i = idx[&q];
            v[i / 64] |= 1 << (i % 64);
        }
        v
    };
    let other = match letter {
        Basis::X => Basis::Z,
        _ => Basis::X,
    };
    let checks: Vec<Vec<u64>> = patch.stabilizers.iter().filter(|s| s.support.iter().all(|(_, b)| *b == other)).map(to_bits).collect();
    let same: Vec<Vec<u64>> = patch.stabilizers.iter().filter(|s| s.support.iter().all(|(_, b)| *b == letter)).map(to_bits).collect();
    let mut basis = gf2::Basis::new();
    for s in &same {
        basis.insert(s);
    }
    // Syndrome of each qubit as a bitmask over the checks.
    let cw = checks.len().div_ceil(64).max(1);
    let syn: Vec<Vec<u64>> = (0..n)
        .map(|q| {
            let mut s = vec![0u64; cw];
            for (k, c) in checks.iter().enumerate() {
                if (c[q / 64] >> (q % 64)) & 1 == 1 {
                    s[k / 64] |= 1 << (k % 64);
                }
            }
            s
        })
        .collect();
    fn rec(
        start: usize,
        left: usize,
        n: usize,
        syn: &[Vec<u64>],
        acc_s: &mut Vec<u64>,
        acc_v: &mut Vec<u64>,
        basis: &gf2::Basis,
    ) -> bool {
        if left == 0 {
            return acc_s.iter().all(|w| *w == 0) && !basis.contains(acc_v);
        }
        for q in start..n {
            for (a, b) in acc_s.iter_mut().zip(&syn[q]) {
                *a ^= b;
            }
            acc_v[q / 64] ^= 1 << (q % 64);
            let hit = rec(q + 1, left - 1, n, syn, acc_s, acc_v, basis);
            for (a, b) in acc_s.iter_mut().zip(&syn[q]) {
                *a ^= b;
            }
            acc_v[q / 64] ^= 1 << (q % 64);
            if hit {
                return true;
            }
        }
        false
    }
    for w in 1..=max_weight.min(n) {
        let mut acc_s = vec![0u64; cw];
        let mut acc_v = vec![0u64; words];
        if rec(0, w, n, &syn, &mut acc_s, &mut acc_v, &basis) {
            return Some(w);
        }
    }
    None
}

/// Colors used by the SVG renderer.
pub fn basis_color(kind: StabilizerKind) -> &'static str {
    match kind {
        StabilizerKind::ZType => "#f5d76e",
        StabilizerKind::XType => "#b5651d",
        StabilizerKind::Mixed => "#f39c12",
        StabilizerKind::Twist => "#2e86de",
    }
}

/// Renders stabilizers as filled polygons over the vertex lattice.
pub fn render_svg(qubits: &[Coord], stabilizers: &[Stabilizer], highlight: &[Stabilizer]) -> String {
    const S: f64 = 40.0;
    const M: f64 = 30.0;
    let rmin = qubits.iter().map(|q| q.row).min().unwrap_or(0);
    let cmin = qubits.iter().map(|q| q.col).min().unwrap_or(0);
    let rmax = qubits.iter().map(|q| q.row).max().unwrap_or(0);
    let cmax = qubits.iter().map(|q| q.col).max().unwrap_or(0);
    let px = |q: Coord| (M + (q.col - cmin) as f64 * S, M + (q.row - rmin) as f64 * S);
    let width = 2.0 * M + (cmax - cmin) as f64 * S;
    let height = 2.0 * M + (rmax - rmin) as f64 * S;
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let shape = |s: &Stabilizer, stroke: &str, out: &mut String| {
        let pts: Vec<(f64, f64)> = s.qubits().map(px).collect();
        let fill = basis_color(s.kind);
        if pts.len() == 2 {
            let (a, b) = (pts[0], pts[1]);
            let _ = writeln!(
                out,
                r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{fill}" stroke-width="14" stroke-linecap="round" opacity="0.9"/>"#,
                a.0, a.1, b.0, b.1
            );
            return;
        }
        let cx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let cy = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let mut sorted = pts.clone();
        sorted.sort_by(|a, b| (a.1 - cy).atan2(a.0 - cx).partial_cmp(&(b.1 - cy).atan2(b.0 - cx)).unwrap());
        let poly: Vec<String> = sorted.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
        let _ = writeln!(out, r#"<polygon points="{}" fill="{fill}" stroke="{stroke}" stroke-width="1.5"/>"#, poly.join(" "));
    };
    for s in stabilizers {
        shape(s, "#555", &mut out);
    }
    for s in highlight {
        shape(s, "#c0392b", &mut out);
    }
    let mut ys = BTreeMap::new();
    for s in stabilizers.iter().chain(highlight) {
        for (q, b) in &s.support {
            if *b == Basis::Y {
                ys.insert(*q, ());
            }
        }
    }
    for q in qubits {
        let (x, y) = px(*q);
        let fill = if ys.contains_key(q) { "#2e86de" } else { "black" };
        let _ = writeln!(out, r#"<circle cx="{x:.1}" cy="{y:.1}" r="4" fill="{fill}"/>"#);
    }
    out.push_str("</svg>\n");
    out
}

impl Patch {
    pub fn to_svg(&self) -> String {
        render_svg(&self.data_qubits, &self.stabilizers, &[])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weights(p: &Patch) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for s in &p.stabilizers {
            *m.entry(s.weight()).or_insert(0) += 1;
        }
        m
    }

    #[test]
    fn square_counts() {
        let p = build_square(3).unwrap();
        assert_eq!(p.data_qubits.len(), 9);
        assert_eq!(p.stabilizers.len(), 8);
        assert_eq!(weights(&p), BTreeMap::from([(2, 4), (4, 4)]));
        assert!(validate(&p).is_valid(), "{:?}", validate(&p));
        assert_eq!(build_square(5).unwrap().data_qubits.len(), 25);
        assert!(build_square(2).is_err());
        assert!(build_square(1).is_err());
    }

    #[test]
    fn all_builders_validate() {
        for d in [3, 5, 7] {
            for p in [build_square(d), build_wide(d), build_double_sided(d, Variant::A), build_double_sided(d, Variant::B)] {
                let p = p.unwrap();
                let r = validate(&p);
                assert!(r.is_valid(), "{:?} d={d}: {:?}", p.kind, r.violations);
            }
        }
    }

    #[test]
    fn double_sided_counts() {
        for d in [3usize, 5, 7] {
            assert_eq!(build_double_sided(d, Variant::A).unwrap().data_qubits.len(), 2 * d * d + d - 1);
            assert_eq!(build_double_sided(d, Variant::B).unwrap().data_qubits.len(), 2 * d * d - d);
        }
    }

    #[test]
    fn distances() {
        for d in [3, 5] {
            let sq = build_square(d).unwrap();
            assert_eq!(css_distance(&sq, Basis::X, d), Some(d));
            assert_eq!(css_distance(&sq, Basis::Z, d), Some(d));
            let w = build_wide(d).unwrap();
            assert_eq!(css_distance(&w, Basis::X, d), Some(d));
            assert_eq!(css_distance(&w, Basis::Z, d), Some(d));
        }
        let a = build_double_sided(3, Variant::A).unwrap();
        assert_eq!(css_distance(&a, Basis::X, 3), Some(3));
        assert_eq!(css_distance(&a, Basis::Z, 3), Some(3));
        // The thinner variant gives up one unit of Z distance.
        let b = build_double_sided(3, Variant::B).unwrap();
        assert_eq!(css_distance(&b, Basis::X, 3), Some(3));
        assert_eq!(css_distance(&b, Basis::Z, 3), Some(2));
    }

    #[test]
    fn ancilla_shapes() {
        let strip = build_ancilla(1, 3, Orientation::Horizontal).unwrap();
        assert_eq!(validate(&strip).logical_count, 1);
        assert!(validate(&strip).is_valid());
        let a = build_ancilla(3, 9, Orientation::Horizontal).unwrap();
        assert!(validate(&a).is_valid());
        let v = build_ancilla(2, 5, Orientation::Vertical).unwrap();
        assert!(validate(&v).is_valid());
        assert!(build_ancilla(0, 5, Orientation::Horizontal).is_err());
        assert!(build_ancilla(4, 3, Orientation::Horizontal).is_err());
    }

    #[test]
    fn corrupted_support_is_reported() {
        let mut p = build_square(3).unwrap();
        let i = p.stabilizers.iter().position(|s| s.weight() == 4).unwrap();
        p.stabilizers[i].support[0].1 = match p.stabilizers[i].support[0].1 {
            Basis::X => Basis::Z,
            _ => Basis::X,
        };
        p.stabilizers[i].kind = StabilizerKind::Mixed;
        let r = validate(&p);
        assert!(r.violations.iter().any(|v| matches!(v, Violation::NonCommuting { .. })));
    }

    #[test]
    fn json_round_trip() {
        let p = build_double_sided(3, Variant::B).unwrap();
        let q = Patch::from_json(&p.to_json()).unwrap();
        assert_eq!(p, q);
        assert!(p.to_json().contains("\"DoubleSided-B\""));
    }

    #[test]
    fn translation_keeps_checkerboard() {
        let p = build_wide(3).unwrap();
        let q = p.translated(0, 6).unwrap();
        let mut fresh = p.rect.clone();
        fresh.origin = Coord::new(0, 6);
        assert_eq!(q.stabilizers, fresh.stabilizers());
        assert!(p.translated(0, 1).is_err());
    }
}
