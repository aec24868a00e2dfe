//! Classical tracking of single-qubit Cliffords through edge frames.
//!
//! A frame records which signed logical Pauli the X-edge string and the
//! Z-edge string of a patch currently measure. Applying a logical gate `G`
//! changes nothing physically; both images are conjugated instead,
//! `image -> G image G^dagger`, in program order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::Basis;

/// A logical Pauli with a sign, `sign * letter`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedPauli {
    pub negative: bool,
    pub letter: Basis,
}

impl SignedPauli {
    pub const fn plus(letter: Basis) -> Self {
        SignedPauli { negative: false, letter }
    }

    pub const fn minus(letter: Basis) -> Self {
        SignedPauli { negative: true, letter }
    }

    pub fn neg(self) -> Self {
        SignedPauli { negative: !self.negative, letter: self.letter }
    }

    pub fn sign(self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    /// `i * self * other` for anticommuting inputs, which is again Hermitian.
    pub fn i_times(self, other: SignedPauli) -> Option<SignedPauli> {
        if self.letter == other.letter {
            return None;
        }
        let third = third_letter(self.letter, other.letter);
        // A B = i C for cyclic (A, B), so i A B = -C; otherwise +C.
        let cyclic = matches!((self.letter, other.letter), (Basis::X, Basis::Y) | (Basis::Y, Basis::Z) | (Basis::Z, Basis::X));
        let negative = self.negative ^ other.negative ^ cyclic;
        Some(SignedPauli { negative, letter: third })
    }
}

impl fmt::Display for SignedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}_L", if self.negative { "-" } else { "+" }, self.letter)
    }
}

impl std::str::FromStr for SignedPauli {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (negative, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let rest = rest.strip_suffix("_L").unwrap_or(rest);
        let mut chars = rest.chars();
        match (chars.next().and_then(Basis::from_letter), chars.next()) {
            (Some(letter), None) => Ok(SignedPauli { negative, letter }),
            _ => Err(Error::Parse(format!("not a signed logical Pauli: {s:?}"))),
        }
    }
}

fn third_letter(a: Basis, b: Basis) -> Basis {
    match (a, b) {
        (Basis::X, Basis::Y) | (Basis::Y, Basis::X) => Basis::Z,
        (Basis::Y, Basis::Z) | (Basis::Z, Basis::Y) => Basis::X,
        _ => Basis::Y,
    }
}

/// Single-qubit Clifford generators understood by the tracker.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrameGate {
    H,
    S,
    X,
    Y,
    Z,
}

fn conjugate(gate: FrameGate, p: SignedPauli) -> SignedPauli {
    use Basis::*;
    match gate {
        FrameGate::H => match p.letter {
            X => SignedPauli { letter: Z, ..p },
            Z => SignedPauli { letter: X, ..p },
            Y => p.neg(),
        },
        FrameGate::S => match p.letter {
            X => SignedPauli { letter: Y, ..p },
            Y => SignedPauli { letter: X, negative: !p.negative },
            Z => p,
        },
        FrameGate::X | FrameGate::Y | FrameGate::Z => {
            let g = match gate {
                FrameGate::X => X,
                FrameGate::Y => Y,
                _ => Z,
            };
            if g.anticommutes(p.letter) {
                p.neg()
            } else {
                p
            }
        }
    }
}

/// Which physical operator realizes a logical Pauli.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeSelector {
    XEdge,
    ZEdge,
    /// `i X_edge Z_edge`, measured by a twist-defect merge.
    Twist,
}

/// Physical measurement target plus the sign relating its outcome to the
/// logical one: `logical = sign * physical`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeExpression {
    pub selector: EdgeSelector,
    pub negative: bool,
}

impl EdgeExpression {
    pub fn sign(self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeFrame {
    pub x_edge: SignedPauli,
    pub z_edge: SignedPauli,
}

impl Default for EdgeFrame {
    fn default() -> Self {
        default_frame()
    }
}

impl fmt::Display for EdgeFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(X_edge={}, Z_edge={})", self.x_edge, self.z_edge)
    }
}

pub fn default_frame() -> EdgeFrame {
    EdgeFrame { x_edge: SignedPauli::plus(Basis::X), z_edge: SignedPauli::plus(Basis::Z) }
}

impl EdgeFrame {
    /// Builds a frame from two images, rejecting commuting pairs.
    pub fn new(x_edge: SignedPauli, z_edge: SignedPauli) -> Result<Self> {
        if x_edge.letter == z_edge.letter {
            return Err(Error::InvalidParameter(format!("edge images {x_edge} and {z_edge} commute")));
        }
        Ok(EdgeFrame { x_edge, z_edge })
    }

    pub fn track(self, gate: FrameGate) -> EdgeFrame {
        EdgeFrame { x_edge: conjugate(gate, self.x_edge), z_edge: conjugate(gate, self.z_edge) }
    }

    pub fn track_all(self, gates: &[FrameGate]) -> EdgeFrame {
        gates.iter().fold(self, |f, g| f.track(*g))
    }

    /// The logical operator measured by `i X_edge Z_edge`.
    pub fn twist_image(self) -> SignedPauli {
        self.x_edge.i_times(self.z_edge).expect("frame images anticommute")
    }

    /// Expresses a signed logical Pauli through the edges.
    pub fn resolve(self, target: SignedPauli) -> EdgeExpression {
        let candidates = [
            (EdgeSelector::XEdge, self.x_edge),
            (EdgeSelector::ZEdge, self.z_edge),
            (EdgeSelector::Twist, self.twist_image()),
        ];
        let (selector, image) = candidates.into_iter().find(|(_, img)| img.letter == target.letter).expect("three distinct letters");
        EdgeExpression { selector, negative: image.negative ^ target.negative }
    }

    /// Image of a physical selector.
    pub fn image(self, selector: EdgeSelector) -> SignedPauli {
        match selector {
            EdgeSelector::XEdge => self.x_edge,
            EdgeSelector::ZEdge => self.z_edge,
            EdgeSelector::Twist => self.twist_image(),
        }
    }
}

pub fn track_h(f: EdgeFrame) -> EdgeFrame {
    f.track(FrameGate::H)
}

pub fn track_s(f: EdgeFrame) -> EdgeFrame {
    f.track(FrameGate::S)
}

pub fn track_pauli(f: EdgeFrame, p: Basis) -> EdgeFrame {
    f.track(match p {
        Basis::X => FrameGate::X,
        Basis::Y => FrameGate::Y,
        Basis::Z => FrameGate::Z,
    })
}

pub fn resolve(f: EdgeFrame, target: SignedPauli) -> EdgeExpression {
    f.resolve(target)
}

/// All frames reachable from the default one, each with a shortest gate
/// word reaching it (breadth-first over H, S, X, Y, Z).
pub fn reachable_frames() -> Vec<(EdgeFrame, Vec<FrameGate>)> {
    let gens = [FrameGate::H, FrameGate::S, FrameGate::X, FrameGate::Y, FrameGate::Z];
    let mut out = vec![(default_frame(), Vec::new())];
    let mut i = 0;
    while i < out.len() {
        let (f, word) = out[i].clone();
        for g in gens {
            let nf = f.track(g);
            if !out.iter().any(|(x, _)| *x == nf) {
                let mut w = word.clone();
                w.push(g);
                out.push((nf, w));
            }
        }
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use Basis::*;

    fn sp(neg: bool, b: Basis) -> SignedPauli {
        SignedPauli { negative: neg, letter: b }
    }

    #[test]
    fn h_then_s() {
        let f = track_s(track_h(default_frame()));
        assert_eq!(f, EdgeFrame { x_edge: sp(false, Z), z_edge: sp(false, Y) });
        assert_eq!(track_h(default_frame()), EdgeFrame { x_edge: sp(false, Z), z_edge: sp(false, X) });
        assert_eq!(track_h(f), EdgeFrame { x_edge: sp(false, X), z_edge: sp(true, Y) });
        assert_eq!(track_pauli(f, X), EdgeFrame { x_edge: sp(true, Z), z_edge: sp(true, Y) });
    }

    #[test]
    fn powers() {
        let d = default_frame();
        assert_eq!(track_h(track_h(d)), d);
        let s2 = track_s(track_s(d));
        assert_eq!(s2, EdgeFrame { x_edge: sp(true, X), z_edge: sp(false, Z) });
        assert_eq!(track_s(track_s(s2)), d);
        assert_eq!(track_pauli(d, Z), EdgeFrame { x_edge: sp(true, X), z_edge: sp(false, Z) });
    }

    #[test]
    fn closure_has_24_frames() {
        let all = reachable_frames();
        assert_eq!(all.len(), 24);
        for (f, _) in &all {
            assert_ne!(f.x_edge.letter, f.z_edge.letter);
        }
    }

    #[test]
    fn resolve_examples() {
        let d = default_frame();
        assert_eq!(d.resolve(sp(false, Z)), EdgeExpression { selector: EdgeSelector::ZEdge, negative: false });
        assert_eq!(d.resolve(sp(false, X)), EdgeExpression { selector: EdgeSelector::XEdge, negative: false });
        assert_eq!(d.resolve(sp(false, Y)).selector, EdgeSelector::Twist);
        assert!(!d.resolve(sp(false, Y)).negative);
        let hs = track_s(track_h(d));
        assert_eq!(hs.resolve(sp(false, X)).selector, EdgeSelector::Twist);
        let h = track_h(d);
        assert_eq!(h.resolve(sp(false, X)), EdgeExpression { selector: EdgeSelector::ZEdge, negative: false });
    }

    #[test]
    fn parse_signed() {
        assert_eq!("-Y_L".parse::<SignedPauli>().unwrap(), sp(true, Y));
        assert_eq!("Z".parse::<SignedPauli>().unwrap(), sp(false, Z));
        assert!("W".parse::<SignedPauli>().is_err());
    }
}
