//! Phase-tracked Pauli operators over `n` qubits in the binary symplectic
//! representation.
//!
//! A qubit whose x and z bits are both set denotes `Y`, and the convention
//! `Y = iXZ` holds everywhere in the crate. The overall phase is stored as a
//! power of `i`.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Basis::X => (true, false),
            Basis::Y => (true, true),
            Basis::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Option<Basis> {
        match (x, z) {
            (true, false) => Some(Basis::X),
            (true, true) => Some(Basis::Y),
            (false, true) => Some(Basis::Z),
            (false, false) => None,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Basis::X => 'X',
            Basis::Y => 'Y',
            Basis::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Basis> {
        match c {
            'X' | 'x' => Some(Basis::X),
            'Y' | 'y' => Some(Basis::Y),
            'Z' | 'z' => Some(Basis::Z),
            _ => None,
        }
    }

    /// Whether two letters anticommute.
    pub fn anticommutes(self, other: Basis) -> bool {
        self != other
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Overall phase of a Pauli operator, a power of `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    pub fn from_exponent(e: u8) -> Phase {
        match e & 3 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn exponent(self) -> u8 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn is_real(self) -> bool {
        self.exponent() % 2 == 0
    }
}

pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// Exponent of `i` picked up when multiplying the single-qubit Paulis encoded
/// in the word masks, summed over all bits: `sigma(x1,z1) * sigma(x2,z2)`.
pub(crate) fn product_phase(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> u8 {
    let mut plus: u32 = 0;
    let mut minus: u32 = 0;
    for k in 0..x1.len() {
        let (a, b, c, d) = (x1[k], z1[k], x2[k], z2[k]);
        let px = a & !b;
        let py = a & b;
        let pz = !a & b;
        let qx = c & !d;
        let qy = c & d;
        let qz = !c & d;
        plus += ((px & qy) | (py & qz) | (pz & qx)).count_ones();
        minus += ((px & qz) | (py & qx) | (pz & qy)).count_ones();
    }
    ((plus + 3 * minus) % 4) as u8
}

/// Tensor product of single-qubit Paulis with an overall phase in `{±1, ±i}`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        PauliOperator { n, x: vec![0; w], z: vec![0; w], phase: 0 }
    }

    /// Operator acting with `basis` on `qubit` and identity elsewhere.
    pub fn single(n: usize, qubit: usize, basis: Basis) -> Self {
        let mut p = Self::identity(n);
        p.set(qubit, Some(basis));
        p
    }

    /// Builds an operator from `(qubit, basis)` pairs. Repeated qubits are
    /// multiplied in order.
    pub fn from_sparse(n: usize, factors: &[(usize, Basis)]) -> Self {
        let mut p = Self::identity(n);
        for &(q, b) in factors {
            p = &p * &Self::single(n, q, b);
        }
        p
    }

    pub(crate) fn from_raw(n: usize, x: Vec<u64>, z: Vec<u64>, phase: u8) -> Self {
        PauliOperator { n, x, z, phase: phase & 3 }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn phase(&self) -> Phase {
        Phase::from_exponent(self.phase)
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase.exponent();
        self
    }

    pub fn negated(mut self) -> Self {
        self.phase = (self.phase + 2) & 3;
        self
    }

    /// Multiplies the phase by `i^k`.
    pub fn times_i_pow(mut self, k: u8) -> Self {
        self.phase = (self.phase + k) & 3;
        self
    }

    pub(crate) fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub(crate) fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn get(&self, qubit: usize) -> Option<Basis> {
        let (w, b) = (qubit / 64, qubit % 64);
        Basis::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    /// Overwrites the letter on one qubit without touching the phase.
    pub fn set(&mut self, qubit: usize, basis: Option<Basis>) {
        assert!(qubit < self.n, "qubit {qubit} out of range for {} qubits", self.n);
        let (w, b) = (qubit / 64, qubit % 64);
        let (xb, zb) = basis.map(Basis::bits).unwrap_or((false, false));
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// Qubits with a non-identity factor, in increasing order.
    pub fn support(&self) -> Vec<(usize, Basis)> {
        let mut out = Vec::new();
        for (w, (&xw, &zw)) in self.x.iter().zip(&self.z).enumerate() {
            let mut m = xw | zw;
            while m != 0 {
                let b = m.trailing_zeros() as usize;
                m &= m - 1;
                let q = w * 64 + b;
                out.push((q, self.get(q).expect("nonzero bit")));
            }
        }
        out
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut parity = 0u32;
        for k in 0..self.x.len() {
            parity ^= ((self.x[k] & other.z[k]) ^ (self.z[k] & other.x[k])).count_ones() & 1;
        }
        parity == 0
    }

    /// Equality of the Pauli letters, ignoring the phase.
    pub fn same_letters(&self, other: &PauliOperator) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    /// Hermitian operators have phase ±1 (the letters themselves are Hermitian).
    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// `+1` or `-1` sign of a Hermitian operator.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    /// Extends or embeds the operator into a larger register, mapping qubit
    /// `i` to `map[i]`.
    pub fn embed(&self, n: usize, map: &[usize]) -> PauliOperator {
        let mut out = PauliOperator::identity(n);
        for (q, b) in self.support() {
            out.set(map[q], Some(b));
        }
        out.phase = self.phase;
        out
    }
}

impl Mul for &PauliOperator {
    type Output = PauliOperator;

    fn mul(self, rhs: &PauliOperator) -> PauliOperator {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let extra = product_phase(&self.x, &self.z, &rhs.x, &rhs.z);
        let x = self.x.iter().zip(&rhs.x).map(|(a, b)| a ^ b).collect();
        let z = self.z.iter().zip(&rhs.z).map(|(a, b)| a ^ b).collect();
        PauliOperator { n: self.n, x, z, phase: (self.phase + rhs.phase + extra) & 3 }
    }
}

impl Mul for PauliOperator {
    type Output = PauliOperator;

    fn mul(self, rhs: PauliOperator) -> PauliOperator {
        &self * &rhs
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}")?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).map(Basis::letter).unwrap_or('I'))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Parses strings such as `"+XIZ"`, `"-iYY"` or `"ZZ"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else {
            (0, s)
        };
        if body.is_empty() {
            return Err(Error::Parse(format!("empty Pauli string {s:?}")));
        }
        let mut p = PauliOperator::identity(body.chars().count());
        for (q, c) in body.chars().enumerate() {
            match c {
                'I' | 'i' | '_' => {}
                other => {
                    let b = Basis::from_letter(other)
                        .ok_or_else(|| Error::Parse(format!("bad Pauli letter {other:?}")))?;
                    p.set(q, Some(b));
                }
            }
        }
        p.phase = phase;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products_follow_y_equals_ixz() {
        assert_eq!(&p("X") * &p("Z"), p("-iY"));
        assert_eq!(&p("Z") * &p("X"), p("+iY"));
        assert_eq!(&p("X") * &p("Y"), p("+iZ"));
        assert_eq!(&p("Y") * &p("Z"), p("+iX"));
        assert_eq!(&p("Y") * &p("Y"), p("I"));
        // i * X * Z is Y itself
        assert_eq!((&p("X") * &p("Z")).times_i_pow(1), p("Y"));
    }

    #[test]
    fn commutation() {
        assert!(p("XX").commutes_with(&p("ZZ")));
        assert!(!p("XI").commutes_with(&p("ZI")));
        assert!(p("XYZ").commutes_with(&p("XYZ")));
    }

    #[test]
    fn parse_and_display_roundtrip() {
        for s in ["+XIZ", "-YY", "+iZ", "-iXYZI"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert!("Q".parse::<PauliOperator>().is_err());
    }

    #[test]
    fn support_spans_words() {
        let mut op = PauliOperator::identity(130);
        op.set(3, Some(Basis::X));
        op.set(64, Some(Basis::Y));
        op.set(129, Some(Basis::Z));
        assert_eq!(op.support(), vec![(3, Basis::X), (64, Basis::Y), (129, Basis::Z)]);
        assert_eq!(op.weight(), 3);
    }
}
