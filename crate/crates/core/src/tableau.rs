//! Aaronson–Gottesman stabilizer tableau with destabilizers.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{integrity, invalid, Error, Result};
use crate::pauli::{product_phase, words_for, Basis, PauliOperator};

/// Single-qubit initial state accepted by [`StabilizerState::new`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitBasis {
    Zero,
    Plus,
}

/// Clifford gates understood by the tableau.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot(usize, usize),
    Cz(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(a) | Gate::S(a) | Gate::Sdg(a) | Gate::X(a) | Gate::Y(a) | Gate::Z(a) => vec![a],
            Gate::Cnot(a, b) | Gate::Cz(a, b) => vec![a, b],
        }
    }
}

/// Result of a Pauli measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    /// `true` for eigenvalue `-1`.
    pub flipped: bool,
    pub deterministic: bool,
}

impl Outcome {
    pub fn value(&self) -> i8 {
        if self.flipped {
            -1
        } else {
            1
        }
    }
}

/// Stabilizer state on `n` qubits: rows `0..n` are destabilizers and rows
/// `n..2n` stabilizers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerState {
    n: usize,
    w: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    signs: Vec<bool>,
}

impl StabilizerState {
    pub fn new(bases: &[InitBasis]) -> Result<Self> {
        let n = bases.len();
        if n == 0 {
            return invalid("a stabilizer state needs at least one qubit");
        }
        let w = words_for(n);
        let mut st = StabilizerState { n, w, xs: vec![0; 2 * n * w], zs: vec![0; 2 * n * w], signs: vec![false; 2 * n] };
        for (q, b) in bases.iter().enumerate() {
            let (word, bit) = (q / 64, 1u64 << (q % 64));
            let (d, s) = (q, n + q);
            match b {
                InitBasis::Zero => {
                    st.xs[d * w + word] |= bit;
                    st.zs[s * w + word] |= bit;
                }
                InitBasis::Plus => {
                    st.zs[d * w + word] |= bit;
                    st.xs[s * w + word] |= bit;
                }
            }
        }
        Ok(st)
    }

    /// All qubits in `|0>`.
    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(&vec![InitBasis::Zero; n])
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    fn row_op(&self, r: usize) -> PauliOperator {
        let (x, z) = (self.xs[r * self.w..(r + 1) * self.w].to_vec(), self.zs[r * self.w..(r + 1) * self.w].to_vec());
        // Stored letters are Hermitian products with Y = iXZ, so the sign is the whole phase.
        PauliOperator::from_raw(self.n, x, z, if self.signs[r] { 2 } else { 0 })
    }

    pub fn stabilizer(&self, i: usize) -> PauliOperator {
        self.row_op(self.n + i)
    }

    pub fn destabilizer(&self, i: usize) -> PauliOperator {
        self.row_op(i)
    }

    pub fn stabilizers(&self) -> Vec<PauliOperator> {
        (0..self.n).map(|i| self.stabilizer(i)).collect()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return invalid(format!("qubit {q} out of range for {} qubits", self.n));
        }
        Ok(())
    }

    pub fn apply(&mut self, gate: Gate) -> Result<()> {
        let qs = gate.qubits();
        for &q in &qs {
            self.check_qubit(q)?;
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return invalid(format!("two-qubit gate on duplicate qubit {}", qs[0]));
        }
        match gate {
            Gate::H(a) => self.h(a),
            Gate::S(a) => self.s(a),
            Gate::Sdg(a) => {
                self.s(a);
                self.s(a);
                self.s(a);
            }
            Gate::X(a) => self.for_rows(a, |x, z, s| (x, z, s ^ z)),
            Gate::Z(a) => self.for_rows(a, |x, z, s| (x, z, s ^ x)),
            Gate::Y(a) => self.for_rows(a, |x, z, s| (x, z, s ^ x ^ z)),
            Gate::Cnot(a, b) => self.cnot(a, b),
            Gate::Cz(a, b) => {
                self.h(b);
                self.cnot(a, b);
                self.h(b);
            }
        }
        Ok(())
    }

    pub fn apply_all(&mut self, gates: &[Gate]) -> Result<()> {
        gates.iter().try_for_each(|g| self.apply(*g))
    }

    /// Applies the Pauli operator as a gate (its phase is irrelevant on states).
    pub fn apply_pauli(&mut self, p: &PauliOperator) -> Result<()> {
        if p.num_qubits() != self.n {
            return Err(Error::InvalidParameter("Pauli dimension mismatch".into()));
        }
        for (q, b) in p.support() {
            match b {
                Basis::X => self.apply(Gate::X(q))?,
                Basis::Y => self.apply(Gate::Y(q))?,
                Basis::Z => self.apply(Gate::Z(q))?,
            }
        }
        Ok(())
    }

    fn for_rows(&mut self, q: usize, f: impl Fn(bool, bool, bool) -> (bool, bool, bool)) {
        let (word, bit) = (q / 64, q % 64);
        for r in 0..2 * self.n {
            let i = r * self.w + word;
            let x = (self.xs[i] >> bit) & 1 == 1;
            let z = (self.zs[i] >> bit) & 1 == 1;
            let (nx, nz, ns) = f(x, z, self.signs[r]);
            self.xs[i] = (self.xs[i] & !(1 << bit)) | ((nx as u64) << bit);
            self.zs[i] = (self.zs[i] & !(1 << bit)) | ((nz as u64) << bit);
            self.signs[r] = ns;
        }
    }

    fn h(&mut self, a: usize) {
        self.for_rows(a, |x, z, s| (z, x, s ^ (x & z)));
    }

    fn s(&mut self, a: usize) {
        self.for_rows(a, |x, z, s| (x, z ^ x, s ^ (x & z)));
    }

    fn cnot(&mut self, a: usize, b: usize) {
        let (wa, ba, wb, bb) = (a / 64, a % 64, b / 64, b % 64);
        for r in 0..2 * self.n {
            let xa = (self.xs[r * self.w + wa] >> ba) & 1;
            let za = (self.zs[r * self.w + wa] >> ba) & 1;
            let xb = (self.xs[r * self.w + wb] >> bb) & 1;
            let zb = (self.zs[r * self.w + wb] >> bb) & 1;
            if xa & zb & (xb ^ za ^ 1) == 1 {
                self.signs[r] ^= true;
            }
            self.xs[r * self.w + wb] ^= xa << bb;
            self.zs[r * self.w + wa] ^= zb << ba;
        }
    }

    fn anticommutes_row(&self, r: usize, p: &PauliOperator) -> bool {
        let (px, pz) = (p.x_words(), p.z_words());
        let mut parity = 0;
        for k in 0..self.w {
            parity ^= ((self.xs[r * self.w + k] & pz[k]) ^ (self.zs[r * self.w + k] & px[k])).count_ones() & 1;
        }
        parity == 1
    }

    /// row[h] <- row[i] * row[h]
    fn rowmul(&mut self, h: usize, i: usize) {
        let w = self.w;
        let e = product_phase(
            &self.xs[i * w..(i + 1) * w],
            &self.zs[i * w..(i + 1) * w],
            &self.xs[h * w..(h + 1) * w],
            &self.zs[h * w..(h + 1) * w],
        );
        let total = (2 * self.signs[h] as u8 + 2 * self.signs[i] as u8 + e) & 3;
        debug_assert!(total % 2 == 0, "row product must stay Hermitian");
        self.signs[h] = total == 2;
        for k in 0..w {
            self.xs[h * w + k] ^= self.xs[i * w + k];
            self.zs[h * w + k] ^= self.zs[i * w + k];
        }
    }

    fn validate_measured(&self, p: &PauliOperator) -> Result<()> {
        if p.num_qubits() != self.n {
            return invalid(format!("measured operator has {} qubits, state has {}", p.num_qubits(), self.n));
        }
        if !p.is_hermitian() {
            return invalid(format!("cannot measure non-Hermitian operator {p}"));
        }
        if p.is_identity() {
            return invalid("cannot measure the identity");
        }
        Ok(())
    }

    /// Expectation of `p` if it is fixed by the state: `Some(false)` for
    /// eigenvalue +1, `Some(true)` for -1, `None` when a measurement would be
    /// random. Does not modify the state.
    pub fn peek(&self, p: &PauliOperator) -> Result<Option<bool>> {
        self.validate_measured(p)?;
        if (0..self.n).any(|i| self.anticommutes_row(self.n + i, p)) {
            return Ok(None);
        }
        Ok(Some(self.deterministic_flip(p)))
    }

    fn deterministic_flip(&self, p: &PauliOperator) -> bool {
        let w = self.w;
        let mut acc_x = vec![0u64; w];
        let mut acc_z = vec![0u64; w];
        let mut phase: u8 = 0;
        for i in 0..self.n {
            if self.anticommutes_row(i, p) {
                let r = self.n + i;
                let e = product_phase(&acc_x, &acc_z, &self.xs[r * w..(r + 1) * w], &self.zs[r * w..(r + 1) * w]);
                phase = (phase + e + 2 * self.signs[r] as u8) & 3;
                for k in 0..w {
                    acc_x[k] ^= self.xs[r * w + k];
                    acc_z[k] ^= self.zs[r * w + k];
                }
            }
        }
        debug_assert!(acc_x == p.x_words() && acc_z == p.z_words(), "commuting operator outside the stabilizer group");
        let diff = (phase + 4 - p.phase().exponent()) & 3;
        diff == 2
    }

    /// Measures a Hermitian Pauli operator. Random outcomes are drawn from `rng`.
    pub fn measure<R: Rng + ?Sized>(&mut self, p: &PauliOperator, rng: &mut R) -> Result<Outcome> {
        self.measure_with(p, || rng.gen::<bool>())
    }

    /// Measurement with an explicit bit source for the random branch.
    pub fn measure_with(&mut self, p: &PauliOperator, mut coin: impl FnMut() -> bool) -> Result<Outcome> {
        self.validate_measured(p)?;
        let n = self.n;
        let Some(pivot) = (n..2 * n).find(|&r| self.anticommutes_row(r, p)) else {
            return Ok(Outcome { flipped: self.deterministic_flip(p), deterministic: true });
        };
        for r in 0..2 * n {
            if r != pivot && r != pivot - n && self.anticommutes_row(r, p) {
                self.rowmul(r, pivot);
            }
        }
        let w = self.w;
        let d = pivot - n;
        for k in 0..w {
            self.xs[d * w + k] = self.xs[pivot * w + k];
            self.zs[d * w + k] = self.zs[pivot * w + k];
            self.xs[pivot * w + k] = p.x_words()[k];
            self.zs[pivot * w + k] = p.z_words()[k];
        }
        self.signs[d] = self.signs[pivot];
        let flipped = coin();
        self.signs[pivot] = (p.sign() == Some(-1)) ^ flipped;
        Ok(Outcome { flipped, deterministic: false })
    }

    /// Measures `p` while keeping every operator in `tracked` equal to itself
    /// on the code space: an operator that anticommutes with `p` is multiplied
    /// by the stabilizer that `p` replaces. The tracked operators must commute
    /// with the current stabilizer group.
    pub fn measure_tracking<R: Rng + ?Sized>(
        &mut self,
        p: &PauliOperator,
        rng: &mut R,
        tracked: &mut [PauliOperator],
    ) -> Result<Outcome> {
        self.validate_measured(p)?;
        let n = self.n;
        let pivot = (n..2 * n).find(|&r| self.anticommutes_row(r, p));
        for t in tracked.iter_mut() {
            if !t.commutes_with(p) {
                match pivot {
                    Some(r) => *t = &*t * &self.row_op(r),
                    None => return integrity(format!("tracked operator {t} anticommutes with a deterministic measurement")),
                }
            }
        }
        self.measure(p, rng)
    }

    /// Projects qubit `q` onto `|0>` (or `|+>`), applying the Pauli fix-up when
    /// the measurement lands on the other eigenstate.
    pub fn reset<R: Rng + ?Sized>(&mut self, q: usize, basis: InitBasis, rng: &mut R) -> Result<()> {
        self.check_qubit(q)?;
        let (meas, fix) = match basis {
            InitBasis::Zero => (Basis::Z, Gate::X(q)),
            InitBasis::Plus => (Basis::X, Gate::Z(q)),
        };
        let o = self.measure(&PauliOperator::single(self.n, q, meas), rng)?;
        if o.flipped {
            self.apply(fix)?;
        }
        Ok(())
    }

    /// Checks the tableau invariants: stabilizers commute, destabilizer `i`
    /// anticommutes only with stabilizer `i`, and all rows are independent.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let n = self.n;
        let rows: Vec<PauliOperator> = (0..2 * n).map(|r| self.row_op(r)).collect();
        for i in 0..n {
            for j in 0..n {
                if !rows[n + i].commutes_with(&rows[n + j]) {
                    return Err(format!("stabilizers {i} and {j} anticommute"));
                }
                let anti = !rows[i].commutes_with(&rows[n + j]);
                if anti != (i == j) {
                    return Err(format!("destabilizer {i} vs stabilizer {j} pairing broken"));
                }
            }
        }
        let vecs: Vec<Vec<u64>> = rows
            .iter()
            .map(|r| r.x_words().iter().chain(r.z_words()).copied().collect())
            .collect();
        if crate::gf2::rank(&vecs) != 2 * n {
            return Err("tableau rows are dependent".into());
        }
        Ok(())
    }
}
