//! Dense state-vector reference simulator (at most 20 qubits).

use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::pauli::{Basis, PauliOperator};
use crate::tableau::{Gate, InitBasis};

pub const MAX_QUBITS: usize = 20;

/// Gates the oracle understands: every tableau gate plus `T` and `T†`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DenseGate {
    Clifford(Gate),
    T(usize),
    Tdg(usize),
}

impl From<Gate> for DenseGate {
    fn from(g: Gate) -> Self {
        DenseGate::Clifford(g)
    }
}

#[derive(Clone, Debug)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl DenseState {
    pub fn new(bases: &[InitBasis]) -> Result<Self> {
        let n = bases.len();
        if n == 0 || n > MAX_QUBITS {
            return invalid(format!("dense oracle supports 1..={MAX_QUBITS} qubits, got {n}"));
        }
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        amps[0] = c(1.0, 0.0);
        let mut st = DenseState { n, amps };
        for (q, b) in bases.iter().enumerate() {
            if *b == InitBasis::Plus {
                st.apply(Gate::H(q).into())?;
            }
        }
        Ok(st)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(&vec![InitBasis::Zero; n])
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return invalid(format!("qubit {q} out of range for {} qubits", self.n));
        }
        Ok(())
    }

    /// Applies a general single-qubit unitary `[[m00, m01], [m10, m11]]`.
    pub fn apply_matrix(&mut self, q: usize, m: [[Complex64; 2]; 2]) -> Result<()> {
        self.check(q)?;
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    fn phase_on_one(&mut self, q: usize, ph: Complex64) {
        let bit = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a *= ph;
            }
        }
    }

    pub fn apply(&mut self, gate: DenseGate) -> Result<()> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match gate {
            DenseGate::T(q) => {
                self.check(q)?;
                self.phase_on_one(q, c(s, s));
            }
            DenseGate::Tdg(q) => {
                self.check(q)?;
                self.phase_on_one(q, c(s, -s));
            }
            DenseGate::Clifford(g) => {
                let qs = g.qubits();
                for &q in &qs {
                    self.check(q)?;
                }
                if qs.len() == 2 && qs[0] == qs[1] {
                    return invalid("two-qubit gate on duplicate qubit");
                }
                match g {
                    Gate::H(q) => self.apply_matrix(q, [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]])?,
                    Gate::S(q) => self.phase_on_one(q, c(0.0, 1.0)),
                    Gate::Sdg(q) => self.phase_on_one(q, c(0.0, -1.0)),
                    Gate::X(q) => self.apply_matrix(q, [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])?,
                    Gate::Y(q) => self.apply_matrix(q, [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]])?,
                    Gate::Z(q) => self.phase_on_one(q, c(-1.0, 0.0)),
                    Gate::Cnot(a, b) => {
                        let (ba, bb) = (1usize << a, 1usize << b);
                        for i in 0..self.amps.len() {
                            if i & ba != 0 && i & bb == 0 {
                                self.amps.swap(i, i | bb);
                            }
                        }
                    }
                    Gate::Cz(a, b) => {
                        let m = (1usize << a) | (1usize << b);
                        for (i, amp) in self.amps.iter_mut().enumerate() {
                            if i & m == m {
                                *amp = -*amp;
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply_all(&mut self, gates: &[DenseGate]) -> Result<()> {
        gates.iter().try_for_each(|g| self.apply(*g))
    }

    /// `P|psi>` as a fresh amplitude vector.
    pub fn pauli_image(&self, p: &PauliOperator) -> Result<Vec<Complex64>> {
        if p.num_qubits() != self.n {
            return invalid("Pauli dimension mismatch");
        }
        let (mut xm, mut zm, mut ny) = (0usize, 0usize, 0u8);
        for (q, b) in p.support() {
            match b {
                Basis::X => xm |= 1 << q,
                Basis::Z => zm |= 1 << q,
                Basis::Y => {
                    xm |= 1 << q;
                    zm |= 1 << q;
                    ny += 1;
                }
            }
        }
        let k = (p.phase().exponent() + ny) % 4;
        let base = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][k as usize];
        let mut out = vec![c(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let sign = if (i & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[i ^ xm] = *a * base * sign;
        }
        Ok(out)
    }

    /// `<psi|P|psi>` (real for Hermitian `P`).
    pub fn expectation(&self, p: &PauliOperator) -> Result<f64> {
        let img = self.pauli_image(p)?;
        Ok(self.amps.iter().zip(&img).map(|(a, b)| (a.conj() * b).re).sum())
    }

    /// Probability of the `+1` outcome.
    pub fn prob_plus(&self, p: &PauliOperator) -> Result<f64> {
        if !p.is_hermitian() {
            return invalid("cannot measure a non-Hermitian Pauli");
        }
        Ok(((1.0 + self.expectation(p)?) / 2.0).clamp(0.0, 1.0))
    }

    /// Projects onto the `(-1)^flipped` eigenspace; returns the probability of
    /// that branch. Fails when the branch has zero weight.
    pub fn project(&mut self, p: &PauliOperator, flipped: bool) -> Result<f64> {
        let img = self.pauli_image(p)?;
        let s = if flipped { -1.0 } else { 1.0 };
        let mut next: Vec<Complex64> = self.amps.iter().zip(&img).map(|(a, b)| (a + b * s) * 0.5).collect();
        let prob: f64 = next.iter().map(|a| a.norm_sqr()).sum();
        if prob < 1e-12 {
            return invalid(format!("projection onto {} branch of {p} has zero probability", if flipped { "-1" } else { "+1" }));
        }
        let inv = 1.0 / prob.sqrt();
        next.iter_mut().for_each(|a| *a *= inv);
        self.amps = next;
        Ok(prob)
    }

    /// Born-rule measurement of a Hermitian Pauli. Returns `(flipped, probability)`.
    pub fn measure_pauli<R: Rng + ?Sized>(&mut self, p: &PauliOperator, rng: &mut R) -> Result<(bool, f64)> {
        let p_plus = self.prob_plus(p)?;
        let flipped = if p_plus > 1.0 - 1e-12 {
            false
        } else if p_plus < 1e-12 {
            true
        } else {
            rng.gen::<f64>() >= p_plus
        };
        self.project(p, flipped)?;
        Ok((flipped, if flipped { 1.0 - p_plus } else { p_plus }))
    }

    /// Reduced density matrix of a single qubit.
    pub fn reduced_qubit(&self, q: usize) -> Result<[[Complex64; 2]; 2]> {
        self.check(q)?;
        let bit = 1usize << q;
        let mut rho = [[c(0.0, 0.0); 2]; 2];
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                rho[0][0] += a0 * a0.conj();
                rho[0][1] += a0 * a1.conj();
                rho[1][0] += a1 * a0.conj();
                rho[1][1] += a1 * a1.conj();
            }
        }
        Ok(rho)
    }

    /// Fidelity `<phi|rho_q|phi>` of qubit `q` with the pure state `phi`.
    pub fn qubit_fidelity(&self, q: usize, phi: [Complex64; 2]) -> Result<f64> {
        let rho = self.reduced_qubit(q)?;
        let mut f = c(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                f += phi[i].conj() * rho[i][j] * phi[j];
            }
        }
        Ok(f.re)
    }
}

/// The magic state `(|0> + e^{i pi/4}|1>)/sqrt 2`.
pub fn magic_state() -> [Complex64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [c(s, 0.0), c(0.5, 0.5)]
}

/// A unitary taking `|0>` to the normalized state `psi`.
pub fn preparation_unitary(psi: [Complex64; 2]) -> [[Complex64; 2]; 2] {
    let [a, b] = psi;
    [[a, -b.conj()], [b, a.conj()]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn t_on_plus_is_magic() {
        let mut st = DenseState::new(&[InitBasis::Plus]).unwrap();
        st.apply(DenseGate::T(0)).unwrap();
        let m = magic_state();
        assert!((st.amplitudes()[0] - m[0]).norm() < 1e-12);
        assert!((st.amplitudes()[1] - m[1]).norm() < 1e-12);
    }

    #[test]
    fn t_eighth_power_is_identity() {
        let mut st = DenseState::new(&[InitBasis::Plus, InitBasis::Zero]).unwrap();
        st.apply(Gate::S(0).into()).unwrap();
        let before = st.clone();
        for _ in 0..8 {
            st.apply(DenseGate::T(0)).unwrap();
        }
        for (a, b) in st.amplitudes().iter().zip(before.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn measurement_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut st = DenseState::zeros(1).unwrap();
        assert_eq!(st.measure_pauli(&p("Z"), &mut rng).unwrap(), (false, 1.0));
        let st = DenseState::zeros(1).unwrap();
        assert!((st.prob_plus(&p("X")).unwrap() - 0.5).abs() < 1e-12);

        let mut bell = DenseState::new(&[InitBasis::Plus, InitBasis::Zero]).unwrap();
        bell.apply(Gate::Cnot(0, 1).into()).unwrap();
        assert_eq!(bell.measure_pauli(&p("ZZ"), &mut rng).unwrap(), (false, 1.0));
        assert!((bell.expectation(&p("XX")).unwrap() - 1.0).abs() < 1e-12);
        assert!((bell.expectation(&p("YY")).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn y_eigenstate_and_phase_convention() {
        let mut st = DenseState::zeros(1).unwrap();
        st.apply(Gate::H(0).into()).unwrap();
        st.apply(Gate::S(0).into()).unwrap();
        assert!((st.expectation(&p("Y")).unwrap() - 1.0).abs() < 1e-12);
        // Y = iXZ: applying Z then X then multiplying by i reproduces Y|psi>.
        let y = st.pauli_image(&p("Y")).unwrap();
        let mut t = st.clone();
        t.apply(Gate::Z(0).into()).unwrap();
        t.apply(Gate::X(0).into()).unwrap();
        for (a, b) in y.iter().zip(t.amplitudes()) {
            assert!((a - b * Complex64::new(0.0, 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn norm_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut st = DenseState::zeros(4).unwrap();
        for _ in 0..10_000 {
            let q = rng.gen_range(0..4);
            let g = match rng.gen_range(0..5) {
                0 => DenseGate::Clifford(Gate::H(q)),
                1 => DenseGate::T(q),
                2 => DenseGate::Clifford(Gate::S(q)),
                3 => DenseGate::Clifford(Gate::Cnot(q, (q + 1) % 4)),
                _ => DenseGate::Tdg(q),
            };
            st.apply(g).unwrap();
        }
        assert!((st.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn preparation_unitary_maps_zero() {
        let m = magic_state();
        let mut st = DenseState::zeros(1).unwrap();
        st.apply_matrix(0, preparation_unitary(m)).unwrap();
        assert!((st.qubit_fidelity(0, m).unwrap() - 1.0).abs() < 1e-12);
    }
}
