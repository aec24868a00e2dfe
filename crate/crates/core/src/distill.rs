//! 15-to-1 magic-state distillation: the frozen CNOT network and the dense
//! reference run.
//!
//! Qubits carry labels `1..=15`, read as nonzero 4-bit vectors. The encoder
//! prepares the punctured first-order Reed–Muller code word superposition with
//! five fan-out groups: label 15 copies onto the weight-2 labels, then each
//! pivot `2^j` copies onto every other label with bit `j` set.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::oracle::{magic_state, preparation_unitary, DenseGate, DenseState};
use crate::pauli::{Basis, PauliOperator};
use crate::tableau::{Gate, InitBasis};

/// One multi-target CNOT: a control label and its target labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnotGroup {
    pub control: u8,
    pub targets: Vec<u8>,
}

/// The five groups in execution order.
pub fn cnot_groups() -> Vec<CnotGroup> {
    let mut groups = vec![CnotGroup { control: 15, targets: vec![3, 5, 6, 9, 10, 12] }];
    for j in 0..4 {
        let pivot = 1u8 << j;
        let targets = (1..=15u8).filter(|&v| v & pivot != 0 && v != pivot).collect();
        groups.push(CnotGroup { control: pivot, targets });
    }
    groups
}

/// Labels initialized in `|+>`; all others start in `|0>`.
pub fn plus_labels() -> [u8; 5] {
    [1, 2, 4, 8, 15]
}

/// Syndrome bit `j`: parity of the X-readout outcomes over labels with bit `j` set.
pub fn syndrome(outcomes: &[bool; 15]) -> [bool; 4] {
    let mut s = [false; 4];
    for (j, sj) in s.iter_mut().enumerate() {
        *sj = (1..=15u8).filter(|v| v & (1 << j) != 0).fold(false, |acc, v| acc ^ outcomes[v as usize - 1]);
    }
    s
}

/// Parity of the outcomes over even-weight labels; sets the output's Z correction.
pub fn output_parity(outcomes: &[bool; 15]) -> bool {
    (1..=15u8).filter(|v| v.count_ones() % 2 == 0).fold(false, |acc, v| acc ^ outcomes[v as usize - 1])
}

/// Result of a reference run.
#[derive(Clone, Debug)]
pub struct DistillOutcome {
    pub accepted: bool,
    pub syndrome: [bool; 4],
    /// Output-qubit fidelity with `|m>`, present when accepted.
    pub fidelity: Option<f64>,
    pub cnot_count: usize,
}

const OUT: usize = 15;
const SCRATCH: usize = 16;

/// Runs the protocol on dense state vectors: a Bell pair between the output
/// qubit and label 15 (made by a ZZ parity measurement), the 34-CNOT encoder,
/// gate teleportation of each input onto its code qubit, X readout and
/// post-selection on a trivial syndrome.
pub fn distill_reference<R: Rng + ?Sized>(inputs: &[[Complex64; 2]; 15], rng: &mut R) -> Result<DistillOutcome> {
    let mut bases = vec![InitBasis::Zero; 17];
    for l in plus_labels() {
        bases[l as usize - 1] = InitBasis::Plus;
    }
    bases[OUT] = InitBasis::Plus;
    let mut st = DenseState::new(&bases)?;

    let zz = PauliOperator::from_sparse(17, &[(OUT, Basis::Z), (14, Basis::Z)]);
    let (flip, _) = st.measure_pauli(&zz, rng)?;
    if flip {
        st.apply(Gate::X(OUT).into())?;
    }

    let mut cnot_count = 0;
    for g in cnot_groups() {
        for t in &g.targets {
            st.apply(Gate::Cnot(g.control as usize - 1, *t as usize - 1).into())?;
            cnot_count += 1;
        }
    }

    for (i, psi) in inputs.iter().enumerate() {
        st.apply_matrix(SCRATCH, preparation_unitary(*psi))?;
        st.apply(Gate::Cnot(i, SCRATCH).into())?;
        let (m, _) = st.measure_pauli(&PauliOperator::single(17, SCRATCH, Basis::Z), rng)?;
        if m {
            st.apply(Gate::S(i).into())?;
            st.apply(Gate::X(SCRATCH).into())?;
        }
    }

    let mut outcomes = [false; 15];
    for (i, o) in outcomes.iter_mut().enumerate() {
        *o = st.measure_pauli(&PauliOperator::single(17, i, Basis::X), rng)?.0;
    }
    let syn = syndrome(&outcomes);
    let accepted = syn.iter().all(|b| !b);
    let fidelity = if accepted {
        if output_parity(&outcomes) {
            st.apply(Gate::Z(OUT).into())?;
        }
        // Transversal T acts as T-dagger on the logical qubit; S restores T.
        st.apply(DenseGate::Clifford(Gate::S(OUT)))?;
        Some(st.qubit_fidelity(OUT, magic_state())?)
    } else {
        None
    };
    Ok(DistillOutcome { accepted, syndrome: syn, fidelity, cnot_count })
}

/// Inputs equal to `|m>`, with a Z error on each listed input index.
pub fn magic_inputs_with_z_errors(errors: &[usize]) -> [[Complex64; 2]; 15] {
    let m = magic_state();
    let mut v = [m; 15];
    for &e in errors {
        v[e][1] = -v[e][1];
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn network_shape() {
        let g = cnot_groups();
        assert_eq!(g.len(), 5);
        assert_eq!(g.iter().map(|g| g.targets.len()).sum::<usize>(), 34);
        assert_eq!(g[1].targets, vec![3, 5, 7, 9, 11, 13, 15]);
    }

    #[test]
    fn perfect_inputs_accept() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = distill_reference(&magic_inputs_with_z_errors(&[]), &mut rng).unwrap();
        assert!(r.accepted);
        assert!((r.fidelity.unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(r.cnot_count, 34);
    }

    #[test]
    fn single_error_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = distill_reference(&magic_inputs_with_z_errors(&[6]), &mut rng).unwrap();
        assert!(!r.accepted);
    }
}
