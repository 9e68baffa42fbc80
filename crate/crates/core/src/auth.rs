//! Authenticated quantum transmission: one-time pad, secret-syndrome coset
//! encoding, syndrome verification, decoding and decryption.
//!
//! The block-level functions act on `t` logical qubits embedded in a larger
//! joint register, so a center can authenticate each member's share of an
//! entangled state without materialising all members' encodings at once.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::pauli::{ancilla_labels, PauliOperator, PurityFamily, StabilizerCode};
use crate::qstate::{PureStateVector, QubitLabel, Register};

/// Secret key material for one authenticated block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthKeys {
    /// Family key selecting the code.
    pub k: usize,
    /// Pad bits `(a_0, b_0, a_1, b_1, …)`; logical qubit `j` gets `X^{a_j} Z^{b_j}`.
    pub x: Vec<u8>,
    /// Secret syndrome of the coset the block is encoded into.
    pub y: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Debug, Clone)]
pub struct AuthOutcome<S> {
    pub verdict: Verdict,
    /// Present iff accepted.
    pub logical_state: Option<S>,
    pub measured_syndrome: Vec<u8>,
}

/// Fresh uniform keys for one block.
pub fn keygen<R: Rng + ?Sized>(family: &PurityFamily, t: usize, rng: &mut R) -> Result<AuthKeys> {
    if t != family.t() {
        return Err(invalid(format!(
            "family encodes {} qubits, requested {t}",
            family.t()
        )));
    }
    let k = rng.random_range(0..family.keys());
    let x = (0..2 * t).map(|_| rng.random_range(0..2u8)).collect();
    let y = (0..family.u() - t).map(|_| rng.random_range(0..2u8)).collect();
    Ok(AuthKeys { k, x, y })
}

/// Pad operator `⊗_j X^{a_j} Z^{b_j}`.
pub fn pad_operator(x: &[u8], t: usize) -> Result<PauliOperator> {
    if x.len() != 2 * t || x.iter().any(|&b| b > 1) {
        return Err(invalid(format!("pad must be {} bits", 2 * t)));
    }
    let (mut xm, mut zm) = (0u64, 0u64);
    for j in 0..t {
        xm |= u64::from(x[2 * j]) << j;
        zm |= u64::from(x[2 * j + 1]) << j;
    }
    // XZ = −iY, so each qubit carrying both contributes i^3.
    let phase = (3 * (xm & zm).count_ones() % 4) as u8;
    PauliOperator::new(t, xm, zm, phase)
}

fn check_keys(code: &StabilizerCode, keys: &AuthKeys) -> Result<()> {
    if keys.x.len() != 2 * code.t() || keys.y.len() != code.u() - code.t() {
        return Err(invalid("key lengths do not match the code"));
    }
    Ok(())
}

/// Encrypts the `targets` with the pad and encodes them with `code` into
/// the block `targets ++ ancillas` in the syndrome-`y` coset.
pub fn send_block_with_code<S: Register>(
    state: &S,
    code: &StabilizerCode,
    keys: &AuthKeys,
    targets: &[QubitLabel],
    ancillas: &[QubitLabel],
) -> Result<S> {
    check_keys(code, keys)?;
    let mut s = state.clone();
    s.apply_pauli(targets, &pad_operator(&keys.x, code.t())?)?;
    code.encode_block(&s, &keys.y, targets, ancillas)
}

/// Measures the syndrome of `block`, rejects unless it equals `y`, then
/// decodes onto the first `t` block labels and removes the pad.
pub fn receive_block_with_code<S: Register, R: Rng + ?Sized>(
    state: &S,
    code: &StabilizerCode,
    keys: &AuthKeys,
    block: &[QubitLabel],
    rng: &mut R,
) -> Result<AuthOutcome<S>> {
    check_keys(code, keys)?;
    let (measured, mut logical) = code.decode_block(state, block, rng)?;
    if measured != keys.y {
        return Ok(AuthOutcome {
            verdict: Verdict::Reject,
            logical_state: None,
            measured_syndrome: measured,
        });
    }
    let pad = pad_operator(&keys.x, code.t())?.adjoint();
    logical.apply_pauli(&block[..code.t()], &pad)?;
    Ok(AuthOutcome {
        verdict: Verdict::Accept,
        logical_state: Some(logical),
        measured_syndrome: measured,
    })
}

pub fn send_block<S: Register>(
    state: &S,
    family: &PurityFamily,
    keys: &AuthKeys,
    targets: &[QubitLabel],
    ancillas: &[QubitLabel],
) -> Result<S> {
    send_block_with_code(state, family.code(keys.k)?, keys, targets, ancillas)
}

pub fn receive_block<S: Register, R: Rng + ?Sized>(
    state: &S,
    family: &PurityFamily,
    keys: &AuthKeys,
    block: &[QubitLabel],
    rng: &mut R,
) -> Result<AuthOutcome<S>> {
    receive_block_with_code(state, family.code(keys.k)?, keys, block, rng)
}

/// Authenticates a standalone `t`-qubit state into `u` qubits.
pub fn auth_send(
    keys: &AuthKeys,
    family: &PurityFamily,
    logical: &PureStateVector,
) -> Result<PureStateVector> {
    if logical.num_qubits() != family.t() {
        return Err(invalid(format!(
            "logical state has {} qubits, family encodes {}",
            logical.num_qubits(),
            family.t()
        )));
    }
    let targets = logical.labels().to_vec();
    let anc = ancilla_labels(targets[0].owner, family.u() - family.t());
    send_block(logical, family, keys, &targets, &anc)
}

/// Verifies and unwraps a standalone `u`-qubit register (all its qubits,
/// in order).
pub fn auth_receive<S: Register, R: Rng + ?Sized>(
    keys: &AuthKeys,
    family: &PurityFamily,
    physical: &S,
    rng: &mut R,
) -> Result<AuthOutcome<S>> {
    if physical.labels().len() != family.u() {
        return Err(invalid(format!(
            "physical register has {} qubits, family uses {}",
            physical.labels().len(),
            family.u()
        )));
    }
    let block = physical.labels().to_vec();
    receive_block(physical, family, keys, &block, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::gen_purity_family;
    use crate::qstate::metrics::trace_distance_matrices;
    use crate::qstate::random::haar_state;
    use crate::qstate::{DensityMatrix, Owner, C64};
    use crate::seeded_rng;
    use nalgebra::DMatrix;

    fn labels(t: usize) -> Vec<QubitLabel> {
        QubitLabel::block(Owner::Member(1), 0, t)
    }

    #[test]
    fn keygen_is_deterministic_and_sized() {
        let fam = gen_purity_family(2, 3, 1).unwrap();
        let a = keygen(&fam, 3, &mut seeded_rng(9)).unwrap();
        let b = keygen(&fam, 3, &mut seeded_rng(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.x.len(), 6);
        assert_eq!(a.y.len(), 3);
        assert!(keygen(&fam, 2, &mut seeded_rng(9)).is_err());
    }

    #[test]
    fn key_index_is_uniform() {
        let fam = gen_purity_family(2, 3, 1).unwrap();
        let kc = fam.keys();
        let mut rng = seeded_rng(4);
        let n = 10_000;
        let mut counts = vec![0usize; kc];
        for _ in 0..n {
            counts[keygen(&fam, 3, &mut rng).unwrap().k] += 1;
        }
        let e = n as f64 / kc as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // Wilson–Hilferty upper 0.001 quantile.
        let df = (kc - 1) as f64;
        let z = 3.090_232;
        let crit = df * (1.0 - 2.0 / (9.0 * df) + z * (2.0 / (9.0 * df)).sqrt()).powi(3);
        assert!(chi2 < crit, "chi2 {chi2} >= {crit}");
    }

    #[test]
    fn pad_matches_x_then_z_matrix() {
        // X^1 Z^1 on one qubit = [[0, -1], [1, 0]].
        let m = pad_operator(&[1, 1], 1).unwrap().to_matrix();
        let want = [0.0, -1.0, 1.0, 0.0];
        for (a, w) in m.iter().zip(want) {
            assert!((a - C64::new(w, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_pad_is_plain_encoding() {
        let fam = gen_purity_family(2, 2, 1).unwrap();
        let psi = haar_state(labels(2), &mut seeded_rng(1)).unwrap();
        let keys = AuthKeys {
            k: 0,
            x: vec![0; 4],
            y: vec![1, 0],
        };
        let sent = auth_send(&keys, &fam, &psi).unwrap();
        let plain = fam.code(0).unwrap().encode_coset(&[1, 0], &psi).unwrap();
        assert!((sent.overlap(&plain).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn round_trip_accepts_for_every_key() {
        let fam = gen_purity_family(2, 2, 3).unwrap();
        let mut rng = seeded_rng(2);
        for _ in 0..40 {
            let psi = haar_state(labels(2), &mut rng).unwrap();
            let keys = keygen(&fam, 2, &mut rng).unwrap();
            let sent = auth_send(&keys, &fam, &psi).unwrap();
            let out = auth_receive(&keys, &fam, &sent, &mut rng).unwrap();
            assert_eq!(out.verdict, Verdict::Accept);
            let f = out.logical_state.unwrap().overlap(&psi).unwrap();
            assert!((f - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn detected_errors_always_reject() {
        let fam = gen_purity_family(2, 2, 3).unwrap();
        let mut rng = seeded_rng(6);
        let psi = haar_state(labels(2), &mut rng).unwrap();
        let mut rejects = 0;
        for _ in 0..200 {
            let keys = keygen(&fam, 2, &mut rng).unwrap();
            let code = fam.code(keys.k).unwrap();
            let e = loop {
                let e = PauliOperator::new(4, rng.random_range(0..16), rng.random_range(0..16), 0).unwrap();
                if code.syndrome(&e).unwrap().iter().any(|&b| b == 1) {
                    break e;
                }
            };
            let mut sent = auth_send(&keys, &fam, &psi).unwrap();
            let block = sent.labels().to_vec();
            sent.apply_pauli(&block, &e).unwrap();
            let out = auth_receive(&keys, &fam, &sent, &mut rng).unwrap();
            assert!(out.logical_state.is_none() || out.verdict == Verdict::Accept);
            if out.verdict == Verdict::Reject {
                rejects += 1;
            }
        }
        assert_eq!(rejects, 200);
    }

    #[test]
    fn pad_average_is_independent_of_input() {
        // t = 1 code with generator ZZ and the [[4,2]] family code at t = 2.
        let single = StabilizerCode::from_generators(2, vec!["ZZ".parse().unwrap()]).unwrap();
        let fam = gen_purity_family(2, 2, 1).unwrap();
        let mut rng = seeded_rng(12);
        for code in [&single, fam.code(0).unwrap()] {
            let t = code.t();
            let anc = ancilla_labels(Owner::Member(1), code.u() - t);
            let average = |psi: &PureStateVector, y: &[u8]| -> DMatrix<C64> {
                let d = 1 << code.u();
                let mut acc = DMatrix::<C64>::zeros(d, d);
                for xi in 0..1usize << (2 * t) {
                    let x: Vec<u8> = (0..2 * t).map(|i| ((xi >> i) & 1) as u8).collect();
                    let keys = AuthKeys { k: 0, x, y: y.to_vec() };
                    let s = send_block_with_code(psi, code, &keys, psi.labels(), &anc).unwrap();
                    acc += DensityMatrix::from_pure(&s).matrix();
                }
                acc / C64::new((1 << (2 * t)) as f64, 0.0)
            };
            let y: Vec<u8> = vec![1; code.u() - t];
            let a = haar_state(labels(t), &mut rng).unwrap();
            let b = haar_state(labels(t), &mut rng).unwrap();
            let (ra, rb) = (average(&a, &y), average(&b, &y));
            assert!(trace_distance_matrices(&ra, &rb).unwrap() < 1e-12);
            // Equals the normalised coset projector V V† / 2^t.
            let v = code.encoder(&y).unwrap();
            let (d, k) = (1usize << code.u(), 1usize << t);
            let vm = DMatrix::from_row_slice(d, k, &v);
            let proj = &vm * vm.adjoint() / C64::new(k as f64, 0.0);
            assert!((ra - proj).norm() < 1e-12);
        }
    }
}
