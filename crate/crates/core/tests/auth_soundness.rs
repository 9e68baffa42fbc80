//! Monte Carlo soundness of authenticated transmission, checked against the
//! exact audit of the family in use.

use qkdnet::auth::{auth_receive, auth_send, keygen, Verdict};
use qkdnet::pauli::{audit_family_with, gen_purity_family, AuditMode, PauliOperator, PurityFamily};
use qkdnet::qstate::random::haar_state;
use qkdnet::qstate::{Owner, QubitLabel};
use qkdnet::seeded_rng;
use rand::Rng;

const TRIALS: usize = 10_000;

/// Sends a Haar state through `e`; returns (accepted, corrupted).
fn transmit<R: Rng>(fam: &PurityFamily, e: &PauliOperator, rng: &mut R) -> (bool, bool) {
    let labels = QubitLabel::block(Owner::Member(1), 0, fam.t());
    let psi = haar_state(labels, rng).unwrap();
    let keys = keygen(fam, fam.t(), rng).unwrap();
    let mut sent = auth_send(&keys, fam, &psi).unwrap();
    let block = sent.labels().to_vec();
    sent.apply_pauli(&block, e).unwrap();
    let out = auth_receive(&keys, fam, &sent, rng).unwrap();
    match out.verdict {
        Verdict::Reject => (false, false),
        Verdict::Accept => {
            let f = out.logical_state.unwrap().overlap(&psi).unwrap();
            (true, f < 1.0 - 1e-9)
        }
    }
}

fn random_nonidentity<R: Rng>(u: usize, rng: &mut R) -> PauliOperator {
    loop {
        let e = PauliOperator::new(u, rng.random_range(0..1 << u), rng.random_range(0..1 << u), 0).unwrap();
        if !e.is_identity() {
            return e;
        }
    }
}

fn three_sigma(p: f64, n: usize) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn random_pauli_attacks_stay_below_audited_error() {
    for (r, s, seed) in [(2, 2, 11u64), (2, 3, 12)] {
        let mut fam = gen_purity_family(r, s, seed).unwrap();
        let eps = audit_family_with(&mut fam, AuditMode::Exhaustive).unwrap().epsilon;
        let mut rng = seeded_rng(seed ^ 0xA5);
        let mut bad = 0;
        for _ in 0..TRIALS {
            let e = random_nonidentity(fam.u(), &mut rng);
            if transmit(&fam, &e, &mut rng).1 {
                bad += 1;
            }
        }
        let freq = bad as f64 / TRIALS as f64;
        assert!(freq <= eps + three_sigma(eps, TRIALS), "({r},{s}): {freq} > {eps}");
    }
}

#[test]
fn witness_attack_attains_audited_error() {
    let mut fam = gen_purity_family(2, 2, 21).unwrap();
    let report = audit_family_with(&mut fam, AuditMode::Exhaustive).unwrap();
    let witness = report.witness.clone().unwrap();
    let mut rng = seeded_rng(5);
    let n = 4000;
    let bad = (0..n).filter(|_| transmit(&fam, &witness, &mut rng).1).count();
    let freq = bad as f64 / n as f64;
    let sigma = three_sigma(report.epsilon, n);
    assert!((freq - report.epsilon).abs() <= sigma, "{freq} vs {}", report.epsilon);
}

#[test]
fn nonzero_syndrome_fixed_pauli_always_rejects() {
    let fam = gen_purity_family(2, 3, 4).unwrap();
    let mut rng = seeded_rng(8);
    for code_key in 0..fam.keys() {
        let code = fam.code(code_key).unwrap();
        let e = loop {
            let e = random_nonidentity(fam.u(), &mut rng);
            if code.syndrome(&e).unwrap().contains(&1) {
                break e;
            }
        };
        let labels = QubitLabel::block(Owner::Member(0), 0, fam.t());
        for _ in 0..1000 / fam.keys() + 1 {
            let psi = haar_state(labels.clone(), &mut rng).unwrap();
            let mut keys = keygen(&fam, fam.t(), &mut rng).unwrap();
            keys.k = code_key;
            let mut sent = auth_send(&keys, &fam, &psi).unwrap();
            let block = sent.labels().to_vec();
            sent.apply_pauli(&block, &e).unwrap();
            let out = auth_receive(&keys, &fam, &sent, &mut rng).unwrap();
            assert_eq!(out.verdict, Verdict::Reject);
            assert!(out.logical_state.is_none());
        }
    }
}
