//! Key-bit bookkeeping: direction counts, the correlation tables, sifting,
//! ring parity collection and reconciliation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::transcript::RoundRecord;
use crate::error::{invalid, Error, Result};
use crate::qstate::MeasurementBasis;

/// Number of `Y` directions modulo 4.
pub fn y_count(bases: &[MeasurementBasis]) -> u8 {
    (bases.iter().filter(|&&b| b == MeasurementBasis::Y).count() % 4) as u8
}

/// `⌊(Y mod 4) / 2⌋`.
pub fn y_bar(y: u8) -> u8 {
    (y % 4) / 2
}

pub fn parity(bits: &[u8]) -> u8 {
    bits.iter().fold(0, |a, b| a ^ (b & 1))
}

/// Whether a protocol-1 copy survives sifting: `Y_A + Y_B` even.
pub fn keeps(y_a: u8, y_b: u8) -> bool {
    (y_a + y_b) % 2 == 0
}

/// Predicted `⊕_P (Ȳ_P ⊕ M_P)` over all parties sharing one cat state, for
/// per-party direction counts whose total is even: half the number of
/// parties with an odd count, modulo 2.
pub fn predicted_relation(y_counts: &[u8]) -> Result<u8> {
    let odd = y_counts.iter().filter(|&&y| y % 2 == 1).count();
    if odd % 2 == 1 {
        return Err(Error::State("total Y count is odd: no determinate relation".into()));
    }
    Ok(((odd / 2) % 2) as u8)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(y: u8) -> Self {
        if y % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Two-party correlation table: `(parity of Y_A, parity of Y_B,
/// [b_B when b_A = 0, b_B when b_A = 1])`.
pub const TABLE_I: [(Parity, Parity, [u8; 2]); 2] = [
    (Parity::Even, Parity::Even, [0, 1]),
    (Parity::Odd, Parity::Odd, [1, 0]),
];

/// Two parties plus a one-qubit center: `(Y_C, center outcome, parity of
/// Y_A, parity of Y_B, [b_B when b_A = 0, b_B when b_A = 1])`.
pub const TABLE_II: [(u8, u8, Parity, Parity, [u8; 2]); 8] = [
    (0, 0, Parity::Even, Parity::Even, [0, 1]),
    (0, 1, Parity::Even, Parity::Even, [1, 0]),
    (0, 0, Parity::Odd, Parity::Odd, [1, 0]),
    (0, 1, Parity::Odd, Parity::Odd, [0, 1]),
    (1, 0, Parity::Even, Parity::Odd, [1, 0]),
    (1, 1, Parity::Even, Parity::Odd, [0, 1]),
    (1, 0, Parity::Odd, Parity::Even, [1, 0]),
    (1, 1, Parity::Odd, Parity::Even, [0, 1]),
];

pub fn table_i_row(y_a: u8, y_b: u8) -> Option<[u8; 2]> {
    TABLE_I
        .iter()
        .find(|r| r.0 == Parity::of(y_a) && r.1 == Parity::of(y_b))
        .map(|r| r.2)
}

pub fn table_ii_row(y_c: u8, c: u8, y_a: u8, y_b: u8) -> Option<[u8; 2]> {
    TABLE_II
        .iter()
        .find(|r| r.0 == y_c && r.1 == c && r.2 == Parity::of(y_a) && r.3 == Parity::of(y_b))
        .map(|r| r.4)
}

/// Center direction for protocol 2: `Y` iff `Y_A + Y_B` is odd, making the
/// total `Y` count even.
pub fn center_basis(y_a: u8, y_b: u8) -> MeasurementBasis {
    if (y_a + y_b) % 2 == 1 {
        MeasurementBasis::Y
    } else {
        MeasurementBasis::X
    }
}

/// Bit party B adds to its raw bit so that both parties hold equal keys:
/// `Y_A` odd in protocol 1; the center's bit XOR `[Y_A or Y_B odd]` in
/// protocol 2.
pub fn reconciliation_flip(y_a: u8, y_b: u8, center_outcome: Option<u8>) -> u8 {
    match center_outcome {
        None => y_a % 2,
        Some(c) => c ^ u8::from(y_a % 2 == 1 || y_b % 2 == 1),
    }
}

/// `(b_A, b_B)` with `b_P = Ȳ_P ⊕ M_P` and B's reconciliation applied.
pub fn derive_key_bits(record: &RoundRecord) -> Result<(u8, u8)> {
    let (m_a, m_b) = match (record.m_a, record.m_b) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::State("party parity not collected".into())),
    };
    let center = match record.center_basis {
        Some(_) => Some(
            record
                .center_outcome
                .ok_or_else(|| Error::State("center outcome missing".into()))?,
        ),
        None => None,
    };
    let b_a = y_bar(record.y_a) ^ m_a;
    let b_b = y_bar(record.y_b) ^ m_b ^ reconciliation_flip(record.y_a, record.y_b, center);
    Ok((b_a, b_b))
}

/// Drops protocol-1 copies with an odd `Y_A + Y_B`; protocol-2 copies
/// (those with a center direction) are always kept.
pub fn sift(records: &[RoundRecord]) -> Vec<RoundRecord> {
    records
        .iter()
        .filter(|r| r.center_basis.is_some() || keeps(r.y_a, r.y_b))
        .cloned()
        .collect()
}

/// Ring parity collection with blinding bit `r`. `outcomes[0]` belongs to
/// the collector. Each member's contribution passes through `contribute`,
/// which may alter or drop it. Returns the parity and the messages sent
/// around the ring (none for a single member), or `None` when a message
/// was dropped.
pub fn ring_collect_with(
    outcomes: &[u8],
    r: u8,
    mut contribute: impl FnMut(usize, u8) -> Option<u8>,
) -> Result<Option<(u8, Vec<u8>)>> {
    if outcomes.is_empty() {
        return Err(invalid("ring collection needs at least one member"));
    }
    if outcomes.len() == 1 {
        return Ok(contribute(0, outcomes[0]).map(|b| (b & 1, Vec::new())));
    }
    let mut messages = Vec::with_capacity(outcomes.len());
    let mut acc = r & 1;
    for (i, &o) in outcomes.iter().enumerate() {
        let Some(c) = contribute(i, o) else {
            return Ok(None);
        };
        acc ^= c & 1;
        messages.push(acc);
    }
    Ok(Some((acc ^ (r & 1), messages)))
}

/// Honest ring collection with a fresh blinding bit.
pub fn ring_collect<R: Rng + ?Sized>(outcomes: &[u8], rng: &mut R) -> Result<(u8, Vec<u8>)> {
    let r = rng.random_range(0..2u8);
    Ok(ring_collect_with(outcomes, r, |_, o| Some(o))?.expect("honest ring never drops"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    fn record(y_a: u8, y_b: u8, m_a: u8, m_b: u8, center: Option<(u8, u8)>) -> RoundRecord {
        RoundRecord {
            y_a,
            y_b,
            m_a: Some(m_a),
            m_b: Some(m_b),
            center_basis: center.map(|(yc, _)| {
                if yc == 1 {
                    MeasurementBasis::Y
                } else {
                    MeasurementBasis::X
                }
            }),
            center_outcome: center.map(|(_, c)| c),
            ..RoundRecord::default()
        }
    }

    #[test]
    fn sift_examples() {
        let recs = vec![record(1, 2, 0, 0, None), record(2, 2, 0, 0, None), record(3, 1, 0, 0, None)];
        let kept = sift(&recs);
        assert_eq!(kept.len(), 2);
        assert_eq!((kept[0].y_a, kept[0].y_b), (2, 2));
        assert_eq!((kept[1].y_a, kept[1].y_b), (3, 1));
        let p2 = vec![record(1, 2, 0, 0, Some((1, 0)))];
        assert_eq!(sift(&p2).len(), 1);
    }

    #[test]
    fn derive_examples() {
        assert_eq!(derive_key_bits(&record(0, 2, 0, 0, None)).unwrap().0, 0);
        // Even/even, M = 0 both: raw bits 0, 0.
        let (a, b) = derive_key_bits(&record(0, 0, 0, 0, None)).unwrap();
        assert_eq!((a, b), (0, 0));
        // Odd/odd with Ȳ = 0: raw bits 0 and 1, B flips.
        let (a, b) = derive_key_bits(&record(1, 1, 0, 1, None)).unwrap();
        assert_eq!((a, b), (0, 0));
        let mut missing = record(0, 0, 0, 0, Some((0, 0)));
        missing.center_outcome = None;
        assert!(derive_key_bits(&missing).is_err());
    }

    #[test]
    fn reconciliation_inverts_every_table_row() {
        // For each row, b_B(raw) given b_A follows the table; after the flip
        // the bits agree.
        for (y_c, c, pa, pb, col) in TABLE_II {
            let y_a = if pa == Parity::Odd { 1 } else { 0 };
            let y_b = if pb == Parity::Odd { 1 } else { 0 };
            for b_a in 0..2u8 {
                let raw_b = col[b_a as usize];
                assert_eq!(raw_b ^ reconciliation_flip(y_a, y_b, Some(c)), b_a);
                assert_eq!(y_c, u8::from((y_a + y_b) % 2 == 1));
                assert_eq!(center_basis(y_a, y_b) == MeasurementBasis::Y, y_c == 1);
            }
        }
        for (pa, pb, col) in TABLE_I {
            let y = if pa == Parity::Odd { 1 } else { 0 };
            assert_eq!(pa, pb);
            for b_a in 0..2u8 {
                assert_eq!(col[b_a as usize] ^ reconciliation_flip(y, y, None), b_a);
            }
        }
    }

    #[test]
    fn relation_rule_matches_tables() {
        for (pa, _, col) in TABLE_I {
            let y = u8::from(pa == Parity::Odd);
            assert_eq!(predicted_relation(&[y, y]).unwrap(), col[0]);
        }
        for (y_c, c, pa, pb, col) in TABLE_II {
            let ya = u8::from(pa == Parity::Odd);
            let yb = u8::from(pb == Parity::Odd);
            // b_A ⊕ b_B ⊕ (Ȳ_C ⊕ c) = relation, with Ȳ_C = 0.
            assert_eq!(predicted_relation(&[ya, yb, y_c]).unwrap() ^ c, col[0]);
        }
        assert!(predicted_relation(&[1, 0]).is_err());
    }

    #[test]
    fn ring_examples() {
        assert_eq!(ring_collect_with(&[1], 0, |_, o| Some(o)).unwrap(), Some((1, vec![])));
        assert_eq!(
            ring_collect_with(&[1, 0, 1], 0, |_, o| Some(o)).unwrap(),
            Some((0, vec![1, 1, 0]))
        );
        assert!(ring_collect_with(&[], 0, |_, o| Some(o)).is_err());
        assert_eq!(ring_collect_with(&[1, 1], 1, |i, o| (i != 1).then_some(o)).unwrap(), None);
        let (p, _) = ring_collect(&[1, 1, 1], &mut seeded_rng(3)).unwrap();
        assert_eq!(p, 1);
    }

    #[test]
    fn ring_messages_are_blinded() {
        // For every outcome vector, each message takes each value for exactly
        // one of the two blinding bits.
        for len in 2..=4usize {
            for v in 0..1u32 << len {
                let outcomes: Vec<u8> = (0..len).map(|i| ((v >> i) & 1) as u8).collect();
                let m0 = ring_collect_with(&outcomes, 0, |_, o| Some(o)).unwrap().unwrap().1;
                let m1 = ring_collect_with(&outcomes, 1, |_, o| Some(o)).unwrap().unwrap().1;
                for (a, b) in m0.iter().zip(&m1) {
                    assert_ne!(a, b);
                }
            }
        }
    }
}
