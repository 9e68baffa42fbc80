use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::keybits::derive_key_bits;
use super::transcript::{RoundRecord, TestBit};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestVerdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finalized {
    pub verdict: TestVerdict,
    /// Empty on failure.
    pub key_a: Vec<u8>,
    pub key_b: Vec<u8>,
    pub observed_error_rate: f64,
    pub tests: Vec<TestBit>,
}

/// Number of test bits drawn from `kept` copies.
pub fn test_count(kept: usize, test_fraction: f64) -> usize {
    (test_fraction * kept as f64).round() as usize
}

/// Draws `round(test_fraction · N)` of the `N` kept copies uniformly without
/// replacement, compares their bits publicly, and keeps the rest as key
/// unless any comparison disagrees.
pub fn test_and_finalize<R: Rng + ?Sized>(
    records: &[RoundRecord],
    test_fraction: f64,
    rng: &mut R,
) -> Result<Finalized> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(invalid(format!("test_fraction must lie in (0,1), got {test_fraction}")));
    }
    let k = test_count(records.len(), test_fraction);
    if k == 0 {
        return Err(invalid(format!(
            "{} kept bits at fraction {test_fraction} give an empty test set",
            records.len()
        )));
    }
    let bits = records.iter().map(derive_key_bits).collect::<Result<Vec<_>>>()?;
    let mut chosen = index::sample(rng, records.len(), k).into_vec();
    chosen.sort_unstable();
    let tests: Vec<TestBit> = chosen
        .iter()
        .map(|&i| TestBit {
            index: i,
            round: records[i].round,
            copy: records[i].copy,
            b_a: bits[i].0,
            b_b: bits[i].1,
        })
        .collect();
    let errors = tests.iter().filter(|t| t.b_a != t.b_b).count();
    let observed_error_rate = errors as f64 / k as f64;
    if errors > 0 {
        return Ok(Finalized {
            verdict: TestVerdict::Fail,
            key_a: Vec::new(),
            key_b: Vec::new(),
            observed_error_rate,
            tests,
        });
    }
    let mut is_test = vec![false; records.len()];
    chosen.iter().for_each(|&i| is_test[i] = true);
    let (key_a, key_b) = bits
        .iter()
        .zip(&is_test)
        .filter(|(_, &t)| !t)
        .map(|(b, _)| *b)
        .unzip();
    Ok(Finalized {
        verdict: TestVerdict::Pass,
        key_a,
        key_b,
        observed_error_rate,
        tests,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    fn rec(i: usize, m_a: u8, m_b: u8) -> RoundRecord {
        RoundRecord {
            round: i,
            m_a: Some(m_a),
            m_b: Some(m_b),
            ..RoundRecord::default()
        }
    }

    #[test]
    fn clean_records_pass() {
        let recs: Vec<_> = (0..40).map(|i| rec(i, (i % 2) as u8, (i % 2) as u8)).collect();
        let f = test_and_finalize(&recs, 0.25, &mut seeded_rng(1)).unwrap();
        assert_eq!(f.verdict, TestVerdict::Pass);
        assert_eq!(f.observed_error_rate, 0.0);
        assert_eq!(f.tests.len(), 10);
        assert_eq!(f.key_a.len(), 30);
        assert_eq!(f.key_a, f.key_b);
        let mut idx: Vec<_> = f.tests.iter().map(|t| t.index).collect();
        idx.dedup();
        assert_eq!(idx.len(), 10);
    }

    #[test]
    fn single_mismatch_fails_with_empty_keys() {
        let mut recs: Vec<_> = (0..10).map(|i| rec(i, 0, 0)).collect();
        recs[3].m_b = Some(1);
        // Every bit is tested at fraction 0.95, so the mismatch is seen.
        let f = test_and_finalize(&recs, 0.95, &mut seeded_rng(2)).unwrap();
        assert_eq!(f.verdict, TestVerdict::Fail);
        assert!(f.key_a.is_empty() && f.key_b.is_empty());
        assert!((f.observed_error_rate - 0.1).abs() < 1e-12);
    }

    #[test]
    fn empty_test_set_is_an_error() {
        let recs = vec![rec(0, 0, 0)];
        assert!(test_and_finalize(&recs, 0.25, &mut seeded_rng(0)).is_err());
        assert!(test_and_finalize(&[], 0.5, &mut seeded_rng(0)).is_err());
        assert!(test_and_finalize(&recs, 1.0, &mut seeded_rng(0)).is_err());
    }

    #[test]
    fn always_lying_member_is_always_caught() {
        // Every bit disagrees, so any nonempty test set fails.
        let recs: Vec<_> = (0..8).map(|i| rec(i, 0, 1)).collect();
        for seed in 0..100 {
            let f = test_and_finalize(&recs, 0.25, &mut seeded_rng(seed)).unwrap();
            assert_eq!(f.verdict, TestVerdict::Fail);
        }
    }
}
