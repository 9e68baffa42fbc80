//! Dense checks of the two-party and center-assisted correlation tables.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::keybits::{table_i_row, table_ii_row, y_bar, y_count};
use crate::error::{invalid, Error, Result};
use crate::qstate::{make_cat, CatKind, MeasurementBasis, QubitLabel, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCheck {
    pub table: String,
    pub n: usize,
    /// Distinct (split, basis assignment) pairs checked.
    pub assignments: usize,
    pub shots_per_assignment: usize,
    pub violations: usize,
}

impl TableCheck {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Joint outcome distribution of measuring every qubit of `Φ⁺_q` in
/// `bases`; index bit `q−1−j` is qubit `j`'s outcome.
fn outcome_distribution(bases: &[MeasurementBasis]) -> Result<Vec<f64>> {
    let q = bases.len();
    let labels: Vec<QubitLabel> = (0..q).map(|j| QubitLabel::member(j as u16, 0)).collect();
    let mut psi = make_cat(q, CatKind::PhiPlus, labels.clone())?;
    for (l, b) in labels.iter().zip(bases) {
        // Row o of the rotation is ⟨e_o|.
        let e0 = b.eigenvector(0);
        let e1 = b.eigenvector(1);
        let u: [C64; 4] = [e0[0].conj(), e0[1].conj(), e1[0].conj(), e1[1].conj()];
        psi.apply_unitary(&[*l], &u)?;
    }
    Ok(psi.amplitudes().iter().map(|a| a.norm_sqr()).collect())
}

fn bit(index: usize, q: usize, j: usize) -> u8 {
    ((index >> (q - 1 - j)) & 1) as u8
}

fn assignment(code: usize, q: usize) -> Vec<MeasurementBasis> {
    (0..q)
        .map(|j| if (code >> j) & 1 == 1 { MeasurementBasis::Y } else { MeasurementBasis::X })
        .collect()
}

fn sampler(dist: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(dist).map_err(|e| Error::State(format!("outcome distribution: {e}")))
}

/// Every split `m | n−m` and every X/Y assignment with an even number of
/// `Y`s: `shots` samples of `(Ȳ_A ⊕ M_A) ⊕ (Ȳ_B ⊕ M_B)` must match the
/// two-party table entry.
pub fn check_table_i<R: Rng + ?Sized>(n: usize, shots: usize, rng: &mut R) -> Result<TableCheck> {
    if !(2..=12).contains(&n) {
        return Err(invalid(format!("table check needs 2 ≤ n ≤ 12, got {n}")));
    }
    let mut report = TableCheck {
        table: "I".into(),
        n,
        assignments: 0,
        shots_per_assignment: shots,
        violations: 0,
    };
    for code in 0..1usize << n {
        let bases = assignment(code, n);
        let dist = outcome_distribution(&bases)?;
        let pick = sampler(&dist)?;
        for m in 1..n {
            let y_a = y_count(&bases[..m]);
            let y_b = y_count(&bases[m..]);
            if (y_a + y_b) % 2 == 1 {
                continue;
            }
            let expected = table_i_row(y_a, y_b).ok_or_else(|| Error::State("no table row".into()))?[0];
            report.assignments += 1;
            for _ in 0..shots {
                let o = pick.sample(rng);
                let m_a = (0..m).fold(0, |a, j| a ^ bit(o, n, j));
                let m_b = (m..n).fold(0, |a, j| a ^ bit(o, n, j));
                let rel = y_bar(y_a) ^ m_a ^ y_bar(y_b) ^ m_b;
                if rel != expected {
                    report.violations += 1;
                }
            }
        }
    }
    Ok(report)
}

/// As [`check_table_i`] with an extra center qubit measured in X or Y so
/// that the total `Y` count is even, conditioning on the center's outcome.
pub fn check_table_ii<R: Rng + ?Sized>(n: usize, shots: usize, rng: &mut R) -> Result<TableCheck> {
    if !(2..=11).contains(&n) {
        return Err(invalid(format!("table check needs 2 ≤ n ≤ 11, got {n}")));
    }
    let q = n + 1;
    let mut report = TableCheck {
        table: "II".into(),
        n,
        assignments: 0,
        shots_per_assignment: shots,
        violations: 0,
    };
    for code in 0..1usize << q {
        let bases = assignment(code, q);
        let y_c = y_count(&bases[n..]);
        let dist = outcome_distribution(&bases)?;
        let pick = sampler(&dist)?;
        for m in 1..n {
            let y_a = y_count(&bases[..m]);
            let y_b = y_count(&bases[m..n]);
            if (y_a + y_b + y_c) % 2 == 1 {
                continue;
            }
            report.assignments += 1;
            for _ in 0..shots {
                let o = pick.sample(rng);
                let m_a = (0..m).fold(0, |a, j| a ^ bit(o, q, j));
                let m_b = (m..n).fold(0, |a, j| a ^ bit(o, q, j));
                let c = bit(o, q, n);
                let row = table_ii_row(y_c, c, y_a, y_b)
                    .ok_or_else(|| Error::State("no table row".into()))?;
                if y_bar(y_a) ^ m_a ^ y_bar(y_b) ^ m_b != row[0] {
                    report.violations += 1;
                }
            }
        }
    }
    Ok(report)
}
