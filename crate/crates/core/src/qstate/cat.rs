use serde::{Deserialize, Serialize};

use super::{PureStateVector, QubitLabel, C64};
use crate::error::{invalid, Result};

/// The four cat-state families `(|0…0⟩ ± |1…1⟩)/√2` (Φ) and
/// `(|0…0⟩ ± i|1…1⟩)/√2` (Ψ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CatKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl CatKind {
    pub const ALL: [CatKind; 4] = [
        CatKind::PhiPlus,
        CatKind::PhiMinus,
        CatKind::PsiPlus,
        CatKind::PsiMinus,
    ];

    /// Relative coefficient of `|1…1⟩`.
    pub fn tail(self) -> C64 {
        match self {
            CatKind::PhiPlus => C64::new(1.0, 0.0),
            CatKind::PhiMinus => C64::new(-1.0, 0.0),
            CatKind::PsiPlus => C64::new(0.0, 1.0),
            CatKind::PsiMinus => C64::new(0.0, -1.0),
        }
    }

    pub fn is_phi(self) -> bool {
        matches!(self, CatKind::PhiPlus | CatKind::PhiMinus)
    }

    pub fn is_plus(self) -> bool {
        matches!(self, CatKind::PhiPlus | CatKind::PsiPlus)
    }

    /// Same family with the sign flipped.
    pub fn flipped(self) -> Self {
        match self {
            CatKind::PhiPlus => CatKind::PhiMinus,
            CatKind::PhiMinus => CatKind::PhiPlus,
            CatKind::PsiPlus => CatKind::PsiMinus,
            CatKind::PsiMinus => CatKind::PsiPlus,
        }
    }
}

/// `j`-qubit cat state of the given kind on `labels`.
pub fn make_cat(j: usize, kind: CatKind, labels: Vec<QubitLabel>) -> Result<PureStateVector> {
    if j == 0 {
        return Err(invalid("cat state needs at least one qubit"));
    }
    if labels.len() != j {
        return Err(invalid(format!("{} labels for a {j}-qubit cat state", labels.len())));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![C64::new(0.0, 0.0); 1 << j];
    amps[0] = C64::new(h, 0.0);
    amps[(1 << j) - 1] = kind.tail() * h;
    PureStateVector::new(labels, amps)
}

/// The two ways of writing an `n`-qubit cat state of kind `kind` as
/// `(|a_1⟩|b_1⟩ + |a_2⟩|b_2⟩)/√2` with `a_i` on the first `m` qubits and
/// `b_i` on the remaining `n − m`. Each entry is `[(a_1, b_1), (a_2, b_2)]`.
pub fn split_cat(kind: CatKind) -> [[(CatKind, CatKind); 2]; 2] {
    use CatKind::*;
    let plus = kind.is_plus();
    let same = |phi: bool| match (phi, plus) {
        (true, true) => PhiPlus,
        (true, false) => PhiMinus,
        (false, true) => PsiPlus,
        (false, false) => PsiMinus,
    };
    let other = |phi: bool| same(phi).flipped();
    if kind.is_phi() {
        [
            [(PhiPlus, same(true)), (PhiMinus, other(true))],
            [(PsiPlus, other(false)), (PsiMinus, same(false))],
        ]
    } else {
        [
            [(PhiPlus, same(false)), (PhiMinus, other(false))],
            [(PsiPlus, same(true)), (PsiMinus, other(true))],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::Owner;

    #[test]
    fn rejects_bad_sizes() {
        assert!(make_cat(0, CatKind::PhiPlus, vec![]).is_err());
        let l = QubitLabel::block(Owner::Member(0), 0, 2);
        assert!(make_cat(3, CatKind::PhiPlus, l).is_err());
    }

    #[test]
    fn split_identities_hold_exactly() {
        for n in 2..=6usize {
            for m in 1..n {
                let la = QubitLabel::block(Owner::Member(0), 0, m);
                let lb = QubitLabel::block(Owner::Member(1), 0, n - m);
                let mut all = la.clone();
                all.extend_from_slice(&lb);
                for kind in CatKind::ALL {
                    let whole = make_cat(n, kind, all.clone()).unwrap();
                    for form in split_cat(kind) {
                        let mut sum = vec![C64::new(0.0, 0.0); 1 << n];
                        for (a, b) in form {
                            let pa = make_cat(m, a, la.clone()).unwrap();
                            let pb = make_cat(n - m, b, lb.clone()).unwrap();
                            let ab = pa.tensor(&pb).unwrap();
                            for (s, x) in sum.iter_mut().zip(ab.amplitudes()) {
                                *s += x * std::f64::consts::FRAC_1_SQRT_2;
                            }
                        }
                        for (s, w) in sum.iter().zip(whole.amplitudes()) {
                            assert!((s - w).norm() <= 1e-12, "n={n} m={m} {kind:?}");
                        }
                    }
                }
            }
        }
    }
}
