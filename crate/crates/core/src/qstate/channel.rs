use super::{kernel, MeasurementBasis, C64};
use crate::error::{invalid, Result};
use crate::pauli::PauliOperator;

const COMPLETENESS_TOL: f64 = 1e-10;

/// A completely positive trace-preserving map in Kraus form on `arity`
/// qubits. Each Kraus operator is a row-major 2^arity square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    arity: usize,
    kraus: Vec<Vec<C64>>,
}

impl Channel {
    /// Checks `Σ K†K = I` before accepting the operators.
    pub fn from_kraus(arity: usize, kraus: Vec<Vec<C64>>) -> Result<Self> {
        let d = 1usize << arity;
        if kraus.is_empty() {
            return Err(invalid("channel needs at least one Kraus operator"));
        }
        if kraus.iter().any(|k| k.len() != d * d) {
            return Err(invalid("Kraus operator has the wrong size"));
        }
        let mut sum = vec![C64::new(0.0, 0.0); d * d];
        for k in &kraus {
            let kd = kernel::adjoint(k, d, d);
            let p = kernel::matmul(&kd, k, d);
            sum.iter_mut().zip(&p).for_each(|(a, b)| *a += b);
        }
        for i in 0..d {
            for j in 0..d {
                let want = if i == j { 1.0 } else { 0.0 };
                if (sum[i * d + j] - want).norm() > COMPLETENESS_TOL {
                    return Err(invalid("Kraus operators are not trace preserving"));
                }
            }
        }
        Ok(Self { arity, kraus })
    }

    pub fn identity(arity: usize) -> Self {
        let d = 1usize << arity;
        let mut id = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            id[i * d + i] = C64::new(1.0, 0.0);
        }
        Self {
            arity,
            kraus: vec![id],
        }
    }

    /// Single-qubit depolarizing map `ρ ↦ (1−p)ρ + p·I/2`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("depolarizing probability {p} outside [0,1]")));
        }
        let table: Vec<(PauliOperator, f64)> = [
            ("I", 1.0 - 0.75 * p),
            ("X", p / 4.0),
            ("Y", p / 4.0),
            ("Z", p / 4.0),
        ]
        .into_iter()
        .map(|(s, w)| (s.parse().expect("static Pauli"), w))
        .collect();
        Self::pauli(&table)
    }

    /// Mixture of Pauli operators with the given probabilities.
    pub fn pauli(table: &[(PauliOperator, f64)]) -> Result<Self> {
        let arity = table
            .first()
            .map(|(p, _)| p.num_qubits())
            .ok_or_else(|| invalid("empty Pauli table"))?;
        if table.iter().any(|(p, _)| p.num_qubits() != arity) {
            return Err(invalid("Pauli table mixes operator sizes"));
        }
        if table.iter().any(|&(_, w)| !(0.0..=1.0).contains(&w)) {
            return Err(invalid("Pauli probabilities must lie in [0,1]"));
        }
        let total: f64 = table.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("Pauli probabilities sum to {total}")));
        }
        let kraus = table
            .iter()
            .filter(|(_, w)| *w > 0.0)
            .map(|(p, w)| {
                let s = w.sqrt();
                p.to_matrix().into_iter().map(|a| a * s).collect()
            })
            .collect();
        Ok(Self { arity, kraus })
    }

    /// Measure in a basis drawn uniformly from `bases` and re-prepare the
    /// observed eigenstate, averaged over the basis choice and outcome.
    pub fn measure_prepare(bases: &[MeasurementBasis]) -> Result<Self> {
        if bases.is_empty() {
            return Err(invalid("need at least one basis"));
        }
        let w = (1.0 / bases.len() as f64).sqrt();
        let kraus = bases
            .iter()
            .flat_map(|b| (0..2u8).map(move |o| b.projector(o).map(|a| a * w).to_vec()))
            .collect();
        Ok(Self { arity: 1, kraus })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn kraus(&self) -> &[Vec<C64>] {
        &self.kraus
    }

    /// `self ⊗ other` acting on `arity + other.arity` qubits.
    pub fn tensor(&self, other: &Self) -> Self {
        let (da, db) = (1usize << self.arity, 1usize << other.arity);
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| kernel::kron(a, da, b, db)))
            .collect();
        Self {
            arity: self.arity + other.arity,
            kraus,
        }
    }
}
