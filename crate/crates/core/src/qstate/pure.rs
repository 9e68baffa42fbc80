use rand::Rng;
use serde::{Deserialize, Serialize};

use super::kernel::{self, bit_of, insert_bit};
use super::label::check_unique;
use super::{pauli_masks, DensityMatrix, MeasurementBasis, QubitLabel, C64, MAX_STATE_QUBITS};
use crate::error::{invalid, Error, Result};
use crate::pauli::PauliOperator;

const NORM_TOL: f64 = 1e-12;

/// Normalized state vector over an ordered list of labelled qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "StateDump", try_from = "StateDump")]
pub struct PureStateVector {
    labels: Vec<QubitLabel>,
    amps: Vec<C64>,
}

pub(crate) fn check_capacity(nq: usize, limit: usize, what: &'static str) -> Result<()> {
    if nq > limit {
        return Err(Error::Capacity {
            what,
            requested: nq,
            limit,
        });
    }
    Ok(())
}

impl PureStateVector {
    pub fn new(labels: Vec<QubitLabel>, amps: Vec<C64>) -> Result<Self> {
        check_unique(&labels)?;
        check_capacity(labels.len(), MAX_STATE_QUBITS, "state vector qubits")?;
        if amps.len() != 1 << labels.len() {
            return Err(invalid(format!(
                "{} amplitudes for {} qubits",
                amps.len(),
                labels.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid(format!("state norm² is {norm}, expected 1")));
        }
        Ok(Self { labels, amps })
    }

    /// Normalizes `amps` before validating.
    pub fn from_unnormalized(labels: Vec<QubitLabel>, mut amps: Vec<C64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(invalid("cannot normalize a zero vector"));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::new(labels, amps)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis_state(labels: Vec<QubitLabel>, index: usize) -> Result<Self> {
        check_capacity(labels.len(), MAX_STATE_QUBITS, "state vector qubits")?;
        let dim = 1usize << labels.len();
        if index >= dim {
            return Err(invalid(format!("basis index {index} out of range {dim}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self::new(labels, amps)
    }

    /// Eigenstate of `basis` with the given outcome bit on one qubit.
    pub fn eigenstate(label: QubitLabel, basis: MeasurementBasis, outcome: u8) -> Self {
        Self {
            labels: vec![label],
            amps: basis.eigenvector(outcome).to_vec(),
        }
    }

    pub(crate) fn from_parts(labels: Vec<QubitLabel>, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << labels.len());
        Self { labels, amps }
    }

    pub fn labels(&self) -> &[QubitLabel] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn position(&self, label: QubitLabel) -> Result<usize> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .ok_or_else(|| invalid(format!("unknown qubit label {label}")))
    }

    pub fn positions(&self, labels: &[QubitLabel]) -> Result<Vec<usize>> {
        check_unique(labels)?;
        labels.iter().map(|&l| self.position(l)).collect()
    }

    /// Tensor product `self ⊗ other`; labels are concatenated.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        check_unique(&labels)?;
        check_capacity(labels.len(), MAX_STATE_QUBITS, "state vector qubits")?;
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Ok(Self { labels, amps })
    }

    /// Same state with qubits reordered to `order` (a permutation of the
    /// current labels). Amplitudes move with their labels.
    pub fn permuted(&self, order: &[QubitLabel]) -> Result<Self> {
        if order.len() != self.labels.len() {
            return Err(invalid("permutation must list every qubit exactly once"));
        }
        let perm = self.positions(order)?;
        let table = kernel::permutation_table(self.num_qubits(), &perm);
        let amps = table.iter().map(|&old| self.amps[old]).collect();
        Ok(Self {
            labels: order.to_vec(),
            amps,
        })
    }

    /// Reorders qubits owner-major, slot-minor.
    pub fn canonicalize(&self) -> Self {
        let mut order = self.labels.clone();
        order.sort();
        self.permuted(&order).expect("sorted labels are a permutation")
    }

    /// `⟨self|other⟩`, aligning `other` to this state's qubit order.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        let other = if other.labels == self.labels {
            other.clone()
        } else {
            other.permuted(&self.labels)?
        };
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Applies a 2^k × 2^k row-major matrix to the listed qubits in place.
    /// The first target is the most significant local qubit.
    pub fn apply_unitary(&mut self, targets: &[QubitLabel], matrix: &[C64]) -> Result<()> {
        let pos = self.positions(targets)?;
        let dim = 1usize << pos.len();
        if matrix.len() != dim * dim {
            return Err(invalid(format!(
                "matrix has {} entries, {} targets need {}",
                matrix.len(),
                pos.len(),
                dim * dim
            )));
        }
        let nq = self.num_qubits();
        kernel::apply_local(&mut self.amps, nq, &pos, matrix);
        Ok(())
    }

    /// Applies a Pauli operator whose qubit `j` acts on `targets[j]`.
    pub fn apply_pauli(&mut self, targets: &[QubitLabel], pauli: &PauliOperator) -> Result<()> {
        self.amps = self.pauli_image(targets, pauli)?;
        Ok(())
    }

    fn pauli_image(&self, targets: &[QubitLabel], pauli: &PauliOperator) -> Result<Vec<C64>> {
        if pauli.num_qubits() != targets.len() {
            return Err(invalid(format!(
                "{}-qubit Pauli on {} targets",
                pauli.num_qubits(),
                targets.len()
            )));
        }
        let pos = self.positions(targets)?;
        let (xm, zm, coef) = pauli_masks(pauli, &pos, self.num_qubits());
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for (b, a) in self.amps.iter().enumerate() {
            let sign = if (b & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[b ^ xm] = coef * a * sign;
        }
        Ok(out)
    }

    /// Applies a general linear map `m` (row-major, 2^l × 2^k) taking the
    /// `targets` (k qubits) to `new_labels` (l qubits). The new qubits are
    /// appended after the untouched ones. Returns the renormalized state
    /// and the squared norm before renormalization.
    pub fn map_qubits(
        &self,
        targets: &[QubitLabel],
        m: &[C64],
        new_labels: &[QubitLabel],
    ) -> Result<(Self, f64)> {
        let k = targets.len();
        let l = new_labels.len();
        if m.len() != (1 << l) * (1 << k) {
            return Err(invalid("map shape does not match target/new label counts"));
        }
        let pos = self.positions(targets)?;
        let rest: Vec<QubitLabel> = self
            .labels
            .iter()
            .enumerate()
            .filter(|(i, _)| !pos.contains(i))
            .map(|(_, &lab)| lab)
            .collect();
        let mut labels = rest.clone();
        labels.extend_from_slice(new_labels);
        check_unique(&labels)?;
        check_capacity(labels.len(), MAX_STATE_QUBITS, "state vector qubits")?;
        let mut order = rest.clone();
        order.extend_from_slice(targets);
        let src = self.permuted(&order)?;
        let (kin, lout) = (1usize << k, 1usize << l);
        let mut amps = vec![C64::new(0.0, 0.0); (1 << rest.len()) * lout];
        for r in 0..1usize << rest.len() {
            let input = &src.amps[r * kin..(r + 1) * kin];
            for o in 0..lout {
                let row = &m[o * kin..(o + 1) * kin];
                amps[r * lout + o] = row.iter().zip(input).map(|(a, b)| a * b).sum();
            }
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm <= 0.0 {
            return Err(Error::State("linear map annihilated the state".into()));
        }
        let s = norm.sqrt();
        amps.iter_mut().for_each(|a| *a /= s);
        Ok((Self { labels, amps }, norm))
    }

    /// Born probability of `outcome` when measuring `label` in `basis`.
    pub fn outcome_probability(
        &self,
        label: QubitLabel,
        basis: MeasurementBasis,
        outcome: u8,
    ) -> Result<f64> {
        let bit = bit_of(self.position(label)?, self.num_qubits());
        let e = basis.eigenvector(outcome);
        Ok((0..self.dim() / 2)
            .map(|r| {
                (e[0].conj() * self.amps[insert_bit(r, bit, 0)]
                    + e[1].conj() * self.amps[insert_bit(r, bit, 1)])
                .norm_sqr()
            })
            .sum())
    }

    /// Measures one qubit, removing it from the register.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        label: QubitLabel,
        basis: MeasurementBasis,
        rng: &mut R,
    ) -> Result<(u8, Self)> {
        let pos = self.position(label)?;
        let bit = bit_of(pos, self.num_qubits());
        let branch = |o: u8| -> Vec<C64> {
            let e = basis.eigenvector(o);
            (0..self.dim() / 2)
                .map(|r| {
                    e[0].conj() * self.amps[insert_bit(r, bit, 0)]
                        + e[1].conj() * self.amps[insert_bit(r, bit, 1)]
                })
                .collect()
        };
        let zero = branch(0);
        let p0: f64 = zero.iter().map(|a| a.norm_sqr()).sum::<f64>().clamp(0.0, 1.0);
        let outcome = u8::from(rng.random::<f64>() >= p0);
        let mut amps = if outcome == 0 { zero } else { branch(1) };
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        let mut labels = self.labels.clone();
        labels.remove(pos);
        Ok((outcome, Self { labels, amps }))
    }

    /// Measures one qubit and leaves it in the observed eigenstate.
    pub fn measure_in_place<R: Rng + ?Sized>(
        &mut self,
        label: QubitLabel,
        basis: MeasurementBasis,
        rng: &mut R,
    ) -> Result<u8> {
        let p0 = self.outcome_probability(label, basis, 0)?.clamp(0.0, 1.0);
        let outcome = u8::from(rng.random::<f64>() >= p0);
        self.apply_unitary(&[label], &basis.projector(outcome))?;
        self.renormalize();
        Ok(outcome)
    }

    /// Projective measurement of a Hermitian Pauli observable on `targets`.
    /// Returns 0 for the +1 eigenspace, 1 for −1.
    pub fn measure_pauli<R: Rng + ?Sized>(
        &mut self,
        targets: &[QubitLabel],
        pauli: &PauliOperator,
        rng: &mut R,
    ) -> Result<u8> {
        if !pauli.is_hermitian() {
            return Err(invalid("observable must be a Hermitian Pauli"));
        }
        let image = self.pauli_image(targets, pauli)?;
        let expect: f64 = self
            .amps
            .iter()
            .zip(&image)
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        let p0 = ((1.0 + expect) / 2.0).clamp(0.0, 1.0);
        let outcome = u8::from(rng.random::<f64>() >= p0);
        let sign = if outcome == 0 { 1.0 } else { -1.0 };
        for (a, b) in self.amps.iter_mut().zip(&image) {
            *a = (*a + b * sign) * 0.5;
        }
        self.renormalize();
        Ok(outcome)
    }

    fn renormalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        self.amps.iter_mut().for_each(|a| *a /= n);
    }

    pub fn to_density(&self) -> DensityMatrix {
        let d = self.dim();
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                data[i * d + j] = self.amps[i] * self.amps[j].conj();
            }
        }
        DensityMatrix::from_parts(self.labels.clone(), data)
    }
}

/// JSON form: label list plus interleaved (re, im) amplitude pairs.
#[derive(Serialize, Deserialize)]
struct StateDump {
    labels: Vec<QubitLabel>,
    amplitudes: Vec<f64>,
}

impl From<PureStateVector> for StateDump {
    fn from(s: PureStateVector) -> Self {
        Self {
            labels: s.labels,
            amplitudes: s.amps.iter().flat_map(|a| [a.re, a.im]).collect(),
        }
    }
}

impl TryFrom<StateDump> for PureStateVector {
    type Error = Error;

    fn try_from(d: StateDump) -> Result<Self> {
        if d.amplitudes.len() % 2 != 0 {
            return Err(invalid("odd number of amplitude components"));
        }
        let amps = d
            .amplitudes
            .chunks(2)
            .map(|c| C64::new(c[0], c[1]))
            .collect();
        Self::new(d.labels, amps)
    }
}
