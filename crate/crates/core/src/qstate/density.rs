use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::kernel::{self, bit_of, insert_bit};
use super::label::check_unique;
use super::pure::check_capacity;
use super::{
    metrics, pauli_masks, Channel, MeasurementBasis, PureStateVector, QubitLabel, C64,
    MAX_DENSITY_QUBITS,
};
use crate::error::{invalid, Error, Result};
use crate::pauli::PauliOperator;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const EIGEN_FLOOR: f64 = -1e-10;

/// Density matrix over labelled qubits, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MatrixDump", try_from = "MatrixDump")]
pub struct DensityMatrix {
    labels: Vec<QubitLabel>,
    data: Vec<C64>,
}

impl DensityMatrix {
    /// Validating constructor: Hermitian, unit trace, PSD up to round-off.
    pub fn new(labels: Vec<QubitLabel>, data: Vec<C64>) -> Result<Self> {
        check_unique(&labels)?;
        check_capacity(labels.len(), MAX_DENSITY_QUBITS, "density matrix qubits")?;
        let d = 1usize << labels.len();
        if data.len() != d * d {
            return Err(invalid(format!(
                "{} entries for a {d}×{d} density matrix",
                data.len()
            )));
        }
        let rho = Self { labels, data };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_parts(labels: Vec<QubitLabel>, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), 1 << (2 * labels.len()));
        Self { labels, data }
    }

    pub fn from_pure(state: &PureStateVector) -> Self {
        state.to_density()
    }

    pub fn maximally_mixed(labels: Vec<QubitLabel>) -> Result<Self> {
        check_unique(&labels)?;
        check_capacity(labels.len(), MAX_DENSITY_QUBITS, "density matrix qubits")?;
        let d = 1usize << labels.len();
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            data[i * d + i] = C64::new(1.0 / d as f64, 0.0);
        }
        Ok(Self { labels, data })
    }

    /// Wraps a nalgebra matrix; validated like [`DensityMatrix::new`].
    pub fn from_matrix(labels: Vec<QubitLabel>, m: &DMatrix<C64>) -> Result<Self> {
        let d = m.nrows();
        let mut data = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        Self::new(labels, data)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        for i in 0..d {
            for j in i..d {
                if (self.data[i * d + j] - self.data[j * d + i].conj()).norm() > HERMITIAN_TOL {
                    return Err(invalid(format!("not Hermitian at ({i},{j})")));
                }
            }
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(invalid(format!("trace is {tr}, expected 1")));
        }
        let min = metrics::hermitian_eigenvalues(&self.matrix())
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < EIGEN_FLOOR {
            return Err(invalid(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }

    pub fn labels(&self) -> &[QubitLabel] {
        &self.labels
    }

    /// Row-major entries.
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.labels.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> f64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i].re).sum()
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        let d = self.dim();
        DMatrix::from_row_slice(d, d, &self.data)
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

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        check_unique(&labels)?;
        check_capacity(labels.len(), MAX_DENSITY_QUBITS, "density matrix qubits")?;
        let data = kernel::kron(&self.data, self.dim(), &other.data, other.dim());
        Ok(Self { labels, data })
    }

    pub fn permuted(&self, order: &[QubitLabel]) -> Result<Self> {
        if order.len() != self.labels.len() {
            return Err(invalid("permutation must list every qubit exactly once"));
        }
        let perm = self.positions(order)?;
        let table = kernel::permutation_table(self.num_qubits(), &perm);
        let d = self.dim();
        let mut data = Vec::with_capacity(d * d);
        for &r in &table {
            for &c in &table {
                data.push(self.data[r * d + c]);
            }
        }
        Ok(Self {
            labels: order.to_vec(),
            data,
        })
    }

    pub fn canonicalize(&self) -> Self {
        let mut order = self.labels.clone();
        order.sort();
        self.permuted(&order).expect("sorted labels are a permutation")
    }

    /// Reduced state on `keep`, in the order given.
    pub fn partial_trace(&self, keep: &[QubitLabel]) -> Result<Self> {
        let kept = self.positions(keep)?;
        let mut order = keep.to_vec();
        order.extend(
            self.labels
                .iter()
                .enumerate()
                .filter(|(i, _)| !kept.contains(i))
                .map(|(_, &l)| l),
        );
        let src = self.permuted(&order)?;
        let dk = 1usize << keep.len();
        let dt = self.dim() / dk;
        let d = self.dim();
        let mut data = vec![C64::new(0.0, 0.0); dk * dk];
        for i in 0..dk {
            for j in 0..dk {
                data[i * dk + j] = (0..dt).map(|t| src.data[(i * dt + t) * d + j * dt + t]).sum();
            }
        }
        Ok(Self {
            labels: keep.to_vec(),
            data,
        })
    }

    /// `U ρ U†` on the listed qubits.
    pub fn apply_unitary(&mut self, targets: &[QubitLabel], matrix: &[C64]) -> Result<()> {
        let pos = self.positions(targets)?;
        let k = 1usize << pos.len();
        if matrix.len() != k * k {
            return Err(invalid("matrix size does not match target count"));
        }
        self.sandwich_in_place(&pos, matrix);
        Ok(())
    }

    fn sandwich_in_place(&mut self, pos: &[usize], matrix: &[C64]) {
        let nq = self.num_qubits();
        let cols: Vec<usize> = pos.iter().map(|p| p + nq).collect();
        let conj: Vec<C64> = matrix.iter().map(|a| a.conj()).collect();
        kernel::apply_local(&mut self.data, 2 * nq, pos, matrix);
        kernel::apply_local(&mut self.data, 2 * nq, &cols, &conj);
    }

    /// Applies a completely positive trace-preserving map on `targets`.
    pub fn apply_channel(&self, channel: &Channel, targets: &[QubitLabel]) -> Result<Self> {
        if channel.arity() != targets.len() {
            return Err(invalid(format!(
                "{}-qubit channel on {} targets",
                channel.arity(),
                targets.len()
            )));
        }
        let pos = self.positions(targets)?;
        let mut acc = vec![C64::new(0.0, 0.0); self.data.len()];
        for k in channel.kraus() {
            let mut term = self.clone();
            term.sandwich_in_place(&pos, k);
            acc.iter_mut().zip(&term.data).for_each(|(a, b)| *a += b);
        }
        Ok(Self {
            labels: self.labels.clone(),
            data: acc,
        })
    }

    fn pauli_left(&self, pos: &[usize], pauli: &PauliOperator) -> Vec<C64> {
        let d = self.dim();
        let (xm, zm, coef) = pauli_masks(pauli, pos, self.num_qubits());
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        for b in 0..d {
            let f = if (b & zm).count_ones() % 2 == 1 { -coef } else { coef };
            let (src, dst) = (b * d, (b ^ xm) * d);
            for c in 0..d {
                out[dst + c] = f * self.data[src + c];
            }
        }
        out
    }

    fn pauli_right(data: &[C64], d: usize, xm: usize, zm: usize, coef: C64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for a in 0..d {
                let f = if (a & zm).count_ones() % 2 == 1 { -coef } else { coef };
                out[r * d + a] = data[r * d + (a ^ xm)] * f;
            }
        }
        out
    }

    /// `P ρ P†` for a Pauli acting on `targets`.
    pub fn apply_pauli(&mut self, targets: &[QubitLabel], pauli: &PauliOperator) -> Result<()> {
        if pauli.num_qubits() != targets.len() {
            return Err(invalid("Pauli size does not match target count"));
        }
        let pos = self.positions(targets)?;
        let left = self.pauli_left(&pos, pauli);
        let (xm, zm, coef) = pauli_masks(pauli, &pos, self.num_qubits());
        // right-multiplying by P† = conj(coef) · (X^x Z^z)†; reuse the
        // right kernel with P† expressed through P's masks.
        let d = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                // (L P†)[r, c] = Σ_k L[r,k] conj(P[c,k]); P[c,k] ≠ 0 iff c = k ^ xm.
                let k = c ^ xm;
                let f = if (k & zm).count_ones() % 2 == 1 { -coef } else { coef };
                out[r * d + c] = left[r * d + k] * f.conj();
            }
        }
        self.data = out;
        Ok(())
    }

    /// `tr(P ρ)` for a Pauli on `targets`.
    pub fn pauli_expectation(&self, targets: &[QubitLabel], pauli: &PauliOperator) -> Result<C64> {
        if pauli.num_qubits() != targets.len() {
            return Err(invalid("Pauli size does not match target count"));
        }
        let pos = self.positions(targets)?;
        let (xm, zm, coef) = pauli_masks(pauli, &pos, self.num_qubits());
        let d = self.dim();
        Ok((0..d)
            .map(|b| {
                let f = if (b & zm).count_ones() % 2 == 1 { -coef } else { coef };
                f * self.data[b * d + (b ^ xm)]
            })
            .sum())
    }

    /// `M ρ M†` with `M` taking `targets` to `new_labels` (appended last).
    /// Returns the renormalized state and the trace before renormalization.
    pub fn map_qubits(
        &self,
        targets: &[QubitLabel],
        m: &[C64],
        new_labels: &[QubitLabel],
    ) -> Result<(Self, f64)> {
        let (kin, lout) = (1usize << targets.len(), 1usize << new_labels.len());
        if m.len() != kin * lout {
            return Err(invalid("map shape does not match target/new label counts"));
        }
        let pos = self.positions(targets)?;
        let rest: Vec<QubitLabel> = self
            .labels
            .iter()
            .enumerate()
            .filter(|(i, _)| !pos.contains(i))
            .map(|(_, &l)| l)
            .collect();
        let mut labels = rest.clone();
        labels.extend_from_slice(new_labels);
        check_unique(&labels)?;
        check_capacity(labels.len(), MAX_DENSITY_QUBITS, "density matrix qubits")?;
        let mut order = rest.clone();
        order.extend_from_slice(targets);
        let src = self.permuted(&order)?;
        let nr = 1usize << rest.len();
        let (din, dout) = (nr * kin, nr * lout);
        // A = (I ⊗ M) ρ : dout × din
        let mut a = vec![C64::new(0.0, 0.0); dout * din];
        for r in 0..nr {
            for o in 0..lout {
                let row = &m[o * kin..(o + 1) * kin];
                for c in 0..din {
                    a[(r * lout + o) * din + c] = row
                        .iter()
                        .enumerate()
                        .map(|(i, mi)| mi * src.data[(r * kin + i) * din + c])
                        .sum();
                }
            }
        }
        // ρ' = A (I ⊗ M†) : dout × dout
        let mut data = vec![C64::new(0.0, 0.0); dout * dout];
        for row in 0..dout {
            for r in 0..nr {
                for o in 0..lout {
                    let mrow = &m[o * kin..(o + 1) * kin];
                    data[row * dout + r * lout + o] = mrow
                        .iter()
                        .enumerate()
                        .map(|(i, mi)| a[row * din + r * kin + i] * mi.conj())
                        .sum();
                }
            }
        }
        let tr: f64 = (0..dout).map(|i| data[i * dout + i].re).sum();
        if tr <= 0.0 {
            return Err(Error::State("linear map annihilated the state".into()));
        }
        data.iter_mut().for_each(|x| *x /= tr);
        Ok((Self { labels, data }, tr))
    }

    pub fn outcome_probability(
        &self,
        label: QubitLabel,
        basis: MeasurementBasis,
        outcome: u8,
    ) -> Result<f64> {
        let (_, block) = self.branch(label, basis, outcome)?;
        let h = self.dim() / 2;
        Ok((0..h).map(|i| block[i * h + i].re).sum())
    }

    /// Unnormalized post-measurement block with the measured qubit removed.
    fn branch(
        &self,
        label: QubitLabel,
        basis: MeasurementBasis,
        outcome: u8,
    ) -> Result<(usize, Vec<C64>)> {
        let pos = self.position(label)?;
        let bit = bit_of(pos, self.num_qubits());
        let e = basis.eigenvector(outcome);
        let d = self.dim();
        let h = d / 2;
        let mut out = vec![C64::new(0.0, 0.0); h * h];
        for r in 0..h {
            for c in 0..h {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..2 {
                    for b in 0..2 {
                        acc += e[a].conj()
                            * e[b]
                            * self.data[insert_bit(r, bit, a) * d + insert_bit(c, bit, b)];
                    }
                }
                out[r * h + c] = acc;
            }
        }
        Ok((pos, out))
    }

    /// Probability of `outcome` and the normalized post-measurement state
    /// with the qubit removed. A zero-probability branch is an error.
    pub fn measure_branch(
        &self,
        label: QubitLabel,
        basis: MeasurementBasis,
        outcome: u8,
    ) -> Result<(f64, Self)> {
        let (pos, mut data) = self.branch(label, basis, outcome)?;
        let h = self.dim() / 2;
        let tr: f64 = (0..h).map(|i| data[i * h + i].re).sum();
        if tr <= 0.0 {
            return Err(Error::State("measurement branch has zero probability".into()));
        }
        data.iter_mut().for_each(|x| *x /= tr);
        let mut labels = self.labels.clone();
        labels.remove(pos);
        Ok((tr, Self { labels, data }))
    }

    /// Measures one qubit, removing it from the register.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        label: QubitLabel,
        basis: MeasurementBasis,
        rng: &mut R,
    ) -> Result<(u8, Self)> {
        let p0 = self.outcome_probability(label, basis, 0)?.clamp(0.0, 1.0);
        let outcome = u8::from(rng.random::<f64>() >= p0);
        let (_, post) = self.measure_branch(label, basis, outcome)?;
        Ok((outcome, post))
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
        let pos = self.position(label)?;
        self.sandwich_in_place(&[pos], &basis.projector(outcome));
        self.renormalize();
        Ok(outcome)
    }

    /// Projective measurement of a Hermitian Pauli observable; 0 ↔ +1.
    pub fn measure_pauli<R: Rng + ?Sized>(
        &mut self,
        targets: &[QubitLabel],
        pauli: &PauliOperator,
        rng: &mut R,
    ) -> Result<u8> {
        if !pauli.is_hermitian() {
            return Err(invalid("observable must be a Hermitian Pauli"));
        }
        let expect = self.pauli_expectation(targets, pauli)?.re;
        let p0 = ((1.0 + expect) / 2.0).clamp(0.0, 1.0);
        let outcome = u8::from(rng.random::<f64>() >= p0);
        let pos = self.positions(targets)?;
        let (xm, zm, coef) = pauli_masks(pauli, &pos, self.num_qubits());
        let d = self.dim();
        let left = self.pauli_left(&pos, pauli);
        let right = Self::pauli_right(&self.data, d, xm, zm, coef);
        let both = Self::pauli_right(&left, d, xm, zm, coef);
        let s = if outcome == 0 { 1.0 } else { -1.0 };
        for i in 0..d * d {
            self.data[i] = (self.data[i] + (left[i] + right[i]) * s + both[i]) * 0.25;
        }
        self.renormalize();
        Ok(outcome)
    }

    fn renormalize(&mut self) {
        let tr = self.trace();
        self.data.iter_mut().for_each(|x| *x /= tr);
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixDump {
    labels: Vec<QubitLabel>,
    /// Row-major entries as interleaved (re, im) pairs.
    matrix: Vec<f64>,
}

impl From<DensityMatrix> for MatrixDump {
    fn from(m: DensityMatrix) -> Self {
        Self {
            labels: m.labels,
            matrix: m.data.iter().flat_map(|a| [a.re, a.im]).collect(),
        }
    }
}

impl TryFrom<MatrixDump> for DensityMatrix {
    type Error = Error;

    fn try_from(d: MatrixDump) -> Result<Self> {
        if d.matrix.len() % 2 != 0 {
            return Err(invalid("odd number of matrix components"));
        }
        let data = d.matrix.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        Self::new(d.labels, data)
    }
}
