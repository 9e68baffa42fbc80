//! Dense simulation of small labelled multi-qubit systems.

mod basis;
mod cat;
mod channel;
mod density;
pub(crate) mod kernel;
mod label;
pub mod metrics;
mod pure;
pub mod random;

pub use basis::MeasurementBasis;
pub use cat::{make_cat, split_cat, CatKind};
pub use channel::Channel;
pub use density::DensityMatrix;
pub use label::{Owner, QubitLabel};
pub use metrics::{bures_distance, fidelity, trace_distance};
pub use pure::PureStateVector;

pub type C64 = num_complex::Complex64;

/// Largest joint register held as a state vector.
pub const MAX_STATE_QUBITS: usize = 14;
/// Largest register held as a density matrix (4^12 entries).
pub const MAX_DENSITY_QUBITS: usize = 12;

/// Index masks and scalar for a Pauli whose qubit `j` sits at register
/// position `positions[j]`: `P|b⟩ = coef · (−1)^{|b ∧ z|} |b ⊕ x⟩`.
pub(crate) fn pauli_masks(
    p: &crate::pauli::PauliOperator,
    positions: &[usize],
    nq: usize,
) -> (usize, usize, C64) {
    let (mut xm, mut zm) = (0usize, 0usize);
    for (j, &pos) in positions.iter().enumerate() {
        let bit = kernel::bit_of(pos, nq);
        if p.x_bit(j) {
            xm |= 1 << bit;
        }
        if p.z_bit(j) {
            zm |= 1 << bit;
        }
    }
    // σ(1,1) = Y = i·XZ, so each Y contributes a factor i.
    let exp = (p.phase_exponent() as u32 + p.y_count()) % 4;
    (xm, zm, crate::pauli::i_pow(exp))
}

/// Advances a pure-state trajectory through `channel`: Kraus operator `K`
/// is chosen with probability `‖Kψ‖²` and the state renormalized. Returns
/// the index of the chosen operator.
pub fn sample_kraus<R: rand::Rng + ?Sized>(
    state: &mut PureStateVector,
    channel: &Channel,
    targets: &[QubitLabel],
    rng: &mut R,
) -> crate::Result<usize> {
    if channel.arity() != targets.len() {
        return Err(crate::error::invalid("channel arity does not match targets"));
    }
    let mut branches = Vec::with_capacity(channel.kraus().len());
    for k in channel.kraus() {
        let mut b = state.clone();
        b.apply_unitary(targets, k)?;
        let p = b.norm_sqr();
        branches.push((b, p));
    }
    let total: f64 = branches.iter().map(|(_, p)| p).sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut chosen = None;
    for (i, (_, p)) in branches.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        chosen = Some(i);
        acc += p;
        if u < acc {
            break;
        }
    }
    let i = chosen.ok_or_else(|| crate::Error::State("every Kraus branch vanished".into()))?;
    let (b, p) = branches.swap_remove(i);
    let s = p.sqrt();
    let amps = b.amplitudes().iter().map(|a| a / s).collect();
    *state = PureStateVector::from_parts(state.labels().to_vec(), amps);
    Ok(i)
}

/// Operations shared by [`PureStateVector`] and [`DensityMatrix`], letting
/// higher layers run one code path on either representation.
pub trait Register: Clone + Sized {
    fn labels(&self) -> &[QubitLabel];

    fn apply_pauli(&mut self, targets: &[QubitLabel], pauli: &crate::pauli::PauliOperator)
        -> crate::Result<()>;

    fn apply_unitary(&mut self, targets: &[QubitLabel], matrix: &[C64]) -> crate::Result<()>;

    fn measure_pauli<R: rand::Rng + ?Sized>(
        &mut self,
        targets: &[QubitLabel],
        pauli: &crate::pauli::PauliOperator,
        rng: &mut R,
    ) -> crate::Result<u8>;

    fn measure<R: rand::Rng + ?Sized>(
        &self,
        label: QubitLabel,
        basis: MeasurementBasis,
        rng: &mut R,
    ) -> crate::Result<(u8, Self)>;

    fn map_qubits(
        &self,
        targets: &[QubitLabel],
        m: &[C64],
        new_labels: &[QubitLabel],
    ) -> crate::Result<(Self, f64)>;

    fn tensor(&self, other: &Self) -> crate::Result<Self>;

    fn to_density(&self) -> DensityMatrix;
}

macro_rules! forward_register {
    ($t:ty, $to_density:expr) => {
        impl Register for $t {
            fn labels(&self) -> &[QubitLabel] {
                <$t>::labels(self)
            }
            fn apply_pauli(
                &mut self,
                targets: &[QubitLabel],
                pauli: &crate::pauli::PauliOperator,
            ) -> crate::Result<()> {
                <$t>::apply_pauli(self, targets, pauli)
            }
            fn apply_unitary(&mut self, targets: &[QubitLabel], matrix: &[C64]) -> crate::Result<()> {
                <$t>::apply_unitary(self, targets, matrix)
            }
            fn measure_pauli<R: rand::Rng + ?Sized>(
                &mut self,
                targets: &[QubitLabel],
                pauli: &crate::pauli::PauliOperator,
                rng: &mut R,
            ) -> crate::Result<u8> {
                <$t>::measure_pauli(self, targets, pauli, rng)
            }
            fn measure<R: rand::Rng + ?Sized>(
                &self,
                label: QubitLabel,
                basis: MeasurementBasis,
                rng: &mut R,
            ) -> crate::Result<(u8, Self)> {
                <$t>::measure(self, label, basis, rng)
            }
            fn map_qubits(
                &self,
                targets: &[QubitLabel],
                m: &[C64],
                new_labels: &[QubitLabel],
            ) -> crate::Result<(Self, f64)> {
                <$t>::map_qubits(self, targets, m, new_labels)
            }
            fn tensor(&self, other: &Self) -> crate::Result<Self> {
                <$t>::tensor(self, other)
            }
            fn to_density(&self) -> DensityMatrix {
                let f: fn(&$t) -> DensityMatrix = $to_density;
                f(self)
            }
        }
    };
}

forward_register!(PureStateVector, |s| s.to_density());
forward_register!(DensityMatrix, |d| d.clone());
