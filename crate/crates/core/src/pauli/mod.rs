//! Pauli algebra, stabilizer codes and keyed purity-testing families.

mod code;
mod family;
pub mod gf2;
pub mod gf2m;
mod operator;

pub use code::{ancilla_labels, ErrorDecomposition, StabilizerCode, ANCILLA_SLOT_BASE, MAX_CODE_QUBITS};
pub use family::{
    audit_family, audit_family_with, epsilon_formula, gen_purity_family, gen_purity_family_with,
    AuditMode, AuditReport, FamilyOptions, PurityFamily, MAX_EXHAUSTIVE_AUDIT_QUBITS,
};
pub use operator::{i_pow, pauli_mul, PauliOperator, MAX_PAULI_QUBITS};
