//! Protocol orchestration for the memoryless center (protocol 1) and the
//! center with memory (protocol 2).

mod config;
mod finalize;
mod keybits;
mod oracle;
mod run;
mod transcript;

pub use config::{NetworkConfig, Protocol};
pub use finalize::{test_and_finalize, test_count, Finalized, TestVerdict};
pub use keybits::{
    center_basis, derive_key_bits, keeps, parity, predicted_relation, reconciliation_flip,
    ring_collect, ring_collect_with, sift, table_i_row, table_ii_row, y_bar, y_count, Parity,
    TABLE_I, TABLE_II,
};
pub use oracle::{check_table_i, check_table_ii, TableCheck};
pub use run::{
    prepare_families, run_protocol, run_protocol1, run_protocol2,
    run_protocol_with_families,
};
pub use transcript::{
    AbortCause, AbortEvent, CopyStatus, RoundRecord, RunVerdict, Summary, TestBit, Transcript,
};
