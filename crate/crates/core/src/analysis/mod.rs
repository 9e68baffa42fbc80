//! Executable checks of the fidelity inequalities behind the security
//! argument, and summary statistics of protocol transcripts.
//!
//! Fidelity is `F(X,Y) = (tr √(√X Y √X))²` throughout.

mod bounds;
mod channels;
mod report;
mod stats;

pub use bounds::{
    check_bures_triangle, check_double_concavity, check_fuchs_van_de_graaf, ConcavityMargin,
    FvdgMargins, TriangleMargins,
};
pub use channels::{
    check_composed_channel_bound, check_entanglement_fidelity_bound, entanglement_fidelity,
    random_pauli_channel, worst_case_infidelity, ComposedOptions, EpsilonEstimate, EpsilonOptions,
    PurificationOptions,
};
pub use report::{reports_to_csv, InequalityReport, TrialRow, DEFAULT_TOLERANCE};
pub use stats::{aggregate_statistics, protocol_statistics, wilson_interval, AggregateStats, ProtocolStats};

mod suite;
pub use suite::{verify_all, SuiteOptions};
