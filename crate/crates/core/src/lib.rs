//! Dense simulation and verification toolkit for quantum key distribution
//! networks in which a trusted center distributes multiparty cat states to
//! two parties of users.
//!
//! The crate is organised bottom-up:
//!
//! * [`qstate`] – labelled pure states and density matrices, measurements,
//!   channels, and the fidelity / trace-distance / Bures metrics.
//! * [`pauli`] – symplectic Pauli algebra, stabilizer codes with coset
//!   encoding, and generation plus exact audit of keyed purity-testing
//!   families.
//! * [`auth`] – the authenticated transmission pipeline (one-time pad,
//!   coset encoding, syndrome verification).
//! * [`adversary`] – channel attacks and dishonest classical behaviour.
//! * [`netproto`] – the memoryless-center and memory-center protocols.
//! * [`analysis`] – executable checks of the fidelity inequalities and
//!   protocol statistics.

pub mod adversary;
pub mod analysis;
pub mod auth;
mod error;
pub mod netproto;
pub mod pauli;
pub mod qstate;

pub use error::{Error, Result};

/// Deterministic random source used throughout the crate.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Builds the crate's random source from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}

/// Seed for an independent stream tagged `tag` (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
