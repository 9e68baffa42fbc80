use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::pauli::{epsilon_formula, MAX_EXHAUSTIVE_AUDIT_QUBITS};
use crate::qstate::MAX_STATE_QUBITS;

/// Protocol variant: 1 (memoryless center) or 2 (center keeps one qubit of
/// every copy until the directions are announced). Serialized as `1`/`2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Protocol {
    Memoryless,
    WithMemory,
}

impl From<Protocol> for u8 {
    fn from(p: Protocol) -> u8 {
        match p {
            Protocol::Memoryless => 1,
            Protocol::WithMemory => 2,
        }
    }
}

impl TryFrom<u8> for Protocol {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Protocol::Memoryless),
            2 => Ok(Protocol::WithMemory),
            _ => Err(invalid(format!("protocol must be 1 or 2, got {v}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Members across both parties; party A is members `0..m`, B is `m..n`.
    pub n: usize,
    pub m: usize,
    /// Cat-state copies per round (qubits each member receives).
    pub t: usize,
    pub rounds: usize,
    pub test_fraction: f64,
    pub protocol: Protocol,
    pub auth_enabled: bool,
    /// `(r, s)` of the purity-testing family; each authentication block
    /// carries the family's `(r−1)s` qubits.
    pub family_params: (usize, usize),
    /// Key count override; `None` lets generation choose.
    #[serde(default)]
    pub family_keys: Option<usize>,
    /// One family for every member instead of one per member.
    #[serde(default)]
    pub shared_family: bool,
    /// Ring position of each party's collector, relative to the party.
    #[serde(default)]
    pub collector_a: usize,
    #[serde(default)]
    pub collector_b: usize,
    /// Fault injection: the center never announces its outcomes.
    #[serde(default)]
    pub center_withholds: bool,
}

impl NetworkConfig {
    pub fn new(protocol: Protocol, n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            t: 2,
            rounds: 100,
            test_fraction: 0.25,
            protocol,
            auth_enabled: true,
            family_params: (2, 2),
            family_keys: None,
            shared_family: false,
            collector_a: 0,
            collector_b: 0,
            center_withholds: false,
        }
    }

    pub fn family_t(&self) -> usize {
        (self.family_params.0 - 1) * self.family_params.1
    }

    pub fn family_u(&self) -> usize {
        self.family_params.0 * self.family_params.1
    }

    /// Qubits per copy held jointly: members plus the center's in protocol 2.
    pub fn parties_per_copy(&self) -> usize {
        match self.protocol {
            Protocol::Memoryless => self.n,
            Protocol::WithMemory => self.n + 1,
        }
    }

    /// Largest joint register the simulation holds at once.
    pub fn peak_qubits(&self) -> usize {
        let base = self.parties_per_copy() * self.t;
        if self.auth_enabled {
            base + self.family_u() - self.family_t()
        } else {
            base
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 || self.m >= self.n {
            return Err(invalid(format!("need 1 ≤ m < n, got m={}, n={}", self.m, self.n)));
        }
        if self.n > usize::from(u16::MAX) {
            return Err(invalid("too many members"));
        }
        if self.t < 1 || self.rounds < 1 {
            return Err(invalid("t and rounds must be at least 1"));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(invalid(format!(
                "test_fraction must lie in (0,1), got {}",
                self.test_fraction
            )));
        }
        if self.collector_a >= self.m || self.collector_b >= self.n - self.m {
            return Err(invalid("collector position outside its party"));
        }
        if self.center_withholds && self.protocol == Protocol::Memoryless {
            return Err(invalid("center fault injection needs protocol 2"));
        }
        if self.auth_enabled {
            let (r, s) = self.family_params;
            if r < 2 || s < 2 {
                return Err(invalid("family parameters must be ≥ 2"));
            }
            if r * s > MAX_EXHAUSTIVE_AUDIT_QUBITS {
                return Err(Error::Capacity {
                    what: "audited family code qubits",
                    requested: r * s,
                    limit: MAX_EXHAUSTIVE_AUDIT_QUBITS,
                });
            }
            if self.t % self.family_t() != 0 {
                return Err(invalid(format!(
                    "t = {} is not a multiple of the authentication block size {}",
                    self.t,
                    self.family_t()
                )));
            }
            debug_assert!(epsilon_formula(r, s) > 0.0);
        }
        if self.peak_qubits() > MAX_STATE_QUBITS {
            return Err(Error::Capacity {
                what: "joint register qubits",
                requested: self.peak_qubits(),
                limit: MAX_STATE_QUBITS,
            });
        }
        Ok(())
    }

    pub fn party_a(&self) -> std::ops::Range<usize> {
        0..self.m
    }

    pub fn party_b(&self) -> std::ops::Range<usize> {
        self.m..self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let mut c = NetworkConfig::new(Protocol::Memoryless, 2, 1);
        c.validate().unwrap();
        c.m = 2;
        assert!(c.validate().is_err());
        c.m = 0;
        assert!(c.validate().is_err());
        let mut c = NetworkConfig::new(Protocol::Memoryless, 2, 1);
        c.test_fraction = 1.0;
        assert!(c.validate().is_err());
        let mut c = NetworkConfig::new(Protocol::Memoryless, 2, 1);
        c.t = 3;
        assert!(c.validate().is_err());
        c.auth_enabled = false;
        c.validate().unwrap();
        let mut c = NetworkConfig::new(Protocol::WithMemory, 6, 3);
        c.t = 2;
        assert!(matches!(c.validate(), Err(Error::Capacity { .. })));
    }

    #[test]
    fn protocol_serializes_as_number() {
        assert_eq!(serde_json::to_string(&Protocol::WithMemory).unwrap(), "2");
        assert!(serde_json::from_str::<Protocol>("3").is_err());
    }
}
