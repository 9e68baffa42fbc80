use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qstate::C64;

/// `i^k` for `k` mod 4.
pub fn i_pow(k: u32) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Pauli string `i^phase · σ_0 ⊗ … ⊗ σ_{n−1}` with σ ∈ {I, X, Y, Z}.
///
/// Qubit `j` is bit `j` of the `x`/`z` masks; `(x, z) = (1, 1)` is `Y`,
/// related to the bare product by `Y = iXZ`. Up to 64 qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct PauliOperator {
    n: u8,
    x: u64,
    z: u64,
    phase: u8,
}

pub const MAX_PAULI_QUBITS: usize = 64;

fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliOperator {
    pub fn new(n: usize, x: u64, z: u64, phase: u8) -> Result<Self> {
        if n > MAX_PAULI_QUBITS {
            return Err(Error::Capacity {
                what: "Pauli qubits",
                requested: n,
                limit: MAX_PAULI_QUBITS,
            });
        }
        if (x | z) & !mask(n) != 0 {
            return Err(invalid(format!("Pauli bit masks exceed {n} qubits")));
        }
        Ok(Self {
            n: n as u8,
            x,
            z,
            phase: phase % 4,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, 0, 0, 0).expect("identity within capacity")
    }

    /// Single-qubit `op` ∈ {'I','X','Y','Z'} on qubit `j` of `n`.
    pub fn single(n: usize, j: usize, op: char) -> Result<Self> {
        if j >= n {
            return Err(invalid(format!("qubit {j} out of range {n}")));
        }
        let (x, z) = match op {
            'I' => (0, 0),
            'X' => (1, 0),
            'Y' => (1, 1),
            'Z' => (0, 1),
            _ => return Err(invalid(format!("unknown Pauli `{op}`"))),
        };
        Self::new(n, x << j, z << j, 0)
    }

    pub fn from_bits(x: &[bool], z: &[bool], phase: u8) -> Result<Self> {
        if x.len() != z.len() {
            return Err(invalid("x and z bit vectors differ in length"));
        }
        let pack = |v: &[bool]| {
            v.iter()
                .enumerate()
                .fold(0u64, |acc, (j, &b)| acc | (u64::from(b) << j))
        };
        Self::new(x.len(), pack(x), pack(z), phase)
    }

    pub fn num_qubits(&self) -> usize {
        self.n as usize
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn x_bit(&self, j: usize) -> bool {
        (self.x >> j) & 1 == 1
    }

    pub fn z_bit(&self, j: usize) -> bool {
        (self.z >> j) & 1 == 1
    }

    /// Exponent `k` of the global factor `i^k`.
    pub fn phase_exponent(&self) -> u8 {
        self.phase
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Ignores the phase.
    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    /// Hermitian conjugate.
    pub fn adjoint(self) -> Self {
        self.with_phase((4 - self.phase) % 4)
    }

    /// Same operator with the phase dropped (canonical `+` representative).
    pub fn unsigned(self) -> Self {
        self.with_phase(0)
    }

    pub fn op_at(&self, j: usize) -> char {
        match (self.x_bit(j), self.z_bit(j)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }

    fn check_same_size(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(invalid(format!(
                "Pauli size mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        Ok(())
    }

    /// Symplectic inner product: 0 if the operators commute, 1 otherwise.
    pub fn symplectic(&self, other: &Self) -> Result<u8> {
        self.check_same_size(other)?;
        Ok(((self.x & other.z) ^ (self.z & other.x)).count_ones() as u8 & 1)
    }

    pub fn commutes_with(&self, other: &Self) -> Result<bool> {
        Ok(self.symplectic(other)? == 0)
    }

    /// Group product `self · other` with exact phase tracking.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_size(other)?;
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let exp = u32::from(self.phase)
            + u32::from(other.phase)
            + (self.x & self.z).count_ones()
            + (other.x & other.z).count_ones()
            + 2 * (self.z & other.x).count_ones()
            + 3 * (x & z).count_ones();
        Ok(Self {
            n: self.n,
            x,
            z,
            phase: (exp % 4) as u8,
        })
    }

    /// Dense matrix, row-major, qubit 0 as the most significant index bit.
    pub fn to_matrix(&self) -> Vec<C64> {
        let n = self.num_qubits();
        let d = 1usize << n;
        let positions: Vec<usize> = (0..n).collect();
        let (xm, zm, coef) = crate::qstate::pauli_masks(self, &positions, n);
        let mut m = vec![C64::new(0.0, 0.0); d * d];
        for b in 0..d {
            let sign = if (b & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m[(b ^ xm) * d + b] = coef * sign;
        }
        m
    }

    /// Compact symplectic vector `x | z << n` (phase dropped). Needs n ≤ 64.
    pub fn to_sym(&self) -> u128 {
        u128::from(self.x) | (u128::from(self.z) << self.n)
    }

    pub fn from_sym(n: usize, v: u128) -> Self {
        let m = u128::from(mask(n));
        Self {
            n: n as u8,
            x: (v & m) as u64,
            z: ((v >> n) & m) as u64,
            phase: 0,
        }
    }
}

/// Free-function form of [`PauliOperator::mul`].
pub fn pauli_mul(a: &PauliOperator, b: &PauliOperator) -> Result<PauliOperator> {
    a.mul(b)
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{sign}")?;
        for j in 0..self.num_qubits() {
            write!(f, "{}", self.op_at(j))?;
        }
        Ok(())
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Parses strings such as `XIZ`, `-YY`, `+iZ`, `-iXX`. Qubit 0 is the
    /// first letter.
    fn from_str(s: &str) -> Result<Self> {
        let (phase, body) = if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (1, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else {
            (0, s)
        };
        if body.is_empty() {
            return Err(invalid("empty Pauli string"));
        }
        let n = body.chars().count();
        let mut p = Self::identity(n.min(MAX_PAULI_QUBITS));
        if n > MAX_PAULI_QUBITS {
            return Err(Error::Capacity {
                what: "Pauli qubits",
                requested: n,
                limit: MAX_PAULI_QUBITS,
            });
        }
        for (j, c) in body.chars().enumerate() {
            let single = Self::single(n, j, c)?;
            p.x |= single.x;
            p.z |= single.z;
        }
        p.phase = phase;
        Ok(p)
    }
}

impl From<PauliOperator> for String {
    fn from(p: PauliOperator) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for PauliOperator {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::kernel::matmul;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products() {
        assert_eq!(p("X").mul(&p("X")).unwrap(), p("I"));
        assert_eq!(p("X").mul(&p("Z")).unwrap(), p("-iY"));
        assert_eq!(p("Z").mul(&p("X")).unwrap(), p("+iY"));
        assert_eq!(p("X").mul(&p("Y")).unwrap(), p("iZ"));
        assert_eq!(p("Y").mul(&p("Z")).unwrap(), p("iX"));
    }

    #[test]
    fn two_qubit_product_phase() {
        // (X⊗Z)(Z⊗Z) = (XZ)⊗I = −iY⊗I
        assert_eq!(p("XZ").mul(&p("ZZ")).unwrap(), p("-iYI"));
    }

    #[test]
    fn y_is_i_x_z() {
        let x = p("X").to_matrix();
        let z = p("Z").to_matrix();
        let y = p("Y").to_matrix();
        let xz = matmul(&x, &z, 2);
        for k in 0..4 {
            assert!((y[k] - C64::new(0.0, 1.0) * xz[k]).norm() < 1e-15);
        }
    }

    #[test]
    fn size_mismatch_is_error() {
        assert!(p("XX").mul(&p("X")).is_err());
        assert!(p("XX").symplectic(&p("X")).is_err());
    }

    #[test]
    fn parse_display_roundtrip() {
        for s in ["+XIZY", "-ZZ", "+iX", "-iYIY"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert!("XQ".parse::<PauliOperator>().is_err());
        assert!("".parse::<PauliOperator>().is_err());
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
        let m = mask(n);
        (any::<u64>(), any::<u64>(), 0u8..4)
            .prop_map(move |(x, z, ph)| PauliOperator::new(n, x & m, z & m, ph).unwrap())
    }

    proptest! {
        #[test]
        fn product_matches_matrix_product(a in arb_pauli(3), b in arb_pauli(3)) {
            let ab = a.mul(&b).unwrap().to_matrix();
            let dense = matmul(&a.to_matrix(), &b.to_matrix(), 8);
            for (u, v) in ab.iter().zip(&dense) {
                prop_assert!((u - v).norm() < 1e-12);
            }
        }

        #[test]
        fn associativity(a in arb_pauli(4), b in arb_pauli(4), c in arb_pauli(4)) {
            let l = a.mul(&b).unwrap().mul(&c).unwrap();
            let r = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(l, r);
        }

        #[test]
        fn commutation_matches_symplectic(a in arb_pauli(3), b in arb_pauli(3)) {
            let ab = a.mul(&b).unwrap();
            let ba = b.mul(&a).unwrap();
            let commute = ab == ba;
            prop_assert_eq!(commute, a.commutes_with(&b).unwrap());
        }

        #[test]
        fn sym_roundtrip(a in arb_pauli(5)) {
            prop_assert_eq!(PauliOperator::from_sym(5, a.to_sym()), a.unsigned());
        }
    }
}
