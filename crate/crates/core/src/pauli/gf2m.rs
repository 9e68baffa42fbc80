//! Arithmetic in GF(2^s) and the embedding of GF(2^s)-linear isotropic
//! lines as `s`-generator stabilizer groups.

use crate::error::{invalid, Result};

/// Largest supported extension degree.
pub const MAX_DEGREE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Field {
    s: usize,
    /// Reduction polynomial including the `x^s` term.
    poly: u32,
}

/// Carry-less remainder of `a` modulo `m` over GF(2)[x].
fn poly_rem(mut a: u32, m: u32) -> u32 {
    let dm = 31 - m.leading_zeros();
    while a != 0 && 31 - a.leading_zeros() >= dm {
        a ^= m << (31 - a.leading_zeros() - dm);
    }
    a
}

fn irreducible(p: u32) -> bool {
    let d = 31 - p.leading_zeros();
    (2u32..1 << (d / 2 + 1)).all(|q| poly_rem(p, q) != 0)
}

impl Field {
    /// GF(2^s) reduced by the smallest irreducible polynomial of degree `s`.
    pub fn new(s: usize) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&s) {
            return Err(invalid(format!("field degree {s} outside 1..={MAX_DEGREE}")));
        }
        let poly = (1u32 << s..1 << (s + 1))
            .find(|&p| irreducible(p))
            .expect("irreducible polynomials exist in every degree");
        Ok(Self { s, poly })
    }

    pub fn degree(&self) -> usize {
        self.s
    }

    pub fn order(&self) -> u32 {
        1 << self.s
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let mut acc = 0u32;
        let mut a = a;
        let mut b = b;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & (1 << self.s) != 0 {
                a ^= self.poly;
            }
        }
        acc
    }

    /// Absolute trace to GF(2).
    pub fn trace(&self, a: u32) -> u32 {
        let mut t = 0;
        let mut y = a;
        for _ in 0..self.s {
            t ^= y;
            y = self.mul(y, y);
        }
        debug_assert!(t <= 1);
        t
    }

    /// Compact symplectic vector of `v = (a_1..a_r | b_1..b_r)` on `r·s`
    /// qubits; qubit `i·s + j` carries bit `j` of `a_i` as its x part and
    /// `Tr(b_i α^j)` as its z part, so the binary symplectic form equals
    /// the trace of `Σ a_i b'_i + b_i a'_i`.
    pub fn embed(&self, v: &[u32]) -> u128 {
        let r = v.len() / 2;
        let u = r * self.s;
        let mut out = 0u128;
        for i in 0..r {
            for j in 0..self.s {
                let q = i * self.s + j;
                out |= u128::from((v[i] >> j) & 1) << q;
                out |= u128::from(self.trace(self.mul(v[r + i], 1 << j))) << (u + q);
            }
        }
        out
    }

    /// Binary basis `{α^j v}` of the GF(2^s)-line through `v`.
    pub fn line_basis(&self, v: &[u32]) -> Vec<u128> {
        (0..self.s)
            .map(|j| {
                let w: Vec<u32> = v.iter().map(|&c| self.mul(c, 1 << j)).collect();
                self.embed(&w)
            })
            .collect()
    }
}
