use serde::{Deserialize, Serialize};

use super::C64;

/// Single-qubit measurement axis.
///
/// Outcome bit 0 is the +1 eigenvalue and bit 1 the −1 eigenvalue for
/// every axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasurementBasis {
    X,
    Y,
    Z,
}

impl MeasurementBasis {
    /// Eigenvector for the given outcome bit, as (⟨0|v⟩, ⟨1|v⟩).
    pub fn eigenvector(self, outcome: u8) -> [C64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let sign = if outcome == 0 { 1.0 } else { -1.0 };
        match self {
            MeasurementBasis::Z => {
                if outcome == 0 {
                    [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
                } else {
                    [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
                }
            }
            MeasurementBasis::X => [C64::new(h, 0.0), C64::new(sign * h, 0.0)],
            MeasurementBasis::Y => [C64::new(h, 0.0), C64::new(0.0, sign * h)],
        }
    }

    /// Rank-one projector onto the eigenvector of `outcome`, row-major 2×2.
    pub fn projector(self, outcome: u8) -> [C64; 4] {
        let v = self.eigenvector(outcome);
        [
            v[0] * v[0].conj(),
            v[0] * v[1].conj(),
            v[1] * v[0].conj(),
            v[1] * v[1].conj(),
        ]
    }

    pub fn symbol(self) -> char {
        match self {
            MeasurementBasis::X => 'X',
            MeasurementBasis::Y => 'Y',
            MeasurementBasis::Z => 'Z',
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvectors_are_eigen() {
        // Pauli matrices, row-major.
        let o = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let mats = [
            (MeasurementBasis::X, [o, one, one, o]),
            (MeasurementBasis::Y, [o, -i, i, o]),
            (MeasurementBasis::Z, [one, o, o, -one]),
        ];
        for (b, m) in mats {
            for bit in 0..2u8 {
                let v = b.eigenvector(bit);
                let lam = if bit == 0 { 1.0 } else { -1.0 };
                let mv = [m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]];
                for k in 0..2 {
                    assert!((mv[k] - v[k] * lam).norm() < 1e-15, "{b:?} bit {bit}");
                }
            }
        }
    }
}
