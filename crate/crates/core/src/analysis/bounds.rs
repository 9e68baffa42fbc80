use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::qstate::metrics::{fidelity_matrices, trace_distance_matrices};
use crate::qstate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FvdgMargins {
    pub fidelity: f64,
    pub distance: f64,
    /// `D − (1 − √F)`.
    pub lower_margin: f64,
    /// `√(1 − F) − D`; zero for pure pairs.
    pub upper_margin: f64,
}

/// `1 − √F ≤ D ≤ √(1 − F)`.
pub fn check_fuchs_van_de_graaf(x: &DMatrix<C64>, y: &DMatrix<C64>) -> Result<FvdgMargins> {
    let f = fidelity_matrices(x, y)?;
    let d = trace_distance_matrices(x, y)?;
    Ok(FvdgMargins {
        fidelity: f,
        distance: d,
        lower_margin: d - (1.0 - f.sqrt()),
        upper_margin: (1.0 - f).max(0.0).sqrt() - d,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcavityMargin {
    /// `√F(Σλρ, Σλρ′)`.
    pub mixed: f64,
    /// `Σ λ √F(ρ, ρ′)`.
    pub averaged: f64,
    pub margin: f64,
}

/// Joint concavity of `√F` over a weighted list of pairs.
pub fn check_double_concavity(pairs: &[(f64, DMatrix<C64>, DMatrix<C64>)]) -> Result<ConcavityMargin> {
    let (_, first, _) = pairs.first().ok_or_else(|| invalid("need at least one pair"))?;
    if pairs.iter().any(|(w, _, _)| !(*w >= 0.0)) {
        return Err(invalid("weights must be non-negative"));
    }
    let total: f64 = pairs.iter().map(|(w, _, _)| w).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("weights sum to {total}, not 1")));
    }
    let zero = DMatrix::zeros(first.nrows(), first.ncols());
    let (mut a, mut b) = (zero.clone(), zero);
    let mut averaged = 0.0;
    for (w, x, y) in pairs {
        if x.shape() != a.shape() || y.shape() != a.shape() {
            return Err(invalid("pairs have different dimensions"));
        }
        averaged += w * fidelity_matrices(x, y)?.sqrt();
        a += x * C64::new(*w, 0.0);
        b += y * C64::new(*w, 0.0);
    }
    let mixed = fidelity_matrices(&a, &b)?.sqrt();
    Ok(ConcavityMargin {
        mixed,
        averaged,
        margin: mixed - averaged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleMargins {
    /// Right side minus left side of the Bures triangle inequality in the
    /// form `√(1−√F(a,c)) ≤ √(1−√F(a,b)) + √(1−√F(b,c))`.
    pub bures_margin: f64,
    /// Same for the chain through the trace distance,
    /// `1 − √F(a,c) ≤ √(1−F(a,b)) + √(1−F(b,c))`.
    pub trace_chain_margin: f64,
    /// Lower bounds on `√F(a,c)` implied by each chain, clamped at 0.
    pub bures_lower_bound: f64,
    pub trace_lower_bound: f64,
}

pub fn check_bures_triangle(a: &DMatrix<C64>, b: &DMatrix<C64>, c: &DMatrix<C64>) -> Result<TriangleMargins> {
    let (f_ab, f_bc, f_ac) = (fidelity_matrices(a, b)?, fidelity_matrices(b, c)?, fidelity_matrices(a, c)?);
    let h = |f: f64| (1.0 - f.sqrt()).max(0.0).sqrt();
    let g = |f: f64| (1.0 - f).max(0.0).sqrt();
    let bures_sum = h(f_ab) + h(f_bc);
    let trace_sum = g(f_ab) + g(f_bc);
    Ok(TriangleMargins {
        bures_margin: bures_sum - h(f_ac),
        trace_chain_margin: trace_sum - (1.0 - f_ac.sqrt()),
        bures_lower_bound: (1.0 - bures_sum * bures_sum).max(0.0),
        trace_lower_bound: (1.0 - trace_sum).max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::random::{haar_vector, projector, random_density_matrix};
    use crate::seeded_rng;

    fn ket(v: &[f64]) -> DMatrix<C64> {
        let c: Vec<C64> = v.iter().map(|&a| C64::new(a, 0.0)).collect();
        projector(&c)
    }

    #[test]
    fn fvdg_examples() {
        let z = ket(&[1.0, 0.0]);
        let m = check_fuchs_van_de_graaf(&z, &z).unwrap();
        assert!(m.lower_margin.abs() < 1e-12 && m.upper_margin.abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = check_fuchs_van_de_graaf(&z, &ket(&[h, h])).unwrap();
        assert!((1.0 - m.fidelity.sqrt() - 0.292_893_218_8).abs() < 1e-9);
        assert!((m.distance - h).abs() < 1e-12);
        assert!(m.upper_margin.abs() < 1e-12);
        assert!(check_fuchs_van_de_graaf(&z, &DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn pure_pairs_saturate_upper_bound() {
        let mut rng = seeded_rng(1);
        for d in 2..=6 {
            let (a, b) = (projector(&haar_vector(d, &mut rng)), projector(&haar_vector(d, &mut rng)));
            let m = check_fuchs_van_de_graaf(&a, &b).unwrap();
            assert!(m.upper_margin.abs() < 1e-9, "{m:?}");
            assert!(m.lower_margin >= -1e-9);
        }
    }

    #[test]
    fn concavity_examples() {
        let mut rng = seeded_rng(2);
        let (x, y) = (random_density_matrix(3, &mut rng), random_density_matrix(3, &mut rng));
        let one = check_double_concavity(&[(1.0, x.clone(), y.clone())]).unwrap();
        assert!(one.margin.abs() < 1e-9);
        let two = check_double_concavity(&[(0.5, x.clone(), y.clone()), (0.5, x.clone(), y.clone())]).unwrap();
        assert!(two.margin.abs() < 1e-9);
        assert!(check_double_concavity(&[(0.6, x.clone(), y.clone())]).is_err());
        assert!(check_double_concavity(&[]).is_err());
        let z = random_density_matrix(3, &mut rng);
        let mix = check_double_concavity(&[(0.3, x.clone(), y), (0.7, z, x)]).unwrap();
        assert!(mix.margin >= -1e-9);
    }

    #[test]
    fn triangle_examples() {
        let mut rng = seeded_rng(3);
        let (a, c) = (random_density_matrix(2, &mut rng), random_density_matrix(2, &mut rng));
        // a = b: the right side reduces to the (b, c) term, equal to the left.
        let m = check_bures_triangle(&a, &a, &c).unwrap();
        assert!(m.bures_margin.abs() < 1e-7, "{m:?}");
        // a = c: left side vanishes.
        let b = random_density_matrix(2, &mut rng);
        let m = check_bures_triangle(&a, &b, &a).unwrap();
        assert!(m.bures_margin >= 0.0);
        assert!(m.bures_lower_bound >= m.trace_lower_bound - 1e-12);
    }
}
