//! The randomized verification suite behind `verify-inequalities`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::bounds::{check_bures_triangle, check_double_concavity, check_fuchs_van_de_graaf};
use super::channels::{
    check_composed_channel_bound, check_entanglement_fidelity_bound, entanglement_fidelity,
    random_pauli_channel, ComposedOptions, EpsilonOptions, PurificationOptions,
};
use super::report::{matrix_json, InequalityReport, DEFAULT_TOLERANCE};
use super::channels::worst_case_infidelity;
use crate::error::{invalid, Result};
use crate::qstate::random::{haar_vector, projector, random_density_matrix};
use crate::qstate::{Channel, C64};
use crate::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    /// Random instances per dimension for the state inequalities.
    pub trials: usize,
    pub dims: Vec<usize>,
    pub tolerance: f64,
    pub seed: u64,
    /// Random Pauli channels for the purification bound.
    pub channel_draws: usize,
    /// Random channel sets for the composed bound.
    pub composed_draws: usize,
    pub epsilon: EpsilonOptions,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            trials: 1000,
            dims: (2..=8).collect(),
            tolerance: DEFAULT_TOLERANCE,
            seed: 0,
            channel_draws: 50,
            composed_draws: 20,
            epsilon: EpsilonOptions::default(),
        }
    }
}

impl SuiteOptions {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.channel_draws == 0 || self.composed_draws == 0 {
            return Err(invalid("trial counts must be positive"));
        }
        if self.dims.is_empty() || self.dims.iter().any(|&d| !(1..=64).contains(&d)) {
            return Err(invalid("dimensions must lie in 1..=64"));
        }
        if !(self.tolerance >= 0.0) {
            return Err(invalid("tolerance must be non-negative"));
        }
        Ok(())
    }
}

fn fvdg(opts: &SuiteOptions) -> Result<[InequalityReport; 2]> {
    let mut rng = crate::seeded_rng(derive_seed(opts.seed, 1));
    let mut mixed = InequalityReport::new("fuchs-van-de-graaf", opts.tolerance);
    let mut pure = InequalityReport::new("fuchs-van-de-graaf-pure-saturation", opts.tolerance);
    for &d in &opts.dims {
        for _ in 0..opts.trials {
            let (x, y) = (random_density_matrix(d, &mut rng), random_density_matrix(d, &mut rng));
            let m = check_fuchs_van_de_graaf(&x, &y)?;
            let w = || json!({ "x": matrix_json(&x), "y": matrix_json(&y) });
            // Both sides as one instance: the smaller margin decides.
            mixed.record(d, m.lower_margin.min(m.upper_margin), 0.0, w);
            let (a, b) = (projector(&haar_vector(d, &mut rng)), projector(&haar_vector(d, &mut rng)));
            let p = check_fuchs_van_de_graaf(&a, &b)?;
            // Equality: the residual counts in both directions.
            pure.record(d, -p.upper_margin.abs(), 0.0, || {
                json!({ "x": matrix_json(&a), "y": matrix_json(&b) })
            });
        }
    }
    Ok([mixed, pure])
}

fn concavity(opts: &SuiteOptions) -> Result<InequalityReport> {
    let mut rng = crate::seeded_rng(derive_seed(opts.seed, 2));
    let mut r = InequalityReport::new("double-concavity", opts.tolerance);
    for &d in &opts.dims {
        for _ in 0..opts.trials {
            let k = rng.random_range(2..=4);
            let w: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let s: f64 = w.iter().sum();
            let pairs: Vec<(f64, DMatrix<C64>, DMatrix<C64>)> = w
                .iter()
                .map(|wi| (wi / s, random_density_matrix(d, &mut rng), random_density_matrix(d, &mut rng)))
                .collect();
            let m = check_double_concavity(&pairs)?;
            r.record(d, m.mixed, m.averaged, || {
                json!(pairs
                    .iter()
                    .map(|(w, x, y)| json!({ "weight": w, "x": matrix_json(x), "y": matrix_json(y) }))
                    .collect::<Vec<_>>())
            });
        }
    }
    Ok(r)
}

fn triangle(opts: &SuiteOptions) -> Result<InequalityReport> {
    let mut rng = crate::seeded_rng(derive_seed(opts.seed, 3));
    let mut r = InequalityReport::new("bures-triangle", opts.tolerance);
    let mut tightness_violation = f64::NEG_INFINITY;
    for &d in &opts.dims {
        for _ in 0..opts.trials {
            let a = random_density_matrix(d, &mut rng);
            let b = random_density_matrix(d, &mut rng);
            let c = random_density_matrix(d, &mut rng);
            let m = check_bures_triangle(&a, &b, &c)?;
            let slack = m.bures_lower_bound - m.trace_lower_bound;
            tightness_violation = tightness_violation.max(-slack);
            // One instance passes when the triangle holds and the Bures
            // chain is at least as tight as the trace-distance chain.
            r.record(d, m.bures_margin.min(slack), 0.0, || {
                json!({ "a": matrix_json(&a), "b": matrix_json(&b), "c": matrix_json(&c), "margins": m })
            });
        }
    }
    r.note("tightness_max_violation", json!(tightness_violation));
    Ok(r)
}

fn purification(opts: &SuiteOptions) -> Result<InequalityReport> {
    let mut rng = crate::seeded_rng(derive_seed(opts.seed, 4));
    let mut r = InequalityReport::new("entanglement-fidelity", opts.tolerance);
    // Closed form: one-qubit depolarizing at p = 0.1 meets the bound with
    // equality on the maximally entangled input.
    let p = 0.1;
    let dep = Channel::depolarizing(p)?;
    let eps = worst_case_infidelity(&dep, &opts.epsilon, &mut rng).epsilon;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = DMatrix::from_diagonal_element(2, 2, C64::new(h, 0.0));
    let fe = entanglement_fidelity(&dep, &bell)?;
    let closed = 1.0 - 0.75 * p;
    let residual = (fe - closed).abs().max((eps - p / 2.0).abs()).max((fe - (1.0 - 1.5 * eps)).abs());
    r.record(2, -residual, 0.0, || json!({ "channel": "depolarizing", "p": p, "fidelity": fe, "epsilon": eps }));
    r.note("depolarizing_equality_residual", json!(residual));
    let mut worst_margin = f64::INFINITY;
    for i in 0..opts.channel_draws {
        let ch = random_pauli_channel(2, 0.7, &mut rng)?;
        let sub = check_entanglement_fidelity_bound(
            &ch,
            &PurificationOptions {
                purifications: 100,
                epsilon: opts.epsilon.clone(),
                tolerance: opts.tolerance,
                seed: derive_seed(opts.seed, 100 + i as u64),
            },
        )?;
        worst_margin = worst_margin.min(-sub.max_violation);
        for row in &sub.rows {
            r.record(row.dim, row.lhs, row.rhs, || json!({ "draw": i, "detail": sub.witness.clone(), "kraus": ch.kraus().len() }));
        }
    }
    r.note("random_channel_min_margin", json!(worst_margin));
    Ok(r)
}

fn composed(opts: &SuiteOptions) -> Result<InequalityReport> {
    let mut rng = crate::seeded_rng(derive_seed(opts.seed, 5));
    let mut r = InequalityReport::new("composed-channel", opts.tolerance);
    let shapes = [(2usize, 1usize), (3, 1), (2, 2), (3, 2)];
    // Depolarizing example with a recorded positive margin.
    let dep = Channel::depolarizing(0.02)?;
    let copts = ComposedOptions {
        epsilon: opts.epsilon.clone(),
        joint_samples: 100,
        tolerance: opts.tolerance,
        seed: derive_seed(opts.seed, 200),
    };
    let ex = check_composed_channel_bound(&[dep.clone(), dep], 1, &copts)?;
    r.note("depolarizing_example_margin", ex.notes["composed_margin"].clone());
    for row in &ex.rows {
        r.record(row.dim, row.lhs, row.rhs, || json!({ "example": "depolarizing p=0.02, n=2, t=1" }));
    }
    for i in 0..opts.composed_draws {
        let (n, t) = shapes[i % shapes.len()];
        let channels: Vec<Channel> = (0..n)
            .map(|_| random_pauli_channel(t, 0.9, &mut rng))
            .collect::<Result<_>>()?;
        let sub = check_composed_channel_bound(
            &channels,
            t,
            &ComposedOptions {
                seed: derive_seed(opts.seed, 300 + i as u64),
                ..copts.clone()
            },
        )?;
        for row in &sub.rows {
            r.record(row.dim, row.lhs, row.rhs, || json!({ "draw": i, "n": n, "t": t, "detail": sub.witness.clone() }));
        }
    }
    Ok(r)
}

/// Runs the six checks: trace-distance sandwich on mixed pairs, its
/// saturation on pure pairs, joint concavity, the Bures triangle with
/// chain tightness, the purification bound, and the composed bound.
pub fn verify_all(opts: &SuiteOptions) -> Result<Vec<InequalityReport>> {
    opts.validate()?;
    let [a, b] = fvdg(opts)?;
    Ok(vec![a, b, concavity(opts)?, triangle(opts)?, purification(opts)?, composed(opts)?])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let opts = SuiteOptions {
            trials: 20,
            dims: vec![2, 3, 4],
            channel_draws: 3,
            composed_draws: 4,
            epsilon: EpsilonOptions {
                haar_samples: 100,
                ..EpsilonOptions::default()
            },
            ..SuiteOptions::default()
        };
        let reports = verify_all(&opts).unwrap();
        assert_eq!(reports.len(), 6);
        for r in &reports {
            assert!(r.passed, "{}", r.verdict_line());
        }
        assert_eq!(verify_all(&opts).unwrap(), reports);
        assert!(verify_all(&SuiteOptions { trials: 0, ..opts }).is_err());
    }
}
