//! Worst-case channel infidelity and the purification bounds built on it.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::{matrix_json, vector_json, InequalityReport, DEFAULT_TOLERANCE};
use crate::error::{invalid, Error, Result};
use crate::pauli::PauliOperator;
use crate::qstate::metrics::pure_fidelity;
use crate::qstate::random::haar_vector;
use crate::qstate::{make_cat, CatKind, Channel, MeasurementBasis, QubitLabel, C64, MAX_DENSITY_QUBITS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonOptions {
    pub haar_samples: usize,
    /// Worst candidates polished by projected gradient descent.
    pub refine_starts: usize,
    pub refine_steps: usize,
}

impl Default for EpsilonOptions {
    fn default() -> Self {
        Self {
            haar_samples: 1000,
            refine_starts: 4,
            refine_steps: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonEstimate {
    /// `1 − min ⟨ψ|E(|ψ⟩⟨ψ|)|ψ⟩` over the inputs tried; a lower estimate
    /// of the true worst case.
    pub epsilon: f64,
    pub witness: Vec<C64>,
    pub evaluated: usize,
}

fn kraus_matrices(channel: &Channel) -> Vec<DMatrix<C64>> {
    let d = 1usize << channel.arity();
    channel.kraus().iter().map(|k| DMatrix::from_row_slice(d, d, k)).collect()
}

/// `Σ_k |⟨ψ|K_k|ψ⟩|²` and the coefficients `⟨ψ|K_k|ψ⟩`.
fn pure_channel_fidelity(kraus: &[DMatrix<C64>], psi: &DVector<C64>) -> (f64, Vec<(C64, DVector<C64>)>) {
    let mut f = 0.0;
    let mut parts = Vec::with_capacity(kraus.len());
    for k in kraus {
        let kp = k * psi;
        let c = psi.dotc(&kp);
        f += c.norm_sqr();
        parts.push((c, kp));
    }
    (f, parts)
}

fn refine(kraus: &[DMatrix<C64>], start: DVector<C64>, steps: usize) -> (f64, DVector<C64>) {
    let mut psi = start;
    let (mut f, mut parts) = pure_channel_fidelity(kraus, &psi);
    let mut eta = 0.25;
    for _ in 0..steps {
        // ∂f/∂ψ* = Σ_k (c_k* K_k ψ + c_k K_k† ψ).
        let mut g = DVector::zeros(psi.len());
        for (k, (c, kp)) in kraus.iter().zip(&parts) {
            g += kp * c.conj() + k.adjoint() * &psi * *c;
        }
        let along = psi.dotc(&g);
        g -= &psi * along;
        if g.norm() < 1e-13 {
            break;
        }
        loop {
            let mut cand = &psi - &g * C64::new(eta, 0.0);
            cand /= C64::new(cand.norm(), 0.0);
            let (fc, pc) = pure_channel_fidelity(kraus, &cand);
            if fc < f {
                psi = cand;
                f = fc;
                parts = pc;
                eta = (eta * 1.5).min(1.0);
                break;
            }
            eta *= 0.5;
            if eta < 1e-8 {
                return (f, psi);
            }
        }
    }
    (f, psi)
}

/// Structured inputs: computational and Fourier bases, and products of
/// single-qubit Pauli eigenstates when there are at most 4096 of them.
fn structured_inputs(arity: usize) -> Vec<Vec<C64>> {
    let d = 1usize << arity;
    let mut out = Vec::new();
    for j in 0..d {
        let mut e = vec![C64::new(0.0, 0.0); d];
        e[j] = C64::new(1.0, 0.0);
        out.push(e);
        let norm = (d as f64).sqrt();
        out.push(
            (0..d)
                .map(|x| C64::from_polar(1.0 / norm, 2.0 * std::f64::consts::PI * (j * x) as f64 / d as f64))
                .collect(),
        );
    }
    if arity <= 4 {
        let singles: Vec<[C64; 2]> = [MeasurementBasis::X, MeasurementBasis::Y, MeasurementBasis::Z]
            .iter()
            .flat_map(|b| (0..2u8).map(move |o| b.eigenvector(o)))
            .collect();
        for code in 0..6usize.pow(arity as u32) {
            let mut v = vec![C64::new(1.0, 0.0)];
            let mut c = code;
            for _ in 0..arity {
                let s = singles[c % 6];
                c /= 6;
                v = v.iter().flat_map(|a| [a * s[0], a * s[1]]).collect();
            }
            out.push(v);
        }
    }
    out
}

/// Largest sampled pure-state infidelity of `channel`, from structured
/// inputs, Haar samples, and gradient refinement of the worst few.
pub fn worst_case_infidelity<R: Rng + ?Sized>(
    channel: &Channel,
    opts: &EpsilonOptions,
    rng: &mut R,
) -> EpsilonEstimate {
    let kraus = kraus_matrices(channel);
    let d = 1usize << channel.arity();
    let mut scored: Vec<(f64, DVector<C64>)> = structured_inputs(channel.arity())
        .into_iter()
        .chain((0..opts.haar_samples).map(|_| haar_vector(d, rng)))
        .map(|v| {
            let psi = DVector::from_vec(v);
            (pure_channel_fidelity(&kraus, &psi).0, psi)
        })
        .collect();
    let evaluated = scored.len();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = scored[0].clone();
    for (_, start) in scored.into_iter().take(opts.refine_starts) {
        let (f, psi) = refine(&kraus, start, opts.refine_steps);
        if f < best.0 {
            best = (f, psi);
        }
    }
    EpsilonEstimate {
        epsilon: (1.0 - best.0).max(0.0),
        witness: best.1.iter().copied().collect(),
        evaluated,
    }
}

/// `⟨Ψ|(E ⊗ I)(|Ψ⟩⟨Ψ|)|Ψ⟩` with `Ψ` given as a `d × d_R` coefficient matrix
/// (`Ψ = Σ M_{ij} |i⟩|j⟩`).
pub fn entanglement_fidelity(channel: &Channel, psi: &DMatrix<C64>) -> Result<f64> {
    let d = 1usize << channel.arity();
    if psi.nrows() != d {
        return Err(invalid(format!("purification has {} system rows, channel acts on {d}", psi.nrows())));
    }
    Ok(kraus_matrices(channel)
        .iter()
        // ⟨Ψ|K ⊗ I|Ψ⟩ = tr(M† K M).
        .map(|k| (psi.adjoint() * k * psi).trace().norm_sqr())
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurificationOptions {
    pub purifications: usize,
    pub epsilon: EpsilonOptions,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for PurificationOptions {
    fn default() -> Self {
        Self {
            purifications: 100,
            epsilon: EpsilonOptions::default(),
            tolerance: DEFAULT_TOLERANCE,
            seed: 0,
        }
    }
}

/// Measures `ε` for `channel`, then checks for the maximally entangled
/// input and random purifications `Ψ` that
/// `F_e ≥ 1 − (1 + d₀·max_{j≠k} p_j p_k)·ε` (Schmidt number `d₀`, Schmidt
/// weights `p_j`) and the dimension-only form `F_e ≥ 1 − (1 + d/4)·ε`.
pub fn check_entanglement_fidelity_bound(channel: &Channel, opts: &PurificationOptions) -> Result<InequalityReport> {
    let d = 1usize << channel.arity();
    if 2 * channel.arity() > MAX_DENSITY_QUBITS {
        return Err(Error::Capacity {
            what: "purified channel qubits",
            requested: 2 * channel.arity(),
            limit: MAX_DENSITY_QUBITS,
        });
    }
    let mut rng = crate::seeded_rng(opts.seed);
    let eps = worst_case_infidelity(channel, &opts.epsilon, &mut rng);
    let mut report = InequalityReport::new("entanglement-fidelity", opts.tolerance);
    report.note("epsilon", json!(eps.epsilon));
    report.note("epsilon_witness", vector_json(&eps.witness));
    report.note("epsilon_inputs", json!(eps.evaluated));
    for i in 0..=opts.purifications {
        let m = if i == 0 {
            DMatrix::identity(d, d) / C64::new((d as f64).sqrt(), 0.0)
        } else {
            DMatrix::from_row_slice(d, d, &haar_vector(d * d, &mut rng))
        };
        let f = entanglement_fidelity(channel, &m)?;
        let mut p: Vec<f64> = m.singular_values().iter().map(|s| s * s).collect();
        p.sort_by(|a, b| b.total_cmp(a));
        let d0 = p.iter().filter(|&&x| x > 1e-12).count();
        let cross = if d0 > 1 { d0 as f64 * p[0] * p[1] } else { 0.0 };
        let schmidt_bound = 1.0 - (1.0 + cross) * eps.epsilon;
        let dim_bound = 1.0 - (1.0 + d as f64 / 4.0) * eps.epsilon;
        report.record(d, f, schmidt_bound.max(dim_bound), || {
            json!({ "purification": matrix_json(&m), "epsilon": eps.epsilon, "fidelity": f })
        });
        if i == 0 {
            report.note("maximally_entangled_fidelity", json!(f));
            report.note("maximally_entangled_bound", json!(schmidt_bound));
        }
    }
    Ok(report)
}

/// Pauli channel on `arity` qubits with identity weight uniform in
/// `[min_identity, 1)` and the rest spread by a flat Dirichlet draw.
pub fn random_pauli_channel<R: Rng + ?Sized>(arity: usize, min_identity: f64, rng: &mut R) -> Result<Channel> {
    if !(0.0..1.0).contains(&min_identity) {
        return Err(invalid("min_identity must lie in [0,1)"));
    }
    let count = 1usize << (2 * arity);
    let p_id = min_identity + (1.0 - min_identity) * rng.random::<f64>();
    let raw: Vec<f64> = (1..count).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    let mut table = vec![(PauliOperator::identity(arity), p_id)];
    for (i, w) in raw.iter().enumerate() {
        let sym = (i + 1) as u128;
        table.push((PauliOperator::from_sym(arity, sym), (1.0 - p_id) * w / total));
    }
    let s: f64 = table.iter().map(|t| t.1).sum();
    table[0].1 += 1.0 - s;
    Channel::pauli(&table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComposedOptions {
    pub epsilon: EpsilonOptions,
    /// Haar samples for the worst case of the joint channel `⊗Λ_μ`.
    pub joint_samples: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for ComposedOptions {
    fn default() -> Self {
        Self {
            epsilon: EpsilonOptions::default(),
            joint_samples: 100,
            tolerance: DEFAULT_TOLERANCE,
            seed: 0,
        }
    }
}

/// With `Φ = |Φ⁺_{n+1}⟩⟨Φ⁺_{n+1}|^{⊗t}` (members hold qubit `μ` of each
/// copy, the center the last), checks for channels `Λ_μ` on `t` qubits:
///
/// * per member, `F(Φ, (Λ_μ ⊗ I)(Φ)) ≥ 1 − (1 + 2^{−t})·ε₁`;
/// * jointly, `√F(Φ, (⊗Λ_μ ⊗ I)(Φ)) ≥ 1 − n·√((1 + 2^{t−2})·ε₁)`;
/// * jointly, `F(Φ, (⊗Λ_μ ⊗ I)(Φ)) ≥ 1 − (1 + 2^{−t})·ε₂`, with `ε₂` the
///   sampled worst case of `⊗Λ_μ` on `nt`-qubit pure states.
///
/// `ε₁` is the largest per-member sampled worst case.
pub fn check_composed_channel_bound(channels: &[Channel], t: usize, opts: &ComposedOptions) -> Result<InequalityReport> {
    let n = channels.len();
    if n == 0 || t == 0 {
        return Err(invalid("need at least one member channel and t ≥ 1"));
    }
    if channels.iter().any(|c| c.arity() != t) {
        return Err(invalid(format!("every member channel must act on t = {t} qubits")));
    }
    let total = (n + 1) * t;
    if total > MAX_DENSITY_QUBITS {
        return Err(Error::Capacity {
            what: "composed-bound qubits",
            requested: total,
            limit: MAX_DENSITY_QUBITS,
        });
    }
    let mut rng = crate::seeded_rng(opts.seed);
    let eps: Vec<f64> = channels
        .iter()
        .map(|c| worst_case_infidelity(c, &opts.epsilon, &mut rng).epsilon)
        .collect();
    let eps1 = eps.iter().copied().fold(0.0, f64::max);

    let member_labels = |mu: usize| QubitLabel::block(crate::qstate::Owner::Member(mu as u16), 0, t);
    let mut phi = None;
    for c in 0..t {
        let mut labels: Vec<QubitLabel> = (0..n).map(|mu| QubitLabel::member(mu as u16, c as u16)).collect();
        labels.push(QubitLabel::center(c as u16));
        let cat = make_cat(n + 1, CatKind::PhiPlus, labels)?;
        phi = Some(match phi {
            None => cat,
            Some(p) => crate::qstate::PureStateVector::tensor(&p, &cat)?,
        });
    }
    let phi = phi.expect("t ≥ 1");
    let rho0 = phi.to_density();
    let mut joint = rho0.clone();
    let mut report = InequalityReport::new("composed-channel", opts.tolerance);
    let tf = t as f64;
    for (mu, ch) in channels.iter().enumerate() {
        let single = rho0.apply_channel(ch, &member_labels(mu))?;
        let f = pure_fidelity(phi.amplitudes(), &single.matrix())?;
        report.record(1 << t, f, 1.0 - (1.0 + 2f64.powf(-tf)) * eps[mu], || {
            json!({ "form": "single-member", "member": mu, "fidelity": f, "epsilon": eps[mu] })
        });
        joint = joint.apply_channel(ch, &member_labels(mu))?;
    }
    let f_joint = pure_fidelity(phi.amplitudes(), &joint.matrix())?;
    let composed = 1.0 - n as f64 * ((1.0 + 2f64.powf(tf - 2.0)) * eps1).sqrt();
    report.record(1 << t, f_joint.sqrt(), composed, || {
        json!({ "form": "composed", "root_fidelity": f_joint.sqrt(), "epsilon1": eps1 })
    });

    // ε₂: joint channel on nt member qubits, state by state.
    let labels: Vec<QubitLabel> = (0..n).flat_map(member_labels).collect();
    let d = 1usize << (n * t);
    let mut eps2: f64 = 0.0;
    for v in structured_inputs(n * t).into_iter().take(4 * d).chain((0..opts.joint_samples).map(|_| haar_vector(d, &mut rng))) {
        let psi = crate::qstate::PureStateVector::new(labels.clone(), v)?;
        let mut out = psi.to_density();
        for (mu, ch) in channels.iter().enumerate() {
            out = out.apply_channel(ch, &member_labels(mu))?;
        }
        eps2 = eps2.max(1.0 - pure_fidelity(psi.amplitudes(), &out.matrix())?);
    }
    report.record(1 << (n * t), f_joint, 1.0 - (1.0 + 2f64.powf(-tf)) * eps2, || {
        json!({ "form": "joint", "fidelity": f_joint, "epsilon2": eps2 })
    });
    report.note("epsilon1_per_member", json!(eps));
    report.note("epsilon2", json!(eps2));
    report.note("joint_fidelity", json!(f_joint));
    report.note("composed_margin", json!(f_joint.sqrt() - composed));
    Ok(report)
}
