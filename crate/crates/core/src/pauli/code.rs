use std::sync::OnceLock;

use rand::Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::gf2;
use super::operator::PauliOperator;
use crate::error::{invalid, Error, Result};
use crate::qstate::{pauli_masks, PureStateVector, QubitLabel, Register, C64};

/// Largest code handled by the symplectic solver (2u bits must fit a u128).
pub const MAX_CODE_QUBITS: usize = 63;

/// Stabilizer code on `u` qubits encoding `t`, completed to a full
/// symplectic basis: generators `g_i`, destabilizers `h_i`
/// (`⟨g_i,h_j⟩ = δ_ij`, commuting with all logicals) and logical pairs
/// `(X̄_j, Z̄_j)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "CodeDump", try_from = "CodeDump")]
pub struct StabilizerCode {
    u: usize,
    t: usize,
    generators: Vec<PauliOperator>,
    destabilizers: Vec<PauliOperator>,
    logical_x: Vec<PauliOperator>,
    logical_z: Vec<PauliOperator>,
    codewords: OnceLock<Vec<Vec<C64>>>,
}

impl PartialEq for StabilizerCode {
    fn eq(&self, o: &Self) -> bool {
        self.u == o.u
            && self.t == o.t
            && self.generators == o.generators
            && self.destabilizers == o.destabilizers
            && self.logical_x == o.logical_x
            && self.logical_z == o.logical_z
    }
}

#[derive(Serialize, Deserialize)]
struct CodeDump {
    u: usize,
    t: usize,
    generators: Vec<PauliOperator>,
    destabilizers: Vec<PauliOperator>,
    logical_x: Vec<PauliOperator>,
    logical_z: Vec<PauliOperator>,
}

impl From<StabilizerCode> for CodeDump {
    fn from(c: StabilizerCode) -> Self {
        CodeDump {
            u: c.u,
            t: c.t,
            generators: c.generators,
            destabilizers: c.destabilizers,
            logical_x: c.logical_x,
            logical_z: c.logical_z,
        }
    }
}

impl TryFrom<CodeDump> for StabilizerCode {
    type Error = Error;

    fn try_from(d: CodeDump) -> Result<Self> {
        let c = StabilizerCode::new(d.generators, d.destabilizers, d.logical_x, d.logical_z)?;
        if c.u != d.u || c.t != d.t {
            return Err(invalid("code dimensions disagree with operator lists"));
        }
        Ok(c)
    }
}

/// Symplectic form on compact vectors of `u` qubits.
fn sym(a: u128, b: u128, u: usize) -> bool {
    gf2::parity(swap(a, u) & b)
}

/// Exchanges the x and z halves, so that `⟨a,h⟩ = parity(swap(a) & h)`.
fn swap(a: u128, u: usize) -> u128 {
    let m = (1u128 << u) - 1;
    ((a & m) << u) | ((a >> u) & m)
}

/// Applies `p` (qubit j at position j) to a raw `u`-qubit vector.
fn apply_raw(p: &PauliOperator, v: &[C64], u: usize) -> Vec<C64> {
    let positions: Vec<usize> = (0..u).collect();
    let (xm, zm, coef) = pauli_masks(p, &positions, u);
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for (b, a) in v.iter().enumerate() {
        let s = if (b & zm).count_ones() % 2 == 1 { -coef } else { coef };
        out[b ^ xm] = s * a;
    }
    out
}

/// Result of reading a Pauli error against a code's symplectic basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorDecomposition {
    pub syndrome: Vec<u8>,
    /// Logical action on the `t` encoded qubits, phase dropped.
    pub logical: PauliOperator,
}

impl ErrorDecomposition {
    /// In the stabilizer group up to phase.
    pub fn is_stabilizer(&self) -> bool {
        self.syndrome.iter().all(|&b| b == 0) && self.logical.is_identity()
    }

    /// Syndrome-trivial but acting nontrivially on the logical space.
    pub fn is_undetected_logical(&self) -> bool {
        self.syndrome.iter().all(|&b| b == 0) && !self.logical.is_identity()
    }
}

impl StabilizerCode {
    /// Validates a fully specified code.
    pub fn new(
        generators: Vec<PauliOperator>,
        destabilizers: Vec<PauliOperator>,
        logical_x: Vec<PauliOperator>,
        logical_z: Vec<PauliOperator>,
    ) -> Result<Self> {
        let u = generators
            .first()
            .or(logical_x.first())
            .map(PauliOperator::num_qubits)
            .ok_or_else(|| invalid("code has no operators"))?;
        if u > MAX_CODE_QUBITS {
            return Err(Error::Capacity {
                what: "code qubits",
                requested: u,
                limit: MAX_CODE_QUBITS,
            });
        }
        let t = logical_x.len();
        if logical_z.len() != t || generators.len() + t != u || destabilizers.len() != generators.len()
        {
            return Err(invalid("operator counts do not form a symplectic basis"));
        }
        let all = generators
            .iter()
            .chain(&destabilizers)
            .chain(&logical_x)
            .chain(&logical_z);
        for p in all.clone() {
            if p.num_qubits() != u {
                return Err(invalid("operators act on different qubit counts"));
            }
        }
        for g in &generators {
            if !g.is_hermitian() {
                return Err(invalid(format!("generator {g} is not Hermitian")));
            }
        }
        let gs: Vec<u128> = generators.iter().map(PauliOperator::to_sym).collect();
        let hs: Vec<u128> = destabilizers.iter().map(PauliOperator::to_sym).collect();
        let xs: Vec<u128> = logical_x.iter().map(PauliOperator::to_sym).collect();
        let zs: Vec<u128> = logical_z.iter().map(PauliOperator::to_sym).collect();
        let want = |a: &[u128], b: &[u128], delta: bool, what: &str| -> Result<()> {
            for (i, &p) in a.iter().enumerate() {
                for (j, &q) in b.iter().enumerate() {
                    if sym(p, q, u) != (delta && i == j) {
                        return Err(invalid(format!("symplectic relation violated: {what}")));
                    }
                }
            }
            Ok(())
        };
        want(&gs, &gs, false, "generators commute")?;
        want(&gs, &hs, true, "generator/destabilizer pairing")?;
        want(&gs, &xs, false, "logical X commutes with generators")?;
        want(&gs, &zs, false, "logical Z commutes with generators")?;
        want(&hs, &xs, false, "logical X commutes with destabilizers")?;
        want(&hs, &zs, false, "logical Z commutes with destabilizers")?;
        want(&xs, &xs, false, "logical X mutually commute")?;
        want(&zs, &zs, false, "logical Z mutually commute")?;
        want(&xs, &zs, true, "logical X/Z pairing")?;
        // The pairings above force linear independence of generators.
        Ok(Self {
            u,
            t,
            generators,
            destabilizers,
            logical_x,
            logical_z,
            codewords: OnceLock::new(),
        })
    }

    /// Completes commuting independent Hermitian generators on `u` qubits
    /// to a code with destabilizers and logical operators.
    pub fn from_generators(u: usize, generators: Vec<PauliOperator>) -> Result<Self> {
        if u == 0 || u > MAX_CODE_QUBITS {
            return Err(invalid(format!("code size {u} outside 1..={MAX_CODE_QUBITS}")));
        }
        if generators.len() > u {
            return Err(invalid("more generators than qubits"));
        }
        let gs: Vec<u128> = generators
            .iter()
            .map(|g| {
                if g.num_qubits() != u {
                    Err(invalid("generator size mismatch"))
                } else {
                    Ok(g.to_sym())
                }
            })
            .collect::<Result<_>>()?;
        let nbits = 2 * u;
        if gf2::rank(&gs, nbits) != gs.len() {
            return Err(invalid("generators are not independent"));
        }
        for (i, &a) in gs.iter().enumerate() {
            if gs[..i].iter().any(|&b| sym(a, b, u)) {
                return Err(invalid("generators do not commute"));
            }
        }
        let r = gs.len();
        let mut hs: Vec<u128> = Vec::with_capacity(r);
        for i in 0..r {
            let mut rows: Vec<u128> = gs.iter().map(|&g| swap(g, u)).collect();
            let mut rhs: Vec<bool> = (0..r).map(|j| j == i).collect();
            rows.extend(hs.iter().map(|&h| swap(h, u)));
            rhs.extend(std::iter::repeat_n(false, hs.len()));
            let h = gf2::solve(&rows, &rhs, nbits)
                .ok_or_else(|| Error::State("destabilizer system inconsistent".into()))?;
            hs.push(h);
        }
        let (mut xs, mut zs) = (Vec::new(), Vec::new());
        for _ in 0..u - r {
            let base: Vec<u128> = gs
                .iter()
                .chain(&hs)
                .chain(&xs)
                .chain(&zs)
                .map(|&v| swap(v, u))
                .collect();
            let x = *gf2::nullspace(&base, nbits)
                .first()
                .ok_or_else(|| Error::State("no logical X available".into()))?;
            let mut rows = base.clone();
            let mut rhs = vec![false; base.len()];
            rows.push(swap(x, u));
            rhs.push(true);
            let z = gf2::solve(&rows, &rhs, nbits)
                .ok_or_else(|| Error::State("no logical Z partner".into()))?;
            xs.push(x);
            zs.push(z);
        }
        let op = |v: &u128| PauliOperator::from_sym(u, *v);
        Self::new(
            generators,
            hs.iter().map(op).collect(),
            xs.iter().map(op).collect(),
            zs.iter().map(op).collect(),
        )
    }

    /// Random code: `u − t` random commuting independent generators, each
    /// with phase `+1`.
    pub fn random<R: Rng + ?Sized>(u: usize, t: usize, rng: &mut R) -> Result<Self> {
        if t > u || u == 0 || u > MAX_CODE_QUBITS {
            return Err(invalid(format!("invalid code dimensions u={u}, t={t}")));
        }
        let nbits = 2 * u;
        let mut gs: Vec<u128> = Vec::with_capacity(u - t);
        while gs.len() < u - t {
            let rows: Vec<u128> = gs.iter().map(|&g| swap(g, u)).collect();
            let ns = gf2::nullspace(&rows, nbits);
            let v = ns
                .iter()
                .filter(|_| rng.random::<bool>())
                .fold(0u128, |acc, b| acc ^ b);
            if v != 0 && !gf2::in_span(&gs, v, nbits) {
                gs.push(v);
            }
        }
        let gens = gs.iter().map(|&v| PauliOperator::from_sym(u, v)).collect();
        Self::from_generators(u, gens)
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn destabilizers(&self) -> &[PauliOperator] {
        &self.destabilizers
    }

    pub fn logical_x(&self) -> &[PauliOperator] {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &[PauliOperator] {
        &self.logical_z
    }

    fn check_size(&self, e: &PauliOperator) -> Result<()> {
        if e.num_qubits() != self.u {
            return Err(invalid(format!(
                "error acts on {} qubits, code has {}",
                e.num_qubits(),
                self.u
            )));
        }
        Ok(())
    }

    fn check_syndrome(&self, y: &[u8]) -> Result<()> {
        if y.len() != self.u - self.t || y.iter().any(|&b| b > 1) {
            return Err(invalid(format!(
                "syndrome must be {} bits",
                self.u - self.t
            )));
        }
        Ok(())
    }

    /// Bit `i` is 1 iff `e` anticommutes with generator `i`.
    pub fn syndrome(&self, e: &PauliOperator) -> Result<Vec<u8>> {
        self.check_size(e)?;
        self.generators.iter().map(|g| e.symplectic(g)).collect()
    }

    pub fn decompose(&self, e: &PauliOperator) -> Result<ErrorDecomposition> {
        let syndrome = self.syndrome(e)?;
        let mut x = 0u64;
        let mut z = 0u64;
        for j in 0..self.t {
            x |= u64::from(e.symplectic(&self.logical_z[j])?) << j;
            z |= u64::from(e.symplectic(&self.logical_x[j])?) << j;
        }
        Ok(ErrorDecomposition {
            syndrome,
            logical: PauliOperator::new(self.t, x, z, 0)?,
        })
    }

    /// Destabilizer product `Π h_i^{y_i}` mapping the code space onto the
    /// syndrome-`y` coset.
    pub fn coset_representative(&self, y: &[u8]) -> Result<PauliOperator> {
        self.check_syndrome(y)?;
        let mut p = PauliOperator::identity(self.u);
        for (h, &b) in self.destabilizers.iter().zip(y) {
            if b == 1 {
                p = p.mul(h)?;
            }
        }
        Ok(p)
    }

    /// Logical basis states `|j̄⟩`, `j` read with logical qubit 0 as the
    /// most significant bit. The global phase of `|0̄⟩` is fixed by making
    /// its first largest amplitude real positive.
    fn codewords(&self) -> Result<&[Vec<C64>]> {
        if self.u > crate::qstate::MAX_STATE_QUBITS {
            return Err(Error::Capacity {
                what: "encoded state qubits",
                requested: self.u,
                limit: crate::qstate::MAX_STATE_QUBITS,
            });
        }
        Ok(self.codewords.get_or_init(|| {
            let u = self.u;
            let d = 1usize << u;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
            let mut v: Vec<C64> = (0..d)
                .map(|_| C64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU))
                .collect();
            for p in self.generators.iter().chain(&self.logical_z) {
                let pv = apply_raw(p, &v, u);
                v.iter_mut().zip(pv).for_each(|(a, b)| *a = (*a + b) * 0.5);
            }
            let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            let big = v.iter().map(|a| a.norm()).fold(0.0, f64::max);
            let lead = v.iter().find(|a| a.norm() > 0.5 * big).copied().unwrap();
            let rot = lead.conj() / lead.norm() / norm;
            v.iter_mut().for_each(|a| *a *= rot);
            (0..1usize << self.t)
                .map(|j| {
                    let mut w = v.clone();
                    for q in 0..self.t {
                        if (j >> (self.t - 1 - q)) & 1 == 1 {
                            w = apply_raw(&self.logical_x[q], &w, u);
                        }
                    }
                    w
                })
                .collect()
        }))
    }

    /// Encoding isometry `V_y` (row-major, `2^u × 2^t`) whose column `j` is
    /// the syndrome-`y` coset image of `|j̄⟩`.
    pub fn encoder(&self, y: &[u8]) -> Result<Vec<C64>> {
        let rep = self.coset_representative(y)?;
        let words = self.codewords()?;
        let (d, k) = (1usize << self.u, 1usize << self.t);
        let mut v = vec![C64::new(0.0, 0.0); d * k];
        for (j, w) in words.iter().enumerate() {
            for (b, a) in apply_raw(&rep, w, self.u).into_iter().enumerate() {
                v[b * k + j] = a;
            }
        }
        Ok(v)
    }

    /// Encodes the `targets` (the `t` logical qubits, in order) of `state`
    /// into the block `targets ++ ancillas` within the syndrome-`y` coset.
    pub fn encode_block<S: Register>(
        &self,
        state: &S,
        y: &[u8],
        targets: &[QubitLabel],
        ancillas: &[QubitLabel],
    ) -> Result<S> {
        if targets.len() != self.t || ancillas.len() != self.u - self.t {
            return Err(invalid("block does not match code dimensions"));
        }
        let v = self.encoder(y)?;
        let mut block = targets.to_vec();
        block.extend_from_slice(ancillas);
        Ok(state.map_qubits(targets, &v, &block)?.0)
    }

    /// Encodes a standalone `t`-qubit state. Ancillas are labelled with
    /// [`ancilla_labels`] for the owner of the first logical qubit.
    pub fn encode_coset(&self, y: &[u8], logical: &PureStateVector) -> Result<PureStateVector> {
        if logical.num_qubits() != self.t {
            return Err(invalid(format!(
                "logical state has {} qubits, code encodes {}",
                logical.num_qubits(),
                self.t
            )));
        }
        let targets = logical.labels().to_vec();
        let owner = targets
            .first()
            .map(|l| l.owner)
            .ok_or_else(|| invalid("code encodes no qubits"))?;
        let anc = ancilla_labels(owner, self.u - self.t);
        self.encode_block(logical, y, &targets, &anc)
    }

    /// Measures the generators on `block` in list order, then maps the
    /// block back to `t` qubits through `V_{y'}†` for the measured `y'`.
    /// The logical qubits take the first `t` block labels.
    pub fn decode_block<S: Register, R: Rng + ?Sized>(
        &self,
        state: &S,
        block: &[QubitLabel],
        rng: &mut R,
    ) -> Result<(Vec<u8>, S)> {
        if block.len() != self.u {
            return Err(invalid(format!(
                "block has {} qubits, code has {}",
                block.len(),
                self.u
            )));
        }
        let mut s = state.clone();
        let mut measured = Vec::with_capacity(self.generators.len());
        for g in &self.generators {
            measured.push(s.measure_pauli(block, g, rng)?);
        }
        let v = self.encoder(&measured)?;
        let (d, k) = (1usize << self.u, 1usize << self.t);
        let mut vdag = vec![C64::new(0.0, 0.0); d * k];
        for b in 0..d {
            for j in 0..k {
                vdag[j * d + b] = v[b * k + j].conj();
            }
        }
        let (out, _) = s.map_qubits(block, &vdag, &block[..self.t])?;
        Ok((measured, out))
    }

    /// Decodes a standalone `u`-qubit register (all of its qubits, in order).
    pub fn decode_coset<S: Register, R: Rng + ?Sized>(
        &self,
        physical: &S,
        rng: &mut R,
    ) -> Result<(Vec<u8>, S)> {
        let block = physical.labels().to_vec();
        self.decode_block(physical, &block, rng)
    }
}

/// Slot offset reserved for code ancillas.
pub const ANCILLA_SLOT_BASE: u16 = 0x8000;

/// `count` ancilla labels owned by `owner`, disjoint from ordinary slots.
pub fn ancilla_labels(owner: crate::qstate::Owner, count: usize) -> Vec<QubitLabel> {
    (0..count)
        .map(|i| QubitLabel::new(owner, ANCILLA_SLOT_BASE + i as u16))
        .collect()
}
