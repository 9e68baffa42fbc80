use rand::Rng;
use serde::{Deserialize, Serialize};

use super::code::StabilizerCode;
use super::gf2m::Field;
use super::operator::PauliOperator;
use crate::error::{invalid, Error, Result};

/// Largest `u` for which the exact audit keeps a dense tally over all
/// `4^u` Paulis.
pub const MAX_EXHAUSTIVE_AUDIT_QUBITS: usize = 12;

/// Keyed family `{D_k}` of `[[u = rs, t = (r−1)s]]` stabilizer codes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityFamily {
    pub r: usize,
    pub s: usize,
    /// Code for key `k` at index `k`.
    pub codes: Vec<StabilizerCode>,
    pub epsilon_formula: f64,
    pub epsilon_audited: Option<f64>,
}

/// `2r / (2^s + 1)`.
pub fn epsilon_formula(r: usize, s: usize) -> f64 {
    2.0 * r as f64 / (2f64.powi(s as i32) + 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyOptions {
    /// Key count; `None` means `2^s`.
    pub keys: Option<usize>,
    /// Replacement steps allowed per key count.
    pub max_iterations: usize,
    /// Steps without a new best excess after which a key count is abandoned.
    pub stall_limit: usize,
    /// Candidate codes drawn per step.
    pub candidates: usize,
    /// Times the default key count may double when the search stalls.
    pub max_doublings: usize,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        Self {
            keys: None,
            max_iterations: 20_000,
            stall_limit: 150,
            candidates: 8,
            max_doublings: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuditMode {
    /// Exact: every Pauli on `u` qubits, up to phase.
    Exhaustive,
    /// Lower bound from `samples` uniformly random nonidentity Paulis.
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub mode: AuditMode,
    pub keys: usize,
    pub epsilon: f64,
    /// Number of keys for which `witness` is undetected and logical.
    pub count: usize,
    pub witness: Option<PauliOperator>,
}

impl PurityFamily {
    /// Wraps explicit codes; all must share `(u, t) = (rs, (r−1)s)`.
    pub fn from_codes(r: usize, s: usize, codes: Vec<StabilizerCode>) -> Result<Self> {
        check_params(r, s)?;
        if codes.is_empty() {
            return Err(invalid("family needs at least one code"));
        }
        for c in &codes {
            if c.u() != r * s || c.t() != (r - 1) * s {
                return Err(invalid(format!(
                    "code [[{}, {}]] does not match (u, t) = ({}, {})",
                    c.u(),
                    c.t(),
                    r * s,
                    (r - 1) * s
                )));
            }
        }
        Ok(Self {
            r,
            s,
            codes,
            epsilon_formula: epsilon_formula(r, s),
            epsilon_audited: None,
        })
    }

    pub fn u(&self) -> usize {
        self.r * self.s
    }

    pub fn t(&self) -> usize {
        (self.r - 1) * self.s
    }

    pub fn keys(&self) -> usize {
        self.codes.len()
    }

    pub fn code(&self, key: usize) -> Result<&StabilizerCode> {
        self.codes
            .get(key)
            .ok_or_else(|| invalid(format!("key {key} outside family of {}", self.codes.len())))
    }

    /// Error bound for security accounting: the audited value when known,
    /// else the formula.
    pub fn epsilon(&self) -> f64 {
        self.epsilon_audited.unwrap_or(self.epsilon_formula)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::State(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(s).map_err(|e| invalid(e.to_string()))?;
        let check = Self::from_codes(f.r, f.s, f.codes.clone())?;
        if (check.epsilon_formula - f.epsilon_formula).abs() > 1e-12 {
            return Err(invalid("epsilon_formula disagrees with (r, s)"));
        }
        Ok(f)
    }
}

fn check_params(r: usize, s: usize) -> Result<()> {
    if r < 2 || s < 2 {
        return Err(invalid(format!("family parameters must be ≥ 2, got r={r}, s={s}")));
    }
    if r * s > super::code::MAX_CODE_QUBITS {
        return Err(Error::Capacity {
            what: "code qubits",
            requested: r * s,
            limit: super::code::MAX_CODE_QUBITS,
        });
    }
    Ok(())
}

/// Undetected logical errors of a code, enumerated as compact symplectic
/// vectors: the normalizer minus the stabilizer group.
struct Undetected {
    stab: Vec<u32>,
    logical: Vec<u32>,
}

impl Undetected {
    fn new(code: &StabilizerCode) -> Self {
        let mut stab = vec![0u32; 1 << code.generators().len()];
        for i in 1..stab.len() {
            stab[i] = stab[i & (i - 1)]
                ^ code.generators()[i.trailing_zeros() as usize].to_sym() as u32;
        }
        let logical = code
            .logical_x()
            .iter()
            .chain(code.logical_z())
            .map(|p| p.to_sym() as u32)
            .collect();
        Self { stab, logical }
    }

    fn for_each(&self, mut f: impl FnMut(usize)) {
        let mut l = 0u32;
        for i in 1usize..1 << self.logical.len() {
            l ^= self.logical[i.trailing_zeros() as usize];
            for &g in &self.stab {
                f((l ^ g) as usize);
            }
        }
    }
}

/// Per-Pauli count of keys under which it is undetected and logical.
struct Tally {
    counts: Vec<u16>,
}

impl Tally {
    fn new(u: usize) -> Self {
        Self {
            counts: vec![0; 1 << (2 * u)],
        }
    }

    fn add(&mut self, set: &Undetected) {
        set.for_each(|e| self.counts[e] += 1);
    }

    fn remove(&mut self, set: &Undetected) {
        set.for_each(|e| self.counts[e] -= 1);
    }

    fn max(&self) -> (usize, u16) {
        self.counts
            .iter()
            .enumerate()
            .fold((0, 0), |best, (i, &c)| if c > best.1 { (i, c) } else { best })
    }
}

/// Search potential `w[n]` of a Pauli counted `n` times: geometric in `n`,
/// with a large penalty above the allowed count.
struct Potential {
    w: Vec<f64>,
}

impl Potential {
    fn new(keys: usize, cap: u16) -> Self {
        let w = (0..=keys + 1)
            .map(|n| {
                let base = 4f64.powi(n.min(400) as i32);
                if n > usize::from(cap) {
                    base * 1e6
                } else {
                    base
                }
            })
            .collect();
        Self { w }
    }

    /// Potential change from adding the set to the tally.
    fn add_cost(&self, t: &Tally, set: &Undetected) -> f64 {
        let mut d = 0.0;
        set.for_each(|e| {
            let n = usize::from(t.counts[e]);
            d += self.w[n + 1] - self.w[n];
        });
        d
    }

    /// Potential released by removing a set already in the tally.
    fn removal_gain(&self, t: &Tally, set: &Undetected) -> f64 {
        let mut d = 0.0;
        set.for_each(|e| {
            let n = usize::from(t.counts[e]);
            d += self.w[n] - self.w[n - 1];
        });
        d
    }
}

/// Random code whose stabilizer group is a GF(2^s)-line through a uniformly
/// random nonzero point of GF(2^s)^{2r}.
fn random_line_code<R: Rng + ?Sized>(field: &Field, r: usize, rng: &mut R) -> Result<StabilizerCode> {
    let q = field.order();
    let point = loop {
        let v: Vec<u32> = (0..2 * r).map(|_| rng.random_range(0..q)).collect();
        if v.iter().any(|&c| c != 0) {
            break v;
        }
    };
    let u = r * field.degree();
    let gens = field
        .line_basis(&point)
        .into_iter()
        .map(|g| PauliOperator::from_sym(u, g))
        .collect();
    StabilizerCode::from_generators(u, gens)
}

/// Generates an audited family whose exact error is at most `2r/(2^s+1)`.
///
/// Candidate codes have stabilizer groups that are GF(2^s)-linear lines,
/// and a local search replaces codes until no Pauli is undetected under
/// more than the allowed number of keys. The key count starts at `2^s`;
/// when the search stalls there it doubles (at most
/// [`FamilyOptions::max_doublings`] times) before failing.
pub fn gen_purity_family(r: usize, s: usize, seed: u64) -> Result<PurityFamily> {
    gen_purity_family_with(r, s, seed, &FamilyOptions::default())
}

/// As [`gen_purity_family`] with explicit options. Families beyond the
/// dense-audit cap are drawn at random and left unaudited.
pub fn gen_purity_family_with(
    r: usize,
    s: usize,
    seed: u64,
    opts: &FamilyOptions,
) -> Result<PurityFamily> {
    check_params(r, s)?;
    let field = Field::new(s)?;
    let mut rng = crate::seeded_rng(seed);
    let base_keys = opts.keys.unwrap_or(1 << s);
    if base_keys == 0 {
        return Err(invalid("family needs at least one key"));
    }
    if r * s > MAX_EXHAUSTIVE_AUDIT_QUBITS {
        let codes = (0..base_keys)
            .map(|_| random_line_code(&field, r, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        return PurityFamily::from_codes(r, s, codes);
    }
    let doublings = if opts.keys.is_some() { 0 } else { opts.max_doublings };
    for d in 0..=doublings {
        let keys = base_keys << d;
        if let Some(f) = search(r, s, &field, keys, opts, &mut rng)? {
            return Ok(f);
        }
    }
    Err(Error::State(format!(
        "no ({r}, {s}) family with audited error ≤ {:.6} found with up to {} keys",
        epsilon_formula(r, s),
        base_keys << doublings
    )))
}

fn search(
    r: usize,
    s: usize,
    field: &Field,
    keys: usize,
    opts: &FamilyOptions,
    rng: &mut crate::SimRng,
) -> Result<Option<PurityFamily>> {
    let u = r * s;
    let eps = epsilon_formula(r, s);
    let cap = (eps * keys as f64 + 1e-9).floor().min(f64::from(u16::MAX - 1)) as u16;
    let pot = Potential::new(keys, cap);
    let mut tally = Tally::new(u);
    let mut codes: Vec<StabilizerCode> = Vec::with_capacity(keys);
    let mut sets: Vec<Undetected> = Vec::with_capacity(keys);
    let draw = |rng: &mut crate::SimRng, tally: &Tally| -> Result<(StabilizerCode, Undetected, f64)> {
        let mut best: Option<(StabilizerCode, Undetected, f64)> = None;
        for _ in 0..opts.candidates.max(1) {
            let c = random_line_code(field, r, rng)?;
            let set = Undetected::new(&c);
            let d = pot.add_cost(tally, &set);
            if best.as_ref().is_none_or(|b| d < b.2) {
                best = Some((c, set, d));
            }
        }
        Ok(best.expect("at least one candidate"))
    };
    for _ in 0..keys {
        let (c, set, _) = draw(rng, &tally)?;
        tally.add(&set);
        codes.push(c);
        sets.push(set);
    }
    let excess = |t: &Tally| -> usize {
        t.counts.iter().map(|&n| usize::from(n.saturating_sub(cap))).sum()
    };
    let mut best_excess = excess(&tally);
    let mut since_best = 0;
    let mut iterations = 0;
    while best_excess > 0 {
        if iterations >= opts.max_iterations || since_best >= opts.stall_limit {
            return Ok(None);
        }
        iterations += 1;
        since_best += 1;
        // Replace the code holding the most potential, or a random one every
        // few steps to escape plateaus.
        let forced = iterations % 4 == 0;
        let victim = if forced {
            rng.random_range(0..keys)
        } else {
            (0..keys)
                .map(|k| (k, pot.removal_gain(&tally, &sets[k])))
                .fold((0, f64::MIN), |b, x| if x.1 > b.1 { x } else { b })
                .0
        };
        let gain = pot.removal_gain(&tally, &sets[victim]);
        tally.remove(&sets[victim]);
        let (c, set, cost) = draw(rng, &tally)?;
        if forced || cost <= gain {
            tally.add(&set);
            codes[victim] = c;
            sets[victim] = set;
        } else {
            tally.add(&sets[victim]);
        }
        let now = excess(&tally);
        if now < best_excess {
            best_excess = now;
            since_best = 0;
        }
    }
    let mut family = PurityFamily::from_codes(r, s, codes)?;
    let (_, worst) = tally.max();
    family.epsilon_audited = Some(f64::from(worst) / keys as f64);
    Ok(Some(family))
}

/// Exact audit; stores and returns `epsilon_audited`.
pub fn audit_family(family: &mut PurityFamily) -> Result<f64> {
    let report = audit_family_with(family, AuditMode::Exhaustive)?;
    Ok(report.epsilon)
}

/// Audit in the given mode. Only the exhaustive mode stores its result in
/// `epsilon_audited`; a sampled audit is a lower bound.
pub fn audit_family_with(family: &mut PurityFamily, mode: AuditMode) -> Result<AuditReport> {
    let u = family.u();
    let keys = family.keys();
    let report = match mode {
        AuditMode::Exhaustive => {
            if u > MAX_EXHAUSTIVE_AUDIT_QUBITS {
                return Err(Error::Capacity {
                    what: "exhaustively audited code qubits",
                    requested: u,
                    limit: MAX_EXHAUSTIVE_AUDIT_QUBITS,
                });
            }
            let mut tally = Tally::new(u);
            for c in &family.codes {
                tally.add(&Undetected::new(c));
            }
            let (idx, count) = tally.max();
            family.epsilon_audited = Some(f64::from(count) / keys as f64);
            AuditReport {
                mode,
                keys,
                epsilon: f64::from(count) / keys as f64,
                count: count as usize,
                witness: (count > 0).then(|| PauliOperator::from_sym(u, idx as u128)),
            }
        }
        AuditMode::Sampled { samples, seed } => {
            let mut rng = crate::seeded_rng(seed);
            let mask = if u == 64 { u64::MAX } else { (1u64 << u) - 1 };
            let mut best: (usize, Option<PauliOperator>) = (0, None);
            for _ in 0..samples {
                let e = PauliOperator::new(u, rng.random::<u64>() & mask, rng.random::<u64>() & mask, 0)?;
                if e.is_identity() {
                    continue;
                }
                let mut count = 0;
                for c in &family.codes {
                    if c.decompose(&e)?.is_undetected_logical() {
                        count += 1;
                    }
                }
                if count > best.0 {
                    best = (count, Some(e));
                }
            }
            AuditReport {
                mode,
                keys,
                epsilon: best.0 as f64 / keys as f64,
                count: best.0,
                witness: best.1,
            }
        }
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_values() {
        assert!((epsilon_formula(2, 2) - 0.8).abs() < 1e-15);
        assert!((epsilon_formula(2, 3) - 4.0 / 9.0).abs() < 1e-15);
        assert!((epsilon_formula(3, 4) - 6.0 / 17.0).abs() < 1e-15);
    }

    #[test]
    fn small_families_meet_the_bound() {
        for (r, s) in [(2, 2), (2, 3), (3, 3)] {
            let mut fam = gen_purity_family(r, s, 1).unwrap();
            assert_eq!((fam.u(), fam.t()), (r * s, (r - 1) * s));
            let stored = fam.epsilon_audited.unwrap();
            let fresh = audit_family(&mut fam).unwrap();
            assert_eq!(stored, fresh);
            assert!(fresh <= fam.epsilon_formula + 1e-12, "({r},{s}): {fresh}");
        }
    }

    #[test]
    fn bad_parameters() {
        assert!(gen_purity_family(1, 3, 0).is_err());
        assert!(gen_purity_family(2, 1, 0).is_err());
        let opts = FamilyOptions {
            keys: Some(0),
            ..FamilyOptions::default()
        };
        assert!(gen_purity_family_with(2, 2, 0, &opts).is_err());
    }

    #[test]
    fn single_code_family_is_maximally_bad() {
        let code = StabilizerCode::random(4, 2, &mut crate::seeded_rng(3)).unwrap();
        let mut fam = PurityFamily::from_codes(2, 2, vec![code]).unwrap();
        let report = audit_family_with(&mut fam, AuditMode::Exhaustive).unwrap();
        assert_eq!(report.epsilon, 1.0);
        let w = report.witness.unwrap();
        assert!(fam.codes[0].decompose(&w).unwrap().is_undetected_logical());
    }

    #[test]
    fn sampled_audit_bounds_exact_from_below() {
        let mut fam = gen_purity_family(2, 3, 4).unwrap();
        let exact = fam.epsilon_audited.unwrap();
        let sampled = audit_family_with(
            &mut fam,
            AuditMode::Sampled {
                samples: 500,
                seed: 1,
            },
        )
        .unwrap();
        assert!(sampled.epsilon <= exact);
        assert_eq!(fam.epsilon_audited, Some(exact));
    }

    #[test]
    fn exhaustive_audit_capacity() {
        let code = StabilizerCode::random(13, 12, &mut crate::seeded_rng(1)).unwrap();
        let mut fam = PurityFamily::from_codes(13, 1, vec![code]);
        assert!(fam.is_err());
        let codes = vec![StabilizerCode::random(14, 7, &mut crate::seeded_rng(1)).unwrap()];
        fam = PurityFamily::from_codes(2, 7, codes);
        let mut fam = fam.unwrap();
        assert!(matches!(audit_family(&mut fam), Err(Error::Capacity { .. })));
    }

    #[test]
    fn deterministic_and_json_round_trip() {
        let a = gen_purity_family(2, 3, 9).unwrap();
        let b = gen_purity_family(2, 3, 9).unwrap();
        assert_eq!(a, b);
        let back = PurityFamily::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a);
        assert!(PurityFamily::from_json("{}").is_err());
    }

    #[test]
    fn tally_matches_direct_decomposition() {
        // The dense tally must agree with per-operator decomposition.
        let fam = gen_purity_family(2, 2, 5).unwrap();
        let mut tally = Tally::new(4);
        for c in &fam.codes {
            tally.add(&Undetected::new(c));
        }
        for idx in 1..1u128 << 8 {
            let e = PauliOperator::from_sym(4, idx);
            let direct = fam
                .codes
                .iter()
                .filter(|c| c.decompose(&e).unwrap().is_undetected_logical())
                .count();
            assert_eq!(tally.counts[idx as usize] as usize, direct, "{e}");
        }
    }
}
