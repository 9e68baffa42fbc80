//! Transit channels, an intercept-resend eavesdropper, and dishonest
//! behaviour at classical announcement steps.
//!
//! # Spec grammar
//!
//! ```text
//! specs   := item ("," item)*
//! item    := kind (":" key "=" value)* "@" "member" N
//! kind    := identity | depolarize | pauli | intercept | fixed
//!          | lie-basis | lie-outcome | silent-drop
//! ```
//!
//! | kind          | parameters                        |
//! |---------------|-----------------------------------|
//! | `identity`    | none                              |
//! | `depolarize`  | `p` in `[0,1]`                    |
//! | `pauli`       | `px`, `py`, `pz` (remainder is I) |
//! | `intercept`   | `bases` ⊆ `xyz`, default `xy`     |
//! | `fixed`       | `op`, a Pauli string such as `IZ` |
//! | `lie-basis`   | none                              |
//! | `lie-outcome` | `p` in `[0,1]`                    |
//! | `silent-drop` | none                              |
//!
//! Example: `depolarize:p=0.1@member2,lie-outcome:p=1.0@member3`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::pauli::PauliOperator;
use crate::qstate::{Channel, DensityMatrix, MeasurementBasis, Owner, PureStateVector, QubitLabel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ChannelKind {
    Identity,
    /// `ρ ↦ (1−p)ρ + p·I/2` on every transiting qubit.
    Depolarizing { p: f64 },
    /// Independent single-qubit Pauli errors; identity gets the remainder.
    PauliChannel { px: f64, py: f64, pz: f64 },
    /// Measure each transiting qubit in a basis drawn uniformly from
    /// `bases` and forward the observed eigenstate.
    InterceptResend { bases: Vec<MeasurementBasis> },
    /// Fixed operator on the leading qubits of the transiting block.
    FixedPauli { op: PauliOperator },
}

/// A channel acting on everything a member receives in transit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub member: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DishonestMode {
    /// Announces the other of X/Y.
    LieBasis,
    /// Flips each relayed outcome with probability `p`.
    LieOutcome { p: f64 },
    /// Never forwards the ring message.
    SilentDrop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DishonestSpec {
    pub member: u16,
    pub mode: DishonestMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttackSpec {
    Channel(ChannelSpec),
    Dishonest(DishonestSpec),
}

/// Ordered attack list; attacks on one member compose in this order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AdversarySpec {
    pub attacks: Vec<AttackSpec>,
}

fn check_prob(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(invalid(format!("{what} must lie in [0,1], got {p}")));
    }
    Ok(())
}

impl ChannelKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            ChannelKind::Identity | ChannelKind::FixedPauli { .. } => Ok(()),
            ChannelKind::Depolarizing { p } => check_prob(*p, "depolarizing p"),
            ChannelKind::PauliChannel { px, py, pz } => {
                for (w, n) in [(px, "px"), (py, "py"), (pz, "pz")] {
                    check_prob(*w, n)?;
                }
                if px + py + pz > 1.0 + 1e-12 {
                    return Err(invalid("Pauli probabilities exceed 1"));
                }
                Ok(())
            }
            ChannelKind::InterceptResend { bases } => {
                if bases.is_empty() {
                    Err(invalid("intercept needs at least one basis"))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn single_qubit_table(&self) -> Option<Vec<(PauliOperator, f64)>> {
        let op = |c| PauliOperator::single(1, 0, c).expect("valid single-qubit Pauli");
        match *self {
            ChannelKind::Depolarizing { p } => Some(vec![
                (op('I'), 1.0 - 0.75 * p),
                (op('X'), p / 4.0),
                (op('Y'), p / 4.0),
                (op('Z'), p / 4.0),
            ]),
            ChannelKind::PauliChannel { px, py, pz } => Some(vec![
                (op('I'), (1.0 - px - py - pz).max(0.0)),
                (op('X'), px),
                (op('Y'), py),
                (op('Z'), pz),
            ]),
            _ => None,
        }
    }

    /// Averaged CPTP map on an `arity`-qubit transit block.
    pub fn to_channel(&self, arity: usize) -> Result<Channel> {
        self.validate()?;
        let per_qubit = match self {
            ChannelKind::Identity => return Ok(Channel::identity(arity)),
            ChannelKind::FixedPauli { op } => {
                let full = pad_to(op, arity)?;
                return Channel::pauli(&[(full, 1.0)]);
            }
            ChannelKind::InterceptResend { bases } => Channel::measure_prepare(bases)?,
            _ => Channel::pauli(&self.single_qubit_table().expect("Pauli-type kind"))?,
        };
        if arity == 0 {
            return Err(invalid("channel needs at least one qubit"));
        }
        let mut c = per_qubit.clone();
        for _ in 1..arity {
            c = c.tensor(&per_qubit);
        }
        Ok(c)
    }
}

/// `op ⊗ I…` on `arity` qubits.
fn pad_to(op: &PauliOperator, arity: usize) -> Result<PauliOperator> {
    if op.num_qubits() > arity {
        return Err(invalid(format!(
            "operator on {} qubits exceeds transit block of {arity}",
            op.num_qubits()
        )));
    }
    PauliOperator::new(arity, op.x_mask(), op.z_mask(), op.phase_exponent())
}

/// Labels owned by `member`, in slot order.
pub fn member_qubits(labels: &[QubitLabel], member: u16) -> Result<Vec<QubitLabel>> {
    let mut q: Vec<QubitLabel> = labels
        .iter()
        .copied()
        .filter(|l| l.owner == Owner::Member(member))
        .collect();
    if q.is_empty() {
        return Err(invalid(format!("member{member} holds no qubits in this state")));
    }
    q.sort();
    Ok(q)
}

fn sample_table<R: Rng + ?Sized>(table: &[(PauliOperator, f64)], rng: &mut R) -> PauliOperator {
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    for (p, w) in table {
        acc += w;
        if u < acc {
            return *p;
        }
    }
    table[0].0
}

/// Applies `spec` to the member's qubits of a density matrix. Pauli-type
/// channels act exactly; intercept-resend is sampled (Eve's basis and
/// outcome are drawn from `rng`).
pub fn apply_attack<R: Rng + ?Sized>(
    state: &DensityMatrix,
    spec: &ChannelSpec,
    rng: &mut R,
) -> Result<DensityMatrix> {
    spec.kind.validate()?;
    let targets = member_qubits(state.labels(), spec.member)?;
    match &spec.kind {
        ChannelKind::Identity => Ok(state.clone()),
        ChannelKind::FixedPauli { op } => {
            let mut s = state.clone();
            s.apply_pauli(&targets, &pad_to(op, targets.len())?)?;
            Ok(s)
        }
        ChannelKind::InterceptResend { bases } => {
            let mut s = state.clone();
            for q in &targets {
                let b = bases[rng.random_range(0..bases.len())];
                s.measure_in_place(*q, b, rng)?;
            }
            Ok(s)
        }
        kind => {
            let c = kind.to_channel(1)?;
            let mut s = state.clone();
            for q in &targets {
                s = s.apply_channel(&c, &[*q])?;
            }
            Ok(s)
        }
    }
}

/// Trajectory version of [`apply_attack`]: every channel is sampled.
pub fn apply_attack_pure<R: Rng + ?Sized>(
    state: &mut PureStateVector,
    spec: &ChannelSpec,
    rng: &mut R,
) -> Result<()> {
    spec.kind.validate()?;
    let targets = member_qubits(state.labels(), spec.member)?;
    match &spec.kind {
        ChannelKind::Identity => Ok(()),
        ChannelKind::FixedPauli { op } => state.apply_pauli(&targets, &pad_to(op, targets.len())?),
        ChannelKind::InterceptResend { bases } => {
            for q in &targets {
                let b = bases[rng.random_range(0..bases.len())];
                state.measure_in_place(*q, b, rng)?;
            }
            Ok(())
        }
        kind => {
            let table = kind.single_qubit_table().expect("Pauli-type kind");
            for q in &targets {
                let p = sample_table(&table, rng);
                if !p.is_identity() {
                    state.apply_pauli(&[*q], &p)?;
                }
            }
            Ok(())
        }
    }
}

/// A classical value a member announces or relays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Announcement {
    Basis(MeasurementBasis),
    Bit(u8),
}

/// What the member actually announces; `None` when the message is dropped.
/// Lies only touch the kind of announcement the mode targets.
pub fn corrupt_announcement<R: Rng + ?Sized>(
    truth: Announcement,
    spec: Option<&DishonestSpec>,
    rng: &mut R,
) -> Option<Announcement> {
    let Some(spec) = spec else {
        return Some(truth);
    };
    match (spec.mode, truth) {
        (DishonestMode::LieBasis, Announcement::Basis(b)) => Some(Announcement::Basis(match b {
            MeasurementBasis::X => MeasurementBasis::Y,
            MeasurementBasis::Y => MeasurementBasis::X,
            MeasurementBasis::Z => MeasurementBasis::Z,
        })),
        (DishonestMode::LieOutcome { p }, Announcement::Bit(v)) => {
            Some(Announcement::Bit(v ^ u8::from(rng.random::<f64>() < p)))
        }
        (DishonestMode::SilentDrop, Announcement::Bit(_)) => None,
        _ => Some(truth),
    }
}

impl AdversarySpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.attacks.is_empty()
    }

    /// Channels hitting `member`, in declaration order.
    pub fn channels_for(&self, member: u16) -> impl Iterator<Item = &ChannelSpec> {
        self.attacks.iter().filter_map(move |a| match a {
            AttackSpec::Channel(c) if c.member == member => Some(c),
            _ => None,
        })
    }

    /// The first dishonest behaviour declared for `member`.
    pub fn dishonest(&self, member: u16) -> Option<&DishonestSpec> {
        self.attacks.iter().find_map(|a| match a {
            AttackSpec::Dishonest(d) if d.member == member => Some(d),
            _ => None,
        })
    }

    /// Rejects attacks on members outside `0..n`.
    pub fn check_members(&self, n: usize) -> Result<()> {
        for a in &self.attacks {
            let m = match a {
                AttackSpec::Channel(c) => c.member,
                AttackSpec::Dishonest(d) => d.member,
            };
            if usize::from(m) >= n {
                return Err(invalid(format!("member{m} does not exist (n = {n})")));
            }
        }
        Ok(())
    }
}

fn parse_f64(v: &str, key: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| invalid(format!("parameter `{key}` is not a number: `{v}`")))
}

fn parse_item(item: &str) -> Result<AttackSpec> {
    let (body, target) = item
        .rsplit_once('@')
        .ok_or_else(|| invalid(format!("`{item}`: missing `@memberN` target")))?;
    let member: u16 = target
        .strip_prefix("member")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| invalid(format!("`{item}`: target must be `memberN`")))?;
    let mut parts = body.split(':');
    let kind = parts.next().unwrap_or_default();
    let mut params: Vec<(&str, &str)> = Vec::new();
    for p in parts {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| invalid(format!("`{item}`: parameter `{p}` is not key=value")))?;
        if params.iter().any(|(seen, _)| *seen == k) {
            return Err(invalid(format!("`{item}`: repeated parameter `{k}`")));
        }
        params.push((k, v));
    }
    let allow = |keys: &[&str]| -> Result<()> {
        for (k, _) in &params {
            if !keys.contains(k) {
                return Err(invalid(format!("`{item}`: unknown parameter `{k}`")));
            }
        }
        Ok(())
    };
    let get = |k: &str| params.iter().find(|(key, _)| *key == k).map(|(_, v)| *v);
    let need = |k: &str| get(k).ok_or_else(|| invalid(format!("`{item}`: missing `{k}`")));
    let channel = |kind: ChannelKind| -> Result<AttackSpec> {
        kind.validate()?;
        Ok(AttackSpec::Channel(ChannelSpec { kind, member }))
    };
    let dishonest = |mode| Ok(AttackSpec::Dishonest(DishonestSpec { member, mode }));
    match kind {
        "identity" => {
            allow(&[])?;
            channel(ChannelKind::Identity)
        }
        "depolarize" => {
            allow(&["p"])?;
            channel(ChannelKind::Depolarizing {
                p: parse_f64(need("p")?, "p")?,
            })
        }
        "pauli" => {
            allow(&["px", "py", "pz"])?;
            let w = |k| get(k).map_or(Ok(0.0), |v| parse_f64(v, k));
            channel(ChannelKind::PauliChannel {
                px: w("px")?,
                py: w("py")?,
                pz: w("pz")?,
            })
        }
        "intercept" => {
            allow(&["bases"])?;
            let bases = get("bases").unwrap_or("xy");
            let mut out = Vec::new();
            for c in bases.chars() {
                let b = match c.to_ascii_lowercase() {
                    'x' => MeasurementBasis::X,
                    'y' => MeasurementBasis::Y,
                    'z' => MeasurementBasis::Z,
                    _ => return Err(invalid(format!("`{item}`: unknown basis `{c}`"))),
                };
                if !out.contains(&b) {
                    out.push(b);
                }
            }
            channel(ChannelKind::InterceptResend { bases: out })
        }
        "fixed" => {
            allow(&["op"])?;
            channel(ChannelKind::FixedPauli {
                op: need("op")?.parse()?,
            })
        }
        "lie-basis" => {
            allow(&[])?;
            dishonest(DishonestMode::LieBasis)
        }
        "lie-outcome" => {
            allow(&["p"])?;
            let p = parse_f64(need("p")?, "p")?;
            check_prob(p, "lie-outcome p")?;
            dishonest(DishonestMode::LieOutcome { p })
        }
        "silent-drop" => {
            allow(&[])?;
            dishonest(DishonestMode::SilentDrop)
        }
        other => Err(invalid(format!("unknown attack kind `{other}`"))),
    }
}

impl FromStr for AdversarySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "none" {
            return Ok(Self::none());
        }
        let attacks = s
            .split(',')
            .map(|i| parse_item(i.trim()))
            .collect::<Result<_>>()?;
        Ok(Self { attacks })
    }
}

impl fmt::Display for AttackSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (body, member) = match self {
            AttackSpec::Channel(c) => {
                let body = match &c.kind {
                    ChannelKind::Identity => "identity".to_string(),
                    ChannelKind::Depolarizing { p } => format!("depolarize:p={p}"),
                    ChannelKind::PauliChannel { px, py, pz } => {
                        format!("pauli:px={px}:py={py}:pz={pz}")
                    }
                    ChannelKind::InterceptResend { bases } => format!(
                        "intercept:bases={}",
                        bases
                            .iter()
                            .map(|b| b.symbol().to_ascii_lowercase())
                            .collect::<String>()
                    ),
                    ChannelKind::FixedPauli { op } => format!("fixed:op={op}"),
                };
                (body, c.member)
            }
            AttackSpec::Dishonest(d) => {
                let body = match d.mode {
                    DishonestMode::LieBasis => "lie-basis".to_string(),
                    DishonestMode::LieOutcome { p } => format!("lie-outcome:p={p}"),
                    DishonestMode::SilentDrop => "silent-drop".to_string(),
                };
                (body, d.member)
            }
        };
        write!(f, "{body}@member{member}")
    }
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.attacks.is_empty() {
            return write!(f, "none");
        }
        let items: Vec<String> = self.attacks.iter().map(ToString::to_string).collect();
        write!(f, "{}", items.join(","))
    }
}
