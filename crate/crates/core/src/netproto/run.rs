use rand::Rng;

use super::config::{NetworkConfig, Protocol};
use super::finalize::{test_and_finalize, TestVerdict};
use super::keybits::{center_basis, derive_key_bits, keeps, ring_collect_with, y_bar, y_count};
use super::transcript::{
    AbortCause, AbortEvent, CopyStatus, RoundRecord, RunVerdict, Summary, Transcript,
};
use crate::adversary::{apply_attack_pure, corrupt_announcement, AdversarySpec, Announcement};
use crate::auth::{keygen, receive_block, send_block, Verdict};
use crate::error::{invalid, Error, Result};
use crate::pauli::{ancilla_labels, gen_purity_family_with, FamilyOptions, PurityFamily};
use crate::qstate::{make_cat, CatKind, MeasurementBasis, Owner, PureStateVector, QubitLabel};
use crate::{derive_seed, seeded_rng, SimRng};

/// Purity-testing families for a run: one per member, or a single shared
/// one. Empty when authentication is off.
pub fn prepare_families(config: &NetworkConfig, seed: u64) -> Result<Vec<PurityFamily>> {
    if !config.auth_enabled {
        return Ok(Vec::new());
    }
    let (r, s) = config.family_params;
    let opts = FamilyOptions {
        keys: config.family_keys,
        ..FamilyOptions::default()
    };
    let count = if config.shared_family { 1 } else { config.n };
    (0..count)
        .map(|i| gen_purity_family_with(r, s, derive_seed(seed, 1 + i as u64), &opts))
        .collect()
}

pub fn run_protocol1(config: &NetworkConfig, adversary: &AdversarySpec, seed: u64) -> Result<Transcript> {
    if config.protocol != Protocol::Memoryless {
        return Err(invalid("run_protocol1 needs protocol 1"));
    }
    run_protocol(config, adversary, seed)
}

pub fn run_protocol2(config: &NetworkConfig, adversary: &AdversarySpec, seed: u64) -> Result<Transcript> {
    if config.protocol != Protocol::WithMemory {
        return Err(invalid("run_protocol2 needs protocol 2"));
    }
    run_protocol(config, adversary, seed)
}

/// Runs the configured protocol with families derived from `seed`.
pub fn run_protocol(config: &NetworkConfig, adversary: &AdversarySpec, seed: u64) -> Result<Transcript> {
    config.validate()?;
    let families = prepare_families(config, seed)?;
    run_protocol_with_families(config, adversary, &families, seed)
}

/// Runs the configured protocol with caller-supplied families (one shared,
/// or one per member).
pub fn run_protocol_with_families(
    config: &NetworkConfig,
    adversary: &AdversarySpec,
    families: &[PurityFamily],
    seed: u64,
) -> Result<Transcript> {
    config.validate()?;
    adversary.check_members(config.n)?;
    let block = if config.auth_enabled {
        let expected = if config.shared_family { 1 } else { config.n };
        if families.len() != expected {
            return Err(invalid(format!("expected {expected} families, got {}", families.len())));
        }
        let b = families[0].t();
        if families.iter().any(|f| f.t() != b || f.u() != families[0].u()) || config.t % b != 0 {
            return Err(invalid("families do not match the configured block size"));
        }
        b
    } else {
        1
    };
    let mut sim = Simulation {
        config,
        adversary,
        families,
        block,
        rng: seeded_rng(derive_seed(seed, 0)),
        records: Vec::new(),
        events: Vec::new(),
    };
    let mut aborted = 0;
    for round in 0..config.rounds {
        if !sim.run_round(round)? {
            aborted += 1;
        }
    }
    sim.finish(seed, aborted)
}

struct Simulation<'a> {
    config: &'a NetworkConfig,
    adversary: &'a AdversarySpec,
    families: &'a [PurityFamily],
    block: usize,
    rng: SimRng,
    records: Vec<RoundRecord>,
    events: Vec<AbortEvent>,
}

fn random_xy<R: Rng + ?Sized>(rng: &mut R) -> MeasurementBasis {
    if rng.random_bool(0.5) {
        MeasurementBasis::Y
    } else {
        MeasurementBasis::X
    }
}

impl<'a> Simulation<'a> {
    fn copy_labels(&self, copy: usize) -> Vec<QubitLabel> {
        let mut l: Vec<QubitLabel> = (0..self.config.n)
            .map(|mu| QubitLabel::member(mu as u16, copy as u16))
            .collect();
        if self.config.protocol == Protocol::WithMemory {
            l.push(QubitLabel::center(copy as u16));
        }
        l
    }

    fn family(&self, member: usize) -> &'a PurityFamily {
        &self.families[if self.config.shared_family { 0 } else { member }]
    }

    fn transit(&mut self, state: &mut PureStateVector, member: u16) -> Result<()> {
        for spec in self.adversary.channels_for(member) {
            apply_attack_pure(state, spec, &mut self.rng)?;
        }
        Ok(())
    }

    /// Returns `false` when a syndrome rejection aborted the round.
    fn run_round(&mut self, round: usize) -> Result<bool> {
        let mut pending = Vec::with_capacity(self.config.t);
        for g in 0..self.config.t / self.block {
            let copies = g * self.block..(g + 1) * self.block;
            let mut state: Option<PureStateVector> = None;
            for c in copies.clone() {
                let labels = self.copy_labels(c);
                let cat = make_cat(labels.len(), CatKind::PhiPlus, labels)?;
                state = Some(match state {
                    None => cat,
                    Some(s) => s.tensor(&cat)?,
                });
            }
            let mut state = state.expect("block holds at least one copy");
            for mu in 0..self.config.n {
                let id = mu as u16;
                if !self.config.auth_enabled {
                    self.transit(&mut state, id)?;
                    continue;
                }
                let owner = Owner::Member(id);
                let fam = self.family(mu);
                let targets = QubitLabel::block(owner, copies.start as u16, self.block);
                let anc = ancilla_labels(owner, fam.u() - fam.t());
                let keys = keygen(fam, self.block, &mut self.rng)?;
                state = send_block(&state, fam, &keys, &targets, &anc)?;
                self.transit(&mut state, id)?;
                let mut physical = targets;
                physical.extend_from_slice(&anc);
                let out = receive_block(&state, fam, &keys, &physical, &mut self.rng)?;
                match (out.verdict, out.logical_state) {
                    (Verdict::Accept, Some(s)) => state = s,
                    _ => {
                        self.events.push(AbortEvent {
                            cause: AbortCause::SyndromeReject,
                            round: Some(round),
                            member: Some(id),
                            detail: format!(
                                "copies {}..{}: measured syndrome {:?} differs from the key",
                                copies.start, copies.end, out.measured_syndrome
                            ),
                        });
                        return Ok(false);
                    }
                }
            }
            for c in copies {
                let rec = self.measure_copy(&mut state, round, c)?;
                pending.push(rec);
            }
        }
        let dropped = pending.iter().filter(|r| r.status == CopyStatus::RelayDropped).count();
        if dropped > 0 {
            self.events.push(AbortEvent {
                cause: AbortCause::RelayDropped,
                round: Some(round),
                member: None,
                detail: format!("{dropped} parity collections never completed"),
            });
        }
        if pending.iter().any(|r| r.status == CopyStatus::Undetermined) {
            self.events.push(AbortEvent {
                cause: AbortCause::CenterWithheld,
                round: Some(round),
                member: None,
                detail: "center outcomes not announced; correlation undetermined".into(),
            });
        }
        self.records.extend(pending);
        Ok(true)
    }

    fn measure_copy(
        &mut self,
        state: &mut PureStateVector,
        round: usize,
        copy: usize,
    ) -> Result<RoundRecord> {
        let cfg = self.config;
        let mut true_bases = Vec::with_capacity(cfg.n);
        let mut bases = Vec::with_capacity(cfg.n);
        let mut outcomes = Vec::with_capacity(cfg.n);
        for mu in 0..cfg.n {
            let b = random_xy(&mut self.rng);
            let (o, rest) = state.measure(QubitLabel::member(mu as u16, copy as u16), b, &mut self.rng)?;
            *state = rest;
            let said = corrupt_announcement(
                Announcement::Basis(b),
                self.adversary.dishonest(mu as u16),
                &mut self.rng,
            );
            bases.push(match said {
                Some(Announcement::Basis(a)) => a,
                _ => b,
            });
            true_bases.push(b);
            outcomes.push(o);
        }
        let y_a = y_count(&bases[..cfg.m]);
        let y_b = y_count(&bases[cfg.m..]);
        let mut rec = RoundRecord {
            round,
            copy,
            y_a,
            y_b,
            ybar_a: y_bar(y_a),
            ybar_b: y_bar(y_b),
            status: CopyStatus::Kept,
            ..RoundRecord::default()
        };
        match cfg.protocol {
            Protocol::Memoryless => {
                if !keeps(y_a, y_b) {
                    rec.status = CopyStatus::DiscardedParity;
                }
            }
            Protocol::WithMemory => {
                let cb = center_basis(y_a, y_b);
                let (c, rest) = state.measure(QubitLabel::center(copy as u16), cb, &mut self.rng)?;
                *state = rest;
                rec.center_basis = Some(cb);
                if cfg.center_withholds {
                    rec.status = CopyStatus::Undetermined;
                } else {
                    rec.center_outcome = Some(c);
                }
            }
        }
        if rec.status == CopyStatus::Kept {
            let a = self.collect(&outcomes, cfg.party_a(), cfg.collector_a)?;
            let b = self.collect(&outcomes, cfg.party_b(), cfg.collector_b)?;
            match (a, b) {
                (Some(m_a), Some(m_b)) => {
                    rec.m_a = Some(m_a);
                    rec.m_b = Some(m_b);
                    let (b_a, b_b) = derive_key_bits(&rec)?;
                    rec.b_a = Some(b_a);
                    rec.b_b = Some(b_b);
                }
                _ => rec.status = CopyStatus::RelayDropped,
            }
        }
        rec.bases = bases;
        rec.true_bases = Some(true_bases);
        rec.outcomes = Some(outcomes);
        Ok(rec)
    }

    /// Ring collection over one party, starting at its collector.
    fn collect(
        &mut self,
        outcomes: &[u8],
        party: std::ops::Range<usize>,
        collector: usize,
    ) -> Result<Option<u8>> {
        let size = party.len();
        let ring: Vec<usize> = (0..size).map(|i| party.start + (collector + i) % size).collect();
        let bits: Vec<u8> = ring.iter().map(|&mu| outcomes[mu]).collect();
        let r = self.rng.random_range(0..2u8);
        let (adversary, rng) = (self.adversary, &mut self.rng);
        let out = ring_collect_with(&bits, r, |i, o| {
            match corrupt_announcement(Announcement::Bit(o), adversary.dishonest(ring[i] as u16), rng) {
                Some(Announcement::Bit(v)) => Some(v),
                _ => None,
            }
        })?;
        Ok(out.map(|(p, _)| p))
    }

    fn finish(mut self, seed: u64, aborted: usize) -> Result<Transcript> {
        let cfg = self.config;
        let kept: Vec<RoundRecord> = self
            .records
            .iter()
            .filter(|r| r.status == CopyStatus::Kept)
            .cloned()
            .collect();
        let count = |s: CopyStatus| self.records.iter().filter(|r| r.status == s).count();
        let (discarded, relay_dropped, undetermined) = (
            count(CopyStatus::DiscardedParity),
            count(CopyStatus::RelayDropped),
            count(CopyStatus::Undetermined),
        );
        let (verdict, tests, key_a, key_b, error_rate) =
            match test_and_finalize(&kept, cfg.test_fraction, &mut self.rng) {
                Err(Error::InvalidArgument(_)) => (RunVerdict::Inconclusive, Vec::new(), None, None, None),
                Err(e) => return Err(e),
                Ok(f) => match f.verdict {
                    TestVerdict::Pass => (
                        RunVerdict::Pass,
                        f.tests,
                        Some(f.key_a),
                        Some(f.key_b),
                        Some(f.observed_error_rate),
                    ),
                    TestVerdict::Fail => {
                        let bad = f.tests.iter().filter(|t| t.b_a != t.b_b).count();
                        self.events.push(AbortEvent {
                            cause: AbortCause::TestBitMismatch,
                            round: None,
                            member: None,
                            detail: format!("{bad} of {} test bits disagree", f.tests.len()),
                        });
                        (RunVerdict::Fail, f.tests, None, None, Some(f.observed_error_rate))
                    }
                },
            };
        let copies = self.records.len();
        let summary = Summary {
            rounds: cfg.rounds,
            copies,
            sifted: kept.len(),
            discarded,
            aborted,
            relay_dropped,
            undetermined,
            test_count: tests.len(),
            key_length: key_a.as_ref().map_or(0, Vec::len),
            error_rate,
            discard_rate: if copies == 0 { 0.0 } else { discarded as f64 / copies as f64 },
            verdict,
        };
        Ok(Transcript {
            config: cfg.clone(),
            seed,
            adversary: self.adversary.to_string(),
            records: self.records,
            events: self.events,
            tests,
            key_a,
            key_b,
            summary,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{AttackSpec, ChannelKind, ChannelSpec, DishonestMode, DishonestSpec};

    fn cfg(protocol: Protocol, n: usize, m: usize, rounds: usize, auth: bool) -> NetworkConfig {
        let mut c = NetworkConfig::new(protocol, n, m);
        c.rounds = rounds;
        c.auth_enabled = auth;
        c
    }

    fn agree(t: &Transcript) -> bool {
        t.kept().all(|r| r.b_a == r.b_b && r.b_a.is_some())
    }

    #[test]
    fn protocol1_honest_agrees() {
        let t = run_protocol1(&cfg(Protocol::Memoryless, 2, 1, 200, true), &AdversarySpec::none(), 5).unwrap();
        assert_eq!(t.summary.verdict, RunVerdict::Pass);
        assert!(agree(&t));
        assert!(t.events.is_empty());
        assert_eq!(t.key_a, t.key_b);
        assert!(t.summary.key_length > 0);
        assert_eq!(t.summary.copies, 400);
    }

    #[test]
    fn protocol1_discards_half() {
        let t = run_protocol1(&cfg(Protocol::Memoryless, 4, 2, 1500, false), &AdversarySpec::none(), 9).unwrap();
        assert!(agree(&t));
        assert!((t.summary.discard_rate - 0.5).abs() < 0.04, "{}", t.summary.discard_rate);
        assert!(t.kept().all(|r| (r.y_a + r.y_b) % 2 == 0));
    }

    #[test]
    fn protocol2_never_discards() {
        let t = run_protocol2(&cfg(Protocol::WithMemory, 3, 1, 150, true), &AdversarySpec::none(), 2).unwrap();
        assert_eq!(t.summary.discarded, 0);
        assert_eq!(t.summary.sifted, t.summary.copies);
        assert!(agree(&t));
        assert_eq!(t.summary.verdict, RunVerdict::Pass);
        assert!(run_protocol1(&cfg(Protocol::WithMemory, 3, 1, 1, true), &AdversarySpec::none(), 2).is_err());
    }

    #[test]
    fn withheld_center_is_undetermined() {
        let mut c = cfg(Protocol::WithMemory, 2, 1, 10, false);
        c.center_withholds = true;
        let t = run_protocol2(&c, &AdversarySpec::none(), 3).unwrap();
        assert_eq!(t.summary.undetermined, t.summary.copies);
        assert_eq!(t.summary.verdict, RunVerdict::Inconclusive);
        assert!(t.events.iter().all(|e| e.cause == AbortCause::CenterWithheld));
    }

    #[test]
    fn intercept_resend_error_rate() {
        let adv = AdversarySpec {
            attacks: vec![AttackSpec::Channel(ChannelSpec {
                kind: ChannelKind::InterceptResend {
                    bases: vec![MeasurementBasis::X, MeasurementBasis::Y],
                },
                member: 1,
            })],
        };
        let t = run_protocol1(&cfg(Protocol::Memoryless, 2, 1, 2000, false), &adv, 11).unwrap();
        let kept: Vec<_> = t.kept().collect();
        let err = kept.iter().filter(|r| r.b_a != r.b_b).count() as f64 / kept.len() as f64;
        assert!((err - 0.25).abs() < 0.03, "{err}");
        assert_eq!(t.summary.verdict, RunVerdict::Fail);
        assert!(t.key_a.is_none());
    }

    #[test]
    fn authenticated_intercept_is_rejected() {
        let adv: AdversarySpec = "intercept@member1".parse().unwrap();
        let t = run_protocol1(&cfg(Protocol::Memoryless, 2, 1, 40, true), &adv, 4).unwrap();
        assert!(t.summary.aborted > 0);
        assert!(t.events.iter().any(|e| e.cause == AbortCause::SyndromeReject));
    }

    #[test]
    fn dishonest_members() {
        let lie = AdversarySpec {
            attacks: vec![AttackSpec::Dishonest(DishonestSpec {
                member: 0,
                mode: DishonestMode::LieOutcome { p: 1.0 },
            })],
        };
        let t = run_protocol1(&cfg(Protocol::Memoryless, 2, 1, 50, false), &lie, 1).unwrap();
        assert!(t.kept().all(|r| r.b_a != r.b_b));
        assert_eq!(t.summary.verdict, RunVerdict::Fail);
        let drop: AdversarySpec = "silent-drop@member2".parse().unwrap();
        let t = run_protocol1(&cfg(Protocol::Memoryless, 3, 1, 20, false), &drop, 1).unwrap();
        assert_eq!(t.summary.sifted, 0);
        assert!(t.summary.relay_dropped > 0);
    }

    #[test]
    fn deterministic_and_round_trips() {
        let c = cfg(Protocol::WithMemory, 2, 1, 30, true);
        let a = run_protocol(&c, &AdversarySpec::none(), 77).unwrap();
        let b = run_protocol(&c, &AdversarySpec::none(), 77).unwrap();
        let (ja, jb) = (a.to_jsonl(true).unwrap(), b.to_jsonl(true).unwrap());
        assert_eq!(ja, jb);
        assert_eq!(Transcript::from_jsonl(&ja).unwrap(), a);
        let redacted = a.to_jsonl(false).unwrap();
        assert!(!redacted.contains("\"kind\":\"keys\""));
        let back = Transcript::from_jsonl(&redacted).unwrap();
        assert!(back.records.iter().all(|r| r.outcomes.is_none() && r.b_a.is_none()));
        assert_eq!(back.summary, a.summary);
        assert_ne!(run_protocol(&c, &AdversarySpec::none(), 78).unwrap().to_jsonl(true).unwrap(), ja);
    }
}
