//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fail.

use std::fs;
use std::process::Command;
use std::time::Instant;

use qkdnet::adversary::AdversarySpec;
use qkdnet::analysis::{aggregate_statistics, protocol_statistics, verify_all, SuiteOptions};
use qkdnet::auth::{auth_receive, auth_send, keygen, Verdict};
use qkdnet::netproto::{
    check_table_i, check_table_ii, run_protocol, test_and_finalize, NetworkConfig, Protocol, TestVerdict,
    Transcript,
};
use qkdnet::pauli::{audit_family, epsilon_formula, gen_purity_family, PauliOperator, PurityFamily};
use qkdnet::qstate::random::haar_state;
use qkdnet::qstate::{make_cat, split_cat, CatKind, Owner, QubitLabel, C64};
use qkdnet::{derive_seed, seeded_rng, SimRng};
use rand::Rng;

type Outcome = (bool, String);

fn cat_algebra() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in 2..=6usize {
        for m in 1..n {
            let la = QubitLabel::block(Owner::Member(0), 0, m);
            let lb = QubitLabel::block(Owner::Member(1), 0, n - m);
            let all: Vec<_> = la.iter().chain(&lb).copied().collect();
            for kind in CatKind::ALL {
                let whole = make_cat(n, kind, all.clone()).unwrap();
                for form in split_cat(kind) {
                    let mut sum = vec![C64::new(0.0, 0.0); 1 << n];
                    for (a, b) in form {
                        let ab = make_cat(m, a, la.clone())
                            .unwrap()
                            .tensor(&make_cat(n - m, b, lb.clone()).unwrap())
                            .unwrap();
                        for (s, x) in sum.iter_mut().zip(ab.amplitudes()) {
                            *s += x * std::f64::consts::FRAC_1_SQRT_2;
                        }
                    }
                    for (s, w) in sum.iter().zip(whole.amplitudes()) {
                        worst = worst.max((s - w).norm());
                    }
                    cases += 1;
                }
            }
        }
    }
    (worst <= 1e-12, format!("{cases} decompositions, max amplitude error {worst:.1e}"))
}

fn tables(first: bool) -> Outcome {
    let mut rng = seeded_rng(derive_seed(0, if first { 1 } else { 2 }));
    let ns = if first { 2..=6 } else { 2..=5 };
    let mut detail = Vec::new();
    let mut ok = true;
    for n in ns {
        let c = if first { check_table_i(n, 10_000, &mut rng) } else { check_table_ii(n, 10_000, &mut rng) }.unwrap();
        ok &= c.passed();
        detail.push(format!("n={n}:{}x{} viol={}", c.assignments, c.shots_per_assignment, c.violations));
    }
    (ok, detail.join(" "))
}

fn agreement(t: &Transcript) -> f64 {
    let kept: Vec<_> = t.kept().collect();
    kept.iter().filter(|r| r.b_a.is_some() && r.b_a == r.b_b).count() as f64 / kept.len().max(1) as f64
}

fn end_to_end() -> Outcome {
    let mut c1 = NetworkConfig::new(Protocol::Memoryless, 4, 2);
    c1.rounds = 10_000;
    let t1 = run_protocol(&c1, &AdversarySpec::none(), derive_seed(0, 3)).unwrap();
    let mut c2 = NetworkConfig::new(Protocol::WithMemory, 3, 1);
    c2.rounds = 2_000;
    let t2 = run_protocol(&c2, &AdversarySpec::none(), derive_seed(0, 4)).unwrap();
    let (a1, d1, a2, d2) = (agreement(&t1), t1.summary.discard_rate, agreement(&t2), t2.summary.discard_rate);
    let ok = a1 == 1.0 && (d1 - 0.5).abs() <= 0.03 && a2 == 1.0 && d2 == 0.0;
    (ok, format!("P1 agreement={a1} discard={d1:.4} over {}; P2 agreement={a2} discard={d2}", t1.summary.copies))
}

fn family_audit() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (r, s, bound) in [(2, 2, 4.0 / 5.0), (2, 3, 4.0 / 9.0)] {
        let mut fam = gen_purity_family(r, s, derive_seed(0, 5)).unwrap();
        let eps = audit_family(&mut fam).unwrap();
        ok &= eps <= bound && (epsilon_formula(r, s) - bound).abs() < 1e-15;
        detail.push(format!("({r},{s}) audited={eps:.4} bound={bound:.4} keys={}", fam.keys()));
    }
    (ok, detail.join("; "))
}

fn random_pauli(u: usize, rng: &mut SimRng) -> PauliOperator {
    loop {
        let e = PauliOperator::new(u, rng.random_range(0..1 << u), rng.random_range(0..1 << u), 0).unwrap();
        if !e.is_identity() {
            return e;
        }
    }
}

/// Returns (accepted, corrupted) for one transmission through `e`.
fn transmit(fam: &PurityFamily, key: Option<usize>, e: &PauliOperator, rng: &mut SimRng) -> (bool, bool) {
    let psi = haar_state(QubitLabel::block(Owner::Member(1), 0, fam.t()), rng).unwrap();
    let mut keys = keygen(fam, fam.t(), rng).unwrap();
    if let Some(k) = key {
        keys.k = k;
    }
    let mut sent = auth_send(&keys, fam, &psi).unwrap();
    let block = sent.labels().to_vec();
    sent.apply_pauli(&block, e).unwrap();
    let out = auth_receive(&keys, fam, &sent, rng).unwrap();
    match out.verdict {
        Verdict::Reject => (false, false),
        Verdict::Accept => (true, out.logical_state.unwrap().overlap(&psi).unwrap() < 1.0 - 1e-9),
    }
}

fn auth_soundness() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (r, s) in [(2, 2), (2, 3)] {
        let mut fam = gen_purity_family(r, s, derive_seed(0, 100 + s as u64)).unwrap();
        let eps = audit_family(&mut fam).unwrap();
        let mut rng = seeded_rng(derive_seed(0, 200 + s as u64));
        let trials = 10_000;
        let bad = (0..trials)
            .filter(|_| {
                let e = random_pauli(fam.u(), &mut rng);
                transmit(&fam, None, &e, &mut rng).1
            })
            .count();
        let freq = bad as f64 / trials as f64;
        let limit = eps + 3.0 * (eps * (1.0 - eps) / trials as f64).sqrt();
        ok &= freq <= limit;
        // Fixed nonzero-syndrome Pauli for a fixed key.
        let k = rng.random_range(0..fam.keys());
        let e = loop {
            let e = random_pauli(fam.u(), &mut rng);
            if fam.code(k).unwrap().syndrome(&e).unwrap().contains(&1) {
                break e;
            }
        };
        let rejects = (0..1000).filter(|_| !transmit(&fam, Some(k), &e, &mut rng).0).count();
        ok &= rejects == 1000;
        detail.push(format!("({r},{s}) corrupt-accept={freq:.4} limit={limit:.4} fixed-reject={rejects}/1000"));
    }
    (ok, detail.join("; "))
}

fn eavesdropping() -> Outcome {
    let adv: AdversarySpec = "intercept@member1".parse().unwrap();
    let mut c = NetworkConfig::new(Protocol::Memoryless, 2, 1);
    c.rounds = 200;
    c.auth_enabled = false;
    let runs: Vec<Transcript> = (0..200).map(|i| run_protocol(&c, &adv, derive_seed(0, 300 + i)).unwrap()).collect();
    let agg = aggregate_statistics(&runs);
    let err = agg.pooled_error_rate.unwrap_or(f64::NAN);
    // Fail probability of test_and_finalize itself on one transcript.
    let kept: Vec<_> = runs[0].kept().cloned().collect();
    let mut rng = seeded_rng(derive_seed(0, 400));
    let frac = 32.0 / kept.len() as f64 + 1e-9;
    let fails = (0..1000)
        .filter(|_| test_and_finalize(&kept, frac, &mut rng).unwrap().verdict == TestVerdict::Fail)
        .count();
    let fail_p = fails as f64 / 1000.0;
    let ok_eve = (err - 0.25).abs() <= 0.03 && agg.min_test_count >= 32 && agg.detection_frequency >= 0.99 && fail_p >= 0.99;

    let liar: AdversarySpec = "lie-outcome:p=1.0@member2".parse().unwrap();
    let mut c = NetworkConfig::new(Protocol::Memoryless, 3, 1);
    c.rounds = 100;
    c.auth_enabled = false;
    let runs: Vec<Transcript> = (0..200).map(|i| run_protocol(&c, &liar, derive_seed(0, 500 + i)).unwrap()).collect();
    let lagg = aggregate_statistics(&runs);
    let need = 1.0 - 0.5f64.powi(lagg.min_test_count as i32);
    let sigma = (need * (1.0 - need) / runs.len() as f64).sqrt();
    let ok_liar = lagg.min_test_count > 0 && lagg.detection_frequency >= need - 3.0 * sigma - 1e-12;
    let honest = runs.iter().map(protocol_statistics).all(|s| s.test_errors == s.test_count);
    (
        ok_eve && ok_liar && honest,
        format!(
            "intercept error={err:.4} detection={:.3} min_tests={} finalize_fail={fail_p:.3}; liar detection={:.3} min_tests={}",
            agg.detection_frequency, agg.min_test_count, lagg.detection_frequency, lagg.min_test_count
        ),
    )
}

fn inequality_suite() -> Outcome {
    let opts = SuiteOptions { seed: derive_seed(0, 6), ..SuiteOptions::default() };
    let reports = verify_all(&opts).unwrap();
    let ok = reports.iter().all(|r| r.passed) && reports.len() == 6;
    let lines: Vec<String> = reports.iter().map(|r| r.verdict_line()).collect();
    (ok, lines.join(" | "))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let commands: Vec<(Vec<String>, Option<String>)> = vec![
        (
            ["run", "--protocol", "1", "--n", "3", "--rounds", "30", "--seed", "11", "--adversary", "depolarize:p=0.1@member1", "--reveal-secrets", "--out"]
                .iter().map(|s| s.to_string()).chain([p("run.jsonl")]).collect(),
            Some(p("run.jsonl")),
        ),
        (
            ["run", "--protocol", "2", "--n", "3", "--rounds", "30", "--seed", "11", "--out"]
                .iter().map(|s| s.to_string()).chain([p("run2.jsonl")]).collect(),
            Some(p("run2.jsonl")),
        ),
        (
            ["audit-code", "--r", "2", "--s", "3", "--seed", "7", "--out"].iter().map(|s| s.to_string()).chain([p("fam.json")]).collect(),
            Some(p("fam.json")),
        ),
        (
            ["verify-inequalities", "--trials", "20", "--seed", "3", "--channel-draws", "5", "--composed-draws", "3", "--haar-samples", "100", "--csv"]
                .iter().map(|s| s.to_string()).chain([p("v.csv")]).collect(),
            Some(p("v.csv")),
        ),
        (["tables", "--shots", "500", "--seed", "4"].iter().map(|s| s.to_string()).collect(), None),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (args, file) in &commands {
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let o = Command::new(env!("CARGO_BIN_EXE_qkdnet")).args(args).output().unwrap();
            let f = file.as_ref().map(|f| fs::read(f).unwrap()).unwrap_or_default();
            outputs.push((o.status.code(), o.stdout, f));
        }
        let same = outputs[0] == outputs[1];
        ok &= same;
        detail.push(format!("{}={}", args[0], if same { "identical" } else { "DIFFERENT" }));
    }
    (ok, detail.join(" "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 cat-state-algebra", cat_algebra),
        ("2 table-i-oracle", || tables(true)),
        ("3 table-ii-oracle", || tables(false)),
        ("4 end-to-end", end_to_end),
        ("5 purity-family-audit", family_audit),
        ("6 authentication-soundness", auth_soundness),
        ("7 eavesdropping-detection", eavesdropping),
        ("8 inequality-suite", inequality_suite),
        ("9 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let (ok, detail) = check();
        failed += usize::from(!ok);
        println!(
            "{} criterion {name}: {detail} ({:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
