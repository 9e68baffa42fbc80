use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use qkdnet::adversary::AdversarySpec;
use qkdnet::analysis::{protocol_statistics, reports_to_csv, verify_all, EpsilonOptions, SuiteOptions};
use qkdnet::netproto::{check_table_i, check_table_ii, run_protocol, NetworkConfig, Protocol, RunVerdict};
use qkdnet::pauli::{audit_family_with, gen_purity_family_with, AuditMode, FamilyOptions, PurityFamily};
use qkdnet::{derive_seed, seeded_rng};

use crate::config_file::ExperimentConfig;
use crate::{AuditArgs, RunArgs, TablesArgs, VerifyArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 2;

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn pretty(v: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

pub fn experiment_from_args(a: RunArgs) -> Result<ExperimentConfig> {
    let protocol = Protocol::try_from(a.protocol).map_err(|e| anyhow!("{e}"))?;
    let mut network = NetworkConfig::new(protocol, a.n, a.m);
    network.t = a.t;
    network.rounds = a.rounds;
    network.test_fraction = a.test_fraction;
    network.auth_enabled = !a.no_auth;
    network.family_params = (a.family_r, a.family_s);
    network.family_keys = a.family_keys;
    network.shared_family = a.shared_family;
    network.collector_a = a.collector_a;
    network.collector_b = a.collector_b;
    network.center_withholds = a.center_withholds;
    let mut exp = ExperimentConfig {
        network,
        adversary: a.adversary,
        out: a.out,
        seed: a.seed,
        reveal_secrets: a.reveal_secrets,
    };
    if let Some(path) = &a.config {
        exp.load_into(path)?;
    }
    Ok(exp)
}

pub fn run(a: RunArgs) -> Result<u8> {
    let exp = experiment_from_args(a)?;
    let seed = exp.seed.ok_or_else(|| anyhow!("--seed is required (no wall-clock seeding)"))?;
    let adversary: AdversarySpec = exp.adversary.parse().map_err(|e| anyhow!("adversary: {e}"))?;
    adversary.check_members(exp.network.n).map_err(|e| anyhow!("adversary: {e}"))?;
    exp.network.validate().map_err(|e| anyhow!("config: {e}"))?;
    let transcript = run_protocol(&exp.network, &adversary, seed)?;
    if let Some(out) = &exp.out {
        write(out, &transcript.to_jsonl(exp.reveal_secrets)?)?;
    }
    let stats = protocol_statistics(&transcript.redacted());
    println!("{}", pretty(&stats)?);
    Ok(match transcript.summary.verdict {
        RunVerdict::Pass => EXIT_OK,
        RunVerdict::Fail | RunVerdict::Inconclusive => EXIT_FAIL,
    })
}

pub fn audit_code(a: AuditArgs) -> Result<u8> {
    let opts = FamilyOptions {
        keys: a.keys,
        ..FamilyOptions::default()
    };
    let mut family = gen_purity_family_with(a.r, a.s, a.seed, &opts)?;
    if a.debug_degenerate {
        let first = family.code(0)?.clone();
        family = PurityFamily::from_codes(a.r, a.s, vec![first])?;
    }
    let mode = match a.sampled {
        Some(samples) => AuditMode::Sampled {
            samples,
            seed: derive_seed(a.seed, 1),
        },
        None => AuditMode::Exhaustive,
    };
    let report = audit_family_with(&mut family, mode)?;
    println!("r = {}, s = {}, u = {}, t = {}", a.r, a.s, family.u(), family.t());
    println!("keys = {}", family.keys());
    println!("epsilon_formula = {}", family.epsilon_formula);
    match mode {
        AuditMode::Exhaustive => println!("epsilon_audited = {}", report.epsilon),
        AuditMode::Sampled { samples, .. } => {
            println!("epsilon_sampled = {} (lower bound from {samples} samples)", report.epsilon)
        }
    }
    if let Some(w) = &report.witness {
        println!("witness = {w} (undetected logical for {} keys)", report.count);
    }
    if let Some(out) = &a.out {
        write(out, &family.to_json()?)?;
    }
    let pass = report.epsilon <= family.epsilon_formula + 1e-12;
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { EXIT_OK } else { EXIT_FAIL })
}

fn parse_dims(s: &str) -> Result<Vec<usize>> {
    let dims: Vec<usize> = if let Some((lo, hi)) = s.split_once('-') {
        let (lo, hi): (usize, usize) = (lo.trim().parse()?, hi.trim().parse()?);
        if lo > hi {
            bail!("empty dimension range {s}");
        }
        (lo..=hi).collect()
    } else {
        s.split(',').map(|d| d.trim().parse::<usize>()).collect::<Result<_, _>>()?
    };
    if dims.is_empty() || dims.iter().any(|&d| !(2..=64).contains(&d)) {
        bail!("dimensions must lie in 2..=64");
    }
    Ok(dims)
}

pub fn verify_inequalities(a: VerifyArgs) -> Result<u8> {
    let opts = SuiteOptions {
        trials: a.trials as usize,
        dims: parse_dims(&a.dims).context("--dims")?,
        tolerance: a.tol,
        seed: a.seed,
        channel_draws: a.channel_draws as usize,
        composed_draws: a.composed_draws as usize,
        epsilon: EpsilonOptions {
            haar_samples: a.haar_samples,
            ..EpsilonOptions::default()
        },
    };
    let reports = verify_all(&opts)?;
    for r in &reports {
        println!("{}", r.verdict_line());
    }
    if let Some(out) = &a.out {
        let slim: Vec<_> = reports
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.rows.clear();
                r
            })
            .collect();
        write(out, &pretty(&serde_json::json!({ "options": opts, "reports": slim }))?)?;
    }
    if let Some(csv) = &a.csv {
        write(csv, &reports_to_csv(&reports))?;
    }
    Ok(if reports.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_FAIL })
}

pub fn tables(a: TablesArgs) -> Result<u8> {
    if a.shots == 0 || a.max_n < 2 || a.max_n_center < 2 {
        bail!("need shots ≥ 1 and maxima ≥ 2");
    }
    let mut rng = seeded_rng(a.seed);
    let mut checks = Vec::new();
    for n in 2..=a.max_n {
        checks.push(check_table_i(n, a.shots, &mut rng)?);
    }
    for n in 2..=a.max_n_center {
        checks.push(check_table_ii(n, a.shots, &mut rng)?);
    }
    for c in &checks {
        println!(
            "{} table {} n={}: assignments={} shots={} violations={}",
            if c.passed() { "PASS" } else { "FAIL" },
            c.table,
            c.n,
            c.assignments,
            c.shots_per_assignment,
            c.violations
        );
    }
    if let Some(out) = &a.out {
        write(out, &pretty(&checks)?)?;
    }
    Ok(if checks.iter().all(|c| c.passed()) { EXIT_OK } else { EXIT_FAIL })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_parsing() {
        assert_eq!(parse_dims("2-4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_dims("2, 8").unwrap(), vec![2, 8]);
        assert!(parse_dims("4-2").is_err());
        assert!(parse_dims("1-3").is_err());
        assert!(parse_dims("x").is_err());
    }
}
