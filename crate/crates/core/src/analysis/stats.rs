use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::netproto::{RunVerdict, Transcript};

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> Option<(f64, f64)> {
    if n == 0 {
        return None;
    }
    let (k, n) = (successes as f64, n as f64);
    let p = k / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Some(((centre - half).max(0.0), (centre + half).min(1.0)))
}

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolStats {
    pub rounds: usize,
    pub copies: usize,
    pub sifted: usize,
    pub sift_rate: f64,
    pub discard_rate: f64,
    pub aborts: BTreeMap<String, usize>,
    pub test_count: usize,
    pub test_errors: usize,
    pub error_rate: Option<f64>,
    /// 95% Wilson interval for the test-bit error rate.
    pub error_ci: Option<(f64, f64)>,
    /// Agreement of `b_A`, `b_B` over all kept copies; needs unredacted
    /// records.
    pub key_agreement_rate: Option<f64>,
    /// A test mismatch or any abort event was recorded.
    pub detected: bool,
    pub verdict: RunVerdict,
}

pub fn protocol_statistics(t: &Transcript) -> ProtocolStats {
    let mut aborts = BTreeMap::new();
    for e in &t.events {
        let key = serde_json::to_value(e.cause)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        *aborts.entry(key).or_insert(0) += 1;
    }
    let test_errors = t.tests.iter().filter(|b| b.b_a != b.b_b).count();
    let kept: Vec<_> = t.kept().collect();
    let key_agreement_rate = if !kept.is_empty() && kept.iter().all(|r| r.b_a.is_some() && r.b_b.is_some()) {
        Some(kept.iter().filter(|r| r.b_a == r.b_b).count() as f64 / kept.len() as f64)
    } else {
        None
    };
    let copies = t.summary.copies;
    ProtocolStats {
        rounds: t.summary.rounds,
        copies,
        sifted: t.summary.sifted,
        sift_rate: if copies == 0 { 0.0 } else { t.summary.sifted as f64 / copies as f64 },
        discard_rate: t.summary.discard_rate,
        aborts,
        test_count: t.tests.len(),
        test_errors,
        error_rate: (!t.tests.is_empty()).then(|| test_errors as f64 / t.tests.len() as f64),
        error_ci: wilson_interval(test_errors, t.tests.len(), Z95),
        key_agreement_rate,
        detected: t.summary.verdict == RunVerdict::Fail || !t.events.is_empty(),
        verdict: t.summary.verdict,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub trials: usize,
    pub detections: usize,
    pub detection_frequency: f64,
    pub detection_ci: Option<(f64, f64)>,
    /// Test errors over test bits, pooled across trials.
    pub pooled_error_rate: Option<f64>,
    pub pooled_error_ci: Option<(f64, f64)>,
    /// Smallest test set seen; the sampling bound `1 − 2^{−k}` uses it.
    pub min_test_count: usize,
}

/// Statistics across repeated runs, e.g. detection frequency of a
/// dishonest member.
pub fn aggregate_statistics(transcripts: &[Transcript]) -> AggregateStats {
    let stats: Vec<ProtocolStats> = transcripts.iter().map(protocol_statistics).collect();
    let detections = stats.iter().filter(|s| s.detected).count();
    let tests: usize = stats.iter().map(|s| s.test_count).sum();
    let errors: usize = stats.iter().map(|s| s.test_errors).sum();
    AggregateStats {
        trials: stats.len(),
        detections,
        detection_frequency: if stats.is_empty() { 0.0 } else { detections as f64 / stats.len() as f64 },
        detection_ci: wilson_interval(detections, stats.len(), Z95),
        pooled_error_rate: (tests > 0).then(|| errors as f64 / tests as f64),
        pooled_error_ci: wilson_interval(errors, tests, Z95),
        min_test_count: stats.iter().map(|s| s.test_count).min().unwrap_or(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::AdversarySpec;
    use crate::netproto::{run_protocol, NetworkConfig, Protocol};

    #[test]
    fn wilson_examples() {
        assert_eq!(wilson_interval(0, 0, Z95), None);
        let (lo, hi) = wilson_interval(0, 10, Z95).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.2 && hi < 0.35);
        let (lo, hi) = wilson_interval(50, 100, Z95).unwrap();
        assert!((lo + hi - 1.0).abs() < 1e-12);
        assert!((hi - lo - 0.192).abs() < 0.01);
    }

    #[test]
    fn honest_run_statistics() {
        let mut c = NetworkConfig::new(Protocol::Memoryless, 2, 1);
        c.rounds = 80;
        let t = run_protocol(&c, &AdversarySpec::none(), 3).unwrap();
        let s = protocol_statistics(&t);
        assert_eq!(s.error_rate, Some(0.0));
        assert_eq!(s.key_agreement_rate, Some(1.0));
        assert!(!s.detected);
        assert!(s.aborts.is_empty());
        // Redacted transcripts keep public statistics only.
        let r = protocol_statistics(&t.redacted());
        assert_eq!(r.key_agreement_rate, None);
        assert_eq!(r.error_rate, Some(0.0));
    }

    #[test]
    fn liar_is_always_detected() {
        let mut c = NetworkConfig::new(Protocol::Memoryless, 2, 1);
        c.rounds = 40;
        c.auth_enabled = false;
        let adv: AdversarySpec = "lie-outcome:p=1.0@member1".parse().unwrap();
        let runs: Vec<_> = (0..10).map(|s| run_protocol(&c, &adv, s).unwrap()).collect();
        let a = aggregate_statistics(&runs);
        assert_eq!(a.detection_frequency, 1.0);
        assert_eq!(a.pooled_error_rate, Some(1.0));
        assert!(protocol_statistics(&runs[0]).aborts.contains_key("test-bit-mismatch"));
    }
}
