//! Transcript records and their JSON-lines form.
//!
//! One JSON object per line, tagged by `"kind"`:
//!
//! | kind      | count             | content                                   |
//! |-----------|-------------------|-------------------------------------------|
//! | `header`  | 1, first          | config, seed, adversary, `secrets` flag   |
//! | `round`   | one per copy      | a [`RoundRecord`]                         |
//! | `event`   | one per abort     | an [`AbortEvent`]                         |
//! | `test`    | one per test bit  | a [`TestBit`]                             |
//! | `keys`    | 0 or 1            | final keys (only with secrets revealed)   |
//! | `summary` | 1, last           | a [`Summary`]                             |
//!
//! Without revealed secrets the fields `outcomes`, `true_bases`, `m_a`,
//! `m_b`, `b_a`, `b_b` are `null` and no `keys` line is written.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::NetworkConfig;
use crate::error::{invalid, Result};
use crate::qstate::MeasurementBasis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CopyStatus {
    #[default]
    Kept,
    /// Odd `Y_A + Y_B` under protocol 1.
    DiscardedParity,
    /// A ring message never arrived.
    RelayDropped,
    /// The center did not announce its outcome.
    Undetermined,
}

/// One distributed cat-state copy.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub copy: usize,
    /// Announced direction of every member, by member id.
    pub bases: Vec<MeasurementBasis>,
    /// Directions actually measured; differ from `bases` only for lying
    /// members.
    pub true_bases: Option<Vec<MeasurementBasis>>,
    pub outcomes: Option<Vec<u8>>,
    pub y_a: u8,
    pub y_b: u8,
    pub ybar_a: u8,
    pub ybar_b: u8,
    pub m_a: Option<u8>,
    pub m_b: Option<u8>,
    pub center_basis: Option<MeasurementBasis>,
    pub center_outcome: Option<u8>,
    pub status: CopyStatus,
    pub b_a: Option<u8>,
    pub b_b: Option<u8>,
}

impl RoundRecord {
    fn redacted(&self) -> Self {
        Self {
            true_bases: None,
            outcomes: None,
            m_a: None,
            m_b: None,
            b_a: None,
            b_b: None,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbortCause {
    SyndromeReject,
    TestBitMismatch,
    RelayDropped,
    CenterWithheld,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbortEvent {
    pub cause: AbortCause,
    /// `None` for run-wide events.
    pub round: Option<usize>,
    pub member: Option<u16>,
    pub detail: String,
}

/// A publicly compared key bit; `index` points into the kept copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestBit {
    pub index: usize,
    pub round: usize,
    pub copy: usize,
    pub b_a: u8,
    pub b_b: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunVerdict {
    Pass,
    Fail,
    /// Too few kept copies to draw a test set.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rounds: usize,
    pub copies: usize,
    pub sifted: usize,
    pub discarded: usize,
    /// Rounds lost to syndrome rejection.
    pub aborted: usize,
    pub relay_dropped: usize,
    pub undetermined: usize,
    pub test_count: usize,
    pub key_length: usize,
    pub error_rate: Option<f64>,
    pub discard_rate: f64,
    pub verdict: RunVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub config: NetworkConfig,
    pub seed: u64,
    /// Adversary in its command-line grammar.
    pub adversary: String,
    pub records: Vec<RoundRecord>,
    pub events: Vec<AbortEvent>,
    pub tests: Vec<TestBit>,
    /// Final keys; absent after a test-bit failure or when redacted.
    pub key_a: Option<Vec<u8>>,
    pub key_b: Option<Vec<u8>>,
    pub summary: Summary,
}

impl Transcript {
    pub fn kept(&self) -> impl Iterator<Item = &RoundRecord> {
        self.records.iter().filter(|r| r.status == CopyStatus::Kept)
    }

    pub fn redacted(&self) -> Self {
        Self {
            records: self.records.iter().map(RoundRecord::redacted).collect(),
            key_a: None,
            key_b: None,
            ..self.clone()
        }
    }

    pub fn to_jsonl(&self, reveal_secrets: bool) -> Result<String> {
        let t = if reveal_secrets { self.clone() } else { self.redacted() };
        let mut lines = Vec::with_capacity(t.records.len() + t.tests.len() + 3);
        let tagged = |kind: &str, v: Value| -> Result<String> {
            let mut obj = serde_json::Map::new();
            obj.insert("kind".into(), json!(kind));
            match v {
                Value::Object(m) => obj.extend(m),
                other => {
                    obj.insert("value".into(), other);
                }
            }
            serde_json::to_string(&Value::Object(obj)).map_err(|e| invalid(e.to_string()))
        };
        lines.push(tagged(
            "header",
            json!({
                "config": value(&t.config)?,
                "seed": t.seed,
                "adversary": t.adversary,
                "secrets": reveal_secrets,
            }),
        )?);
        for r in &t.records {
            lines.push(tagged("round", value(r)?)?);
        }
        for e in &t.events {
            lines.push(tagged("event", value(e)?)?);
        }
        for b in &t.tests {
            lines.push(tagged("test", value(b)?)?);
        }
        if reveal_secrets {
            lines.push(tagged("keys", json!({ "key_a": t.key_a, "key_b": t.key_b }))?);
        }
        lines.push(tagged("summary", value(&t.summary)?)?);
        let mut out = lines.join("\n");
        out.push('\n');
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut header = None;
        let mut summary = None;
        let (mut records, mut events, mut tests) = (Vec::new(), Vec::new(), Vec::new());
        let (mut key_a, mut key_b) = (None, None);
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = |e: serde_json::Error| invalid(format!("line {}: {e}", i + 1));
            let mut v: Value = serde_json::from_str(line).map_err(bad)?;
            let kind = v
                .as_object_mut()
                .and_then(|o| o.remove("kind"))
                .and_then(|k| k.as_str().map(str::to_owned))
                .ok_or_else(|| invalid(format!("line {}: missing kind", i + 1)))?;
            match kind.as_str() {
                "header" => header = Some(v),
                "round" => records.push(serde_json::from_value(v).map_err(bad)?),
                "event" => events.push(serde_json::from_value(v).map_err(bad)?),
                "test" => tests.push(serde_json::from_value(v).map_err(bad)?),
                "keys" => {
                    key_a = serde_json::from_value(v["key_a"].clone()).map_err(bad)?;
                    key_b = serde_json::from_value(v["key_b"].clone()).map_err(bad)?;
                }
                "summary" => summary = Some(serde_json::from_value(v).map_err(bad)?),
                other => return Err(invalid(format!("line {}: unknown kind `{other}`", i + 1))),
            }
        }
        let header = header.ok_or_else(|| invalid("transcript has no header"))?;
        let bad = |e: serde_json::Error| invalid(format!("header: {e}"));
        Ok(Self {
            config: serde_json::from_value(header["config"].clone()).map_err(bad)?,
            seed: serde_json::from_value(header["seed"].clone()).map_err(bad)?,
            adversary: serde_json::from_value(header["adversary"].clone()).map_err(bad)?,
            records,
            events,
            tests,
            key_a,
            key_b,
            summary: summary.ok_or_else(|| invalid("transcript has no summary"))?,
        })
    }
}

fn value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| invalid(e.to_string()))
}
