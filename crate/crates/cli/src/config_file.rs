//! Experiment config files: `key = value` lines grouped under `[section]`
//! headers, `#` comments, blank lines ignored. Values set in a file
//! override the corresponding command-line flags.
//!
//! ```text
//! [network]
//! protocol = 2          # 1 or 2
//! n = 3
//! m = 1
//! t = 2
//! rounds = 1000
//! test_fraction = 0.25
//! collector_a = 0
//! collector_b = 0
//!
//! [auth]
//! enabled = true
//! r = 2
//! s = 2
//! keys = 4              # optional
//! shared_family = false
//!
//! [adversary]
//! spec = depolarize:p=0.01@member1
//!
//! [run]
//! seed = 7
//! out = transcript.jsonl
//! reveal_secrets = false
//! center_withholds = false
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use qkdnet::netproto::{NetworkConfig, Protocol};

/// Section-qualified entries, e.g. `network.n → "3"`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut section = String::new();
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| anyhow!("line {}: unterminated section header", i + 1))?
                    .trim();
                if !["network", "auth", "adversary", "run"].contains(&name) {
                    bail!("line {}: unknown section `{name}`", i + 1);
                }
                section = name.to_string();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
            if section.is_empty() {
                bail!("line {}: entry outside any section", i + 1);
            }
            let key = format!("{section}.{}", k.trim());
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                bail!("line {}: duplicate key `{key}`", i + 1);
            }
        }
        Ok(Self { entries })
    }
}

/// Everything the `run` command needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub network: NetworkConfig,
    pub adversary: String,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub reveal_secrets: bool,
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| anyhow!("`{key}`: {e}"))
}

impl ExperimentConfig {
    pub fn apply(&mut self, file: &ConfigFile) -> Result<()> {
        let net = &mut self.network;
        for (key, v) in &file.entries {
            let k = key.as_str();
            match k {
                "network.protocol" => {
                    net.protocol = Protocol::try_from(parse::<u8>(k, v)?).map_err(|e| anyhow!("{e}"))?
                }
                "network.n" => net.n = parse(k, v)?,
                "network.m" => net.m = parse(k, v)?,
                "network.t" => net.t = parse(k, v)?,
                "network.rounds" => net.rounds = parse(k, v)?,
                "network.test_fraction" => net.test_fraction = parse(k, v)?,
                "network.collector_a" => net.collector_a = parse(k, v)?,
                "network.collector_b" => net.collector_b = parse(k, v)?,
                "auth.enabled" => net.auth_enabled = parse(k, v)?,
                "auth.r" => net.family_params.0 = parse(k, v)?,
                "auth.s" => net.family_params.1 = parse(k, v)?,
                "auth.keys" => net.family_keys = Some(parse(k, v)?),
                "auth.shared_family" => net.shared_family = parse(k, v)?,
                "adversary.spec" => self.adversary = v.clone(),
                "run.seed" => self.seed = Some(parse(k, v)?),
                "run.out" => self.out = Some(PathBuf::from(v)),
                "run.reveal_secrets" => self.reveal_secrets = parse(k, v)?,
                "run.center_withholds" => net.center_withholds = parse(k, v)?,
                other => bail!("unknown config key `{other}`"),
            }
        }
        Ok(())
    }

    pub fn load_into(&mut self, path: &std::path::Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.apply(&ConfigFile::parse(&text)?)
    }
}
