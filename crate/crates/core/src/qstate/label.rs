use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error};

/// Who holds a qubit.
///
/// The derived ordering is the canonical owner-major order: the center
/// first, then members by id, then external systems (reference systems,
/// an eavesdropper's probes).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Owner {
    Center,
    Member(u16),
    External(u16),
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Owner::Center => write!(f, "center"),
            Owner::Member(id) => write!(f, "member{id}"),
            Owner::External(id) => write!(f, "ext{id}"),
        }
    }
}

impl FromStr for Owner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if s == "center" {
            return Ok(Owner::Center);
        }
        let parse_id = |rest: &str| {
            rest.parse::<u16>()
                .map_err(|_| invalid(format!("bad owner id in `{s}`")))
        };
        if let Some(rest) = s.strip_prefix("member") {
            return Ok(Owner::Member(parse_id(rest)?));
        }
        if let Some(rest) = s.strip_prefix("ext") {
            return Ok(Owner::External(parse_id(rest)?));
        }
        Err(invalid(format!("unknown owner `{s}`")))
    }
}

/// Position of a qubit inside its owner's block.
///
/// Serialized as `owner:slot`, e.g. `member2:0` or `center:1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct QubitLabel {
    pub owner: Owner,
    pub slot: u16,
}

impl QubitLabel {
    pub const fn new(owner: Owner, slot: u16) -> Self {
        Self { owner, slot }
    }

    pub const fn member(id: u16, slot: u16) -> Self {
        Self::new(Owner::Member(id), slot)
    }

    pub const fn center(slot: u16) -> Self {
        Self::new(Owner::Center, slot)
    }

    pub const fn external(id: u16, slot: u16) -> Self {
        Self::new(Owner::External(id), slot)
    }

    /// `count` consecutive slots of one owner starting at `first`.
    pub fn block(owner: Owner, first: u16, count: usize) -> Vec<Self> {
        (0..count).map(|i| Self::new(owner, first + i as u16)).collect()
    }
}

impl fmt::Display for QubitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.owner, self.slot)
    }
}

impl From<QubitLabel> for String {
    fn from(l: QubitLabel) -> String {
        l.to_string()
    }
}

impl TryFrom<String> for QubitLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl FromStr for QubitLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let (owner, slot) = s
            .split_once(':')
            .ok_or_else(|| invalid(format!("label `{s}` is not owner:slot")))?;
        let slot = slot
            .parse()
            .map_err(|_| invalid(format!("bad slot in label `{s}`")))?;
        Ok(Self::new(owner.parse()?, slot))
    }
}

/// Rejects label lists with duplicates.
pub(crate) fn check_unique(labels: &[QubitLabel]) -> crate::Result<()> {
    for (i, a) in labels.iter().enumerate() {
        if labels[i + 1..].contains(a) {
            return Err(invalid(format!("duplicate qubit label {a}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        for l in [
            QubitLabel::center(3),
            QubitLabel::member(12, 0),
            QubitLabel::external(1, 7),
        ] {
            assert_eq!(l.to_string().parse::<QubitLabel>().unwrap(), l);
        }
        assert!("bob:1".parse::<QubitLabel>().is_err());
        assert!("member1".parse::<QubitLabel>().is_err());
    }

    #[test]
    fn canonical_order_is_owner_major() {
        let mut v = vec![
            QubitLabel::member(2, 0),
            QubitLabel::member(1, 1),
            QubitLabel::center(0),
            QubitLabel::member(1, 0),
        ];
        v.sort();
        assert_eq!(
            v,
            vec![
                QubitLabel::center(0),
                QubitLabel::member(1, 0),
                QubitLabel::member(1, 1),
                QubitLabel::member(2, 0),
            ]
        );
    }

    #[test]
    fn duplicates_rejected() {
        let l = QubitLabel::member(1, 0);
        assert!(check_unique(&[l, QubitLabel::member(1, 1)]).is_ok());
        assert!(check_unique(&[l, l]).is_err());
    }
}
