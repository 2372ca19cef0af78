use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A class plus instance number, rendered `"<class> <id>"` (`"living room 1"`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityRef {
    pub class: String,
    pub id: u32,
}

impl EntityRef {
    pub fn new(class: impl Into<String>, id: u32) -> Self {
        Self {
            class: class.into(),
            id,
        }
    }

    /// `"kitchen (1)"`, the form used inside observations.
    pub fn display_paren(&self) -> String {
        format!("{} ({})", self.class, self.id)
    }
}

impl fmt::Display for EntityRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.class, self.id)
    }
}

impl FromStr for EntityRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (class, id) = s
            .rsplit_once(char::is_whitespace)
            .ok_or_else(|| format!("expected \"<class> <id>\", got {s:?}"))?;
        let id = id
            .parse::<u32>()
            .map_err(|_| format!("expected an instance number after {class:?}, got {id:?}"))?;
        let class = normalize_spaces(class);
        if class.is_empty() {
            return Err(format!("missing class in {s:?}"));
        }
        Ok(Self { class, id })
    }
}

impl Serialize for SkillCommand {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SkillCommand {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

pub(crate) fn normalize_spaces(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verb {
    GoTo,
    PickUp,
    PutDown,
    Open,
    Close,
    TurnOn,
    TurnOff,
    Slice,
}

impl Verb {
    pub const ALL: [Verb; 8] = [
        Verb::GoTo,
        Verb::PickUp,
        Verb::PutDown,
        Verb::Open,
        Verb::Close,
        Verb::TurnOn,
        Verb::TurnOff,
        Verb::Slice,
    ];

    pub fn phrase(self) -> &'static str {
        match self {
            Verb::GoTo => "go to",
            Verb::PickUp => "pick up",
            Verb::PutDown => "put down",
            Verb::Open => "open",
            Verb::Close => "close",
            Verb::TurnOn => "turn on",
            Verb::TurnOff => "turn off",
            Verb::Slice => "slice",
        }
    }

    /// Splits `"pick up juice 1"` into the verb and the remaining argument text.
    pub fn split_prefix(line: &str) -> Option<(Verb, &str)> {
        let line = line.trim_start();
        Verb::ALL.into_iter().find_map(|verb| {
            let phrase = verb.phrase();
            let rest = strip_words(line, phrase)?;
            Some((verb, rest))
        })
    }
}

/// Strips a leading multi-word phrase if it matches whole words, case-insensitively.
pub(crate) fn strip_words<'a>(line: &'a str, phrase: &str) -> Option<&'a str> {
    let mut rest = line.trim_start();
    for word in phrase.split(' ') {
        let head_len = rest.find(char::is_whitespace).unwrap_or(rest.len());
        if !rest[..head_len].eq_ignore_ascii_case(word) {
            return None;
        }
        rest = rest[head_len..].trim_start();
    }
    Some(rest)
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.phrase())
    }
}

/// One primitive skill invocation, e.g. `open fridge 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SkillCommand {
    pub verb: Verb,
    pub target: EntityRef,
}

impl SkillCommand {
    pub fn new(verb: Verb, target: EntityRef) -> Self {
        Self { verb, target }
    }
}

impl fmt::Display for SkillCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.verb, self.target)
    }
}

impl FromStr for SkillCommand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (verb, rest) = Verb::split_prefix(s)
            .ok_or_else(|| format!("unknown action verb in {:?}", s.trim()))?;
        let target = rest.parse::<EntityRef>()?;
        Ok(Self { verb, target })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_multiword_verbs_and_classes() {
        let cmd: SkillCommand = "go to living room 1".parse().unwrap();
        assert_eq!(cmd.verb, Verb::GoTo);
        assert_eq!(cmd.target, EntityRef::new("living room", 1));
        assert_eq!(cmd.to_string(), "go to living room 1");

        let cmd: SkillCommand = "Turn On dishwasher 1".parse().unwrap();
        assert_eq!(cmd.verb, Verb::TurnOn);
    }

    #[test]
    fn rejects_bad_targets() {
        assert!("pick up juice".parse::<SkillCommand>().is_err());
        assert!("teleport to kitchen 1".parse::<SkillCommand>().is_err());
        assert!("open 3".parse::<SkillCommand>().is_err());
        // "opener" is not "open"
        assert!("opener box 1".parse::<SkillCommand>().is_err());
    }
}
