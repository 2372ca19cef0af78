use std::fmt;

use crate::sim::{normalize_spaces, strip_words, EntityRef, Profile, SkillCommand, Verb};
use crate::tree::{Action, AgentDecision, AllowedFlows, ControlFlowType};

/// The action vocabulary an agent may use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkillGrammar {
    pub verbs: Vec<Verb>,
    pub working_memory: bool,
}

impl SkillGrammar {
    pub fn new(profile: Profile, working_memory: bool) -> Self {
        Self {
            verbs: profile.verbs().to_vec(),
            working_memory,
        }
    }

    /// Action names in prompt order, e.g. `go to, pick up, ..., done, failure`.
    pub fn action_list(&self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = self.verbs.iter().map(|v| v.phrase()).collect();
        if self.working_memory {
            out.push("recall location of");
        }
        out.extend(["done", "failure"]);
        out
    }
}

/// Why a raw policy line was not accepted. The message is shown to the
/// policy on retry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRejection(pub String);

impl fmt::Display for ParseRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ParseRejection {}

fn reject<T>(msg: impl Into<String>) -> Result<T, ParseRejection> {
    Err(ParseRejection(msg.into()))
}

/// Parses one policy output line into a decision.
///
/// `expand` is `None` when expansion is not part of the action space (flat
/// mode); otherwise it lists the control-flow types that may be used.
pub fn parse_decision(
    raw: &str,
    grammar: &SkillGrammar,
    expand: Option<AllowedFlows>,
) -> Result<AgentDecision, ParseRejection> {
    let line = raw
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .unwrap_or("");
    if let Some(text) = strip_label(line, "Think") {
        return Ok(AgentDecision::Think(text.to_string()));
    }
    if let Some(rest) = strip_label(line, "Act") {
        return parse_act(rest, grammar);
    }
    if let Some(payload) = strip_label(line, "Expand") {
        let Some(allowed) = expand else {
            return reject("Expand is not available; use Think or Act");
        };
        let (flow, subgoals) = parse_expand_payload(payload)?;
        if !allowed.contains(flow) {
            return reject(format!(
                "control flow \"{flow}\" is not allowed; use one of: {}",
                allowed
                    .types()
                    .iter()
                    .map(|f| f.name())
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        }
        return Ok(AgentDecision::Expand { flow, subgoals });
    }
    let labels = if expand.is_some() {
        "Think:, Act: or Expand:"
    } else {
        "Think: or Act:"
    };
    reject(format!(
        "expected a line starting with {labels}, got {line:?}"
    ))
}

fn strip_label<'a>(line: &'a str, label: &str) -> Option<&'a str> {
    let head = line.get(..label.len())?;
    if !head.eq_ignore_ascii_case(label) {
        return None;
    }
    let rest = line[label.len()..].trim_start();
    rest.strip_prefix(':').map(str::trim)
}

fn parse_act(rest: &str, grammar: &SkillGrammar) -> Result<AgentDecision, ParseRejection> {
    let rest = rest.trim().trim_end_matches('.');
    if rest.eq_ignore_ascii_case("done") {
        return Ok(AgentDecision::Done);
    }
    if rest.eq_ignore_ascii_case("failure") {
        return Ok(AgentDecision::DeclareFailure);
    }
    if let Some(target) = strip_words(rest, "recall location of") {
        if !grammar.working_memory {
            return reject("\"recall location of\" is not an available action");
        }
        let mut class = normalize_spaces(target).to_lowercase();
        // recall is per class; tolerate a trailing instance number
        if let Ok(e) = class.parse::<EntityRef>() {
            class = e.class;
        }
        if class.is_empty() {
            return reject("recall location of what? name an object class");
        }
        return Ok(AgentDecision::Act(Action::Recall { class }));
    }
    let Some((verb, args)) = Verb::split_prefix(rest) else {
        return reject(format!(
            "unknown action in {rest:?}; use one of: {}",
            grammar.action_list().join(", ")
        ));
    };
    if !grammar.verbs.contains(&verb) {
        return reject(format!("\"{verb}\" is not an available action"));
    }
    let target = args
        .parse::<EntityRef>()
        .map_err(|e| ParseRejection(format!("bad target for \"{verb}\": {e}")))?;
    Ok(AgentDecision::Act(Action::Skill(SkillCommand::new(
        verb, target,
    ))))
}

/// Reads `{'control_flow': 'x', 'conditions': 'a, b'}` with either quote style.
fn parse_expand_payload(payload: &str) -> Result<(ControlFlowType, Vec<String>), ParseRejection> {
    let pairs = parse_flat_dict(payload)
        .map_err(|e| ParseRejection(format!("malformed Expand payload: {e}")))?;
    let get = |key: &str| {
        pairs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    };
    let flow = get("control_flow")
        .ok_or_else(|| ParseRejection("Expand payload is missing 'control_flow'".into()))?;
    let flow = flow
        .parse::<ControlFlowType>()
        .map_err(|e| ParseRejection(format!("{e}; use sequence, fallback or parallel")))?;
    let conditions = get("conditions")
        .ok_or_else(|| ParseRejection("Expand payload is missing 'conditions'".into()))?;
    let subgoals: Vec<String> = conditions
        .split(',')
        .map(normalize_spaces)
        .filter(|s| !s.is_empty())
        .collect();
    if subgoals.is_empty() {
        return reject("Expand needs at least one subgoal in 'conditions'");
    }
    Ok((flow, subgoals))
}

/// A one-level dict of quoted string keys and values.
fn parse_flat_dict(text: &str) -> Result<Vec<(String, String)>, String> {
    let text = text.trim();
    let inner = text
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or("expected {...}")?;
    let mut chars = inner.chars().peekable();
    let mut out = Vec::new();

    fn skip_ws(chars: &mut std::iter::Peekable<std::str::Chars<'_>>) {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
    }
    fn quoted(chars: &mut std::iter::Peekable<std::str::Chars<'_>>) -> Result<String, String> {
        let quote = match chars.next() {
            Some(q @ ('\'' | '"')) => q,
            other => return Err(format!("expected a quoted string, found {other:?}")),
        };
        let mut s = String::new();
        loop {
            match chars.next() {
                Some('\\') => s.push(chars.next().ok_or("unterminated escape")?),
                Some(c) if c == quote => return Ok(s),
                Some(c) => s.push(c),
                None => return Err("unterminated string".into()),
            }
        }
    }

    loop {
        skip_ws(&mut chars);
        if chars.peek().is_none() {
            break;
        }
        let key = quoted(&mut chars)?;
        skip_ws(&mut chars);
        if chars.next() != Some(':') {
            return Err(format!("expected ':' after {key:?}"));
        }
        skip_ws(&mut chars);
        let value = quoted(&mut chars)?;
        out.push((key, value));
        skip_ws(&mut chars);
        match chars.next() {
            None => break,
            Some(',') => continue,
            Some(c) => return Err(format!("unexpected {c:?}")),
        }
    }
    Ok(out)
}
