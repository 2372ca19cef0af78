//! Prompt assembly, the decision grammar, and the policies that produce
//! decisions: a transcript-driven scripted policy for reproducible runs and
//! a chat-completion client for live models.

mod grammar;
mod prompt;
mod remote;
mod scripted;

pub use grammar::{parse_decision, ParseRejection, SkillGrammar};
pub use prompt::{
    and_list, build_prompt, lineage_preamble, system_text, PromptBundle, PromptFlags,
};
pub use remote::{RemoteConfig, RemotePolicy};
pub use scripted::{ScriptedPolicy, Transcript, TranscriptNode};

use crate::tokens;
use crate::tree::{AgentDecision, AllowedFlows, NodeId};

/// What a policy is asked to continue.
#[derive(Debug, Clone)]
pub struct PolicyRequest<'a> {
    pub node: NodeId,
    pub goal: &'a str,
    /// Number of completions already requested by this node, retries included.
    pub step: usize,
    pub system: &'a str,
    pub user: String,
}

#[derive(Debug, thiserror::Error)]
pub enum PolicyError {
    /// The endpoint could not be reached or kept failing; the decision
    /// becomes a declared failure.
    #[error("transport: {0}")]
    Transport(String),
    /// A configuration problem that should stop the run (e.g. a transcript
    /// with no line for this step).
    #[error(transparent)]
    Fatal(#[from] crate::Error),
}

/// Produces one raw decision line.
pub trait Policy: Send + Sync {
    fn complete(&self, request: &PolicyRequest<'_>) -> Result<String, PolicyError>;
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn complete(&self, request: &PolicyRequest<'_>) -> Result<String, PolicyError> {
        (**self).complete(request)
    }
}

/// Rejected outputs are retried this many times before declaring failure.
pub const MAX_PARSE_RETRIES: usize = 2;

/// A decision plus what it took to get it.
#[derive(Debug, Clone, PartialEq)]
pub struct DecideOutcome {
    pub decision: AgentDecision,
    /// Raw text of the accepted (or last) completion.
    pub raw: String,
    pub attempts: usize,
    pub rejections: Vec<String>,
    pub input_tokens: usize,
    pub output_tokens: usize,
    pub note: Option<String>,
}

/// Samples and validates one decision, re-prompting with the rejection
/// reason when the output does not parse.
pub fn decide(
    policy: &dyn Policy,
    bundle: &PromptBundle,
    grammar: &SkillGrammar,
    expand: Option<AllowedFlows>,
    node: NodeId,
    goal: &str,
    step: &mut usize,
) -> crate::Result<DecideOutcome> {
    let system = bundle.system_text.clone();
    let base_user = bundle.user_text();
    let input_tokens = tokens::estimate(&bundle.render());
    let mut user = base_user.clone();
    let mut rejections = Vec::new();
    let mut raw = String::new();

    for attempt in 0..=MAX_PARSE_RETRIES {
        let request = PolicyRequest {
            node,
            goal,
            step: *step,
            system: &system,
            user: user.clone(),
        };
        *step += 1;
        raw = match policy.complete(&request) {
            Ok(text) => text,
            Err(PolicyError::Transport(e)) => {
                return Ok(DecideOutcome {
                    decision: AgentDecision::DeclareFailure,
                    raw: String::new(),
                    attempts: attempt + 1,
                    rejections,
                    input_tokens,
                    output_tokens: 0,
                    note: Some(format!("policy transport failed: {e}")),
                })
            }
            Err(PolicyError::Fatal(e)) => return Err(e),
        };
        match parse_decision(&raw, grammar, expand) {
            Ok(decision) => {
                return Ok(DecideOutcome {
                    decision,
                    output_tokens: tokens::estimate(&raw),
                    raw,
                    attempts: attempt + 1,
                    rejections,
                    input_tokens,
                    note: None,
                })
            }
            Err(rejection) => {
                user.push_str(&format!(
                    "\nYour previous output {:?} was rejected: {rejection}. Output exactly one valid line.",
                    raw.trim()
                ));
                rejections.push(rejection.0);
            }
        }
    }
    Ok(DecideOutcome {
        decision: AgentDecision::DeclareFailure,
        output_tokens: tokens::estimate(&raw),
        raw,
        attempts: MAX_PARSE_RETRIES + 1,
        rejections,
        input_tokens,
        note: Some("no valid decision after retries".into()),
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Mutex;

    use super::*;
    use crate::sim::Profile;
    use crate::tree::{Mode, Tree};

    /// Replays fixed outputs and records every request.
    struct Canned {
        outputs: Mutex<Vec<Result<String, String>>>,
        seen: Mutex<Vec<String>>,
    }

    impl Canned {
        fn new(outputs: &[Result<&str, &str>]) -> Self {
            Self {
                outputs: Mutex::new(
                    outputs
                        .iter()
                        .rev()
                        .map(|r| r.map(str::to_string).map_err(str::to_string))
                        .collect(),
                ),
                seen: Mutex::new(Vec::new()),
            }
        }
    }

    impl Policy for Canned {
        fn complete(&self, request: &PolicyRequest<'_>) -> Result<String, PolicyError> {
            self.seen.lock().unwrap().push(request.user.clone());
            match self
                .outputs
                .lock()
                .unwrap()
                .pop()
                .expect("ran out of outputs")
            {
                Ok(s) => Ok(s),
                Err(e) => Err(PolicyError::Transport(e)),
            }
        }
    }

    fn bundle() -> PromptBundle {
        let mut tree = Tree::with_root("fetch the wine");
        tree.agent_mut(NodeId(0))
            .push_observation("You are in the house.");
        build_prompt(
            tree.agent(NodeId(0)),
            None,
            &[],
            &PromptFlags {
                mode: Mode::Reactree,
                working_memory: true,
                profile: Profile::Household,
                flows: AllowedFlows::ALL,
            },
        )
    }

    fn run(policy: &Canned) -> DecideOutcome {
        let mut step = 0;
        decide(
            policy,
            &bundle(),
            &SkillGrammar::new(Profile::Household, true),
            Some(AllowedFlows::ALL),
            NodeId(0),
            "fetch the wine",
            &mut step,
        )
        .unwrap()
    }

    #[test]
    fn retries_then_accepts() {
        let policy = Canned::new(&[
            Ok("Expand: {'control_flow': 'sequence'"),
            Ok("Expand: {'control_flow': 'nope', 'conditions': 'a'}"),
            Ok("Act: go to kitchen 1"),
        ]);
        let out = run(&policy);
        assert_eq!(out.decision.to_string(), "Act: go to kitchen 1");
        assert_eq!(out.attempts, 3);
        assert_eq!(out.rejections.len(), 2);
        let seen = policy.seen.lock().unwrap();
        assert!(seen[1].contains("was rejected"));
        assert!(seen[2].matches("was rejected").count() == 2);
    }

    #[test]
    fn three_rejections_declare_failure() {
        let policy = Canned::new(&[Ok("hello"), Ok("hello"), Ok("hello")]);
        let out = run(&policy);
        assert_eq!(out.decision, AgentDecision::DeclareFailure);
        assert!(out.note.is_some());
    }

    #[test]
    fn transport_failure_declares_failure() {
        let policy = Canned::new(&[Err("connection refused")]);
        let out = run(&policy);
        assert_eq!(out.decision, AgentDecision::DeclareFailure);
        assert!(out.note.unwrap().contains("connection refused"));
    }
}
