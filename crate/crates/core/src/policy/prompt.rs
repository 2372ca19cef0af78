use crate::sim::Profile;
use crate::tree::{render_context, AgentNode, AllowedFlows, ControlFlowType, Lineage, Mode};

use super::grammar::SkillGrammar;

/// Everything that determines a node's prompt besides its context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptFlags {
    pub mode: Mode,
    pub working_memory: bool,
    pub profile: Profile,
    pub flows: AllowedFlows,
}

/// A rendered prompt, kept in parts so it can be sent as system + user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    pub system_text: String,
    pub in_context: Vec<String>,
    pub lineage_preamble: String,
    pub goal_line: String,
    pub context_lines: Vec<String>,
    target_heading: &'static str,
    source_gap: bool,
}

impl PromptBundle {
    /// Everything after the system text: examples, then the target domain.
    pub fn user_text(&self) -> String {
        let mut out = String::from("Source domain:");
        if !self.in_context.is_empty() {
            out.push('\n');
            out.push_str(&self.in_context.join("\n\n"));
        }
        out.push_str("\n\n");
        out.push_str(self.target_heading);
        if !self.lineage_preamble.is_empty() {
            out.push('\n');
            out.push_str(&self.lineage_preamble);
        }
        out.push('\n');
        out.push_str(&self.goal_line);
        for line in &self.context_lines {
            out.push('\n');
            out.push_str(line);
        }
        out
    }

    /// The full single-document prompt.
    pub fn render(&self) -> String {
        let sep = if self.source_gap { "\n\n" } else { "\n" };
        format!("{}{sep}{}", self.system_text, self.user_text())
    }
}

fn flow_description(flow: ControlFlowType, profile: Profile) -> &'static str {
    match (profile, flow) {
        (Profile::Household, ControlFlowType::Sequence) => "\"sequence\" (achieve subgoals sequentially; if any subgoal fails, the sequence is interrupted)",
        (Profile::Household, ControlFlowType::Fallback) => "\"fallback\" (attempt subgoals in order until one succeeds; if a subgoal is successful, the remaining subgoals are not attempted)",
        (Profile::Household, ControlFlowType::Parallel) => "\"parallel\" (achieve subgoals in parallel; this enables tasks to continue independently, even if one subgoal fails)",
        (Profile::Extended, ControlFlowType::Sequence) => "\"sequence\" (achieve subgoals sequentially. If any subgoal fails, the sequence is interrupted)",
        (Profile::Extended, ControlFlowType::Fallback) => "\"fallback\" (Attempt subgoals in order until one succeeds. If a subgoal is successful, the remaining subgoals are not attempted)",
        (Profile::Extended, ControlFlowType::Parallel) => "\"parallel\" (Achieve subgoals in parallel. This enables tasks to continue independently, even if one subgoal fails)",
    }
}

/// `a`, `a or b`, `a, b, or c`.
fn or_list(items: &[&str]) -> String {
    match items {
        [] => String::new(),
        [one] => one.to_string(),
        [a, b] => format!("{a} or {b}"),
        [init @ .., last] => format!("{}, or {last}", init.join(", ")),
    }
}

/// `a.`, `a, and b.`, `a, b, and c.`
pub fn and_list(items: &[&str]) -> String {
    match items {
        [] => String::new(),
        [one] => format!("{one}."),
        [init @ .., last] => format!("{}, and {last}.", init.join(", ")),
    }
}

pub fn system_text(flags: &PromptFlags) -> String {
    let grammar = SkillGrammar::new(flags.profile, flags.working_memory);
    let actions = grammar.action_list().join(", ");
    let mut text = match flags.mode {
        Mode::Reactree => String::from(
            "You are an advanced robot with ability to think, act, and expand behavior tree nodes in decision-making process. You can perform one of the following tasks:\n",
        ),
        Mode::React => String::from(
            "You are an advanced robot with ability to think and act. You can perform one of the following tasks:\n",
        ),
    };
    text.push_str("1. Think: Use reasoning to satisfy the current goal condition.\n");
    text.push_str(&format!(
        "2. Act: Execute a specific action to accomplish the current goal condition. You should use one of actions of this list: [{actions}]"
    ));
    if flags.mode == Mode::Reactree {
        let flows: Vec<&str> = flags
            .flows
            .types()
            .into_iter()
            .map(|f| flow_description(f, flags.profile))
            .collect();
        text.push_str(&format!(
            "\n3. Expand: Decompose the current goal condition into more detailed subgoals. When expanding, generate appropriate control flow and subgoals. Control flow can be {}.",
            or_list(&flows)
        ));
    }
    text
}

fn flow_phrase(flow: ControlFlowType) -> &'static str {
    match flow {
        ControlFlowType::Sequence => "in sequence",
        ControlFlowType::Fallback => "using a fallback strategy",
        ControlFlowType::Parallel => "in parallel",
    }
}

/// The two preamble lines naming a node's parent goal and siblings.
pub fn lineage_preamble(lineage: &Lineage<'_>) -> String {
    format!(
        "Your primary goal is to: {}\nTo achieve this, you should perform your sibling tasks {}. At this level, your sibling tasks are: {}",
        lineage.parent_goal,
        flow_phrase(lineage.flow),
        and_list(&lineage.siblings)
    )
}

/// Assembles the prompt for `node`. `examples` are rendered trajectories,
/// already selected and ordered by retrieval.
pub fn build_prompt(
    node: &AgentNode,
    lineage: Option<&Lineage<'_>>,
    examples: &[String],
    flags: &PromptFlags,
) -> PromptBundle {
    let (target_heading, source_gap) = match (flags.profile, flags.mode) {
        (Profile::Household, Mode::Reactree) => ("Target_domain:", true),
        (Profile::Household, Mode::React) => ("Target_domain:", false),
        (Profile::Extended, _) => ("Target domain:", true),
    };
    PromptBundle {
        system_text: system_text(flags),
        in_context: examples.to_vec(),
        lineage_preamble: lineage.map(lineage_preamble).unwrap_or_default(),
        goal_line: format!("Your task is to: {}", node.subgoal),
        context_lines: render_context(&node.context).collect(),
        target_heading,
        source_gap,
    }
}
