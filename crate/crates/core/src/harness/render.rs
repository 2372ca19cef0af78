use std::fmt::Write;

use crate::policy::lineage_preamble;
use crate::tree::{AgentNode, NodeId, NodeStatus, Tree};

/// Agent nodes in execution order (depth first, children in listed
/// order), skipping nodes that never ran.
pub fn execution_order(tree: &Tree) -> Vec<NodeId> {
    fn visit(tree: &Tree, node: NodeId, out: &mut Vec<NodeId>) {
        let agent = tree.agent(node);
        if agent.context.is_empty() {
            return;
        }
        out.push(node);
        if let Some(flow) = agent.child_flow {
            for &child in &tree.flow(flow).children {
                visit(tree, child, out);
            }
        }
    }
    let mut out = Vec::new();
    if !tree.agents.is_empty() {
        visit(tree, tree.root(), &mut out);
    }
    out
}

fn status_tag(status: NodeStatus) -> &'static str {
    match status {
        NodeStatus::Running => "not run",
        NodeStatus::Success => "success",
        NodeStatus::Failure => "failure",
    }
}

/// Indented outline with node numbers and flow symbols.
pub fn outline(tree: &Tree) -> String {
    fn agent(tree: &Tree, node: &AgentNode, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        let _ = writeln!(
            out,
            "{pad}[{}] {} ({})",
            node.id,
            node.subgoal,
            status_tag(node.status)
        );
        if let Some(f) = node.child_flow {
            let flow = tree.flow(f);
            let _ = writeln!(
                out,
                "{pad}  {} {} ({})",
                flow.flow.symbol(),
                flow.flow,
                status_tag(flow.status)
            );
            for &c in &flow.children {
                agent(tree, tree.agent(c), indent + 2, out);
            }
        }
    }
    let mut out = String::new();
    if !tree.agents.is_empty() {
        agent(tree, tree.agent(tree.root()), 0, &mut out);
    }
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz description: agent nodes as boxes, flows as circles.
pub fn dot(tree: &Tree) -> String {
    let mut out = String::from("digraph tree {\n  node [fontname=\"Helvetica\"];\n");
    for a in &tree.agents {
        let color = match a.status {
            NodeStatus::Success => "palegreen",
            NodeStatus::Failure => "lightpink",
            NodeStatus::Running => "white",
        };
        let _ = writeln!(
            out,
            "  n{} [shape=box, style=filled, fillcolor={color}, label=\"{}: {}\"];",
            a.id,
            a.id,
            dot_escape(&a.subgoal)
        );
    }
    for f in &tree.flows {
        let _ = writeln!(
            out,
            "  {} [shape=circle, label=\"{}\"];",
            f.id,
            f.flow.symbol()
        );
        let _ = writeln!(out, "  n{} -> {};", f.parent, f.id);
        for c in &f.children {
            let _ = writeln!(out, "  {} -> n{};", f.id, c);
        }
    }
    out.push_str("}\n");
    out
}

/// Every executed node's prompt-side view: lineage, goal and context.
pub fn trajectory(tree: &Tree) -> String {
    let mut sections = Vec::new();
    for id in execution_order(tree) {
        let mut s = format!("### Agent Node {id}\n");
        if let Some(lineage) = tree.lineage(id) {
            s.push_str(&lineage_preamble(&lineage));
            s.push('\n');
        }
        s.push_str(&tree.agent(id).trajectory_text());
        sections.push(s);
    }
    let mut out = sections.join("\n\n");
    out.push('\n');
    out
}
