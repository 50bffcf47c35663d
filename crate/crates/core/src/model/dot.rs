//! Graphviz DOT rendering for model definitions and mined graphs.

use std::fmt::Write;

use crate::discovery::TransitionGraph;
use crate::label::EventClass;
use crate::model::ModelDefinition;

/// Opacity of the least frequent edge; the most frequent is fully opaque.
pub const MIN_EDGE_OPACITY: f64 = 0.15;

pub trait ToDot {
    fn to_dot(&self) -> String;
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn node_attrs(name: &str, class: EventClass) -> String {
    match class {
        EventClass::Start => "shape=circle, style=filled, fillcolor=\"#dddddd\"".to_string(),
        EventClass::End => "shape=doublecircle, style=filled, fillcolor=\"#dddddd\"".to_string(),
        EventClass::Label(l) if l.to_string() == name => "shape=box".to_string(),
        EventClass::Label(l) => format!("shape=box, label={}", quote(&format!("{name}\n{l}"))),
    }
}

/// Edge opacity as a two-digit hex alpha, linear in frequency between the
/// graph's minimum and maximum.
pub fn opacity_hex(freq: u64, min: u64, max: u64) -> String {
    let alpha = if max == min {
        1.0
    } else {
        MIN_EDGE_OPACITY + (1.0 - MIN_EDGE_OPACITY) * (freq - min) as f64 / (max - min) as f64
    };
    format!("{:02x}", (alpha * 255.0).round() as u8)
}

impl ToDot for ModelDefinition {
    fn to_dot(&self) -> String {
        let mut out = String::new();
        writeln!(out, "digraph {} {{", quote(self.name())).unwrap();
        writeln!(out, "  rankdir=LR;").unwrap();
        for (name, class) in self.nodes() {
            writeln!(out, "  {} [{}];", quote(name), node_attrs(name, *class)).unwrap();
        }
        for (f, t) in self.edges() {
            let style = if t == EventClass::END_NAME { " [style=dashed]" } else { "" };
            writeln!(out, "  {} -> {}{};", quote(f), quote(t), style).unwrap();
        }
        out.push_str("}\n");
        out
    }
}

impl ToDot for TransitionGraph {
    fn to_dot(&self) -> String {
        let min = self.edges().values().copied().min().unwrap_or(0);
        let max = self.edges().values().copied().max().unwrap_or(0);
        let mut out = String::new();
        writeln!(out, "digraph \"flows\" {{").unwrap();
        writeln!(out, "  rankdir=LR;").unwrap();
        for node in self.nodes() {
            let name = node.to_string();
            writeln!(out, "  {} [{}];", quote(&name), node_attrs(&name, *node)).unwrap();
        }
        for ((f, t), count) in self.edges() {
            writeln!(
                out,
                "  {} -> {} [label=\"{count}\", color=\"#000000{}\"];",
                quote(&f.to_string()),
                quote(&t.to_string()),
                opacity_hex(*count, min, max)
            )
            .unwrap();
        }
        out.push_str("}\n");
        out
    }
}
