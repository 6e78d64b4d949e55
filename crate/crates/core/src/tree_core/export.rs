use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use super::tree::{ColoredTree, Colour, VertexId};

/// Fill colour for a colour class: reds and blues in shades by level.
pub fn fill_for(c: Colour) -> &'static str {
    const REDS: [&str; 4] = ["#d62728", "#ff7f0e", "#e377c2", "#8c564b"];
    const BLUES: [&str; 4] = ["#1f77b4", "#17becf", "#2ca02c", "#9467bd"];
    let i = c.level() as usize % 4;
    if c.is_red() {
        REDS[i]
    } else {
        BLUES[i]
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz rendering with a colour legend. `labels` adds a second line to vertex labels.
pub fn to_dot(t: &ColoredTree, name: &str, labels: &BTreeMap<VertexId, String>) -> String {
    let mut s = String::new();
    writeln!(s, "graph {} {{", quote(name)).unwrap();
    writeln!(s, "  node [shape=circle, fontsize=9, style=filled, fillcolor=white];").unwrap();
    let used: BTreeSet<Colour> = t.colours().values().copied().collect();
    for v in t.sorted_ids() {
        let mut label = v.to_string();
        if let Some(extra) = labels.get(&v) {
            label.push('\n');
            label.push_str(extra);
        }
        let mut attrs = vec![format!("label={}", quote(&label))];
        if let Some(c) = t.colour(v) {
            attrs.push(format!("fillcolor={}", quote(fill_for(c))));
            attrs.push(format!("xlabel={}", quote(&c.to_string())));
        }
        if t.is_cut(v) {
            attrs.push("shape=doublecircle".into());
        }
        if t.root() == Some(v) {
            attrs.push("penwidth=3".into());
        }
        writeln!(s, "  {} [{}];", v.0, attrs.join(", ")).unwrap();
    }
    for (a, b) in t.edges() {
        writeln!(s, "  {} -- {};", a.0, b.0).unwrap();
    }
    if !used.is_empty() || t.has_cuts() {
        writeln!(s, "  subgraph cluster_legend {{").unwrap();
        writeln!(s, "    label=\"legend\";").unwrap();
        for c in &used {
            writeln!(
                s,
                "    {} [label={}, shape=box, fillcolor={}];",
                quote(&format!("legend_{c}")),
                quote(&c.to_string()),
                quote(fill_for(*c))
            )
            .unwrap();
        }
        if t.has_cuts() {
            writeln!(s, "    \"legend_cut\" [label=\"truncated\", shape=doublecircle];").unwrap();
        }
        writeln!(s, "  }}").unwrap();
    }
    writeln!(s, "}}").unwrap();
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex() {
        let t = ColoredTree::from_edges(1, &[], Some(0)).unwrap();
        let d = to_dot(&t, "t", &BTreeMap::new());
        assert!(d.contains("0 [label=\"0\", penwidth=3];"));
        assert!(!d.contains("--"));
        assert!(!d.contains("legend"));
    }

    #[test]
    fn legend_lists_colours() {
        let mut t = ColoredTree::from_edges(2, &[(0, 1)], Some(0)).unwrap();
        t.set_colour(VertexId(1), Some(Colour::blue(2))).unwrap();
        let d = to_dot(&t, "t", &BTreeMap::from([(VertexId(0), "u_0".to_string())]));
        assert!(d.contains("legend_B2"));
        assert!(d.contains("0\\nu_0"));
        assert_eq!(d, to_dot(&t, "t", &BTreeMap::from([(VertexId(0), "u_0".to_string())])));
    }
}
