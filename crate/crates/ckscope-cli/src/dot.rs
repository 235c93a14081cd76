//! Deterministic DOT rendering of models.
//!
//! Conventions: the intuitionistic order appears as solid edges (reflexive
//! pairs omitted), the modal relation as dashed edges labelled `R` (self-loops
//! kept), the bomb as a double circle, and each node label lists the
//! propositions true at that world. Worlds are emitted in index order and `R`
//! pairs in row-major order, so equal models render to identical text.

use ckscope::Model;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn to_dot(m: &Model) -> String {
    let fr = m.frame();
    let mut out = String::from("digraph model {\n");
    out.push_str("  rankdir=BT;\n");
    out.push_str("  node [shape=circle];\n");
    for w in 0..fr.n() {
        let mut label = escape(fr.name(w));
        let props: Vec<&str> = m
            .valuation()
            .iter()
            .filter(|(_, worlds)| worlds.contains(w))
            .map(|(p, _)| p)
            .collect();
        if !props.is_empty() {
            label.push_str("\\n");
            label.push_str(&escape(&props.join(", ")));
        }
        let shape = if w == fr.bomb() {
            ", shape=doublecircle"
        } else {
            ""
        };
        out.push_str(&format!(
            "  \"{}\" [label=\"{}\"{}];\n",
            escape(fr.name(w)),
            label,
            shape
        ));
    }
    for x in 0..fr.n() {
        for y in 0..fr.n() {
            if x != y && fr.leq(x, y) {
                out.push_str(&format!(
                    "  \"{}\" -> \"{}\";\n",
                    escape(fr.name(x)),
                    escape(fr.name(y))
                ));
            }
        }
    }
    for (x, y) in fr.r_relation().pairs() {
        out.push_str(&format!(
            "  \"{}\" -> \"{}\" [style=dashed, label=\"R\"];\n",
            escape(fr.name(x)),
            escape(fr.name(y))
        ));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ckscope::Frame;

    #[test]
    fn point_model_renders_one_double_circle_and_a_dashed_loop() {
        let dot = to_dot(&Model::bare(Frame::point()));
        assert_eq!(dot.matches("doublecircle").count(), 1);
        assert_eq!(dot.matches("style=dashed").count(), 1);
        assert!(dot.contains("\"bomb\" -> \"bomb\""));
        assert!(!dot.contains("->;"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let m = Model::bare(Frame::point());
        assert_eq!(to_dot(&m), to_dot(&m));
    }
}
