//! JSON, DOT and edge-list serialisation of graphs.

use serde::{Deserialize, Serialize};

use super::Pdag;
use crate::error::{Error, Result};

pub const GRAPH_FORMAT: &str = "pdag/v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub format: String,
    pub nodes: Vec<String>,
    #[serde(default)]
    pub directed: Vec<[String; 2]>,
    #[serde(default)]
    pub undirected: Vec<[String; 2]>,
}

impl From<&Pdag> for GraphJson {
    fn from(g: &Pdag) -> Self {
        let name = |v: usize| g.label(v).to_string();
        GraphJson {
            format: GRAPH_FORMAT.to_string(),
            nodes: g.labels().to_vec(),
            directed: g.directed_edges().into_iter().map(|(a, b)| [name(a), name(b)]).collect(),
            undirected: g.undirected_edges().into_iter().map(|(a, b)| [name(a), name(b)]).collect(),
        }
    }
}

impl GraphJson {
    pub fn to_pdag(&self) -> Result<Pdag> {
        if self.format != GRAPH_FORMAT {
            return Err(Error::Parse(format!(
                "unsupported graph format `{}` (expected `{GRAPH_FORMAT}`)",
                self.format
            )));
        }
        let mut sorted = self.nodes.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.nodes.len() {
            return Err(Error::Validation("duplicate node labels".into()));
        }
        let mut g = Pdag::with_labels(self.nodes.clone());
        for [a, b] in &self.directed {
            g.add_directed(g.index_of(a)?, g.index_of(b)?)?;
        }
        for [a, b] in &self.undirected {
            g.add_undirected(g.index_of(a)?, g.index_of(b)?)?;
        }
        Ok(g)
    }
}

pub fn to_json(g: &Pdag) -> String {
    serde_json::to_string_pretty(&GraphJson::from(g)).expect("graph serialises")
}

pub fn from_json(text: &str) -> Result<Pdag> {
    let parsed: GraphJson = serde_json::from_str(text)?;
    parsed.to_pdag()
}

/// DOT-style export with `->` for directed and `--` for undirected edges.
pub fn to_dot(g: &Pdag) -> String {
    let mut out = String::from("pdag G {\n");
    for label in g.labels() {
        out.push_str(&format!("  \"{label}\";\n"));
    }
    for (a, b) in g.directed_edges() {
        out.push_str(&format!("  \"{}\" -> \"{}\";\n", g.label(a), g.label(b)));
    }
    for (a, b) in g.undirected_edges() {
        out.push_str(&format!("  \"{}\" -- \"{}\";\n", g.label(a), g.label(b)));
    }
    out.push_str("}\n");
    out
}

/// One `a -> b` or `a -- b` per line, followed by isolated nodes on their own lines.
pub fn to_edge_list(g: &Pdag) -> String {
    let mut out = String::new();
    for (a, b) in g.directed_edges() {
        out.push_str(&format!("{} -> {}\n", g.label(a), g.label(b)));
    }
    for (a, b) in g.undirected_edges() {
        out.push_str(&format!("{} -- {}\n", g.label(a), g.label(b)));
    }
    for v in g.nodes() {
        if g.degree(v) == 0 {
            out.push_str(&format!("{}\n", g.label(v)));
        }
    }
    out
}

/// Parses the edge-list format. Nodes are numbered in order of first mention;
/// blank lines and lines starting with `#` are skipped.
pub fn from_edge_list(text: &str) -> Result<Pdag> {
    let mut labels: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    let intern = |name: &str, labels: &mut Vec<String>| -> usize {
        match labels.iter().position(|l| l == name) {
            Some(i) => i,
            None => {
                labels.push(name.to_string());
                labels.len() - 1
            }
        }
    };
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            [single] => {
                intern(single, &mut labels);
            }
            [a, op, b] if *op == "->" || *op == "--" => {
                let a = intern(a, &mut labels);
                let b = intern(b, &mut labels);
                edges.push((a, b, *op == "->"));
            }
            _ => {
                return Err(Error::Parse(format!("line {}: cannot parse `{line}`", lineno + 1)));
            }
        }
    }
    let mut g = Pdag::with_labels(labels);
    for (a, b, directed) in edges {
        if directed {
            g.add_directed(a, b)?;
        } else {
            g.add_undirected(a, b)?;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Pdag {
        let mut g = Pdag::from_edges(4, &[(0, 3), (2, 3)], &[(0, 1)]).unwrap();
        g.set_labels(vec!["A".into(), "X".into(), "B".into(), "Y".into()]).unwrap();
        g
    }

    #[test]
    fn json_round_trip() {
        let g = sample();
        assert_eq!(from_json(&to_json(&g)).unwrap(), g);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = sample();
        let text = to_edge_list(&g);
        assert!(text.contains("A -> Y"));
        assert!(text.contains("A -- X"));
        let back = from_edge_list(&text).unwrap();
        assert_eq!(to_json(&back), to_json(&from_json(&to_json(&back)).unwrap()));
        assert_eq!(back.n_edges(), 3);
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(from_edge_list("A => B"), Err(Error::Parse(_))));
        assert!(matches!(from_json("{\"format\":\"x\",\"nodes\":[]}"), Err(Error::Parse(_))));
        assert!(matches!(from_json("not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn dot_marks_undirected() {
        let dot = to_dot(&sample());
        assert!(dot.contains("\"A\" -> \"Y\";"));
        assert!(dot.contains("\"A\" -- \"X\";"));
    }
}
