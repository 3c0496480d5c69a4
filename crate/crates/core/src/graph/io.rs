//! JSON and DOT serialization.
//!
//! The JSON form is `{"n": <int>, "edges": [[u, v], ...]}` with every edge
//! canonical (`u < v`) and the list sorted, so equal graphs serialize to
//! identical bytes. Unknown fields are ignored on input, which lets anchored
//! graph files be read back as plain graphs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Edge, Graph, GraphError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed graph JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<Edge>,
}

impl From<&Graph> for GraphJson {
    fn from(g: &Graph) -> Self {
        Self {
            n: g.n(),
            edges: g.edges(),
        }
    }
}

impl TryFrom<GraphJson> for Graph {
    type Error = GraphError;

    fn try_from(doc: GraphJson) -> Result<Self, Self::Error> {
        Graph::from_edges(doc.n, doc.edges)
    }
}

pub fn to_json(g: &Graph) -> String {
    let mut s =
        serde_json::to_string(&GraphJson::from(g)).expect("graph serialization cannot fail");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<Graph, IoError> {
    let doc: GraphJson = serde_json::from_str(text)?;
    Ok(Graph::try_from(doc)?)
}

/// DOT rendering. Edges listed in `dashed` are drawn dashed whether or not
/// they belong to the graph, which is how anchors and pending edges are shown.
pub fn to_dot(g: &Graph, name: &str, dashed: &[Edge]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "graph {name} {{");
    for v in 0..g.n() {
        let _ = writeln!(out, "  {v};");
    }
    for e in g.edges() {
        if !dashed.contains(&e) {
            let _ = writeln!(out, "  {} -- {};", e.u(), e.v());
        }
    }
    for e in dashed {
        let _ = writeln!(out, "  {} -- {} [style=dashed];", e.u(), e.v());
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_canonical() {
        let text = r#"{"n":4,"edges":[[3,1],[0,2],[1,3]],"extra":true}"#;
        let g = from_json(text).unwrap();
        assert_eq!(g.edge_count(), 2);
        let out = to_json(&g);
        assert_eq!(out, "{\"n\":4,\"edges\":[[0,2],[1,3]]}\n");
        assert_eq!(to_json(&from_json(&out).unwrap()), out);
    }

    #[test]
    fn json_rejects_bad_edges() {
        assert!(matches!(
            from_json(r#"{"n":3,"edges":[[0,3]]}"#),
            Err(IoError::Graph(GraphError::VertexOutOfRange { .. }))
        ));
        assert!(from_json(r#"{"n":3,"edges":[[1,1]]}"#).is_err());
        assert!(from_json(r#"{"edges":[]}"#).is_err());
    }

    #[test]
    fn dot_marks_dashed_edges() {
        let g = Graph::from_edges(3, [Edge::new(0, 1)]).unwrap();
        let dot = to_dot(&g, "G", &[Edge::new(1, 2)]);
        assert!(dot.contains("0 -- 1;"));
        assert!(dot.contains("1 -- 2 [style=dashed];"));
        assert!(dot.starts_with("graph G {"));
    }
}
