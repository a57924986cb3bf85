//! JSON graph documents.
//!
//! ```json
//! {
//!   "vertices": ["j"],
//!   "edges": [
//!     {"id": "loop", "from": "j", "to": "j", "length": 4.0},
//!     {"id": "h", "from": "j", "length": "inf",
//!      "potential": {"type": "gaussian_well", "depth": 1.0, "center": 0.0, "width": 1.0}}
//!   ],
//!   "p": 4.0
//! }
//! ```
//!
//! A missing `potential` means `W = 0` on that edge. `potential_floor` and
//! `decay_radius` are optional top-level fields.

use std::fs;
use std::path::Path;

use graphnls_core::graph::{build_graph, EdgeSpec, GraphSpec, Length, MetricGraph};
use graphnls_core::potential::{EdgePotential, PotentialSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDocument {
    pub id: String,
    pub from: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<String>,
    pub length: LengthDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialDocument>,
}

/// A number, or the string `"inf"` for a halfline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LengthDocument {
    Finite(f64),
    Marker(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialDocument {
    Constant { value: f64 },
    GaussianWell { depth: f64, center: f64, width: f64 },
    Sampled { points: Vec<[f64; 2]> },
}

/// A validated document.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: MetricGraph,
    pub potential: PotentialSpec,
    pub p: Option<f64>,
}

impl GraphDocument {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    /// A potential-free document for `spec`.
    pub fn from_spec(spec: &GraphSpec, p: Option<f64>) -> Self {
        GraphDocument {
            vertices: spec.vertices.clone(),
            edges: spec
                .edges
                .iter()
                .map(|e| EdgeDocument {
                    id: e.id.clone(),
                    from: e.from.clone(),
                    to: e.to.clone(),
                    length: match e.length {
                        Length::Finite(l) => LengthDocument::Finite(l),
                        Length::Unbounded => LengthDocument::Marker("inf".into()),
                    },
                    potential: None,
                })
                .collect(),
            p,
            potential_floor: None,
            decay_radius: None,
        }
    }

    pub fn graph_spec(&self) -> Result<GraphSpec, String> {
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let length = match &e.length {
                    LengthDocument::Finite(l) => Length::Finite(*l),
                    LengthDocument::Marker(s) if s == "inf" => Length::Unbounded,
                    LengthDocument::Marker(s) => {
                        return Err(format!("edge {}: length must be a number or \"inf\", got {s:?}", e.id))
                    }
                };
                Ok(EdgeSpec { id: e.id.clone(), from: e.from.clone(), to: e.to.clone(), length })
            })
            .collect::<Result<_, String>>()?;
        Ok(GraphSpec { vertices: self.vertices.clone(), edges })
    }

    pub fn build(&self) -> Result<LoadedGraph, String> {
        let graph = build_graph(&self.graph_spec()?).map_err(|e| e.to_string())?;
        let models = self
            .edges
            .iter()
            .map(|e| match &e.potential {
                None => EdgePotential::Constant(0.0),
                Some(PotentialDocument::Constant { value }) => EdgePotential::Constant(*value),
                Some(PotentialDocument::GaussianWell { depth, center, width }) => {
                    EdgePotential::GaussianWell { depth: *depth, center: *center, width: *width }
                }
                Some(PotentialDocument::Sampled { points }) => {
                    EdgePotential::Sampled(points.iter().map(|[x, w]| (*x, *w)).collect())
                }
            })
            .collect();
        let potential = PotentialSpec::new(&graph, models, self.potential_floor, self.decay_radius)
            .map_err(|e| e.to_string())?;
        Ok(LoadedGraph { graph, potential, p: self.p })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use graphnls_core::catalog;

    #[test]
    fn round_trip_through_json() {
        let doc = GraphDocument::from_spec(&catalog::figure_one(), Some(4.0));
        let text = serde_json::to_string_pretty(&doc).unwrap();
        let back = GraphDocument::parse(&text).unwrap();
        assert_eq!(back, doc);
        let loaded = back.build().unwrap();
        assert_eq!(loaded.graph, build_graph(&catalog::figure_one()).unwrap());
        assert_eq!(loaded.graph.edge_count(), 14);
        assert!(loaded.potential.is_zero());
    }

    #[test]
    fn potentials_are_parsed() {
        let text = r#"{
            "vertices": ["j"],
            "edges": [
                {"id": "loop", "from": "j", "to": "j", "length": 2.0,
                 "potential": {"type": "sampled", "points": [[0.0, -1.0], [2.0, 0.5]]}},
                {"id": "h", "from": "j", "length": "inf",
                 "potential": {"type": "gaussian_well", "depth": 1.0, "center": 0.0, "width": 1.0}}
            ]
        }"#;
        let loaded = GraphDocument::parse(text).unwrap().build().unwrap();
        let h = loaded.graph.edge_index("h").unwrap();
        assert_eq!(loaded.potential.eval(&loaded.graph, h, 0.0).unwrap(), -1.0);
        assert_eq!(loaded.potential.eval(&loaded.graph, 0, 1.0).unwrap(), -0.25);
        assert_eq!(loaded.p, None);
    }

    #[test]
    fn malformed_documents_are_rejected() {
        let bad_length = r#"{"vertices": ["o"], "edges": [{"id": "h", "from": "o", "length": "forever"}]}"#;
        let err = GraphDocument::parse(bad_length).unwrap().build().unwrap_err();
        assert!(err.contains("forever"), "{err}");

        let typo = r#"{"vertices": ["o"], "edges": [{"id": "h", "from": "o", "lenght": "inf"}]}"#;
        assert!(GraphDocument::parse(typo).is_err());

        let compact = r#"{"vertices": ["a", "b"], "edges": [{"id": "e", "from": "a", "to": "b", "length": 1.0}]}"#;
        let err = GraphDocument::parse(compact).unwrap().build().unwrap_err();
        assert!(err.contains("no unbounded edge"), "{err}");

        let growing = r#"{"vertices": ["o"], "edges": [{"id": "h", "from": "o", "length": "inf",
            "potential": {"type": "constant", "value": 1.0}}]}"#;
        assert!(GraphDocument::parse(growing).unwrap().build().is_err());
    }
}
