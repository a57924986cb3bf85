//! Noncompact metric graphs.
//!
//! Every bounded edge is an oriented segment `[0, l]` running from its first
//! endpoint (`tail`) to its second (`head`); a halfline is `[0, inf)` with
//! `x = 0` at its single attachment vertex. Orientation is fixed when the
//! graph is built.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Edge length: a positive real or a halfline marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Length {
    Finite(f64),
    Unbounded,
}

impl Length {
    pub fn is_bounded(self) -> bool {
        matches!(self, Length::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Length::Finite(l) => Some(l),
            Length::Unbounded => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub name: String,
    /// Vertex at `x = 0`.
    pub tail: usize,
    /// Vertex at `x = l`; `None` for a halfline.
    pub head: Option<usize>,
    pub length: Length,
}

impl Edge {
    pub fn is_bounded(&self) -> bool {
        self.length.is_bounded()
    }

    pub fn is_loop(&self) -> bool {
        self.head == Some(self.tail)
    }

    /// Both endpoints, the second one only for bounded edges.
    pub fn endpoints(&self) -> impl Iterator<Item = usize> + '_ {
        core::iter::once(self.tail).chain(self.head)
    }
}

/// Input description of one edge, as read from a graph document.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub id: String,
    pub from: String,
    pub to: Option<String>,
    pub length: Length,
}

impl EdgeSpec {
    pub fn bounded(id: &str, from: &str, to: &str, length: f64) -> Self {
        EdgeSpec {
            id: id.into(),
            from: from.into(),
            to: Some(to.into()),
            length: Length::Finite(length),
        }
    }

    pub fn halfline(id: &str, from: &str) -> Self {
        EdgeSpec { id: id.into(), from: from.into(), to: None, length: Length::Unbounded }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeClass {
    /// Bounded edge with an endpoint of degree one.
    EndEdge,
    InternalEdge,
    Halfline,
}

/// Result of [`MetricGraph::classify_edge`]: the class plus an endpoint
/// ordering with `deg(v1) != 2` and `deg(v2) >= 3` whenever such an ordering
/// exists. For an end-edge `v1` is the degree-one tip. Halflines report their
/// attachment vertex as `v1` and no `v2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeInfo {
    pub class: EdgeClass,
    pub v1: usize,
    pub v2: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
    degree: Vec<usize>,
}

/// Validate a graph description. Identical specs give identical graphs,
/// including the order and orientation of every edge.
pub fn build_graph(spec: &GraphSpec) -> Result<MetricGraph> {
    let mut vertices: Vec<String> = Vec::with_capacity(spec.vertices.len());
    for v in &spec.vertices {
        if vertices.contains(v) {
            return Err(Error::DuplicateId(v.clone()));
        }
        vertices.push(v.clone());
    }
    let lookup = |edge: &str, name: &str| -> Result<usize> {
        vertices.iter().position(|v| v == name).ok_or_else(|| Error::DanglingEndpoint {
            edge: edge.into(),
            vertex: name.into(),
        })
    };

    let mut edges: Vec<Edge> = Vec::with_capacity(spec.edges.len());
    for es in &spec.edges {
        if edges.iter().any(|e| e.name == es.id) {
            return Err(Error::DuplicateId(es.id.clone()));
        }
        let tail = lookup(&es.id, &es.from)?;
        let head = match (&es.to, es.length) {
            (Some(to), Length::Finite(l)) => {
                if !(l > 0.0) || !l.is_finite() {
                    return Err(Error::NonpositiveLength { edge: es.id.clone(), length: l });
                }
                Some(lookup(&es.id, to)?)
            }
            (None, Length::Finite(l)) => {
                return Err(Error::DanglingEndpoint {
                    edge: es.id.clone(),
                    vertex: alloc::format!("<missing head of bounded edge, length {l}>"),
                })
            }
            (Some(_), Length::Unbounded) => {
                return Err(Error::MalformedHalfline { edge: es.id.clone() })
            }
            (None, Length::Unbounded) => None,
        };
        edges.push(Edge { name: es.id.clone(), tail, head, length: es.length });
    }

    let mut adjacency = vec![Vec::new(); vertices.len()];
    let mut degree = vec![0usize; vertices.len()];
    for (i, e) in edges.iter().enumerate() {
        adjacency[e.tail].push(i);
        degree[e.tail] += 1;
        if let Some(h) = e.head {
            if h != e.tail {
                adjacency[h].push(i);
            }
            degree[h] += 1;
        }
    }

    if !edges.iter().any(|e| !e.is_bounded()) {
        return Err(Error::CompactGraph);
    }
    if !is_connected(vertices.len(), &edges) {
        return Err(Error::DisconnectedGraph);
    }

    Ok(MetricGraph { vertices, edges, adjacency, degree })
}

fn is_connected(n: usize, edges: &[Edge]) -> bool {
    if n == 0 {
        return false;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in edges {
        if let Some(h) = e.head {
            let (a, b) = (find(&mut parent, e.tail), find(&mut parent, h));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let root = find(&mut parent, 0);
    (1..n).all(|v| find(&mut parent, v) == root)
}

impl MetricGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Result<&Edge> {
        self.edges.get(e).ok_or(Error::EdgeNotInGraph(e))
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    /// Edges incident to `v`, a self-loop listed once.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Number of edge ends at `v`; a self-loop counts twice.
    pub fn degree(&self, v: usize) -> usize {
        self.degree[v]
    }

    pub fn bounded_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().enumerate().filter(|(_, e)| e.is_bounded()).map(|(i, _)| i)
    }

    pub fn halflines(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().enumerate().filter(|(_, e)| !e.is_bounded()).map(|(i, _)| i)
    }

    pub fn classify_edge(&self, e: usize) -> Result<EdgeInfo> {
        let edge = self.edge(e)?;
        let Some(head) = edge.head else {
            return Ok(EdgeInfo { class: EdgeClass::Halfline, v1: edge.tail, v2: None });
        };
        let tail = edge.tail;
        let (dt, dh) = (self.degree(tail), self.degree(head));
        let class = if !edge.is_loop() && (dt == 1 || dh == 1) {
            EdgeClass::EndEdge
        } else {
            EdgeClass::InternalEdge
        };
        let ok = |d1: usize, d2: usize| d1 != 2 && d2 >= 3;
        let (v1, v2) = if ok(dt, dh) {
            (tail, head)
        } else if ok(dh, dt) {
            (head, tail)
        } else if dh == 1 {
            (head, tail)
        } else {
            (tail, head)
        };
        Ok(EdgeInfo { class, v1, v2: Some(v2) })
    }

    pub fn shortest_bounded_edge(&self) -> Result<f64> {
        self.edges
            .iter()
            .filter_map(|e| e.length.finite())
            .reduce(f64::min)
            .ok_or(Error::NoBoundedEdge)
    }

    /// True when the graph is two halflines glued at one degree-2 vertex.
    pub fn is_line(&self) -> bool {
        self.vertices.len() == 1
            && self.edges.len() == 2
            && self.edges.iter().all(|e| !e.is_bounded())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn line_is_valid() {
        let g = build_graph(&catalog::line()).unwrap();
        assert!(g.is_line());
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.shortest_bounded_edge(), Err(Error::NoBoundedEdge));
    }

    #[test]
    fn figure_one_graph_counts() {
        let g = build_graph(&catalog::figure_one()).unwrap();
        assert_eq!(g.vertex_count(), 7);
        assert_eq!(g.edge_count(), 14);
        assert_eq!(g.bounded_edges().count(), 11);
        assert_eq!(g.halflines().count(), 3);
    }

    #[test]
    fn single_bounded_edge_is_compact() {
        let spec = GraphSpec {
            vertices: vec!["a".into(), "b".into()],
            edges: vec![EdgeSpec::bounded("e", "a", "b", 1.0)],
        };
        assert_eq!(build_graph(&spec), Err(Error::CompactGraph));
    }

    #[test]
    fn construction_errors() {
        let mut spec = catalog::star_with_pendant(4.0);
        spec.edges[0].length = Length::Finite(0.0);
        assert!(matches!(build_graph(&spec), Err(Error::NonpositiveLength { .. })));

        let mut spec = catalog::star_with_pendant(4.0);
        spec.edges[0].to = Some("nowhere".into());
        assert!(matches!(build_graph(&spec), Err(Error::DanglingEndpoint { .. })));

        // isolated bounded edge next to a halfline component
        let mut spec = catalog::halfline();
        spec.vertices.extend(["x".into(), "y".into()]);
        spec.edges.push(EdgeSpec::bounded("island", "x", "y", 1.0));
        assert_eq!(build_graph(&spec), Err(Error::DisconnectedGraph));

        let mut spec = catalog::line();
        spec.edges[1].id = spec.edges[0].id.clone();
        assert!(matches!(build_graph(&spec), Err(Error::DuplicateId(_))));
    }

    #[test]
    fn edge_classes() {
        let g = build_graph(&catalog::tadpole(4.0)).unwrap();
        let lp = g.edge_index("loop").unwrap();
        assert_eq!(g.classify_edge(lp).unwrap().class, EdgeClass::InternalEdge);
        let hl = g.edge_index("h").unwrap();
        assert_eq!(g.classify_edge(hl).unwrap().class, EdgeClass::Halfline);

        let g = build_graph(&catalog::star_with_pendant(4.0)).unwrap();
        let pendant = g.edge_index("pendant").unwrap();
        let info = g.classify_edge(pendant).unwrap();
        assert_eq!(info.class, EdgeClass::EndEdge);
        assert_eq!(g.degree(info.v1), 1);
        assert_eq!(g.degree(info.v2.unwrap()), 3);
        assert!(g.classify_edge(99).is_err());
    }

    #[test]
    fn classification_partitions_edges() {
        let g = build_graph(&catalog::figure_one()).unwrap();
        let mut counts = [0usize; 3];
        for e in 0..g.edge_count() {
            let idx = match g.classify_edge(e).unwrap().class {
                EdgeClass::EndEdge => 0,
                EdgeClass::InternalEdge => 1,
                EdgeClass::Halfline => 2,
            };
            counts[idx] += 1;
        }
        assert_eq!(counts.iter().sum::<usize>(), 14);
        assert_eq!(counts, [1, 10, 3]);
    }

    #[test]
    fn normalized_endpoint_order() {
        // bounded edge between a degree-2 vertex and a degree-3 vertex
        let spec = GraphSpec {
            vertices: vec!["a".into(), "b".into(), "c".into()],
            edges: vec![
                EdgeSpec::halfline("h0", "a"),
                EdgeSpec::bounded("e", "a", "b", 1.0),
                EdgeSpec::halfline("h1", "b"),
                EdgeSpec::bounded("f", "b", "c", 1.0),
                EdgeSpec::halfline("h2", "c"),
            ],
        };
        let g = build_graph(&spec).unwrap();
        let e = g.edge_index("e").unwrap();
        let info = g.classify_edge(e).unwrap();
        // no ordering satisfies deg(v1) != 2 and deg(v2) >= 3, so the original is kept
        assert_eq!((info.v1, info.v2), (0, Some(1)));
        let f = g.edge_index("f").unwrap();
        let info = g.classify_edge(f).unwrap();
        assert_eq!(info.class, EdgeClass::InternalEdge);
    }

    #[test]
    fn shortest_edge() {
        let spec = GraphSpec {
            vertices: vec!["a".into(), "b".into(), "c".into(), "d".into()],
            edges: vec![
                EdgeSpec::bounded("e1", "a", "b", 2.0),
                EdgeSpec::bounded("e2", "b", "c", 1.0),
                EdgeSpec::bounded("e3", "c", "d", 5.0),
                EdgeSpec::halfline("h", "d"),
            ],
        };
        assert_eq!(build_graph(&spec).unwrap().shortest_bounded_edge().unwrap(), 1.0);
        let g = build_graph(&catalog::tadpole(3.5)).unwrap();
        assert_eq!(g.shortest_bounded_edge().unwrap(), 3.5);
    }

    #[test]
    fn build_is_deterministic() {
        let a = build_graph(&catalog::figure_one()).unwrap();
        let b = build_graph(&catalog::figure_one()).unwrap();
        assert_eq!(a, b);
    }
}
