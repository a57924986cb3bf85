use std::path::Path;

use graphnls::format::GraphDocument;
use graphnls_core::catalog;
use graphnls_core::graph::{build_graph, GraphSpec};

fn load(name: &str) -> GraphDocument {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../graphs").join(format!("{name}.json"));
    GraphDocument::load(&path).unwrap()
}

#[test]
fn shipped_graphs_match_the_catalog() {
    let cases: [(&str, GraphSpec); 7] = [
        ("line", catalog::line()),
        ("halfline", catalog::halfline()),
        ("star3", catalog::star(3)),
        ("tadpole", catalog::tadpole(4.0)),
        ("star_with_pendant", catalog::star_with_pendant(4.0)),
        ("three_bounded", catalog::three_bounded(4.0)),
        ("figure_one", catalog::figure_one()),
    ];
    for (name, spec) in cases {
        let doc = load(name);
        assert_eq!(doc.graph_spec().unwrap(), spec, "{name}");
        let loaded = doc.build().unwrap();
        assert_eq!(loaded.graph, build_graph(&spec).unwrap(), "{name}");
        assert!(loaded.potential.is_zero());
        assert_eq!(loaded.p, Some(4.0));
    }
}

#[test]
fn figure_one_counts() {
    let g = load("figure_one").build().unwrap().graph;
    assert_eq!(g.vertex_count(), 7);
    assert_eq!(g.edge_count(), 14);
    assert_eq!(g.bounded_edges().count(), 11);
    assert_eq!(g.halflines().count(), 3);
}

#[test]
fn well_document_carries_its_potential() {
    let loaded = load("tadpole_with_well").build().unwrap();
    let g = &loaded.graph;
    let lp = g.edge_index("loop").unwrap();
    assert_eq!(loaded.potential.eval(g, lp, 2.0).unwrap(), -0.5);
    assert!(loaded.potential.floor() <= -0.5);
    assert!(!loaded.potential.is_zero());
}
