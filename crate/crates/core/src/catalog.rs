//! Ready-made graph descriptions used by tests, examples and the CLI.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{EdgeSpec, GraphSpec};

fn names(ids: &[&str]) -> Vec<String> {
    ids.iter().map(|s| String::from(*s)).collect()
}

/// Two halflines glued at one vertex, isometric to the real line.
pub fn line() -> GraphSpec {
    GraphSpec {
        vertices: names(&["o"]),
        edges: vec![EdgeSpec::halfline("left", "o"), EdgeSpec::halfline("right", "o")],
    }
}

/// A single halfline starting at a degree-one vertex.
pub fn halfline() -> GraphSpec {
    GraphSpec { vertices: names(&["o"]), edges: vec![EdgeSpec::halfline("h", "o")] }
}

/// `n` halflines glued at a common center.
pub fn star(n: usize) -> GraphSpec {
    GraphSpec {
        vertices: names(&["c"]),
        edges: (0..n).map(|i| EdgeSpec::halfline(&alloc::format!("h{i}"), "c")).collect(),
    }
}

/// A loop of length `loop_len` with one halfline attached at the junction.
pub fn tadpole(loop_len: f64) -> GraphSpec {
    GraphSpec {
        vertices: names(&["j"]),
        edges: vec![EdgeSpec::bounded("loop", "j", "j", loop_len), EdgeSpec::halfline("h", "j")],
    }
}

/// Two halflines and one bounded pendant edge of length `len` meeting at a
/// degree-3 center; the pendant's far tip has degree one.
pub fn star_with_pendant(len: f64) -> GraphSpec {
    GraphSpec {
        vertices: names(&["c", "tip"]),
        edges: vec![
            EdgeSpec::bounded("pendant", "tip", "c", len),
            EdgeSpec::halfline("h0", "c"),
            EdgeSpec::halfline("h1", "c"),
        ],
    }
}

/// Three bounded edges: a segment `a`-`b` carrying a halfline at each end,
/// a pendant at `a` and a loop at `b`.
pub fn three_bounded(len: f64) -> GraphSpec {
    GraphSpec {
        vertices: names(&["a", "b", "tip"]),
        edges: vec![
            EdgeSpec::bounded("bridge", "a", "b", len),
            EdgeSpec::bounded("pendant", "tip", "a", len),
            EdgeSpec::bounded("loop", "b", "b", len),
            EdgeSpec::halfline("ha", "a"),
            EdgeSpec::halfline("hb", "b"),
        ],
    }
}

/// Seven vertices, eleven bounded edges (one self-loop, two pairs of
/// parallel edges, one pendant) and three halflines.
pub fn figure_one() -> GraphSpec {
    GraphSpec {
        vertices: names(&["v1", "v2", "v3", "v4", "v5", "v6", "v7"]),
        edges: vec![
            EdgeSpec::bounded("loop1", "v1", "v1", 2.0),
            EdgeSpec::bounded("v1v2", "v1", "v2", 1.0),
            EdgeSpec::bounded("v2v3", "v2", "v3", 1.0),
            EdgeSpec::bounded("v2v5", "v2", "v5", 0.6),
            EdgeSpec::bounded("v2v6", "v2", "v6", 1.0),
            EdgeSpec::bounded("v2v7", "v2", "v7", 1.4),
            EdgeSpec::bounded("v3v4", "v3", "v4", 1.2),
            EdgeSpec::bounded("v3v7", "v3", "v7", 1.0),
            EdgeSpec::bounded("v3v7arc", "v3", "v7", 1.6),
            EdgeSpec::bounded("v6v7", "v6", "v7", 1.0),
            EdgeSpec::bounded("v6v7arc", "v7", "v6", 1.6),
            EdgeSpec::halfline("h4", "v4"),
            EdgeSpec::halfline("h6", "v6"),
            EdgeSpec::halfline("h7", "v7"),
        ],
    }
}
