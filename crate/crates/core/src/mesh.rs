//! Uniform per-edge grids with shared vertex nodes and trapezoidal weights.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

// std's inherent float methods shadow these when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::graph::{Length, MetricGraph};
use crate::potential::PotentialSpec;
use crate::theory::{check_exponent, TheoryConstants};

/// Fewest cells any edge may carry.
pub const MIN_CELLS: usize = 4;

/// Length at which to cut every halfline: the soliton `phi_mu` has less
/// than `tail_tol * mu` of its mass beyond it, `W` has decayed below
/// the halfline threshold, and it is never shorter than one soliton width.
/// A `tail_tol >= 1` switches the mass condition off.
pub fn truncation_length(
    c: &TheoryConstants,
    mu: f64,
    tail_tol: f64,
    w: &PotentialSpec,
) -> Result<f64> {
    check_exponent(c.p)?;
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidParameter { name: "mu", value: mu });
    }
    if !(tail_tol > 0.0) {
        return Err(Error::InvalidParameter { name: "tail_tol", value: tail_tol });
    }
    let width = 1.0 / c.inverse_width(mu);
    let mut l = width.max(w.decay_radius());
    if tail_tol < 1.0 {
        let target = tail_tol * mu;
        let mut hi = width;
        while c.tail_mass(mu, hi) >= target {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        while hi - lo > 1e-10 * hi {
            let mid = 0.5 * (lo + hi);
            if c.tail_mass(mu, mid) >= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        l = l.max(hi);
    }
    Ok(l)
}

/// Grid on one edge: `cells + 1` equally spaced nodes, node `k` at `k * h`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeGrid {
    pub edge: usize,
    pub cells: usize,
    pub h: f64,
    /// Retained length: the edge length, or the truncation length of a halfline.
    pub length: f64,
    pub truncated: bool,
    dofs: Vec<usize>,
}

impl EdgeGrid {
    pub fn dofs(&self) -> &[usize] {
        &self.dofs
    }

    pub fn x(&self, k: usize) -> f64 {
        if k == self.cells {
            self.length
        } else {
            self.h * k as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    grids: Vec<EdgeGrid>,
    vertex_dofs: Vec<usize>,
    weights: Vec<f64>,
    resolution: f64,
    tail_tol: f64,
    truncation: f64,
}

/// Mesh every edge with spacing at most `resolution`; halflines are cut at
/// [`truncation_length`] and left free at the cut.
///
/// Edge-owned nodes are numbered first, consecutively along each edge;
/// vertex nodes come last, one per vertex whatever its degree.
pub fn build_mesh(
    g: &MetricGraph,
    w: &PotentialSpec,
    c: &TheoryConstants,
    resolution: f64,
    mu: f64,
    tail_tol: f64,
) -> Result<Mesh> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::InvalidParameter { name: "resolution", value: resolution });
    }
    let truncation = if g.halflines().next().is_some() {
        truncation_length(c, mu, tail_tol, w)?
    } else {
        0.0
    };

    let mut shapes = Vec::with_capacity(g.edge_count());
    let mut owned = 0usize;
    for (e, edge) in g.edges().iter().enumerate() {
        let (len, truncated) = match edge.length {
            Length::Finite(l) => (l, false),
            Length::Unbounded => (truncation, true),
        };
        let cells = ((len / resolution) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        if cells < MIN_CELLS {
            return Err(Error::ResolutionTooCoarse { edge: edge.name.clone(), cells });
        }
        shapes.push((e, len, cells, truncated));
        owned += if truncated { cells } else { cells - 1 };
    }
    let vertex_dofs: Vec<usize> = (0..g.vertex_count()).map(|v| owned + v).collect();
    let n = owned + g.vertex_count();

    let mut next = 0usize;
    let mut grids = Vec::with_capacity(shapes.len());
    let mut weights = vec![0.0; n];
    for (e, len, cells, truncated) in shapes {
        let edge = &g.edges()[e];
        let mut dofs = Vec::with_capacity(cells + 1);
        dofs.push(vertex_dofs[edge.tail]);
        let interior = if truncated { cells } else { cells - 1 };
        dofs.extend(next..next + interior);
        next += interior;
        if let Some(head) = edge.head {
            dofs.push(vertex_dofs[head]);
        }
        let h = len / cells as f64;
        for k in 0..cells {
            weights[dofs[k]] += 0.5 * h;
            weights[dofs[k + 1]] += 0.5 * h;
        }
        grids.push(EdgeGrid { edge: e, cells, h, length: len, truncated, dofs });
    }

    Ok(Mesh { grids, vertex_dofs, weights, resolution, tail_tol, truncation })
}

impl Mesh {
    pub fn dof_count(&self) -> usize {
        self.weights.len()
    }

    pub fn grids(&self) -> &[EdgeGrid] {
        &self.grids
    }

    pub fn grid(&self, e: usize) -> &EdgeGrid {
        &self.grids[e]
    }

    pub fn vertex_dof(&self, v: usize) -> usize {
        self.vertex_dofs[v]
    }

    pub fn is_vertex_dof(&self, i: usize) -> bool {
        i >= self.vertex_dofs.first().copied().unwrap_or(usize::MAX)
    }

    /// Trapezoidal weight of each node: half a cell from every incident cell.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    /// Cut length shared by all halflines (0 when there are none).
    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn total_length(&self) -> f64 {
        self.grids.iter().map(|g| g.length).sum()
    }

    /// Trapezoidal integral of nodal values over all retained edges.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Edge ids carrying node `i`.
    pub fn edges_at(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.grids.iter().filter(move |g| g.dofs.contains(&i)).map(|g| g.edge)
    }

    /// Neighbouring node pairs `(a, b, h)`, one per cell.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.grids
            .iter()
            .flat_map(|g| g.dofs.windows(2).map(move |w| (w[0], w[1], g.h)))
    }
}

/// Nodal values on a shared mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunction {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl DiscreteFunction {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.dof_count() {
            return Err(Error::MeshMismatch);
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter { name: "function value", value: *v });
        }
        Ok(DiscreteFunction { mesh, values })
    }

    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let n = mesh.dof_count();
        DiscreteFunction { mesh, values: vec![0.0; n] }
    }

    /// Sample `f(edge, x)` at every node; vertex nodes take the value from
    /// the first edge that reaches them.
    pub fn from_fn(mesh: Arc<Mesh>, f: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let mut values = vec![f64::NAN; mesh.dof_count()];
        for g in mesh.grids() {
            for (k, &d) in g.dofs().iter().enumerate() {
                if values[d].is_nan() {
                    values[d] = f(g.edge, g.x(k));
                }
            }
        }
        Self::new(mesh, values)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        DiscreteFunction { mesh: self.mesh.clone(), values }
    }

    pub fn same_mesh(&self, other: &Arc<Mesh>) -> bool {
        Arc::ptr_eq(&self.mesh, other) || *self.mesh == **other
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.with_values(self.values.iter().map(|v| c * v).collect())
    }

    /// Nodal values along edge `e`, from `x = 0` outwards.
    pub fn edge_values(&self, e: usize) -> Vec<f64> {
        self.mesh.grid(e).dofs().iter().map(|&d| self.values[d]).collect()
    }

    pub fn mass(&self) -> f64 {
        self.mesh.integrate(&self.values.iter().map(|v| v * v).collect::<Vec<_>>())
    }

    /// L^2 distance on the common mesh.
    pub fn l2_distance(&self, other: &DiscreteFunction) -> Result<f64> {
        if !self.same_mesh(&other.mesh) {
            return Err(Error::MeshMismatch);
        }
        let d: Vec<f64> =
            self.values.iter().zip(&other.values).map(|(a, b)| (a - b) * (a - b)).collect();
        Ok(self.mesh.integrate(&d).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::graph::{build_graph, EdgeSpec, GraphSpec};
    use crate::theory::soliton_constants;

    fn unit_edge_graph() -> MetricGraph {
        build_graph(&GraphSpec {
            vertices: vec!["a".into(), "b".into()],
            edges: vec![EdgeSpec::bounded("e", "a", "b", 1.0), EdgeSpec::halfline("h", "b")],
        })
        .unwrap()
    }

    #[test]
    fn uniform_grid_on_unit_edge() {
        let g = unit_edge_graph();
        let c = soliton_constants(4.0).unwrap();
        let w = PotentialSpec::zero(&g);
        let m = build_mesh(&g, &w, &c, 0.25, 2.0, 1e-6).unwrap();
        let grid = m.grid(0);
        assert_eq!(grid.cells, 4);
        let xs: Vec<f64> = (0..=grid.cells).map(|k| grid.x(k)).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(m.grids().iter().all(|gr| gr.h <= 0.25));
    }

    #[test]
    fn star_center_is_shared() {
        let g = build_graph(&catalog::star(3)).unwrap();
        let c = soliton_constants(4.0).unwrap();
        let m = build_mesh(&g, &PotentialSpec::zero(&g), &c, 0.1, 2.0, 1e-8).unwrap();
        let center = m.vertex_dof(0);
        assert!(m.grids().iter().all(|gr| gr.dofs()[0] == center));
        assert_eq!(m.edges_at(center).count(), 3);
        // every other node belongs to exactly one edge
        for i in 0..m.dof_count() {
            if i != center {
                assert_eq!(m.edges_at(i).count(), 1);
            }
        }
    }

    #[test]
    fn loop_closes_on_itself() {
        let g = build_graph(&catalog::tadpole(1.0)).unwrap();
        let c = soliton_constants(4.0).unwrap();
        let m = build_mesh(&g, &PotentialSpec::zero(&g), &c, 0.1, 2.0, 1e-8).unwrap();
        let dofs = m.grid(0).dofs();
        assert_eq!(dofs[0], dofs[dofs.len() - 1]);
        assert_eq!(dofs[0], m.vertex_dof(0));
    }

    #[test]
    fn too_coarse() {
        let g = unit_edge_graph();
        let c = soliton_constants(4.0).unwrap();
        let r = build_mesh(&g, &PotentialSpec::zero(&g), &c, 0.4, 2.0, 1e-6);
        assert!(matches!(r, Err(Error::ResolutionTooCoarse { cells: 3, .. })));
    }

    #[test]
    fn weights_sum_to_length_and_integrate_linear_exactly() {
        let g = build_graph(&catalog::figure_one()).unwrap();
        let c = soliton_constants(4.0).unwrap();
        let m = build_mesh(&g, &PotentialSpec::zero(&g), &c, 0.05, 10.0, 1e-8).unwrap();
        assert!(m.weights().iter().all(|w| *w > 0.0));
        let ones = vec![1.0; m.dof_count()];
        assert!((m.integrate(&ones) - m.total_length()).abs() < 1e-12 * m.total_length());

        let g = unit_edge_graph();
        let m = Arc::new(build_mesh(&g, &PotentialSpec::zero(&g), &c, 0.25, 2.0, 1e-6).unwrap());
        // u(x) = x on the unit edge, zero on the halfline except at the shared vertex
        let u = DiscreteFunction::from_fn(m.clone(), |e, x| if e == 0 { x } else { 0.0 }).unwrap();
        let on_edge: f64 = m
            .grid(0)
            .dofs()
            .windows(2)
            .map(|d| 0.5 * m.grid(0).h * (u.values()[d[0]] + u.values()[d[1]]))
            .sum();
        assert_eq!(on_edge, 0.5);
    }

    #[test]
    fn total_length_seven() {
        // bounded edges 3 + 4 give 7 with a halfline cut at the W-free minimum
        let spec = GraphSpec {
            vertices: vec!["a".into(), "b".into(), "c".into()],
            edges: vec![
                EdgeSpec::bounded("e1", "a", "b", 3.0),
                EdgeSpec::bounded("e2", "b", "c", 4.0),
                EdgeSpec::halfline("h", "c"),
            ],
        };
        let g = build_graph(&spec).unwrap();
        let c = soliton_constants(4.0).unwrap();
        let m = build_mesh(&g, &PotentialSpec::zero(&g), &c, 0.01, 2.0, 1e-6).unwrap();
        let bounded: f64 = m.grids().iter().filter(|gr| !gr.truncated).map(|gr| gr.length).sum();
        let ones = vec![1.0; m.dof_count()];
        assert!((m.integrate(&ones) - bounded - m.truncation()).abs() < 1e-12);
        assert!((bounded - 7.0).abs() < 1e-15);
    }

    #[test]
    fn truncation_matches_cubic_tail_oracle() {
        let g = build_graph(&catalog::line()).unwrap();
        let w = PotentialSpec::zero(&g);
        let c = soliton_constants(4.0).unwrap();
        let mu = 2.0;
        let tol = 1e-10;
        let l = truncation_length(&c, mu, tol, &w).unwrap();
        // one-sided tail of the cubic soliton: 2 r (1 - tanh(r L)), r = mu / 4
        let r = mu / 4.0;
        let tail = |x: f64| {
            let q = (-2.0 * r * x).exp();
            4.0 * r * q / (1.0 + q)
        };
        assert!(tail(l) < tol * mu);
        assert!(tail(l * (1.0 - 1e-6)) >= tol * mu * (1.0 - 1e-5));
        // closed-form root: e^{-2rL} ~ tol mu / (4 r)
        let approx = -(tol * mu / (4.0 * r)).ln() / (2.0 * r);
        assert!((l - approx).abs() < 1e-6 * approx);
    }

    #[test]
    fn truncation_halves_when_mass_doubles() {
        let g = build_graph(&catalog::line()).unwrap();
        let w = PotentialSpec::zero(&g);
        let c = soliton_constants(4.0).unwrap();
        let tol = 1e-10;
        let l2 = truncation_length(&c, 2.0, tol, &w).unwrap();
        let l4 = truncation_length(&c, 4.0, tol, &w).unwrap();
        // L(mu) = ln(4 r / (tol mu)) / (2 r) with r = mu/4: the ratio is 1/2
        // up to the additive ln term
        let r2 = 0.5;
        let r4 = 1.0;
        assert!((l2 * r2 * 2.0 - (4.0 * r2 / (tol * 2.0)).ln()).abs() < 1e-6);
        assert!((l4 * r4 * 2.0 - (4.0 * r4 / (tol * 4.0)).ln()).abs() < 1e-6);
        assert!((l4 / l2 - 0.5).abs() < 0.05);
    }

    #[test]
    fn vacuous_mass_condition_leaves_decay_radius() {
        use crate::potential::EdgePotential;
        let g = build_graph(&catalog::halfline()).unwrap();
        let c = soliton_constants(4.0).unwrap();
        let w = PotentialSpec::new(
            &g,
            vec![EdgePotential::GaussianWell { depth: 1.0, center: 0.0, width: 1.0 }],
            None,
            Some(6.0),
        )
        .unwrap();
        assert_eq!(truncation_length(&c, 10.0, 1.0, &w).unwrap(), 6.0);
        let tight = truncation_length(&c, 10.0, 1e-10, &w).unwrap();
        assert!(tight >= 6.0);
    }
}
