//! The quadratic form `int |u'|^2 + W |u|^2` on a mesh.
//!
//! Stiffness is the piecewise-linear one, `(1/h) [[1, -1], [-1, 1]]` per
//! cell. Summing cells at a vertex node gives the one-sided differences of
//! every incident edge, so stationarity of the form imposes the Kirchhoff
//! flux condition in the limit `h -> 0`. The potential part is diagonal,
//! `sum over incident half-cells of (h/2) W_e(x_node)`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::{DiscreteFunction, Mesh};
use crate::potential::PotentialSpec;

#[derive(Debug, Clone)]
pub struct GraphOperator {
    mesh: Arc<Mesh>,
    stiffness: CsrMatrix,
    potential: Vec<f64>,
}

pub fn assemble_operator(mesh: Arc<Mesh>, w: &PotentialSpec) -> GraphOperator {
    let n = mesh.dof_count();
    let mut trip = Vec::with_capacity(4 * n);
    for i in 0..n {
        trip.push((i, i, 0.0));
    }
    let mut potential = vec![0.0; n];
    for g in mesh.grids() {
        let dofs = g.dofs();
        let k_cell = 1.0 / g.h;
        for k in 0..g.cells {
            let (a, b) = (dofs[k], dofs[k + 1]);
            trip.push((a, a, k_cell));
            trip.push((b, b, k_cell));
            trip.push((a, b, -k_cell));
            trip.push((b, a, -k_cell));
            potential[a] += 0.5 * g.h * w.value(g.edge, g.x(k));
            potential[b] += 0.5 * g.h * w.value(g.edge, g.x(k + 1));
        }
    }
    GraphOperator { stiffness: CsrMatrix::from_triplets(n, trip), potential, mesh }
}

impl GraphOperator {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    /// Diagonal of the potential part.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub(crate) fn check(&self, u: &DiscreteFunction) -> Result<()> {
        if u.same_mesh(&self.mesh) {
            Ok(())
        } else {
            Err(Error::MeshMismatch)
        }
    }

    /// `(stiffness + potential) u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = self.stiffness.matvec(u);
        for ((o, v), x) in out.iter_mut().zip(&self.potential).zip(u) {
            *o += v * x;
        }
        out
    }

    /// `int |u'|^2` of the piecewise-linear interpolant.
    pub fn kinetic_form(&self, u: &[f64]) -> f64 {
        self.stiffness.quadratic_form(u)
    }

    /// `int W |u|^2` by the trapezoidal rule.
    pub fn potential_form(&self, u: &[f64]) -> f64 {
        self.potential.iter().zip(u).map(|(v, x)| v * x * x).sum()
    }

    /// Weight-normalized rows, `M^-1 (stiffness + potential)`, as a dense
    /// matrix. Only meant for small meshes and tests.
    pub fn normalized_dense(&self) -> Vec<Vec<f64>> {
        let n = self.mesh.dof_count();
        let w = self.mesh.weights();
        (0..n)
            .map(|i| {
                let mut row = vec![0.0; n];
                for (j, a) in self.stiffness.row(i) {
                    row[j] += a / w[i];
                }
                row[i] += self.potential[i] / w[i];
                row
            })
            .collect()
    }
}
