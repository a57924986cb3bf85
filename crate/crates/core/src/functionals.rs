//! Norms, energy, gradient, Lagrange multiplier and residuals of discrete
//! functions.
//!
//! The discrete energy is
//! `E(u) = 1/2 u^T (K + V) u - 1/p sum_i w_i |u_i|^p`
//! with `K` the stiffness, `V` the potential diagonal and `w` the trapezoidal
//! weights. Its `L^2` gradient is `M^-1 (K + V) u - |u|^(p-2) u`, so the
//! pairing `<grad, v>_{L^2}` is exactly the directional derivative.

use alloc::vec;
use alloc::vec::Vec;

// std's inherent float methods shadow these when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::mesh::DiscreteFunction;
use crate::operator::GraphOperator;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    /// `1/2 int |u'|^2`
    pub kinetic: f64,
    /// `1/2 int W |u|^2`
    pub potential: f64,
    /// `1/p int |u|^p`
    pub nonlinear: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn new(kinetic: f64, potential: f64, nonlinear: f64) -> Self {
        EnergyBreakdown { kinetic, potential, nonlinear, total: kinetic + potential - nonlinear }
    }

    /// Energy without the potential term.
    pub fn nls(&self) -> f64 {
        self.kinetic - self.nonlinear
    }
}

impl core::ops::Add for EnergyBreakdown {
    type Output = EnergyBreakdown;
    fn add(self, o: Self) -> Self {
        EnergyBreakdown::new(
            self.kinetic + o.kinetic,
            self.potential + o.potential,
            self.nonlinear + o.nonlinear,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Norms {
    /// `||u||_2^2`
    pub mass: f64,
    /// `||u||_p`
    pub lp: f64,
    /// `||u||_{L^inf(e)}` over the nodes of each edge.
    pub sup_by_edge: Vec<f64>,
    /// Edges attaining the global sup; several when it sits on a shared vertex.
    pub argmax_edges: Vec<usize>,
}

impl Norms {
    pub fn sup(&self) -> f64 {
        self.sup_by_edge.iter().copied().fold(0.0, f64::max)
    }
}

fn pow_abs(x: f64, p: f64) -> f64 {
    x.abs().powf(p)
}

pub fn norms(u: &DiscreteFunction, p: f64) -> Norms {
    let mesh = u.mesh();
    let vals = u.values();
    let sq: Vec<f64> = vals.iter().map(|v| v * v).collect();
    let lp: Vec<f64> = vals.iter().map(|v| pow_abs(*v, p)).collect();
    let sup_by_edge: Vec<f64> = mesh
        .grids()
        .iter()
        .map(|g| g.dofs().iter().map(|&d| vals[d].abs()).fold(0.0, f64::max))
        .collect();
    let top = sup_by_edge.iter().copied().fold(0.0, f64::max);
    let argmax_edges = sup_by_edge
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == top)
        .map(|(e, _)| e)
        .collect();
    Norms {
        mass: mesh.integrate(&sq),
        lp: mesh.integrate(&lp).powf(1.0 / p),
        sup_by_edge,
        argmax_edges,
    }
}

fn nonlinear_integral(u: &DiscreteFunction, p: f64) -> f64 {
    u.mesh().weights().iter().zip(u.values()).map(|(w, v)| w * pow_abs(*v, p)).sum()
}

pub fn energy(u: &DiscreteFunction, op: &GraphOperator, p: f64) -> Result<EnergyBreakdown> {
    op.check(u)?;
    let v = u.values();
    Ok(EnergyBreakdown::new(
        0.5 * op.kinetic_form(v),
        0.5 * op.potential_form(v),
        nonlinear_integral(u, p) / p,
    ))
}

/// `E(v) - E(u)` without the cancellation of subtracting two energies:
/// `1/2 (v - u)^T A (v + u) - 1/p sum w (|v|^p - |u|^p)`, with each power
/// difference formed as `|u|^p expm1(p ln1p((|v| - |u|) / |u|))`.
pub fn energy_difference(
    u: &DiscreteFunction,
    v: &DiscreteFunction,
    op: &GraphOperator,
    p: f64,
) -> Result<f64> {
    op.check(u)?;
    op.check(v)?;
    let (a, b) = (u.values(), v.values());
    let d: Vec<f64> = b.iter().zip(a).map(|(y, x)| y - x).collect();
    let s: Vec<f64> = b.iter().zip(a).map(|(y, x)| y + x).collect();
    let quad = 0.5 * op.stiffness().matvec(&s).iter().zip(&d).map(|(x, y)| x * y).sum::<f64>()
        + 0.5 * op.potential().iter().zip(&d).zip(&s).map(|((vi, di), si)| vi * di * si).sum::<f64>();
    let power: f64 = u
        .mesh()
        .weights()
        .iter()
        .zip(a.iter().zip(b))
        .map(|(w, (x, y))| {
            let (x, y) = (x.abs(), y.abs());
            let diff = if x == 0.0 {
                y.powf(p)
            } else {
                x.powf(p) * libm::expm1(p * libm::log1p((y - x) / x))
            };
            w * diff
        })
        .sum();
    Ok(quad - power / p)
}

/// Split of the energy into one contribution per edge: cells belong to
/// their edge and each node's half-cells to the edge they come from.
pub fn energy_by_edge(
    u: &DiscreteFunction,
    op: &GraphOperator,
    p: f64,
) -> Result<Vec<EnergyBreakdown>> {
    op.check(u)?;
    let v = u.values();
    let mesh = u.mesh();
    let weights = mesh.weights();
    let pot = op.potential();
    Ok(mesh
        .grids()
        .iter()
        .map(|g| {
            let d = g.dofs();
            let mut kin = 0.0;
            let mut vpot = 0.0;
            let mut nl = 0.0;
            for k in 0..g.cells {
                let (a, b) = (d[k], d[k + 1]);
                kin += (v[b] - v[a]).powi(2) / g.h;
                for i in [a, b] {
                    // this half-cell's share of the node's weight and potential
                    let share = 0.5 * g.h / weights[i];
                    vpot += share * pot[i] * v[i] * v[i];
                    nl += 0.5 * g.h * pow_abs(v[i], p);
                }
            }
            EnergyBreakdown::new(0.5 * kin, 0.5 * vpot, nl / p)
        })
        .collect())
}

/// `int_0^h |(1 - s/h) a + (s/h) b|^p ds`.
fn linear_power_integral(a: f64, b: f64, h: f64, p: f64) -> f64 {
    if a * b < 0.0 {
        // split at the root
        let (x, y) = (a.abs(), b.abs());
        return h * (x.powf(p + 1.0) + y.powf(p + 1.0)) / ((p + 1.0) * (x + y));
    }
    let (lo, hi) = if a.abs() <= b.abs() { (a.abs(), b.abs()) } else { (b.abs(), a.abs()) };
    if hi == 0.0 {
        return 0.0;
    }
    if lo == 0.0 {
        return h * hi.powf(p) / (p + 1.0);
    }
    // (1 - r^(p+1)) / (1 - r) with r = lo / hi, stable as r -> 1
    let l = (lo / hi).ln();
    let ratio = if l == 0.0 { p + 1.0 } else { libm::expm1((p + 1.0) * l) / libm::expm1(l) };
    h * hi.powf(p) * ratio / (p + 1.0)
}

/// Cells of the interpolant on `[0, +inf)` pieces past each truncated
/// halfline's cut: one more cell of the same width down to zero.
fn interpolant_cells(u: &DiscreteFunction) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
    let v = u.values();
    let closing = u
        .mesh()
        .grids()
        .iter()
        .filter(|g| g.truncated)
        .map(move |g| (v[g.dofs()[g.cells]], 0.0, g.h));
    u.mesh().cells().map(move |(a, b, h)| (v[a], v[b], h)).chain(closing)
}

/// `||u||_2^2` of the continuous piecewise-linear interpolant, closed to
/// zero one cell past every halfline cut.
pub fn interpolant_mass(u: &DiscreteFunction) -> f64 {
    interpolant_cells(u).map(|(a, b, h)| h * (a * a + a * b + b * b) / 3.0).sum()
}

/// Energy of the piecewise-linear interpolant (closed as in
/// [`interpolant_mass`]) with exact kinetic and power integrals. The
/// potential term keeps the lumped quadrature of the operator.
///
/// Unlike [`energy`], this is the energy of an actual `H^1` function on the
/// graph, so lower bounds that hold for every such function hold for it.
pub fn interpolant_energy(u: &DiscreteFunction, op: &GraphOperator, p: f64) -> Result<EnergyBreakdown> {
    op.check(u)?;
    let mut kin = 0.0;
    let mut nl = 0.0;
    for (a, b, h) in interpolant_cells(u) {
        kin += (b - a) * (b - a) / h;
        nl += linear_power_integral(a, b, h, p);
    }
    Ok(EnergyBreakdown::new(0.5 * kin, 0.5 * op.potential_form(u.values()), nl / p))
}

/// `L^2` representation of `E'(u)`.
pub fn gradient(u: &DiscreteFunction, op: &GraphOperator, p: f64) -> Result<DiscreteFunction> {
    op.check(u)?;
    let v = u.values();
    let au = op.apply(v);
    let w = u.mesh().weights();
    let g = au
        .iter()
        .zip(w)
        .zip(v)
        .map(|((a, wi), x)| a / wi - pow_abs(*x, p - 2.0) * x)
        .collect();
    Ok(u.with_values(g))
}

/// `<a, b>_{L^2}` on the common mesh.
pub fn inner(a: &DiscreteFunction, b: &DiscreteFunction) -> Result<f64> {
    if !a.same_mesh(b.mesh()) {
        return Err(Error::MeshMismatch);
    }
    Ok(a.mesh().weights().iter().zip(a.values()).zip(b.values()).map(|((w, x), y)| w * x * y).sum())
}

/// `lambda = (int |u|^p - int |u'|^2 - int W |u|^2) / ||u||_2^2`.
pub fn lagrange_multiplier(u: &DiscreteFunction, op: &GraphOperator, p: f64) -> Result<f64> {
    op.check(u)?;
    let mass = u.mass();
    if !(mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    let v = u.values();
    Ok((nonlinear_integral(u, p) - op.kinetic_form(v) - op.potential_form(v)) / mass)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    /// `||grad E(u) + lambda u||_{L^2}`
    pub pde_residual: f64,
    /// Sum of outward one-sided derivatives at every vertex.
    pub kirchhoff_by_vertex: Vec<f64>,
}

impl Residuals {
    pub fn max_kirchhoff(&self) -> f64 {
        self.kirchhoff_by_vertex.iter().fold(0.0, |m, f| m.max(f.abs()))
    }
}

/// One-sided derivative at the node `ends[0]`, pointing into the edge,
/// with the second-order stencil `(-3 u0 + 4 u1 - u2) / 2h`.
fn outward_slope(v: &[f64], ends: [usize; 3], h: f64) -> f64 {
    (-3.0 * v[ends[0]] + 4.0 * v[ends[1]] - v[ends[2]]) / (2.0 * h)
}

/// Outward flux sum at every vertex.
pub fn kirchhoff_fluxes(u: &DiscreteFunction, vertex_count: usize) -> Vec<f64> {
    let mesh = u.mesh();
    let v = u.values();
    let mut flux = vec![0.0; vertex_count];
    for g in mesh.grids() {
        let d = g.dofs();
        let tail_vertex = (0..vertex_count).find(|&k| mesh.vertex_dof(k) == d[0]);
        if let Some(t) = tail_vertex {
            flux[t] += outward_slope(v, [d[0], d[1], d[2]], g.h);
        }
        if !g.truncated {
            let n = g.cells;
            let head_vertex = (0..vertex_count).find(|&k| mesh.vertex_dof(k) == d[n]);
            if let Some(hv) = head_vertex {
                flux[hv] += outward_slope(v, [d[n], d[n - 1], d[n - 2]], g.h);
            }
        }
    }
    flux
}

pub fn residuals(
    u: &DiscreteFunction,
    lambda: f64,
    op: &GraphOperator,
    p: f64,
    vertex_count: usize,
) -> Result<Residuals> {
    let g = gradient(u, op, p)?;
    let r: Vec<f64> = g.values().iter().zip(u.values()).map(|(gi, ui)| gi + lambda * ui).collect();
    let sq: Vec<f64> = r.iter().map(|x| x * x).collect();
    Ok(Residuals {
        pde_residual: u.mesh().integrate(&sq).sqrt(),
        kirchhoff_by_vertex: kirchhoff_fluxes(u, vertex_count),
    })
}

/// Both sides of `||u||_inf^2 <= 2 ||u||_2 ||u'||_2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

pub fn gn_check(u: &DiscreteFunction, op: &GraphOperator) -> Result<GnCheck> {
    op.check(u)?;
    let sup = u.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lhs = sup * sup;
    let rhs = 2.0 * u.mass().sqrt() * op.kinetic_form(u.values()).max(0.0).sqrt();
    Ok(GnCheck { lhs, rhs, satisfied: lhs <= rhs * (1.0 + 1e-8) })
}

/// `||u||_p^p / (||u||_2^(p/2+1) ||u'||_2^(p/2-1))`, reported rather than
/// checked since its sharp constant is not fixed.
pub fn gn_lp_ratio(u: &DiscreteFunction, op: &GraphOperator, p: f64) -> Result<f64> {
    op.check(u)?;
    let mass = u.mass();
    let kin = op.kinetic_form(u.values());
    let denom = mass.sqrt().powf(0.5 * p + 1.0) * kin.sqrt().powf(0.5 * p - 1.0);
    Ok(nonlinear_integral(u, p) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::graph::build_graph;
    use crate::mesh::build_mesh;
    use crate::operator::assemble_operator;
    use crate::potential::{EdgePotential, PotentialSpec};
    use crate::theory::{soliton_constants, TheoryConstants};
    use alloc::sync::Arc;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Setup {
        c: TheoryConstants,
        op: GraphOperator,
        mesh: Arc<crate::mesh::Mesh>,
    }

    fn line_setup(h: f64, mu: f64) -> Setup {
        let g = build_graph(&catalog::line()).unwrap();
        let c = soliton_constants(4.0).unwrap();
        let w = PotentialSpec::zero(&g);
        let mesh = Arc::new(build_mesh(&g, &w, &c, h, mu, 1e-12).unwrap());
        let op = assemble_operator(mesh.clone(), &w);
        Setup { c, op, mesh }
    }

    fn soliton_on(s: &Setup, mu: f64) -> DiscreteFunction {
        DiscreteFunction::from_fn(s.mesh.clone(), |_, x| s.c.soliton(mu, x)).unwrap()
    }

    #[test]
    fn zero_function() {
        let s = line_setup(0.1, 2.0);
        let u = DiscreteFunction::zeros(s.mesh.clone());
        let n = norms(&u, 4.0);
        assert_eq!(n.mass, 0.0);
        assert!(n.sup_by_edge.iter().all(|v| *v == 0.0));
        assert_eq!(n.argmax_edges, vec![0, 1]);
        assert_eq!(energy(&u, &s.op, 4.0).unwrap(), EnergyBreakdown::default());
        assert!(gradient(&u, &s.op, 4.0).unwrap().values().iter().all(|v| *v == 0.0));
        assert_eq!(lagrange_multiplier(&u, &s.op, 4.0), Err(Error::ZeroMass));
        let gn = gn_check(&u, &s.op).unwrap();
        assert!(gn.satisfied && gn.lhs == 0.0);
    }

    #[test]
    fn soliton_norms_energy_and_multiplier() {
        let mu = 2.0;
        let s = line_setup(0.005, mu);
        let u = soliton_on(&s, mu);
        let n = norms(&u, 4.0);
        assert!((n.mass - mu).abs() < 1e-9);
        assert!((n.sup() - s.c.peak(mu)).abs() < 1e-15);
        let e = energy(&u, &s.op, 4.0).unwrap();
        assert!((e.total + 1.0 / 12.0).abs() < 1e-5, "{e:?}");
        assert_eq!(e.total, e.kinetic + e.potential - e.nonlinear);
        let lam = lagrange_multiplier(&u, &s.op, 4.0).unwrap();
        assert!((lam - 0.25).abs() < 1e-5, "{lam}");
        let gn = gn_check(&u, &s.op).unwrap();
        assert!(gn.satisfied && gn.lhs < gn.rhs);
    }

    #[test]
    fn energy_converges_at_second_order() {
        let mu = 2.0;
        let exact = -1.0 / 12.0;
        let errs: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|&h| {
                let s = line_setup(h, mu);
                let u = soliton_on(&s, mu);
                // kinetic term alone carries the O(h^2) error
                let e = energy(&u, &s.op, 4.0).unwrap();
                (e.total - exact).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.9, "order {order} from {errs:?}");
        }
    }

    #[test]
    fn homogeneity_under_scaling() {
        let s = line_setup(0.05, 2.0);
        let u = soliton_on(&s, 2.0);
        let e1 = energy(&u, &s.op, 3.0).unwrap();
        let e2 = energy(&u.scaled(1.7), &s.op, 3.0).unwrap();
        assert!((e2.kinetic - 1.7f64.powi(2) * e1.kinetic).abs() < 1e-12 * e2.kinetic);
        assert!((e2.nonlinear - 1.7f64.powf(3.0) * e1.nonlinear).abs() < 1e-12 * e2.nonlinear);
    }

    #[test]
    fn argmax_inside_one_edge() {
        let g = build_graph(&catalog::tadpole(4.0)).unwrap();
        let c = soliton_constants(4.0).unwrap();
        let w = PotentialSpec::zero(&g);
        let mesh = Arc::new(build_mesh(&g, &w, &c, 0.05, 4.0, 1e-6).unwrap());
        let u = DiscreteFunction::from_fn(mesh, |e, x| {
            if e == 0 { (-(x - 2.0) * (x - 2.0) * 4.0).exp() } else { 0.0 }
        })
        .unwrap();
        assert_eq!(norms(&u, 4.0).argmax_edges, vec![0]);
    }

    fn random_function(mesh: &Arc<crate::mesh::Mesh>, rng: &mut ChaCha8Rng) -> DiscreteFunction {
        let bumps: Vec<(usize, f64, f64, f64)> = (0..3)
            .map(|_| {
                let e = rng.random_range(0..mesh.grids().len());
                let len = mesh.grid(e).length;
                (e, rng.random_range(0.0..len.min(6.0)), rng.random_range(0.3..1.5), rng.random_range(-1.0..2.0))
            })
            .collect();
        DiscreteFunction::from_fn(mesh.clone(), |e, x| {
            bumps
                .iter()
                .filter(|b| b.0 == e)
                .map(|&(_, c, w, a)| a * (-((x - c) / w).powi(2)).exp())
                .sum::<f64>()
        })
        .unwrap()
    }

    #[test]
    fn gradient_matches_central_differences() {
        let g = build_graph(&catalog::three_bounded(2.0)).unwrap();
        let c = soliton_constants(3.0).unwrap();
        let models = vec![
            EdgePotential::GaussianWell { depth: 1.0, center: 1.0, width: 0.5 },
            EdgePotential::Constant(-0.3),
            EdgePotential::Constant(0.2),
            EdgePotential::Constant(0.0),
            EdgePotential::GaussianWell { depth: 0.5, center: 0.0, width: 1.0 },
        ];
        let w = PotentialSpec::new(&g, models, None, None).unwrap();
        let mesh = Arc::new(build_mesh(&g, &w, &c, 0.1, 3.0, 1e-3).unwrap());
        let op = assemble_operator(mesh.clone(), &w);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let eps = 1e-5;
        for _ in 0..20 {
            let u = random_function(&mesh, &mut rng);
            let v = random_function(&mesh, &mut rng);
            let plus = DiscreteFunction::new(
                mesh.clone(),
                u.values().iter().zip(v.values()).map(|(a, b)| a + eps * b).collect(),
            )
            .unwrap();
            let minus = DiscreteFunction::new(
                mesh.clone(),
                u.values().iter().zip(v.values()).map(|(a, b)| a - eps * b).collect(),
            )
            .unwrap();
            let fd = (energy(&plus, &op, 3.0).unwrap().total
                - energy(&minus, &op, 3.0).unwrap().total)
                / (2.0 * eps);
            let an = inner(&gradient(&u, &op, 3.0).unwrap(), &v).unwrap();
            assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-3), "{fd} vs {an}");
        }
    }

    #[test]
    fn linear_eigenfunction_multiplier() {
        // with the nonlinearity switched off (u tiny) lambda tends to minus
        // the Rayleigh quotient; check the exact identity on a function
        let s = line_setup(0.1, 2.0);
        let u = soliton_on(&s, 2.0);
        let rq = (s.op.kinetic_form(u.values()) + s.op.potential_form(u.values())) / u.mass();
        let tiny = u.scaled(1e-6);
        let lam = lagrange_multiplier(&tiny, &s.op, 4.0).unwrap();
        assert!((lam + rq).abs() < 1e-9);
        let lam1 = lagrange_multiplier(&u, &s.op, 4.0).unwrap();
        let lam2 = lagrange_multiplier(&u.scaled(2.0), &s.op, 4.0).unwrap();
        assert!(lam1 != lam2);
    }

    #[test]
    fn additivity_over_edges() {
        let g = build_graph(&catalog::figure_one()).unwrap();
        let c = soliton_constants(4.0).unwrap();
        let w = PotentialSpec::new(
            &g,
            (0..g.edge_count())
                .map(|e| {
                    if g.edges()[e].is_bounded() {
                        EdgePotential::Constant(-0.1 * e as f64)
                    } else {
                        EdgePotential::Constant(0.0)
                    }
                })
                .collect(),
            None,
            None,
        )
        .unwrap();
        let mesh = Arc::new(build_mesh(&g, &w, &c, 0.05, 10.0, 1e-6).unwrap());
        let op = assemble_operator(mesh.clone(), &w);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_function(&mesh, &mut rng);
        let total = energy(&u, &op, 4.0).unwrap();
        let parts = energy_by_edge(&u, &op, 4.0).unwrap();
        let sum = parts.into_iter().fold(EnergyBreakdown::default(), |a, b| a + b);
        assert!((sum.total - total.total).abs() < 1e-12 * (1.0 + total.total.abs()));
        assert!((sum.potential - total.potential).abs() < 1e-12 * (1.0 + total.potential.abs()));
    }

    #[test]
    fn kirchhoff_flux_of_linear_data_and_symmetric_bump() {
        let g = build_graph(&catalog::star(3)).unwrap();
        let c = soliton_constants(4.0).unwrap();
        let w = PotentialSpec::zero(&g);
        let mesh = Arc::new(build_mesh(&g, &w, &c, 0.1, 2.0, 1e-4).unwrap());
        let u = DiscreteFunction::from_fn(mesh.clone(), |_, x| x).unwrap();
        let f = kirchhoff_fluxes(&u, g.vertex_count());
        assert!((f[0] - 3.0).abs() < 1e-12);

        // smooth bump on the real line centered off the degree-2 vertex:
        // the two outward slopes cancel up to the stencil error
        let errs: Vec<f64> = [0.02, 0.01]
            .iter()
            .map(|&h| {
                let s = line_setup(h, 2.0);
                let u = DiscreteFunction::from_fn(s.mesh.clone(), |e, x| {
                    let y = if e == 0 { -x } else { x };
                    (-(y - 0.3).powi(2)).exp()
                })
                .unwrap();
                kirchhoff_fluxes(&u, 1)[0].abs()
            })
            .collect();
        assert!(errs[0] < 1e-3 && (errs[1] < errs[0] / 3.0 || errs[1] < 1e-10), "{errs:?}");
    }

    #[test]
    fn degree_one_vertex_flux_is_the_slope() {
        let g = build_graph(&catalog::halfline()).unwrap();
        let c = soliton_constants(4.0).unwrap();
        let w = PotentialSpec::zero(&g);
        let mesh = Arc::new(build_mesh(&g, &w, &c, 0.01, 2.0, 1e-4).unwrap());
        let u = DiscreteFunction::from_fn(mesh, |_, x| (0.5 * x).sin() + 1.0).unwrap();
        let f = kirchhoff_fluxes(&u, 1);
        assert!((f[0] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn energy_difference_matches_direct_subtraction() {
        let s = line_setup(0.05, 2.0);
        let u = soliton_on(&s, 2.0);
        let v = DiscreteFunction::from_fn(s.mesh.clone(), |_, x| 1.1 * s.c.soliton(2.0, 0.9 * x)).unwrap();
        let direct = energy(&v, &s.op, 3.0).unwrap().total - energy(&u, &s.op, 3.0).unwrap().total;
        let d = energy_difference(&u, &v, &s.op, 3.0).unwrap();
        assert!((d - direct).abs() < 1e-12 * direct.abs());
        // tiny perturbations keep their relative accuracy
        let eps = 1e-9;
        let w = DiscreteFunction::new(
            s.mesh.clone(),
            u.values().iter().zip(v.values()).map(|(a, b)| a + eps * (b - a)).collect(),
        )
        .unwrap();
        let g = gradient(&u, &s.op, 3.0).unwrap();
        let dir = DiscreteFunction::new(
            s.mesh.clone(),
            u.values().iter().zip(v.values()).map(|(a, b)| b - a).collect(),
        )
        .unwrap();
        let first_order = eps * inner(&g, &dir).unwrap();
        let small = energy_difference(&u, &w, &s.op, 3.0).unwrap();
        assert!((small - first_order).abs() < 1e-6 * first_order.abs(), "{small} vs {first_order}");
    }

    #[test]
    fn linear_power_integral_matches_quadrature() {
        let simpson = |a: f64, b: f64, h: f64, p: f64| {
            let n = 20000;
            let f = |s: f64| ((1.0 - s) * a + s * b).abs().powf(p);
            let mut acc = f(0.0) + f(1.0);
            for k in 1..n {
                acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 / n as f64);
            }
            h * acc / (3.0 * n as f64)
        };
        for (a, b, p) in [(1.0, 2.0, 4.0), (2.0, 1.0, 3.0), (0.0, 1.5, 2.5), (-1.0, 2.0, 4.0), (0.7, -0.2, 5.5)] {
            let exact = linear_power_integral(a, b, 0.3, p);
            assert!((exact - simpson(a, b, 0.3, p)).abs() < 1e-10, "{a} {b} {p}");
        }
        // nearly equal endpoints: no cancellation
        let (a, b) = (1.0, 1.0 + 1e-12);
        let mid = linear_power_integral(a, b, 1.0, 4.0);
        assert!((mid - (1.0 + 2e-12)).abs() < 1e-15, "{mid}");
        assert_eq!(linear_power_integral(0.0, 0.0, 1.0, 4.0), 0.0);
    }

    #[test]
    fn interpolant_of_linear_data_is_exact() {
        let g = build_graph(&catalog::tadpole(2.0)).unwrap();
        let c = soliton_constants(4.0).unwrap();
        let w = PotentialSpec::zero(&g);
        let mesh = Arc::new(build_mesh(&g, &w, &c, 0.25, 2.0, 1e-3).unwrap());
        let op = assemble_operator(mesh.clone(), &w);
        let u = DiscreteFunction::from_fn(mesh.clone(), |_, _| 1.5).unwrap();
        // constant everywhere plus the closing ramp of the halfline
        let ramp = mesh.grids().iter().find(|g| g.truncated).unwrap().h;
        let len = mesh.total_length();
        assert!((interpolant_mass(&u) - 2.25 * (len + ramp / 3.0)).abs() < 1e-12);
        let e = interpolant_energy(&u, &op, 4.0).unwrap();
        assert!((e.kinetic - 0.5 * 2.25 / ramp).abs() < 1e-12);
        assert!((e.nonlinear - 1.5f64.powi(4) * (len + ramp / 5.0) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn interpolant_energy_of_soliton() {
        let s = line_setup(0.01, 2.0);
        let u = soliton_on(&s, 2.0);
        let scaled = u.scaled((2.0 / interpolant_mass(&u)).sqrt());
        let e = interpolant_energy(&scaled, &s.op, 4.0).unwrap();
        // an actual H^1 function of mass 2 on the line: never below the soliton
        assert!(e.total >= -1.0 / 12.0 && e.total < -1.0 / 12.0 + 1e-5, "{e:?}");
        // same stiffness form, plus the closing ramps past the cuts
        let lumped = energy(&scaled, &s.op, 4.0).unwrap();
        assert!(e.kinetic > lumped.kinetic && e.kinetic - lumped.kinetic < 1e-9);
    }

    #[test]
    fn mesh_mismatch_is_reported() {
        let a = line_setup(0.1, 2.0);
        let b = line_setup(0.05, 2.0);
        let u = soliton_on(&a, 2.0);
        assert_eq!(energy(&u, &b.op, 4.0), Err(Error::MeshMismatch));
        assert!(gradient(&u, &b.op, 4.0).is_err());
    }
}
