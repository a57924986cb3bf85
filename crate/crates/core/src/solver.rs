//! Mass-constrained minimization by a semi-implicit normalized gradient flow.
//!
//! One step with current multiplier `lambda = lambda(u)` and shift
//! `sigma >= lambda + max(0, -W_min)` solves
//!
//! `(M + tau (K + V + sigma M)) v = M (u + tau (|u|^(p-2) u + (sigma - lambda) u))`
//!
//! and rescales `v` to mass `mu`. The matrix is a symmetric M-matrix and the
//! right-hand side is nonnegative for nonnegative `u`, so the scheme keeps
//! iterates positive; a discrete stationary state is an exact fixed point.
//! Steps that raise the energy are retried with `tau` halved.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

// std's inherent float methods shadow these when std is linked
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::functionals::{energy, energy_difference, lagrange_multiplier, residuals, EnergyBreakdown, Residuals};
use crate::graph::{EdgeClass, MetricGraph};
use crate::linalg::ProfileLdl;
use crate::mesh::{build_mesh, DiscreteFunction, Mesh};
use crate::operator::{assemble_operator, GraphOperator};
use crate::potential::PotentialSpec;
use crate::theory::{check_exponent, soliton_constants, TheoryConstants};

/// Step halvings tried before a step is given up.
pub const MAX_HALVINGS: usize = 30;
/// Reinitializations allowed after the localization guard fires.
pub const MAX_RESTARTS: usize = 3;
/// Largest share of the initial bump's mass that clipping may discard.
/// Relative size of energy differences treated as rounding noise.
const ENERGY_NOISE: f64 = 1e-13;
const MAX_NEWTON: usize = 400;
/// Flow iterations between failed Newton polishes.
const POLISH_BACKOFF: usize = 200;
/// Smaller accepted Newton steps mean the state is creeping along a
/// nearly neutral direction; polishing is abandoned.
const MIN_NEWTON_DAMPING: f64 = 1e-3;
const STAGNATION_WINDOW: usize = 5;
pub const MAX_CLIPPED_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuardPolicy {
    /// Undo the offending step and halve the step size.
    RejectStep,
    /// Restart from a narrower bump.
    Reinitialize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub p: f64,
    pub mu: f64,
    pub tau: f64,
    pub max_iters: usize,
    /// Relative energy change below which a step counts as stationary.
    pub energy_tol: f64,
    /// Bound on `||grad E(u) + lambda u||_{L^2}`.
    pub residual_tol: f64,
    pub guard_policy: GuardPolicy,
    /// Seeds the placement of restarted bumps.
    pub seed: u64,
    /// Largest cell size.
    pub resolution: f64,
    /// Share of the soliton mass allowed beyond a halfline cut.
    pub tail_tol: f64,
}

impl SolverConfig {
    pub fn new(p: f64, mu: f64) -> Self {
        SolverConfig {
            p,
            mu,
            tau: 100.0,
            max_iters: 5000,
            energy_tol: 1e-12,
            residual_tol: 1e-6,
            guard_policy: GuardPolicy::Reinitialize,
            seed: 0,
            resolution: 0.01,
            tail_tol: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent(self.p)?;
        let positive: [(&'static str, f64); 6] = [
            ("mu", self.mu),
            ("tau", self.tau),
            ("energy_tol", self.energy_tol),
            ("residual_tol", self.residual_tol),
            ("resolution", self.resolution),
            ("tail_tol", self.tail_tol),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter { name: "max_iters", value: 0.0 });
        }
        Ok(())
    }
}

/// Per-edge mesh data reported with every result.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMeshInfo {
    pub cells: usize,
    pub h: f64,
    pub length: f64,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshInfo {
    pub resolution: f64,
    pub tail_tol: f64,
    /// Cut length of every halfline (0 without halflines).
    pub truncation: f64,
    pub edges: Vec<EdgeMeshInfo>,
}

impl MeshInfo {
    pub fn of(mesh: &Mesh) -> Self {
        MeshInfo {
            resolution: mesh.resolution(),
            tail_tol: mesh.tail_tol(),
            truncation: mesh.truncation(),
            edges: mesh
                .grids()
                .iter()
                .map(|g| EdgeMeshInfo { cells: g.cells, h: g.h, length: g.length, truncated: g.truncated })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateResult {
    pub mu: f64,
    pub state: DiscreteFunction,
    pub energy: EnergyBreakdown,
    pub lambda: f64,
    pub localization_edge: usize,
    /// `||u||_{L^inf(e)} - ||u||_{L^inf(G \ e)}`.
    pub sup_gap: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    pub mesh: MeshInfo,
}

/// Stationary state of the flow without a localization constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeStateResult {
    pub mu: f64,
    pub state: DiscreteFunction,
    pub energy: EnergyBreakdown,
    pub lambda: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub converged: bool,
    pub mesh: MeshInfo,
}

/// Starting profile of [`Problem::free`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FreeStart {
    /// Soliton halves centered at a vertex, one on every incident edge.
    Vertex(usize),
    /// A soliton on one edge, centered at coordinate `center`.
    OnEdge { edge: usize, center: f64 },
}

/// Rescale to mass `mu`.
pub fn project_mass(u: &DiscreteFunction, mu: f64) -> Result<DiscreteFunction> {
    let m = u.mass();
    if !(m > 0.0) {
        return Err(Error::ZeroMass);
    }
    Ok(u.scaled((mu / m).sqrt()))
}

/// `||u||_{L^inf(e)} - max over f != e of ||u||_{L^inf(f)}`.
pub fn sup_gap(u: &DiscreteFunction, e: usize) -> f64 {
    let vals = u.values();
    let mut on_e = 0.0f64;
    let mut off_e = 0.0f64;
    for g in u.mesh().grids() {
        let s = g.dofs().iter().map(|&d| vals[d].abs()).fold(0.0, f64::max);
        if g.edge == e {
            on_e = s;
        } else {
            off_e = off_e.max(s);
        }
    }
    on_e - off_e
}

/// Where the bump sits on its edge.
#[derive(Debug, Clone, Copy)]
enum Placement {
    /// Soliton centered at `center`, lowered to vanish at both endpoints.
    Centered { center: f64 },
    /// Half-soliton peaked at the tip, lowered to vanish at the far end.
    FromTip { tip_at_zero: bool },
}

fn bump(c: &TheoryConstants, len: f64, shape_mass: f64, placement: Placement) -> impl Fn(f64) -> f64 + '_ {
    move |x: f64| match placement {
        Placement::Centered { center } => {
            let floor = c.soliton(shape_mass, center).max(c.soliton(shape_mass, len - center));
            (c.soliton(shape_mass, x - center) - floor).max(0.0)
        }
        Placement::FromTip { tip_at_zero } => {
            let s = if tip_at_zero { x } else { len - x };
            (c.soliton(2.0 * shape_mass, s) - c.soliton(2.0 * shape_mass, len)).max(0.0)
        }
    }
}

/// `int_0^len f^2` by a fine trapezoid, independent of any mesh.
fn profile_mass(len: f64, f: impl Fn(f64) -> f64) -> f64 {
    let n = 8192;
    let h = len / n as f64;
    let mut s = 0.5 * (f(0.0).powi(2) + f(len).powi(2));
    for i in 1..n {
        s += f(h * i as f64).powi(2);
    }
    s * h
}

fn placement_for(g: &MetricGraph, e: usize, center: f64) -> Result<(f64, Placement)> {
    let edge = g.edge(e)?;
    let len = edge.length.finite().ok_or_else(|| Error::NotBounded { edge: edge.name.clone() })?;
    let info = g.classify_edge(e)?;
    let placement = if info.class == EdgeClass::EndEdge {
        Placement::FromTip { tip_at_zero: info.v1 == edge.tail }
    } else {
        Placement::Centered { center }
    };
    Ok((len, placement))
}

fn guess_with(
    g: &MetricGraph,
    e: usize,
    c: &TheoryConstants,
    mu: f64,
    mesh: &Arc<Mesh>,
    tighten: f64,
    center_shift: f64,
) -> Result<DiscreteFunction> {
    let len = g.edge(e)?.length.finite().unwrap_or(0.0);
    let (len, placement) = placement_for(g, e, 0.5 * len + center_shift)?;
    let shape = bump(c, len, mu * tighten, placement);
    let retained = profile_mass(len, &shape) / (mu * tighten);
    if retained < 1.0 - MAX_CLIPPED_FRACTION {
        return Err(Error::EdgeTooShortForMass { edge: g.edge(e)?.name.clone(), retained });
    }
    let u = DiscreteFunction::from_fn(mesh.clone(), |edge, x| if edge == e { shape(x) } else { 0.0 })?;
    project_mass(&u, mu)
}

/// Soliton-shaped bump of mass `mu` on the bounded edge `e`, zero elsewhere:
/// centered and lowered to vanish at both endpoints, or, on an end-edge, the
/// half-soliton of mass `2 mu` peaked at the tip.
pub fn initial_guess(
    g: &MetricGraph,
    e: usize,
    c: &TheoryConstants,
    mu: f64,
    mesh: &Arc<Mesh>,
) -> Result<DiscreteFunction> {
    guess_with(g, e, c, mu, mesh, 1.0, 0.0)
}

/// One accepted flow step from `u`, halving `cfg.tau` until the energy does
/// not increase beyond rounding.
pub fn flow_step(u: &DiscreteFunction, cfg: &SolverConfig, op: &GraphOperator) -> Result<DiscreteFunction> {
    let e = energy(u, op, cfg.p)?;
    let mut stepper = Stepper::new(op, cfg.p, cfg.mu, cfg.tau);
    Ok(stepper.step(u, e.total)?.next)
}

struct Step {
    next: DiscreteFunction,
    energy: EnergyBreakdown,
    /// `E(next) - E(u)`, positive only at rounding level.
    change: f64,
}

struct Stepper<'a> {
    op: &'a GraphOperator,
    p: f64,
    mu: f64,
    shift: f64,
    tau_max: f64,
    tau: f64,
    sigma: f64,
    factor: Option<(f64, f64, ProfileLdl)>,
}

impl<'a> Stepper<'a> {
    fn new(op: &'a GraphOperator, p: f64, mu: f64, tau: f64) -> Self {
        let w = op.mesh().weights();
        let w_min = op.potential().iter().zip(w).map(|(v, wi)| v / wi).fold(0.0, f64::min);
        Stepper { op, p, mu, shift: -w_min, tau_max: tau, tau, sigma: -1.0, factor: None }
    }

    fn factorization(&mut self) -> Result<&ProfileLdl> {
        let stale = !matches!(&self.factor, Some((t, s, _)) if *t == self.tau && *s == self.sigma);
        if stale {
            let w = self.op.mesh().weights();
            let d: Vec<f64> = w
                .iter()
                .zip(self.op.potential())
                .map(|(wi, vi)| wi + self.tau * (vi + self.sigma * wi))
                .collect();
            let a = self.op.stiffness().scaled_plus_diagonal(self.tau, &d);
            self.factor = Some((self.tau, self.sigma, ProfileLdl::factor(&a)?));
        }
        Ok(&self.factor.as_ref().expect("factorization present").2)
    }

    fn step(&mut self, u: &DiscreteFunction, e_u: f64) -> Result<Step> {
        let lambda = lagrange_multiplier(u, self.op, self.p)?;
        let need = self.shift + lambda.max(0.0);
        if self.sigma < need || self.sigma > 1.2 * need + 1e-12 {
            self.sigma = 1.05 * need;
        }
        let w = self.op.mesh().weights().to_vec();
        for _ in 0..=MAX_HALVINGS {
            let (tau, sigma, p) = (self.tau, self.sigma, self.p);
            let rhs: Vec<f64> = u
                .values()
                .iter()
                .zip(&w)
                .map(|(x, wi)| wi * (x + tau * (x.abs().powf(p - 2.0) * x + (sigma - lambda) * x)))
                .collect();
            let v = self.factorization()?.solve(&rhs);
            let v = project_mass(&DiscreteFunction::new(u.mesh().clone(), v)?, self.mu)?;
            let de = energy_difference(u, &v, self.op, self.p)?;
            // energy differences below this are rounding noise in the
            // cancelling sums; such steps continue the fixed-point iteration
            if de <= ENERGY_NOISE * e_u.abs() {
                if de <= 0.0 {
                    self.tau = (2.0 * self.tau).min(self.tau_max);
                }
                let e_v = energy(&v, self.op, self.p)?;
                return Ok(Step { next: v, energy: e_v, change: de });
            }
            self.tau *= 0.5;
        }
        Err(Error::StepCollapse)
    }
}

/// Bordered Newton step on `A u - w |u|^(p-2) u + lambda w u = 0`,
/// `sum w u^2 = mu`, for the slow, nearly translational modes the
/// preconditioned flow resolves only at a geometric rate close to one.
/// Returns the update of `u`.
fn newton_direction(u: &DiscreteFunction, lambda: f64, op: &GraphOperator, p: f64, mu: f64) -> Result<Vec<f64>> {
    let w = op.mesh().weights();
    let v = u.values();
    let au = op.apply(v);
    let f: Vec<f64> = au
        .iter()
        .zip(w)
        .zip(v)
        .map(|((a, wi), x)| a - wi * (x.abs().powf(p - 2.0) * x - lambda * x))
        .collect();
    let d: Vec<f64> = w
        .iter()
        .zip(op.potential())
        .zip(v)
        .map(|((wi, vi), x)| vi + wi * (lambda - (p - 1.0) * x.abs().powf(p - 2.0)))
        .collect();
    let jac = ProfileLdl::factor_indefinite(&op.stiffness().scaled_plus_diagonal(1.0, &d))?;
    let neg_f: Vec<f64> = f.iter().map(|x| -x).collect();
    let wu: Vec<f64> = w.iter().zip(v).map(|(wi, x)| wi * x).collect();
    let a = jac.solve(&neg_f);
    let b = jac.solve(&wu);
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let target = 0.5 * (mu - u.mass());
    let denom = dot(&wu, &b);
    if !(denom.abs() > 0.0) {
        return Err(Error::LinearSolveFailure { row: 0, pivot: denom });
    }
    let dlambda = (dot(&wu, &a) - target) / denom;
    Ok(a.iter().zip(&b).map(|(ai, bi)| ai - dlambda * bi).collect())
}

struct Stationary {
    state: DiscreteFunction,
    energy: EnergyBreakdown,
    lambda: f64,
    residuals: Residuals,
    iterations: usize,
}

enum FlowEnd {
    Converged(Stationary),
    GuardFired,
}

/// Shared setup of one graph, potential and configuration: constants,
/// mesh and assembled operator.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    g: &'a MetricGraph,
    w: &'a PotentialSpec,
    cfg: SolverConfig,
    constants: TheoryConstants,
    op: GraphOperator,
}

impl<'a> Problem<'a> {
    /// Mesh sized for `cfg.mu`.
    pub fn new(g: &'a MetricGraph, w: &'a PotentialSpec, cfg: SolverConfig) -> Result<Self> {
        let mu = cfg.mu;
        Self::with_truncation_mass(g, w, cfg, mu)
    }

    /// Mesh whose halfline cut is sized for mass `mesh_mu` (the smallest mass
    /// of a continuation ladder, whose tails reach farthest).
    pub fn with_truncation_mass(
        g: &'a MetricGraph,
        w: &'a PotentialSpec,
        cfg: SolverConfig,
        mesh_mu: f64,
    ) -> Result<Self> {
        cfg.validate()?;
        let constants = soliton_constants(cfg.p)?;
        let mesh = Arc::new(build_mesh(g, w, &constants, cfg.resolution, mesh_mu, cfg.tail_tol)?);
        let op = assemble_operator(mesh, w);
        Ok(Problem { g, w, cfg, constants, op })
    }

    /// Same mesh and operator at another mass.
    pub fn at_mass(&self, mu: f64) -> Result<Self> {
        let mut next = self.clone();
        next.cfg.mu = mu;
        next.cfg.validate()?;
        Ok(next)
    }

    pub fn graph(&self) -> &MetricGraph {
        self.g
    }

    pub fn potential(&self) -> &PotentialSpec {
        self.w
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn constants(&self) -> &TheoryConstants {
        &self.constants
    }

    pub fn operator(&self) -> &GraphOperator {
        &self.op
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.op.mesh()
    }

    fn descend(
        &self,
        start: DiscreteFunction,
        guard: impl Fn(&DiscreteFunction) -> bool,
    ) -> Result<FlowEnd> {
        let cfg = &self.cfg;
        let p = cfg.p;
        let mut u = start;
        let mut e = energy(&u, &self.op, p)?;
        let mut stepper = Stepper::new(&self.op, p, cfg.mu, cfg.tau);
        let tau_floor = cfg.tau * 0.5f64.powi(MAX_HALVINGS as i32);
        let mut last_residual = f64::INFINITY;
        let mut polish_after = 0;
        let mut recent: Vec<f64> = Vec::with_capacity(STAGNATION_WINDOW + 1);
        let vertices = self.g.vertex_count();
        for it in 1..=cfg.max_iters {
            let Step { next, energy: en, change } = stepper.step(&u, e.total)?;
            if !guard(&next) {
                match cfg.guard_policy {
                    GuardPolicy::Reinitialize => return Ok(FlowEnd::GuardFired),
                    GuardPolicy::RejectStep => {
                        stepper.tau *= 0.5;
                        if stepper.tau < tau_floor {
                            return Ok(FlowEnd::GuardFired);
                        }
                        continue;
                    }
                }
            }
            let settled = change.abs() < cfg.energy_tol * en.total.abs().max(f64::MIN_POSITIVE);
            u = next;
            e = en;
            let lambda = lagrange_multiplier(&u, &self.op, p)?;
            let r = residuals(&u, lambda, &self.op, p, vertices)?;
            last_residual = r.pde_residual;
            let stagnant = recent.len() == STAGNATION_WINDOW && r.pde_residual > 0.95 * recent[0];
            recent.push(r.pde_residual);
            if recent.len() > STAGNATION_WINDOW {
                recent.remove(0);
            }
            if (settled || stagnant) && r.pde_residual >= cfg.residual_tol && it >= polish_after {
                // the flow has stopped reducing the residual
                match self.polish(&u, lambda, &r, &guard) {
                    Some(done) => return Ok(FlowEnd::Converged(Stationary { iterations: it, ..done })),
                    None => polish_after = it + POLISH_BACKOFF,
                }
            }
            if settled && r.pde_residual < cfg.residual_tol {
                return Ok(FlowEnd::Converged(Stationary {
                    state: u,
                    energy: e,
                    lambda,
                    residuals: r,
                    iterations: it,
                }));
            }
        }
        Err(Error::NotConverged { iterations: cfg.max_iters, residual: last_residual })
    }
}

impl<'a> Problem<'a> {
    /// Newton iterations from a settled flow state; `None` unless they reach
    /// `residual_tol` while keeping the residual decreasing, the energy
    /// non-increasing, the state positive and the guard satisfied.
    fn polish(
        &self,
        start: &DiscreteFunction,
        lambda: f64,
        r: &Residuals,
        guard: &impl Fn(&DiscreteFunction) -> bool,
    ) -> Option<Stationary> {
        let (p, mu) = (self.cfg.p, self.cfg.mu);
        let vertices = self.g.vertex_count();
        let mut u = start.clone();
        let (mut lambda, mut res) = (lambda, r.pde_residual);
        let mut t_prev: f64 = 1.0;
        for _ in 0..MAX_NEWTON {
            let dir = newton_direction(&u, lambda, &self.op, p, mu).ok()?;
            let e_u = energy(&u, &self.op, p).ok()?.total;
            // damped: the translational direction is nearly flat, so full
            // steps overshoot until the last few iterations
            let mut t = (4.0 * t_prev).min(1.0);
            let (next, l, r) = loop {
                if t < MIN_NEWTON_DAMPING {
                    return None;
                }
                let moved: Vec<f64> = u.values().iter().zip(&dir).map(|(x, d)| x + t * d).collect();
                let trial = DiscreteFunction::new(u.mesh().clone(), moved).ok().and_then(|f| project_mass(&f, mu).ok())?;
                if guard(&trial) && trial.values().iter().all(|x| *x > 0.0) {
                    let l = lagrange_multiplier(&trial, &self.op, p).ok()?;
                    let r = residuals(&trial, l, &self.op, p, vertices).ok()?;
                    let rises = energy_difference(&u, &trial, &self.op, p).ok()? > ENERGY_NOISE * e_u.abs();
                    if r.pde_residual < res && !rises {
                        break (trial, l, r);
                    }
                }
                t *= 0.5;
            };
            t_prev = t;
            u = next;
            lambda = l;
            res = r.pde_residual;
            if res < self.cfg.residual_tol {
                let energy = energy(&u, &self.op, p).ok()?;
                return Some(Stationary { state: u, energy, lambda, residuals: r, iterations: 0 });
            }
        }
        None
    }
}

impl<'a> Problem<'a> {
    /// [`initial_guess`] at this problem's mass and mesh.
    pub fn initial_guess(&self, e: usize) -> Result<DiscreteFunction> {
        initial_guess(self.g, e, &self.constants, self.cfg.mu, self.mesh())
    }

    /// Minimize the energy at mass `mu` among functions whose global maximum
    /// sits on the bounded edge `e`, starting from `warm` when given (rescaled
    /// to the mass) and from [`initial_guess`] otherwise.
    pub fn localized(&self, e: usize, warm: Option<&DiscreteFunction>) -> Result<BoundStateResult> {
        let edge = self.g.edge(e)?;
        let len = edge.length.finite().ok_or_else(|| Error::NotBounded { edge: edge.name.clone() })?;
        let mu = self.cfg.mu;
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed ^ (e as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut start = match warm {
            Some(u) => project_mass(u, mu)?,
            None => self.initial_guess(e)?,
        };
        let mut restarts = 0;
        loop {
            if let FlowEnd::Converged(s) = self.descend(start, |u| sup_gap(u, e) >= 0.0)? {
                let gap = sup_gap(&s.state, e);
                if gap > 0.0 {
                    return Ok(BoundStateResult {
                        mu,
                        state: s.state,
                        energy: s.energy,
                        lambda: s.lambda,
                        localization_edge: e,
                        sup_gap: gap,
                        residuals: s.residuals,
                        iterations: s.iterations,
                        restarts,
                        converged: true,
                        mesh: MeshInfo::of(self.mesh()),
                    });
                }
            }
            if self.cfg.guard_policy == GuardPolicy::Reinitialize && restarts < MAX_RESTARTS {
                restarts += 1;
                let shift = rng.random_range(-0.1..0.1) * len;
                let tighten = 1.5f64.powi(restarts as i32);
                start = guess_with(self.g, e, &self.constants, mu, self.mesh(), tighten, shift)?;
                continue;
            }
            return Err(Error::LocalizationLost { edge: edge.name.clone(), restarts });
        }
    }

    /// Continuation along increasing masses: each rung starts from the
    /// previous rung's state. The problem's own mass is the last rung.
    pub fn ladder(&self, e: usize, masses: &[f64]) -> Result<BoundStateResult> {
        let mut warm: Option<DiscreteFunction> = None;
        for &m in masses.iter().filter(|m| **m < self.cfg.mu) {
            let rung = self.at_mass(m)?.localized(e, warm.as_ref())?;
            warm = Some(rung.state);
        }
        self.localized(e, warm.as_ref())
    }

    /// Unconstrained flow from a soliton-shaped start.
    pub fn free(&self, start: FreeStart) -> Result<FreeStateResult> {
        let c = &self.constants;
        let mu = self.cfg.mu;
        let edges = self.g.edges();
        let u0 = match start {
            FreeStart::Vertex(v) => {
                if v >= self.g.vertex_count() {
                    return Err(Error::InvalidParameter { name: "vertex", value: v as f64 });
                }
                // every arm carries half a soliton of mass 2 mu / degree
                let m = 2.0 * mu / self.g.degree(v) as f64;
                DiscreteFunction::from_fn(self.mesh().clone(), |e, x| {
                    let edge = &edges[e];
                    let from_tail = (edge.tail == v).then_some(x);
                    let from_head = match (edge.head, edge.length.finite()) {
                        (Some(h), Some(len)) if h == v => Some(len - x),
                        _ => None,
                    };
                    match (from_tail, from_head) {
                        (Some(a), Some(b)) => c.soliton(m, a.min(b)),
                        (Some(d), None) | (None, Some(d)) => c.soliton(m, d),
                        (None, None) => 0.0,
                    }
                })?
            }
            FreeStart::OnEdge { edge, center } => {
                self.g.edge(edge)?;
                DiscreteFunction::from_fn(self.mesh().clone(), |e, x| {
                    if e == edge { c.soliton(mu, x - center) } else { 0.0 }
                })?
            }
        };
        let u0 = project_mass(&u0, mu)?;
        match self.descend(u0, |_| true)? {
            FlowEnd::Converged(s) => Ok(FreeStateResult {
                mu,
                state: s.state,
                energy: s.energy,
                lambda: s.lambda,
                residuals: s.residuals,
                iterations: s.iterations,
                converged: true,
                mesh: MeshInfo::of(self.mesh()),
            }),
            FlowEnd::GuardFired => unreachable!("free flow has no guard"),
        }
    }
}

/// [`Problem::localized`] from the default initial guess.
pub fn minimize_localized(
    g: &MetricGraph,
    e: usize,
    w: &PotentialSpec,
    cfg: &SolverConfig,
) -> Result<BoundStateResult> {
    Problem::new(g, w, cfg.clone())?.localized(e, None)
}

/// [`Problem::free`] with a fresh problem.
pub fn minimize_free(
    g: &MetricGraph,
    w: &PotentialSpec,
    cfg: &SolverConfig,
    start: FreeStart,
) -> Result<FreeStateResult> {
    Problem::new(g, w, cfg.clone())?.free(start)
}

/// One localized run per bounded edge.
#[derive(Debug, Clone)]
pub struct Family {
    pub mu: f64,
    /// `(edge, outcome)` in edge order.
    pub results: Vec<(usize, Result<BoundStateResult>)>,
    /// `(edge a, edge b, ||u_a - u_b||_{L^2})` over pairs of successful runs.
    pub distances: Vec<(usize, usize, f64)>,
    /// Every pair of successful runs has different localization edges and
    /// distance above `1e-3 sqrt(mu)`.
    pub distinct: bool,
}

impl Family {
    pub fn assemble(mu: f64, results: Vec<(usize, Result<BoundStateResult>)>) -> Result<Self> {
        let ok: Vec<&BoundStateResult> = results.iter().filter_map(|(_, r)| r.as_ref().ok()).collect();
        let threshold = 1e-3 * mu.sqrt();
        let mut distances = Vec::new();
        let mut distinct = true;
        for i in 0..ok.len() {
            for j in i + 1..ok.len() {
                let d = ok[i].state.l2_distance(&ok[j].state)?;
                distinct &= ok[i].localization_edge != ok[j].localization_edge && d > threshold;
                distances.push((ok[i].localization_edge, ok[j].localization_edge, d));
            }
        }
        Ok(Family { mu, results, distances, distinct })
    }

    pub fn certified(&self) -> impl Iterator<Item = &BoundStateResult> {
        self.results.iter().filter_map(|(_, r)| r.as_ref().ok())
    }

    /// Edge names of the failed runs with their errors.
    pub fn failures<'g>(&self, g: &'g MetricGraph) -> Vec<(&'g str, &Error)> {
        self.results
            .iter()
            .filter_map(|(e, r)| r.as_ref().err().map(|err| (g.edges()[*e].name.as_str(), err)))
            .collect()
    }
}

/// Localized minimization on every bounded edge, in order, optionally by
/// continuation through `ladder` masses below `cfg.mu`. A failing edge does
/// not stop the others.
pub fn multiplicity_sweep(
    g: &MetricGraph,
    w: &PotentialSpec,
    cfg: &SolverConfig,
    ladder: &[f64],
) -> Result<Family> {
    let edges: Vec<usize> = g.bounded_edges().collect();
    if edges.is_empty() {
        return Err(Error::NoBoundedEdge);
    }
    let problem = sweep_problem(g, w, cfg, ladder)?;
    let results = edges.iter().map(|&e| (e, problem.ladder(e, ladder))).collect();
    Family::assemble(cfg.mu, results)
}

/// The shared problem of a sweep: its mesh is cut for the smallest mass.
pub fn sweep_problem<'a>(
    g: &'a MetricGraph,
    w: &'a PotentialSpec,
    cfg: &SolverConfig,
    ladder: &[f64],
) -> Result<Problem<'a>> {
    let smallest = ladder.iter().copied().filter(|m| *m > 0.0).fold(cfg.mu, f64::min);
    Problem::with_truncation_mass(g, w, cfg.clone(), smallest)
}

/// Name of edge `e`, for error messages.
pub fn edge_name(g: &MetricGraph, e: usize) -> String {
    g.edges().get(e).map(|x| x.name.clone()).unwrap_or_default()
}
