//! Result files: JSON summaries with an embedded manifest, CSV profiles.
//!
//! Wall-clock times go to a separate `timings.json` so that reruns with the
//! same manifest reproduce every other file byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use graphnls_core::functionals::EnergyBreakdown;
use graphnls_core::graph::MetricGraph;
use graphnls_core::mesh::{DiscreteFunction, Mesh};
use graphnls_core::solver::{BoundStateResult, GuardPolicy, SolverConfig};
use graphnls_core::theory::{Certificate, Check};
use graphnls_core::Error;
use serde::Serialize;

pub const TIMINGS_FILE: &str = "timings.json";

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<C> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub input: Option<String>,
    pub config: C,
    pub mesh: Option<MeshRecord>,
    /// Where the wall-clock times of this run are kept.
    pub timings: &'static str,
}

impl<C> Manifest<C> {
    pub fn new(command: &'static str, input: Option<&Path>, config: C, mesh: Option<MeshRecord>) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            input: input.map(|p| p.display().to_string()),
            config,
            mesh,
            timings: TIMINGS_FILE,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverRecord {
    pub p: f64,
    pub mu: f64,
    pub tau: f64,
    pub max_iters: usize,
    pub energy_tol: f64,
    pub residual_tol: f64,
    pub guard_policy: &'static str,
    pub seed: u64,
    pub resolution: f64,
    pub tail_tol: f64,
    pub epsilon: f64,
    pub mu_ladder: Vec<f64>,
}

impl SolverRecord {
    pub fn new(cfg: &SolverConfig, epsilon: f64, mu_ladder: &[f64]) -> Self {
        SolverRecord {
            p: cfg.p,
            mu: cfg.mu,
            tau: cfg.tau,
            max_iters: cfg.max_iters,
            energy_tol: cfg.energy_tol,
            residual_tol: cfg.residual_tol,
            guard_policy: match cfg.guard_policy {
                GuardPolicy::RejectStep => "reject_step",
                GuardPolicy::Reinitialize => "reinitialize",
            },
            seed: cfg.seed,
            resolution: cfg.resolution,
            tail_tol: cfg.tail_tol,
            epsilon,
            mu_ladder: mu_ladder.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeshRecord {
    pub resolution: f64,
    pub tail_tol: f64,
    /// Cut length of every halfline.
    pub truncation: f64,
    pub dofs: usize,
    pub edges: Vec<EdgeMeshRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeMeshRecord {
    pub id: String,
    pub cells: usize,
    pub h: f64,
    pub length: f64,
    pub truncated: bool,
}

impl MeshRecord {
    pub fn new(g: &MetricGraph, mesh: &Mesh) -> Self {
        MeshRecord {
            resolution: mesh.resolution(),
            tail_tol: mesh.tail_tol(),
            truncation: mesh.truncation(),
            dofs: mesh.dof_count(),
            edges: mesh
                .grids()
                .iter()
                .map(|gr| EdgeMeshRecord {
                    id: g.edges()[gr.edge].name.clone(),
                    cells: gr.cells,
                    h: gr.h,
                    length: gr.length,
                    truncated: gr.truncated,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyRecord {
    pub kinetic: f64,
    pub potential: f64,
    pub nonlinear: f64,
    pub total: f64,
}

impl From<EnergyBreakdown> for EnergyRecord {
    fn from(e: EnergyBreakdown) -> Self {
        EnergyRecord { kinetic: e.kinetic, potential: e.potential, nonlinear: e.nonlinear, total: e.total }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
    pub margin: f64,
}

impl From<&Check> for CheckRecord {
    fn from(c: &Check) -> Self {
        CheckRecord { name: c.name.into(), passed: c.passed, value: c.value, bound: c.bound, margin: c.margin }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateRecord {
    pub all_passed: bool,
    pub level_cardinality: usize,
    pub delta: f64,
    /// Energy of the interpolant at exact mass, used by the energy checks.
    pub energy: EnergyRecord,
    pub checks: Vec<CheckRecord>,
}

impl From<&Certificate> for CertificateRecord {
    fn from(c: &Certificate) -> Self {
        CertificateRecord {
            all_passed: c.all_passed(),
            level_cardinality: c.level_cardinality,
            delta: c.delta,
            energy: c.energy.into(),
            checks: c.checks.iter().map(CheckRecord::from).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualRecord {
    pub pde_residual: f64,
    pub max_kirchhoff: f64,
    pub kirchhoff_by_vertex: BTreeMap<String, f64>,
}

/// Outcome of one localized solve.
#[derive(Debug, Clone, Serialize)]
pub struct StateRecord {
    pub edge: String,
    pub status: &'static str,
    pub error: Option<String>,
    pub mu: f64,
    pub energy: Option<EnergyRecord>,
    pub lambda: Option<f64>,
    pub sup_gap: Option<f64>,
    pub residuals: Option<ResidualRecord>,
    pub iterations: Option<usize>,
    pub restarts: Option<usize>,
    pub certificate: Option<CertificateRecord>,
    pub profile: Option<String>,
}

/// How a solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Certified,
    Uncertified,
    LocalizationLost,
    EdgeTooShortForMass,
    NotConverged,
    StepCollapse,
    Failed,
}

impl Status {
    pub fn of(outcome: &Result<(BoundStateResult, Certificate), Error>) -> Self {
        match outcome {
            Ok((_, c)) if c.all_passed() => Status::Certified,
            Ok(_) => Status::Uncertified,
            Err(Error::LocalizationLost { .. }) => Status::LocalizationLost,
            Err(Error::EdgeTooShortForMass { .. }) => Status::EdgeTooShortForMass,
            Err(Error::NotConverged { .. }) => Status::NotConverged,
            Err(Error::StepCollapse) => Status::StepCollapse,
            Err(_) => Status::Failed,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Certified => "certified",
            Status::Uncertified => "uncertified",
            Status::LocalizationLost => "localization_lost",
            Status::EdgeTooShortForMass => "edge_too_short_for_mass",
            Status::NotConverged => "not_converged",
            Status::StepCollapse => "step_collapse",
            Status::Failed => "failed",
        }
    }
}

impl StateRecord {
    pub fn new(
        g: &MetricGraph,
        edge: usize,
        mu: f64,
        outcome: &Result<(BoundStateResult, Certificate), Error>,
        profile: Option<String>,
    ) -> Self {
        let status = Status::of(outcome).label();
        let name = g.edges()[edge].name.clone();
        match outcome {
            Ok((r, cert)) => StateRecord {
                edge: name,
                status,
                error: None,
                mu,
                energy: Some(r.energy.into()),
                lambda: Some(r.lambda),
                sup_gap: Some(r.sup_gap),
                residuals: Some(ResidualRecord {
                    pde_residual: r.residuals.pde_residual,
                    max_kirchhoff: r.residuals.max_kirchhoff(),
                    kirchhoff_by_vertex: r
                        .residuals
                        .kirchhoff_by_vertex
                        .iter()
                        .enumerate()
                        .map(|(v, f)| (g.vertex_name(v).to_string(), *f))
                        .collect(),
                }),
                iterations: Some(r.iterations),
                restarts: Some(r.restarts),
                certificate: Some(cert.into()),
                profile,
            },
            Err(e) => StateRecord {
                edge: name,
                status,
                error: Some(e.to_string()),
                mu,
                energy: None,
                lambda: None,
                sup_gap: None,
                residuals: None,
                iterations: None,
                restarts: None,
                certificate: None,
                profile: None,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultFile<C> {
    pub manifest: Manifest<C>,
    #[serde(flatten)]
    pub state: StateRecord,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistanceRecord {
    pub a: String,
    pub b: String,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyFile<C> {
    pub manifest: Manifest<C>,
    pub mu: f64,
    pub certified: usize,
    pub entries: Vec<StateRecord>,
    pub distances: Vec<DistanceRecord>,
    /// Pairwise distinct localization edges and `L^2` distances above
    /// `1e-3 sqrt(mu)` among the converged entries.
    pub distinct: bool,
}

/// `edge_id,x,u` rows, edge by edge in mesh order.
pub fn profile_csv(g: &MetricGraph, u: &DiscreteFunction) -> String {
    let mut out = String::from("edge_id,x,u\n");
    let vals = u.values();
    for grid in u.mesh().grids() {
        let name = &g.edges()[grid.edge].name;
        for (k, &d) in grid.dofs().iter().enumerate() {
            let _ = writeln!(out, "{name},{},{}", grid.x(k), vals[d]);
        }
    }
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), String> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    }
    fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Named wall-clock stages.
#[derive(Debug)]
pub struct Timings {
    started: Instant,
    stages: Vec<(&'static str, f64)>,
}

impl Default for Timings {
    fn default() -> Self {
        Timings { started: Instant::now(), stages: Vec::new() }
    }
}

impl Timings {
    /// Close the current stage under `name`.
    pub fn lap(&mut self, name: &'static str) {
        let now = Instant::now();
        self.stages.push((name, (now - self.started).as_secs_f64()));
        self.started = now;
    }

    pub fn write(&self, dir: &Path) -> Result<(), String> {
        let stages: BTreeMap<&str, f64> = self.stages.iter().copied().collect();
        write_json(&dir.join(TIMINGS_FILE), &serde_json::json!({ "seconds": stages }))
    }
}
