//! One localized solve per bounded edge, spread over scoped threads.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use graphnls_core::graph::MetricGraph;
use graphnls_core::mesh::Mesh;
use graphnls_core::potential::PotentialSpec;
use graphnls_core::solver::{sweep_problem, BoundStateResult, Family, Problem, SolverConfig};
use graphnls_core::theory::{certify, Certificate};
use graphnls_core::{Error, Result};

pub const THREADS_VAR: &str = "GRAPHNLS_THREADS";

/// Worker count: `GRAPHNLS_THREADS` when set to a positive integer, the
/// available parallelism otherwise.
pub fn thread_budget() -> usize {
    std::env::var(THREADS_VAR)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

/// A localized solve followed by its certificate.
pub fn solve_and_certify(
    problem: &Problem<'_>,
    e: usize,
    ladder: &[f64],
    epsilon: f64,
) -> Result<(BoundStateResult, Certificate)> {
    let r = problem.ladder(e, ladder)?;
    let cert = certify(&r, problem.graph(), problem.potential(), problem.constants(), epsilon);
    Ok((r, cert))
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub family: Family,
    /// The mesh shared by every run.
    pub mesh: Arc<Mesh>,
    /// Aligned with `family.results`; `None` for failed runs.
    pub certificates: Vec<Option<Certificate>>,
}

impl Sweep {
    pub fn certified_count(&self) -> usize {
        self.certificates.iter().flatten().filter(|c| c.all_passed()).count()
    }

    /// `(edge, outcome)` pairs with certificates attached.
    pub fn outcomes(&self) -> Vec<(usize, Result<(BoundStateResult, Certificate)>)> {
        self.family
            .results
            .iter()
            .zip(&self.certificates)
            .map(|((e, r), c)| {
                let pair = match (r, c) {
                    (Ok(r), Some(c)) => Ok((r.clone(), c.clone())),
                    (Err(err), _) => Err(err.clone()),
                    (Ok(_), None) => unreachable!("converged runs are always certified"),
                };
                (*e, pair)
            })
            .collect()
    }
}

/// Same results as the sequential multiplicity sweep, computed by up to
/// `threads` workers; the output does not depend on the thread count.
pub fn parallel_sweep(
    g: &MetricGraph,
    w: &PotentialSpec,
    cfg: &SolverConfig,
    ladder: &[f64],
    epsilon: f64,
    threads: usize,
) -> Result<Sweep> {
    let edges: Vec<usize> = g.bounded_edges().collect();
    if edges.is_empty() {
        return Err(Error::NoBoundedEdge);
    }
    let problem = sweep_problem(g, w, cfg, ladder)?;
    let slots: Vec<Mutex<Option<Result<(BoundStateResult, Certificate)>>>> =
        edges.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    thread::scope(|s| {
        for _ in 0..threads.clamp(1, edges.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&e) = edges.get(i) else { break };
                let outcome = solve_and_certify(&problem, e, ladder, epsilon);
                *slots[i].lock().unwrap() = Some(outcome);
            });
        }
    });
    let mut results = Vec::with_capacity(edges.len());
    let mut certificates = Vec::with_capacity(edges.len());
    for (e, slot) in edges.into_iter().zip(slots) {
        match slot.into_inner().unwrap().expect("every edge is visited") {
            Ok((r, c)) => {
                results.push((e, Ok(r)));
                certificates.push(Some(c));
            }
            Err(err) => {
                results.push((e, Err(err)));
                certificates.push(None);
            }
        }
    }
    Ok(Sweep { family: Family::assemble(cfg.mu, results)?, mesh: problem.mesh().clone(), certificates })
}
