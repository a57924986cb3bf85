//! Pass/fail report comparing a computed bound state with the closed-form
//! levels and bounds.

use alloc::vec::Vec;

// std's inherent float methods shadow these when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use super::{min_level_cardinality, TheoryConstants};
use crate::functionals::{interpolant_energy, interpolant_mass, EnergyBreakdown};
use crate::graph::{EdgeClass, MetricGraph};
use crate::operator::assemble_operator;
use crate::potential::PotentialSpec;
use crate::solver::BoundStateResult;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
    /// Distance to the bound, positive when the check passes.
    pub margin: f64,
}

impl Check {
    fn at_most(name: &'static str, value: f64, bound: f64) -> Self {
        Check { name, passed: value <= bound, value, bound, margin: bound - value }
    }

    fn at_least(name: &'static str, value: f64, bound: f64) -> Self {
        Check { name, passed: value >= bound, value, bound, margin: value - bound }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub checks: Vec<Check>,
    /// Smallest level-set cardinality over the sampled levels (0 if it
    /// could not be measured).
    pub level_cardinality: usize,
    /// `max over bounded edges of min over the edge of u`.
    pub delta: f64,
    /// Energy of the piecewise-linear interpolant rescaled to mass exactly
    /// `mu`, which the energy checks use.
    pub energy: EnergyBreakdown,
}

impl Certificate {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// The energy checks are made on the piecewise-linear interpolant of the
/// state, rescaled to mass exactly `mu` and evaluated with exact integrals
/// (see [`interpolant_energy`]). Lower bounds valid for every `H^1`
/// function then hold up to rounding, instead of up to the quadrature
/// error of the lumped energy, which can exceed the margin of a tight bound.
///
/// Checks, in order:
/// - `upper_bound`: `E <= -theta (1 - eps) mu^(2 beta + 1)`, times `2^(2 beta)`
///   on an end-edge;
/// - `level_count_bound`: `E_NLS >= -theta (2/N)^(2 beta) mu^(2 beta + 1)` with
///   `N` the measured minimal level cardinality (`E_NLS = E` when `W = 0`);
/// - `min_on_edges`: `delta^2 <= mu / l0`, `l0` the shortest bounded edge;
/// - `sandwich` (only when `W = 0`): `E >= -theta 2^(2 beta) mu^(2 beta + 1)`;
/// - `sup_on_edge` and `kinetic`: the a-priori sup-norm and kinetic bounds;
/// - `sup_gap` and `positivity`: strict localization and sign.
pub fn certify(
    result: &BoundStateResult,
    g: &MetricGraph,
    w: &PotentialSpec,
    c: &TheoryConstants,
    epsilon: f64,
) -> Certificate {
    let mu = result.mu;
    let u = &result.state;
    let e = result.localization_edge;
    let end_edge = matches!(g.classify_edge(e).map(|i| i.class), Ok(EdgeClass::EndEdge));
    let op = assemble_operator(u.mesh().clone(), w);
    let m = interpolant_mass(u);
    let exact = if m > 0.0 {
        interpolant_energy(&u.scaled((mu / m).sqrt()), &op, c.p).unwrap_or(result.energy)
    } else {
        result.energy
    };
    let total = exact.total;
    let mut checks = Vec::new();

    checks.push(Check::at_most("upper_bound", total, c.localized_upper_bound(mu, epsilon, end_edge)));

    let n = min_level_cardinality(u).unwrap_or(0);
    let lower = if n > 0 { c.level_count_bound(n, mu) } else { f64::INFINITY };
    checks.push(Check::at_least("level_count_bound", exact.nls(), lower));

    let delta = g
        .bounded_edges()
        .map(|b| u.edge_values(b).into_iter().fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let l0 = g.shortest_bounded_edge().unwrap_or(f64::INFINITY);
    checks.push(Check::at_most("min_on_edges", delta * delta, mu / l0));

    if w.is_zero() {
        let half = c.ground_energy_levels(mu).halfline;
        checks.push(Check::at_least("sandwich", total, half));
    }

    let sup_e = u.edge_values(e).into_iter().fold(0.0, f64::max);
    let sup_bound = c.sup_lower_bound(mu, w.floor()).unwrap_or(0.0);
    checks.push(Check::at_least("sup_on_edge", sup_e * sup_e, sup_bound));
    checks.push(Check::at_most(
        "kinetic",
        2.0 * exact.kinetic,
        c.kinetic_upper_bound(mu),
    ));

    let mut gap = Check::at_least("sup_gap", result.sup_gap, 0.0);
    gap.passed = result.sup_gap > 0.0;
    checks.push(gap);
    let min = u.values().iter().copied().fold(f64::INFINITY, f64::min);
    let mut pos = Check::at_least("positivity", min, 0.0);
    pos.passed = min > 0.0;
    checks.push(pos);

    Certificate { checks, level_cardinality: n, delta, energy: exact }
}
