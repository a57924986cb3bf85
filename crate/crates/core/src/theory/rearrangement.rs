//! Decreasing rearrangement onto a halfline and level-set counting.
//!
//! The rearranged profile keeps every node value with its trapezoidal
//! weight, sorted by decreasing value, so integrals of any power of `u`
//! agree with those on the graph up to summation order.
//!
//! Its kinetic term is computed from the distribution function of the
//! piecewise-linear interpolant: `m(t) = |{u > t}|` has
//! `-m'(t) = sum over cells crossing t of h / |du|`, and
//! `int |(u*)'|^2 = int dt / (-m'(t))`. Against
//! `int |u'|^2 = int dt sum h / |du| * (du/h)^2`, Cauchy-Schwarz over the
//! `N(t)` crossings gives `int |(u*)'|^2 <= int |u'|^2 / N^2` exactly.

use alloc::vec;
use alloc::vec::Vec;

// std's inherent float methods shadow these when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::mesh::DiscreteFunction;

/// Number of levels sampled by [`min_level_cardinality`].
pub const LEVEL_GRID_POINTS: usize = 64;

/// `u*` on `[0, total length]` as node values with their widths.
#[derive(Debug, Clone, PartialEq)]
pub struct Rearrangement {
    /// Nonincreasing.
    pub values: Vec<f64>,
    pub widths: Vec<f64>,
    /// `int |(u*)'|^2`.
    pub kinetic: f64,
    /// `int |u'|^2` of the original function.
    pub original_kinetic: f64,
}

impl Rearrangement {
    pub fn total_length(&self) -> f64 {
        self.widths.iter().sum()
    }

    /// `int |u*|^r`.
    pub fn power_integral(&self, r: f64) -> f64 {
        self.values.iter().zip(&self.widths).map(|(v, w)| w * v.powf(r)).sum()
    }

    /// `(s, u*(s))` with `s` the left end of each node's width.
    pub fn profile(&self) -> Vec<(f64, f64)> {
        let mut s = 0.0;
        self.values
            .iter()
            .zip(&self.widths)
            .map(|(v, w)| {
                let at = s;
                s += w;
                (at, *v)
            })
            .collect()
    }
}

fn check_nonnegative(u: &DiscreteFunction) -> Result<()> {
    if u.values().iter().any(|v| *v < 0.0) {
        Err(Error::NegativeValues)
    } else {
        Ok(())
    }
}

pub fn decreasing_rearrangement(u: &DiscreteFunction) -> Result<Rearrangement> {
    check_nonnegative(u)?;
    let mesh = u.mesh();
    let vals = u.values();
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    let values: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let widths: Vec<f64> = order.iter().map(|&i| mesh.weights()[i]).collect();

    let original_kinetic: f64 = mesh.cells().map(|(a, b, h)| (vals[b] - vals[a]).powi(2) / h).sum();

    // breakpoints are the distinct node values, ascending
    let mut levels: Vec<f64> = values.iter().rev().copied().collect();
    levels.dedup();
    let scale = levels.last().copied().unwrap_or(0.0);
    let mut density = vec![0.0; levels.len() + 1];
    let locate = |t: f64| levels.partition_point(|l| *l < t);
    for (a, b, h) in mesh.cells() {
        let (lo, hi) = if vals[a] < vals[b] { (vals[a], vals[b]) } else { (vals[b], vals[a]) };
        // cells flatter than rounding are plateaus: no contribution
        if hi - lo <= 1e-14 * scale {
            continue;
        }
        let inv_slope = h / (hi - lo);
        density[locate(lo)] += inv_slope;
        density[locate(hi)] -= inv_slope;
    }
    let mut kinetic = 0.0;
    let mut active = 0.0;
    for j in 0..levels.len().saturating_sub(1) {
        active += density[j];
        let dt = levels[j + 1] - levels[j];
        if active > 0.0 {
            kinetic += dt / active;
        }
    }
    Ok(Rearrangement { values, widths, kinetic, original_kinetic })
}

/// Number of points where the piecewise-linear interpolant of `u` equals
/// `t`: strict crossings inside cells plus one per connected run of nodes
/// sitting exactly at `t`. A truncated halfline whose cut value exceeds `t`
/// adds the crossing its decaying tail would make.
pub fn level_cardinality(u: &DiscreteFunction, t: f64) -> Result<usize> {
    check_nonnegative(u)?;
    let vals = u.values();
    let sup = vals.iter().copied().fold(0.0, f64::max);
    if !(t > 0.0 && t < sup) {
        return Err(Error::LevelOutOfRange { level: t, sup });
    }
    let mesh = u.mesh();
    let n = vals.len();
    let mut count = 0usize;

    // union-find over nodes at exactly t, joined along flat cells
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (a, b, _) in mesh.cells() {
        let (da, db) = (vals[a] - t, vals[b] - t);
        if da * db < 0.0 {
            count += 1;
        } else if da == 0.0 && db == 0.0 {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
    }
    for i in 0..n {
        if vals[i] == t && find(&mut parent, i) == i {
            count += 1;
        }
    }
    for g in mesh.grids().iter().filter(|g| g.truncated) {
        if vals[g.dofs()[g.cells]] > t {
            count += 1;
        }
    }
    Ok(count)
}

/// Smallest [`level_cardinality`] over `t_k = k sup / (LEVEL_GRID_POINTS + 1)`,
/// `k = 1..=LEVEL_GRID_POINTS`.
pub fn min_level_cardinality(u: &DiscreteFunction) -> Result<usize> {
    check_nonnegative(u)?;
    let sup = u.values().iter().copied().fold(0.0, f64::max);
    if !(sup > 0.0) {
        return Err(Error::ZeroMass);
    }
    let step = sup / (LEVEL_GRID_POINTS + 1) as f64;
    let mut best = usize::MAX;
    for k in 1..=LEVEL_GRID_POINTS {
        best = best.min(level_cardinality(u, step * k as f64)?);
    }
    Ok(best)
}
