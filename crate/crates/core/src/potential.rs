//! Edge-wise models of the potential `W`.
//!
//! Potentials are normalized so that `W -> 0` along every halfline and are
//! bounded below by a global floor. Both properties are checked when a
//! [`PotentialSpec`] is built; nothing is shifted at run time.

use alloc::vec::Vec;

// std's inherent float methods shadow these when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::graph::{Length, MetricGraph};

/// Magnitude below which a halfline potential counts as decayed.
pub const DECAY_THRESHOLD: f64 = 1e-6;

const FLOOR_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum EdgePotential {
    Constant(f64),
    /// `W(x) = -depth * exp(-(x - center)^2 / width^2)`.
    GaussianWell { depth: f64, center: f64, width: f64 },
    /// Piecewise-linear interpolation of `(x, W)` pairs, held constant
    /// beyond the first and last abscissa.
    Sampled(Vec<(f64, f64)>),
}

impl EdgePotential {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            EdgePotential::Constant(c) => *c,
            EdgePotential::GaussianWell { depth, center, width } => {
                let z = (x - center) / width;
                -depth * (-z * z).exp()
            }
            EdgePotential::Sampled(points) => interpolate(points, x),
        }
    }

    fn lower_bound(&self) -> f64 {
        match self {
            EdgePotential::Constant(c) => *c,
            EdgePotential::GaussianWell { depth, .. } => -depth,
            EdgePotential::Sampled(points) => {
                points.iter().map(|&(_, w)| w).fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Radius beyond which the model stays below [`DECAY_THRESHOLD`] in
    /// magnitude, when it decays at all.
    fn natural_decay_radius(&self) -> f64 {
        match self {
            EdgePotential::Constant(_) => 0.0,
            EdgePotential::GaussianWell { depth, center, width } => {
                let ratio = depth / (0.1 * DECAY_THRESHOLD);
                if ratio <= 1.0 {
                    0.0
                } else {
                    (center + width * ratio.ln().sqrt()).max(0.0)
                }
            }
            EdgePotential::Sampled(points) => points.last().map_or(0.0, |p| p.0.max(0.0)),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            EdgePotential::Constant(c) => *c == 0.0,
            EdgePotential::GaussianWell { .. } => false,
            EdgePotential::Sampled(points) => points.iter().all(|&(_, w)| w == 0.0),
        }
    }

    fn validate(&self, edge: &str) -> Result<()> {
        let bad = |reason| Err(Error::InvalidPotential { edge: edge.into(), reason });
        match self {
            EdgePotential::Constant(c) if !c.is_finite() => bad("constant is not finite"),
            EdgePotential::GaussianWell { depth, center, width } => {
                if !(*depth > 0.0) || !depth.is_finite() {
                    bad("well depth must be positive")
                } else if !(*width > 0.0) || !width.is_finite() {
                    bad("well width must be positive")
                } else if !center.is_finite() {
                    bad("well center is not finite")
                } else {
                    Ok(())
                }
            }
            EdgePotential::Sampled(points) => {
                if points.is_empty() {
                    bad("sample table is empty")
                } else if points.iter().any(|&(x, w)| !x.is_finite() || !w.is_finite()) {
                    bad("sample table has non-finite entries")
                } else if points.windows(2).any(|p| !(p[1].0 > p[0].0)) {
                    bad("sample abscissae must be strictly increasing")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let k = points.partition_point(|p| p.0 <= x);
    let (x0, w0) = points[k - 1];
    let (x1, w1) = points[k];
    w0 + (w1 - w0) * (x - x0) / (x1 - x0)
}

/// Validated per-edge potential together with its floor `W_-`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    models: Vec<EdgePotential>,
    floor: f64,
    decay_radius: f64,
}

impl PotentialSpec {
    /// `W = 0` on every edge.
    pub fn zero(g: &MetricGraph) -> Self {
        PotentialSpec {
            models: (0..g.edge_count()).map(|_| EdgePotential::Constant(0.0)).collect(),
            floor: 0.0,
            decay_radius: 0.0,
        }
    }

    /// Validate `models` (one per edge, in edge order). A missing `floor`
    /// defaults to the smallest value any model can take; a missing
    /// `decay_radius` to the largest radius at which the halfline models
    /// naturally fall below [`DECAY_THRESHOLD`].
    pub fn new(
        g: &MetricGraph,
        models: Vec<EdgePotential>,
        floor: Option<f64>,
        decay_radius: Option<f64>,
    ) -> Result<Self> {
        if models.len() != g.edge_count() {
            return Err(Error::InvalidParameter {
                name: "potential model count",
                value: models.len() as f64,
            });
        }
        for (edge, m) in g.edges().iter().zip(&models) {
            m.validate(&edge.name)?;
        }
        let natural_floor = models.iter().map(EdgePotential::lower_bound).fold(0.0, f64::min);
        let floor = floor.unwrap_or(natural_floor);
        if !floor.is_finite() {
            return Err(Error::InvalidParameter { name: "potential floor", value: floor });
        }
        let decay_radius = match decay_radius {
            Some(r) if !(r >= 0.0) || !r.is_finite() => {
                return Err(Error::InvalidParameter { name: "decay radius", value: r })
            }
            Some(r) => r,
            None => g
                .halflines()
                .map(|e| models[e].natural_decay_radius())
                .fold(0.0, f64::max),
        };
        let spec = PotentialSpec { models, floor, decay_radius };
        spec.check_floor(g)?;
        spec.check_decay(g)?;
        spec.check_line_symmetry(g)?;
        Ok(spec)
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn decay_radius(&self) -> f64 {
        self.decay_radius
    }

    pub fn models(&self) -> &[EdgePotential] {
        &self.models
    }

    pub fn is_zero(&self) -> bool {
        self.models.iter().all(EdgePotential::is_zero)
    }

    /// `W` on edge `e` at coordinate `x`.
    pub fn eval(&self, g: &MetricGraph, e: usize, x: f64) -> Result<f64> {
        let edge = g.edge(e)?;
        let in_range = match edge.length {
            Length::Finite(l) => x >= 0.0 && x <= l * (1.0 + 1e-12),
            Length::Unbounded => x >= 0.0,
        };
        if !in_range || x.is_nan() {
            return Err(Error::OutOfRange { edge: edge.name.clone(), x });
        }
        Ok(self.models[e].value(x))
    }

    /// Unchecked evaluation for mesh assembly.
    pub(crate) fn value(&self, e: usize, x: f64) -> f64 {
        self.models[e].value(x)
    }

    fn sample_points(&self, length: Length) -> Vec<f64> {
        let span = match length {
            Length::Finite(l) => l,
            Length::Unbounded => self.decay_radius.max(1.0) * 2.0,
        };
        let n = 4000;
        let mut xs: Vec<f64> = (0..=n).map(|i| span * i as f64 / n as f64).collect();
        if let Length::Unbounded = length {
            xs.extend((0..48).map(|k| span + 0.01 * 2f64.powi(k)));
        }
        xs
    }

    fn check_floor(&self, g: &MetricGraph) -> Result<()> {
        for (e, edge) in g.edges().iter().enumerate() {
            let model = &self.models[e];
            let mut xs = self.sample_points(edge.length);
            match model {
                EdgePotential::Sampled(points) => xs.extend(points.iter().map(|p| p.0)),
                EdgePotential::GaussianWell { center, .. } => xs.push(*center),
                EdgePotential::Constant(_) => {}
            }
            let limit = edge.length.finite().unwrap_or(f64::INFINITY);
            for x in xs.into_iter().filter(|x| *x >= 0.0 && *x <= limit) {
                let w = model.value(x);
                if w < self.floor - FLOOR_SLACK {
                    return Err(Error::PotentialBelowFloor {
                        edge: edge.name.clone(),
                        x,
                        value: w,
                        floor: self.floor,
                    });
                }
            }
        }
        Ok(())
    }

    fn check_decay(&self, g: &MetricGraph) -> Result<()> {
        for e in g.halflines() {
            let model = &self.models[e];
            for k in 0..48 {
                let x = self.decay_radius + 1e-3 * 2f64.powi(k);
                let w = model.value(x);
                if w.abs() >= DECAY_THRESHOLD {
                    return Err(Error::PotentialDoesNotDecay {
                        edge: g.edges()[e].name.clone(),
                        x,
                        value: w,
                    });
                }
            }
        }
        Ok(())
    }

    /// On the line (two halflines at one vertex) `W` must be even, i.e. the
    /// same function of the distance to the vertex on both halflines.
    fn check_line_symmetry(&self, g: &MetricGraph) -> Result<()> {
        if !g.is_line() {
            return Ok(());
        }
        let span = self.decay_radius.max(1.0) * 2.0;
        for i in 0..=4000 {
            let x = span * i as f64 / 4000.0;
            let (a, b) = (self.models[0].value(x), self.models[1].value(x));
            if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                return Err(Error::AsymmetricPotential { x });
            }
        }
        Ok(())
    }
}
