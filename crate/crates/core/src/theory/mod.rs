//! Closed-form soliton family and the energy levels built from it.
//!
//! For `2 < p < 6` the positive even solution of `-phi'' + lambda phi = phi^(p-1)`
//! on the line is `A sech^s(B x)` with `s = 2/(p-2)`,
//! `A = (p lambda / 2)^(1/(p-2))` and `B = (p-2) sqrt(lambda) / 2`. Fixing its
//! mass to `mu` gives `phi_mu(x) = mu^alpha C_p sech^(alpha/beta)(C'_p mu^beta x)`
//! with `alpha = 2/(6-p)` and `beta = (p-2)/(6-p)`, and the energy
//! `E_NLS(phi_mu) = -theta mu^(2 beta + 1)`.

mod certify;
mod rearrangement;

pub use certify::{certify, Certificate, Check};
pub use rearrangement::{
    decreasing_rearrangement, level_cardinality, min_level_cardinality, Rearrangement,
    LEVEL_GRID_POINTS,
};

// std's inherent float methods shadow these when std is linked
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Constants of the soliton family for one exponent `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants {
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `-E_NLS` of the unit-mass soliton.
    pub theta: f64,
    /// Peak of the unit-mass soliton.
    pub amplitude: f64,
    /// Inverse width of the unit-mass soliton.
    pub width: f64,
    /// Lagrange multiplier of the unit-mass soliton.
    pub lambda_unit: f64,
}

/// Energy levels of the potential-free problem on the line and the halfline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundLevels {
    pub line: f64,
    pub halfline: f64,
}

impl GroundLevels {
    /// Interval bracketing the potential-free infimum on any noncompact graph.
    pub fn sandwich(&self) -> (f64, f64) {
        (self.halfline, self.line)
    }
}

pub fn check_exponent(p: f64) -> Result<()> {
    if p > 2.0 && p < 6.0 {
        Ok(())
    } else {
        Err(Error::ExponentOutOfRange(p))
    }
}

/// `sech(y)^s` without overflowing `cosh`.
pub(crate) fn sech_pow(y: f64, s: f64) -> f64 {
    let a = y.abs();
    let e = (-2.0 * a).exp();
    (2.0 / (1.0 + e)).powf(s) * (-s * a).exp()
}

/// `int_R sech^k(y) dy = sqrt(pi) Gamma(k/2) / Gamma((k+1)/2)`.
fn sech_power_integral(k: f64) -> f64 {
    let ln = libm::lgamma(0.5 * k) - libm::lgamma(0.5 * (k + 1.0));
    core::f64::consts::PI.sqrt() * ln.exp()
}

/// Composite trapezoid over a symmetric window; spectrally accurate for
/// the analytic, exponentially decaying integrands used here.
fn line_quadrature(half_width: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = 2.0 * half_width / n as f64;
    let mut sum = 0.5 * (f(-half_width) + f(half_width));
    for i in 1..n {
        sum += f(-half_width + h * i as f64);
    }
    sum * h
}

impl TheoryConstants {
    pub fn sech_exponent(&self) -> f64 {
        2.0 / (self.p - 2.0)
    }

    /// Lagrange multiplier of `phi_mu`.
    pub fn lambda(&self, mu: f64) -> f64 {
        self.lambda_unit * mu.powf(2.0 * self.beta)
    }

    pub fn peak(&self, mu: f64) -> f64 {
        mu.powf(self.alpha) * self.amplitude
    }

    pub fn inverse_width(&self, mu: f64) -> f64 {
        self.width * mu.powf(self.beta)
    }

    /// `phi_mu(x)`, even in `x`.
    pub fn soliton(&self, mu: f64, x: f64) -> f64 {
        self.peak(mu) * sech_pow(self.inverse_width(mu) * x, self.sech_exponent())
    }

    /// `phi_mu'(x)`.
    pub fn soliton_derivative(&self, mu: f64, x: f64) -> f64 {
        let b = self.inverse_width(mu);
        -self.sech_exponent() * b * (b * x).tanh() * self.soliton(mu, x)
    }

    /// `int_L^inf phi_mu^2`, the mass on one side beyond distance `l`.
    pub fn tail_mass(&self, mu: f64, l: f64) -> f64 {
        let b = self.inverse_width(mu);
        let s2 = 2.0 * self.sech_exponent();
        let z0 = b * l.max(0.0);
        let span = 60.0 / s2;
        let n = 4000;
        let h = span / n as f64;
        // Simpson on [z0, z0 + span]; the remainder is below e^-60 relative.
        let mut sum = sech_pow(z0, s2) + sech_pow(z0 + span, s2);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * sech_pow(z0 + h * i as f64, s2);
        }
        self.peak(mu).powi(2) / b * sum * h / 3.0
    }

    pub fn ground_energy_levels(&self, mu: f64) -> GroundLevels {
        let line = -self.theta * mu.powf(2.0 * self.beta + 1.0);
        GroundLevels { line, halfline: 2f64.powf(2.0 * self.beta) * line }
    }

    /// Lower energy bound for nonnegative functions whose levels are all
    /// attained at least `n` times: `-theta (2/n)^(2 beta) mass^(2 beta + 1)`.
    pub fn level_count_bound(&self, n: usize, mass_sq: f64) -> f64 {
        let n = n.max(1) as f64;
        -self.theta * (2.0 / n).powf(2.0 * self.beta) * mass_sq.powf(2.0 * self.beta + 1.0)
    }

    /// Upper bound on the edge-constrained infimum:
    /// `-theta (1 - eps) mu^(2 beta + 1)`, times `2^(2 beta)` on an end-edge.
    pub fn localized_upper_bound(&self, mu: f64, epsilon: f64, end_edge: bool) -> f64 {
        let base = -self.theta * (1.0 - epsilon) * mu.powf(2.0 * self.beta + 1.0);
        if end_edge {
            base * 2f64.powf(2.0 * self.beta)
        } else {
            base
        }
    }

    /// Lower bound on `||u||^2_{L^inf(e)}` for states with energy below
    /// `-theta mu^(2 beta + 1) / 2`: `(p theta mu^(2 beta) / 2 + p W_- / 2)^(2/(p-2))`.
    /// `None` when the bracket is not positive.
    pub fn sup_lower_bound(&self, mu: f64, w_floor: f64) -> Option<f64> {
        let c = 0.5 * self.p * self.theta * mu.powf(2.0 * self.beta) + 0.5 * self.p * w_floor;
        (c > 0.0).then(|| c.powf(2.0 / (self.p - 2.0)))
    }

    /// Upper bound on `||u'||^2`: `(2/p)^(4/(6-p)) mu^(2 beta + 1)`.
    pub fn kinetic_upper_bound(&self, mu: f64) -> f64 {
        (2.0 / self.p).powf(4.0 / (6.0 - self.p)) * mu.powf(2.0 * self.beta + 1.0)
    }

    /// `E_NLS(phi_mu, R)` by quadrature.
    pub fn soliton_energy_by_quadrature(&self, mu: f64) -> f64 {
        let b = self.inverse_width(mu);
        let half = 60.0 / (self.sech_exponent() * b);
        let p = self.p;
        line_quadrature(half, 40_000, |x| {
            let d = self.soliton_derivative(mu, x);
            0.5 * d * d - self.soliton(mu, x).powf(p) / p
        })
    }

    pub fn soliton_mass_by_quadrature(&self, mu: f64) -> f64 {
        let b = self.inverse_width(mu);
        let half = 60.0 / (self.sech_exponent() * b);
        line_quadrature(half, 40_000, |x| self.soliton(mu, x).powi(2))
    }

    /// Largest relative residual of `-phi'' + lambda phi - phi^(p-1)` over a
    /// grid covering the soliton core, with a fourth-order difference for `phi''`.
    pub fn ode_residual(&self, mu: f64) -> f64 {
        let b = self.inverse_width(mu);
        let lambda = self.lambda(mu);
        let h = 2e-3 / b;
        let phi = |x: f64| self.soliton(mu, x);
        let scale = lambda * self.peak(mu);
        let mut worst = 0.0f64;
        for i in -2000..=2000 {
            let x = i as f64 * 5e-3 / b;
            let d2 = (-phi(x + 2.0 * h) + 16.0 * phi(x + h) - 30.0 * phi(x) + 16.0 * phi(x - h)
                - phi(x - 2.0 * h))
                / (12.0 * h * h);
            let r = -d2 + lambda * phi(x) - phi(x).powf(self.p - 1.0);
            worst = worst.max(r.abs() / scale);
        }
        worst
    }
}

/// Tolerances of the constructor self-checks.
pub const ODE_RESIDUAL_TOL: f64 = 1e-8;
pub const ENERGY_IDENTITY_TOL: f64 = 1e-8;

/// Build the constants for exponent `p` and verify them: the scaling
/// identity `2 alpha - beta = 1`, the ODE residual of `phi_mu`, its mass, and
/// the energy identity at a mass other than one.
pub fn soliton_constants(p: f64) -> Result<TheoryConstants> {
    check_exponent(p)?;
    let alpha = 2.0 / (6.0 - p);
    let beta = (p - 2.0) / (6.0 - p);
    let s = 2.0 / (p - 2.0);
    // mass(lambda) = A^2/B * J = k lambda^gamma
    let j = sech_power_integral(2.0 * s);
    let k = (0.5 * p).powf(2.0 / (p - 2.0)) * 2.0 / (p - 2.0) * j;
    let gamma = 2.0 / (p - 2.0) - 0.5;
    let lambda_unit = k.powf(-1.0 / gamma);
    let amplitude = (0.5 * p * lambda_unit).powf(1.0 / (p - 2.0));
    let width = 0.5 * (p - 2.0) * lambda_unit.sqrt();
    let mut c = TheoryConstants { p, alpha, beta, theta: 0.0, amplitude, width, lambda_unit };
    c.theta = -c.soliton_energy_by_quadrature(1.0);

    let scaling = (2.0 * alpha - beta - 1.0).abs();
    if scaling > 1e-14 {
        return Err(Error::SelfCheckFailed { check: "2 alpha - beta = 1", value: scaling });
    }
    if !(c.theta > 0.0) {
        return Err(Error::SelfCheckFailed { check: "theta > 0", value: c.theta });
    }
    let probe = 3.0;
    let res = c.ode_residual(probe);
    if !(res < ODE_RESIDUAL_TOL) {
        return Err(Error::SelfCheckFailed { check: "soliton ODE residual", value: res });
    }
    let mass_err = (c.soliton_mass_by_quadrature(probe) / probe - 1.0).abs();
    if !(mass_err < ENERGY_IDENTITY_TOL) {
        return Err(Error::SelfCheckFailed { check: "soliton mass", value: mass_err });
    }
    let e = c.soliton_energy_by_quadrature(probe);
    let target = c.ground_energy_levels(probe).line;
    let rel = (e / target - 1.0).abs();
    if !(rel < ENERGY_IDENTITY_TOL) {
        return Err(Error::SelfCheckFailed { check: "energy identity", value: rel });
    }
    Ok(c)
}
