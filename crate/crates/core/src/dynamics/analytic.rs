//! Closed-form oscillator trajectory for the first excited state.
//!
//! Along the flow `dx/dt = -i (hbar/m) (1/x - m omega x / hbar)` the square
//! `u = x^2` obeys a linear equation with solution
//!
//! ```text
//! u(t) = a - (a - x0^2) exp(2 i omega t),   a = hbar / (m omega)
//! ```
//!
//! a circle of radius `|a - x0^2|` about `a`, traversed counterclockwise with
//! period `pi / omega`. `x(t)` is the square root continued from `x0`: when the
//! circle encloses the origin each lap flips the sign of the root.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::model::{TolerancePolicy, UnitSystem, C64};

pub fn qho_analytic_u(x0: C64, t: f64, units: &UnitSystem) -> C64 {
    let a = units.oscillator_length().powi(2);
    let b = C64::new(a, 0.0) - x0 * x0;
    a - b * C64::from_polar(1.0, 2.0 * units.omega * t)
}

pub fn qho_analytic_x(x0: C64, t: f64, units: &UnitSystem) -> Result<C64> {
    qho_analytic_x_guarded(x0, t, units, TolerancePolicy::default().node_guard)
}

/// Branch-continued `x(t)`; fails with `BranchAmbiguity` when `u` comes within
/// `node_guard^2` of zero on `[0, t]`.
pub fn qho_analytic_x_guarded(x0: C64, t: f64, units: &UnitSystem, node_guard: f64) -> Result<C64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("t must be >= 0, got {t}")));
    }
    let a = units.oscillator_length().powi(2);
    let b = C64::new(a, 0.0) - x0 * x0;
    let w = units.omega;
    let u0 = x0 * x0;
    let ut = qho_analytic_u(x0, t, units);
    let guard2 = node_guard * node_guard;

    let radius = b.norm();
    if radius == 0.0 {
        return Ok(x0);
    }
    // closest approach to 0 happens where b exp(2 i omega s) is real positive
    let s_star = (-b.arg()).rem_euclid(TAU) / (2.0 * w);
    let min_abs = if s_star <= t { (a - radius).abs() } else { u0.norm().min(ut.norm()) };
    if min_abs < guard2 {
        return Err(Error::BranchAmbiguity { min_abs });
    }

    // continuous change of arg u over [0, t], with psi = arg b + 2 omega s:
    //   enclosing:      u = |b| e^{i(psi + pi)} (1 - q e^{-i psi}),  q = a/|b| < 1
    //   not enclosing:  u = a (1 - q e^{i psi}),                     q = |b|/a <= 1
    // the bracketed factors have positive real part, so their principal args
    // are continuous
    let psi0 = b.arg();
    let psit = psi0 + 2.0 * w * t;
    let one = C64::new(1.0, 0.0);
    let turn = if radius > a {
        let q = a / radius;
        2.0 * w * t + (one - C64::from_polar(q, -psit)).arg() - (one - C64::from_polar(q, -psi0)).arg()
    } else {
        let q = radius / a;
        (one - C64::from_polar(q, psit)).arg() - (one - C64::from_polar(q, psi0)).arg()
    };
    Ok(x0 * (ut.norm() / u0.norm()).sqrt() * C64::from_polar(1.0, 0.5 * turn))
}
