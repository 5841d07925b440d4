//! Wavefunction reconstruction `psi(r) = A exp((i / hbar) int p . dr)` along a
//! piecewise-straight path.
//!
//! Each segment is integrated with composite 8-point Gauss-Legendre, halving
//! panels until two successive estimates agree to 1e-12 relative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{GridField, MomentumField};
use crate::model::{ComplexVector, UnitSystem, C64, I};

/// Abscissae and weights of the 8-point Gauss-Legendre rule on [-1, 1]
/// (positive half; the rule is symmetric).
const GL8: [(f64, f64); 4] = [
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

const REL_TOL: f64 = 1e-12;
const MAX_HALVINGS: u32 = 16;

/// Composite 8-point Gauss-Legendre rule of `f` over `[a, b]` with `panels`
/// equal panels.
pub fn gauss_legendre<T, F>(f: &F, a: f64, b: f64, panels: usize) -> Result<T>
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    F: Fn(f64) -> Result<T>,
{
    let width = (b - a) / panels as f64;
    let mut acc = T::default();
    for j in 0..panels {
        let mid = a + (j as f64 + 0.5) * width;
        let half = 0.5 * width;
        for &(x, w) in &GL8 {
            acc = acc + f(mid - half * x)? * (w * half) + f(mid + half * x)? * (w * half);
        }
    }
    Ok(acc)
}

/// Adaptive-by-halving complex integral over `[0, 1]`.
fn integrate_unit(f: impl Fn(f64) -> Result<C64>) -> Result<C64> {
    let mut panels = 1;
    let mut prev = gauss_legendre(&f, 0.0, 1.0, panels)?;
    for _ in 0..MAX_HALVINGS {
        panels *= 2;
        let next = gauss_legendre(&f, 0.0, 1.0, panels)?;
        let diff = (next - prev).norm();
        if diff <= REL_TOL * next.norm() || diff <= 1e-15 {
            return Ok(next);
        }
        prev = next;
    }
    log::warn!("line integral not converged after {MAX_HALVINGS} halvings");
    Ok(prev)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefunctionSamples {
    pub nodes: Vec<ComplexVector>,
    pub values: Vec<C64>,
    /// Accumulated `int p . dr` from the first node.
    pub phase_integral: Vec<C64>,
    pub normalization: C64,
}

impl WavefunctionSamples {
    /// `psi(node_j) / psi(node_0)`.
    pub fn ratio(&self, j: usize) -> C64 {
        self.values[j] / self.values[0]
    }

    /// Rebuilds a momentum field from the samples. The path must be real,
    /// one-dimensional and uniformly spaced.
    pub fn to_field(&self, units: UnitSystem) -> Result<GridField> {
        if self.nodes.iter().any(|n| n.dim() != 1 || n.max_imag() > 0.0) {
            return Err(Error::InvalidParameter("need a real 1D path".into()));
        }
        if self.nodes.len() < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: self.nodes.len() });
        }
        let xs: Vec<f64> = self.nodes.iter().map(|n| n[0].re).collect();
        let h = xs[1] - xs[0];
        for (j, w) in xs.windows(2).enumerate() {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs() {
                return Err(Error::NonuniformSampling { index: j + 1 });
            }
        }
        if h > 0.0 {
            GridField::from_samples(xs[0], h, self.values.clone(), units)
        } else {
            let rev: Vec<C64> = self.values.iter().rev().copied().collect();
            GridField::from_samples(*xs.last().unwrap(), -h, rev, units)
        }
    }
}

/// Integrates the field along `path` and returns `psi` at each path node,
/// with `psi(path[0]) = normalization` (1 when `None`).
pub fn reconstruct_wavefunction(
    field: &dyn MomentumField,
    path: &[ComplexVector],
    normalization: Option<C64>,
    units: &UnitSystem,
) -> Result<WavefunctionSamples> {
    let a = normalization.unwrap_or(C64::new(1.0, 0.0));
    let Some(first) = path.first() else {
        return Err(Error::EmptyRegion);
    };
    field.check(first)?;
    let mut phase = C64::new(0.0, 0.0);
    let mut phases = vec![phase];
    for (seg, w) in path.windows(2).enumerate() {
        let (start, end) = (w[0], w[1]);
        let delta = end - start;
        for s in field.singularities() {
            let d = delta[s.axis];
            let offset = C64::new(s.at, 0.0) - start[s.axis];
            let t = if d.norm_sqr() > 0.0 { ((offset * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0) } else { 0.0 };
            if (start[s.axis] + d * t - s.at).norm() < field.node_guard() {
                return Err(Error::PathThroughNode { segment: seg, axis: s.axis, node: s.at });
            }
        }
        let integral = integrate_unit(|t| {
            let r = start + delta * t;
            Ok(field.momentum(&r)?.dot(&delta))
        })?;
        phase += integral;
        phases.push(phase);
    }
    let values = phases.iter().map(|&ph| a * (I * ph / units.hbar).exp()).collect();
    Ok(WavefunctionSamples { nodes: path.to_vec(), values, phase_integral: phases, normalization: a })
}

/// `count` evenly spaced real points from `a` to `b` inclusive.
pub fn straight_path(a: f64, b: f64, count: usize) -> Vec<ComplexVector> {
    if count == 1 {
        return vec![ComplexVector::real_scalar(a)];
    }
    let h = (b - a) / (count - 1) as f64;
    (0..count).map(|j| ComplexVector::real_scalar(a + j as f64 * h)).collect()
}
