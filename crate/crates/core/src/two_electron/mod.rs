//! Momentum histories of an electron pair and the invariants they should
//! obey: total-momentum conservation, the force-norm constant of motion,
//! the bound-state energy split, the energy difference `δE` and its
//! component-product condition, and rotation-matrix spin momenta.

mod laws;
mod spin;
pub mod stencil;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{num, write_csv, ReportHeader};
use crate::model::{ComplexVector, C64};

pub use laws::{
    bound_energy, component_product, delta_e, pair_acceleration_residual, force_norm_invariant, total_momentum_drift,
    BoundEnergy, ForceNormReport,
};
pub use spin::{matrix_delta_e, paired_product_deviation, spin_rotation_momentum, Orientation, RotationMomentum};

pub const MIN_SAMPLES: usize = 5;

/// Anything that can report both electrons' momenta at a time, optionally
/// with exact time derivatives.
pub trait MomentumSource {
    fn momenta(&self, t: f64) -> (ComplexVector, ComplexVector);

    fn first_derivatives(&self, _t: f64) -> Option<(ComplexVector, ComplexVector)> {
        None
    }

    fn second_derivatives(&self, _t: f64) -> Option<(ComplexVector, ComplexVector)> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ExactDerivatives {
    first: [Vec<ComplexVector>; 2],
    second: Option<[Vec<ComplexVector>; 2]>,
}

/// `p1(t_j)`, `p2(t_j)` on a uniform time grid `t_j = t0 + j dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumHistory {
    pub t0: f64,
    pub dt: f64,
    pub p1: Vec<ComplexVector>,
    pub p2: Vec<ComplexVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exact: Option<ExactDerivatives>,
}

impl MomentumHistory {
    pub fn uniform(t0: f64, dt: f64, p1: Vec<ComplexVector>, p2: Vec<ComplexVector>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter("history dt must be > 0".into()));
        }
        if p1.len() != p2.len() {
            return Err(Error::DimensionMismatch { expected: p1.len(), got: p2.len() });
        }
        if p1.len() < MIN_SAMPLES {
            return Err(Error::TooFewSamples { needed: MIN_SAMPLES, got: p1.len() });
        }
        let d = p1[0].dim();
        if let Some(bad) = p1.iter().chain(&p2).find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: bad.dim() });
        }
        Ok(MomentumHistory { t0, dt, p1, p2, exact: None })
    }

    /// From explicit sample times, which must be evenly spaced.
    pub fn from_samples(times: &[f64], p1: Vec<ComplexVector>, p2: Vec<ComplexVector>) -> Result<Self> {
        if times.len() != p1.len() {
            return Err(Error::DimensionMismatch { expected: p1.len(), got: times.len() });
        }
        if times.len() < MIN_SAMPLES {
            return Err(Error::TooFewSamples { needed: MIN_SAMPLES, got: times.len() });
        }
        let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        for (j, t) in times.iter().enumerate() {
            let expected = times[0] + j as f64 * dt;
            if (t - expected).abs() > 1e-9 * dt.abs().max(f64::MIN_POSITIVE) {
                return Err(Error::NonuniformSampling { index: j });
            }
        }
        Self::uniform(times[0], dt, p1, p2)
    }

    /// Samples `source` at `count` points, keeping any exact derivatives it
    /// provides.
    pub fn from_source(source: &dyn MomentumSource, t0: f64, dt: f64, count: usize) -> Result<Self> {
        let times: Vec<f64> = (0..count).map(|j| t0 + j as f64 * dt).collect();
        let (p1, p2) = times.iter().map(|&t| source.momenta(t)).unzip();
        let mut h = Self::uniform(t0, dt, p1, p2)?;
        let first: Option<(Vec<_>, Vec<_>)> =
            times.iter().map(|&t| source.first_derivatives(t)).collect::<Option<Vec<_>>>().map(|v| v.into_iter().unzip());
        if let Some((a, b)) = first {
            let second: Option<(Vec<_>, Vec<_>)> = times
                .iter()
                .map(|&t| source.second_derivatives(t))
                .collect::<Option<Vec<_>>>()
                .map(|v| v.into_iter().unzip());
            h.exact = Some(ExactDerivatives { first: [a, b], second: second.map(|(c, d)| [c, d]) });
        }
        Ok(h)
    }

    /// Drops exact derivatives so that stencils are used.
    pub fn without_exact_derivatives(mut self) -> Self {
        self.exact = None;
        self
    }

    pub fn has_exact_derivatives(&self) -> bool {
        self.exact.is_some()
    }

    pub fn len(&self) -> usize {
        self.p1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p1.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.p1[0].dim()
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.time(j)).collect()
    }

    fn samples(&self, electron: usize) -> &[ComplexVector] {
        if electron == 0 {
            &self.p1
        } else {
            &self.p2
        }
    }

    /// `dp/dt` for electron 0 or 1 at every sample.
    pub fn first_derivative(&self, electron: usize) -> Vec<ComplexVector> {
        match &self.exact {
            Some(e) => e.first[electron].clone(),
            None => stencil::differentiate(self.samples(electron), self.dt, stencil::first),
        }
    }

    /// `d²p/dt²` for electron 0 or 1 at every sample.
    pub fn second_derivative(&self, electron: usize) -> Vec<ComplexVector> {
        match self.exact.as_ref().and_then(|e| e.second.as_ref()) {
            Some(s) => s[electron].clone(),
            None => stencil::differentiate(self.samples(electron), self.dt, stencil::second),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinningPair {
    pub p1_0: ComplexVector,
    pub p2_0: ComplexVector,
    pub radius: f64,
    pub gamma: f64,
    pub mass: f64,
}

impl SpinningPair {
    pub fn new(p1_0: ComplexVector, p2_0: ComplexVector, radius: f64, gamma: f64, mass: f64) -> Result<Self> {
        if !(radius > 0.0 && gamma > 0.0 && mass > 0.0) {
            return Err(Error::InvalidParameter("radius, gamma and mass must be > 0".into()));
        }
        if p1_0.dim() < 2 || p1_0.dim() != p2_0.dim() {
            return Err(Error::DimensionMismatch { expected: 2, got: p1_0.dim().min(p2_0.dim()) });
        }
        Ok(SpinningPair { p1_0, p2_0, radius, gamma, mass })
    }

    /// Both electrons at rest offsets zero, in the plane.
    pub fn centred(radius: f64, gamma: f64, mass: f64) -> Result<Self> {
        let z = ComplexVector::zeros(2);
        Self::new(z, z, radius, gamma, mass)
    }

    fn circle(&self, scale: f64, f: impl Fn(f64) -> (f64, f64), t: f64) -> ComplexVector {
        let (a, b) = f(self.gamma * t);
        let mut v = ComplexVector::zeros(self.p1_0.dim());
        v[0] = C64::new(scale * a, 0.0);
        v[1] = C64::new(scale * b, 0.0);
        v
    }

    fn amplitude(&self) -> f64 {
        self.mass * self.radius * self.gamma
    }
}

/// `p1 = p1_0 + mRγ(-cos γt, -sin γt)`, `p2 = p2_0 + mRγ(cos γt, sin γt)`.
pub fn spinning_pair(pair: &SpinningPair, t: f64) -> (ComplexVector, ComplexVector) {
    pair.momenta(t)
}

impl MomentumSource for SpinningPair {
    fn momenta(&self, t: f64) -> (ComplexVector, ComplexVector) {
        let a = self.amplitude();
        let s = self.circle(a, |g| (g.cos(), g.sin()), t);
        (self.p1_0 - s, self.p2_0 + s)
    }

    fn first_derivatives(&self, t: f64) -> Option<(ComplexVector, ComplexVector)> {
        let s = self.circle(self.amplitude() * self.gamma, |g| (-g.sin(), g.cos()), t);
        Some((-s, s))
    }

    fn second_derivatives(&self, t: f64) -> Option<(ComplexVector, ComplexVector)> {
        let s = self.circle(self.amplitude() * self.gamma * self.gamma, |g| (-g.cos(), -g.sin()), t);
        Some((-s, s))
    }
}

/// A quantity sampled along a history. `max_drift` is `max |value - mean|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantSeries {
    pub name: String,
    pub t: Vec<f64>,
    pub values: Vec<C64>,
    pub mean: C64,
    pub max_drift: f64,
    pub max_abs: f64,
}

impl InvariantSeries {
    pub fn new(name: impl Into<String>, t: Vec<f64>, values: Vec<C64>) -> Self {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<C64>() / n;
        let max_drift = values.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max);
        let max_abs = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        InvariantSeries { name: name.into(), t, values, mean, max_drift, max_abs }
    }

    pub fn is_constant(&self, tol: f64) -> bool {
        self.max_drift < tol
    }

    pub fn verdict(&self, tol: f64) -> Verdict {
        Verdict { tolerance: tol, drift: self.max_drift, passed: self.is_constant(tol) }
    }

    pub fn write_csv<W: Write>(&self, out: W, header: Option<&ReportHeader>) -> Result<()> {
        let header = header
            .cloned()
            .unwrap_or_default()
            .with("series", &self.name)
            .with("mean", format!("{}{:+}i", self.mean.re, self.mean.im))
            .with("max_drift", self.max_drift);
        let columns = vec!["t".to_string(), "re(value)".to_string(), "im(value)".to_string()];
        let rows = self.t.iter().zip(&self.values).map(|(t, v)| vec![num(*t), num(v.re), num(v.im)]);
        write_csv(out, Some(&header), &columns, rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub tolerance: f64,
    pub drift: f64,
    pub passed: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spinning_pair_at_zero() {
        // mRγ = 2
        let pair = SpinningPair::centred(1.0, 2.0, 1.0).unwrap();
        let (p1, p2) = spinning_pair(&pair, 0.0);
        assert_eq!(p1, ComplexVector::from_real(&[-2.0, 0.0]));
        assert_eq!(p2, ComplexVector::from_real(&[2.0, 0.0]));
    }

    #[test]
    fn exact_derivatives_match_finite_differences() {
        let pair = SpinningPair::new(
            ComplexVector::from_real(&[0.3, -0.1]),
            ComplexVector::from_real(&[1.0, 0.5]),
            0.7,
            1.3,
            2.0,
        )
        .unwrap();
        let h = 1e-5;
        for &t in &[0.0, 0.4, 2.9] {
            let (a, _) = pair.momenta(t + h);
            let (b, _) = pair.momenta(t - h);
            let fd = (a - b) * (0.5 / h);
            let (d1, _) = pair.first_derivatives(t).unwrap();
            assert!((fd - d1).norm() < 1e-8);
            let (a, _) = pair.first_derivatives(t + h).unwrap();
            let (b, _) = pair.first_derivatives(t - h).unwrap();
            let (s1, _) = pair.second_derivatives(t).unwrap();
            assert!(((a - b) * (0.5 / h) - s1).norm() < 1e-8);
        }
    }

    #[test]
    fn history_validation() {
        let p = vec![ComplexVector::real_scalar(1.0); 4];
        assert!(matches!(
            MomentumHistory::uniform(0.0, 0.1, p.clone(), p.clone()),
            Err(Error::TooFewSamples { needed: 5, got: 4 })
        ));
        let p = vec![ComplexVector::real_scalar(1.0); 5];
        let times = [0.0, 0.1, 0.2, 0.35, 0.4];
        assert!(matches!(
            MomentumHistory::from_samples(&times, p.clone(), p.clone()),
            Err(Error::NonuniformSampling { index: 3 })
        ));
        let times = [0.0, 0.1, 0.2, 0.3, 0.4];
        let h = MomentumHistory::from_samples(&times, p.clone(), p).unwrap();
        assert!((h.dt - 0.1).abs() < 1e-15);
    }

    #[test]
    fn series_statistics() {
        let s = InvariantSeries::new("x", vec![0.0, 1.0, 2.0], vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(3.0, 0.0)]);
        assert_eq!(s.mean, C64::new(2.0, 0.0));
        assert_eq!(s.max_drift, 1.0);
        assert_eq!(s.max_abs, 3.0);
        assert!(!s.is_constant(1.0) && s.is_constant(1.01));
    }
}
