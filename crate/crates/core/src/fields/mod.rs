//! Momentum fields `p(r) = -i hbar grad(psi) / psi` and their derivatives.
//!
//! A field is evaluated at complex positions. Implementors provide raw
//! evaluators; the provided methods on [`MomentumField`] add the guard checks
//! (dimension, distance to known nodes, real-axis restriction for fields that
//! are not holomorphic) so callers always go through one gate.

mod analytic;
mod grid;
pub mod numeric;
mod qho;
mod wavefunction;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ComplexVector, C64};

pub use analytic::{ConstantField, FieldSum, LinearField, SeparableField};
pub use grid::GridField;
pub use qho::{hermite, QhoField, MAX_QHO_LEVEL};
pub use wavefunction::{field_from_wavefunction, WavefunctionField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeKind {
    ClosedForm,
    NumericCentralDifference,
}

/// A pole of the field: the hyperplane `r[axis] == at`.
///
/// Separable states have nodes on coordinate planes, and 1D states on points,
/// so a plane per node covers every field shipped here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub axis: usize,
    pub at: f64,
}

impl Singularity {
    pub fn point(at: f64) -> Self {
        Singularity { axis: 0, at }
    }

    pub fn distance(&self, r: &ComplexVector) -> f64 {
        (r[self.axis] - self.at).norm()
    }
}

/// `entries[i][k] = d p_i / d x_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobian {
    dim: usize,
    entries: [[C64; 3]; 3],
}

impl Jacobian {
    pub fn zeros(dim: usize) -> Self {
        Jacobian { dim, entries: [[C64::new(0.0, 0.0); 3]; 3] }
    }

    pub fn diagonal(d: &ComplexVector) -> Self {
        let mut j = Self::zeros(d.dim());
        for k in 0..d.dim() {
            j.entries[k][k] = d[k];
        }
        j
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, k: usize) -> C64 {
        self.entries[i][k]
    }

    pub fn set(&mut self, i: usize, k: usize, v: C64) {
        self.entries[i][k] = v;
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self.entries[k][k]).sum()
    }

    /// Column `k`, i.e. `d p / d x_k`.
    pub fn column(&self, k: usize) -> ComplexVector {
        let col: Vec<C64> = (0..self.dim).map(|i| self.entries[i][k]).collect();
        ComplexVector::from_slice(&col)
    }

    /// `(v . grad) p`, i.e. `sum_k v_k dp/dx_k`.
    pub fn directional(&self, v: &ComplexVector) -> ComplexVector {
        let out: Vec<C64> = (0..self.dim)
            .map(|i| (0..self.dim).map(|k| self.entries[i][k] * v[k]).sum())
            .collect();
        ComplexVector::from_slice(&out)
    }

    /// Curl as a three-vector; a 2D field gets `(0, 0, dp_y/dx - dp_x/dy)`.
    pub fn curl(&self) -> Result<ComplexVector> {
        let e = &self.entries;
        match self.dim {
            1 => Err(Error::DimensionTooLow(1)),
            2 => Ok(ComplexVector::from_slice(&[C64::new(0.0, 0.0), C64::new(0.0, 0.0), e[1][0] - e[0][1]])),
            _ => Ok(ComplexVector::from_slice(&[e[2][1] - e[1][2], e[0][2] - e[2][0], e[1][0] - e[0][1]])),
        }
    }

    pub fn max_abs_diff(&self, other: &Jacobian) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.dim {
            for k in 0..self.dim {
                m = m.max((self.entries[i][k] - other.entries[i][k]).norm());
            }
        }
        m
    }
}

impl std::ops::Add for Jacobian {
    type Output = Jacobian;
    fn add(mut self, rhs: Jacobian) -> Jacobian {
        for i in 0..3 {
            for k in 0..3 {
                self.entries[i][k] += rhs.entries[i][k];
            }
        }
        self
    }
}

pub trait MomentumField: Send + Sync {
    fn dim(&self) -> usize;

    fn derivative_kind(&self) -> DerivativeKind;

    fn singularities(&self) -> &[Singularity];

    fn node_guard(&self) -> f64;

    /// Closed-form fields are analytic in each coordinate and may be evaluated
    /// at complex positions.
    fn is_holomorphic(&self) -> bool;

    /// Evaluates `p(r)` without guard checks.
    fn momentum_raw(&self, r: &ComplexVector) -> Result<ComplexVector>;

    fn jacobian_raw(&self, r: &ComplexVector) -> Result<Jacobian> {
        numeric::jacobian_with(|x| self.momentum_raw(x), r, self.numeric_steps(r))
    }

    fn laplacian_raw(&self, r: &ComplexVector) -> Result<ComplexVector> {
        numeric::vector_laplacian_with(|x| self.momentum_raw(x), r, self.numeric_steps(r))
    }

    /// Finite-difference steps at `r`, shrunk near singularities.
    fn numeric_steps(&self, r: &ComplexVector) -> numeric::Steps {
        numeric::Steps::at(r, self.distance_to_singularity(r))
    }

    /// Smallest distance from `r` to a known singularity.
    fn distance_to_singularity(&self, r: &ComplexVector) -> Option<f64> {
        self.singularities().iter().map(|s| s.distance(r)).min_by(|a, b| a.total_cmp(b))
    }

    fn check(&self, r: &ComplexVector) -> Result<()> {
        if r.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: r.dim() });
        }
        if !self.is_holomorphic() && r.max_imag() > 0.0 {
            return Err(Error::OffAxisEvaluation(r.max_imag()));
        }
        let guard = self.node_guard();
        for s in self.singularities() {
            let d = s.distance(r);
            if d < guard {
                return Err(Error::NodeEvaluation { axis: s.axis, node: s.at, distance: d });
            }
        }
        Ok(())
    }

    fn momentum(&self, r: &ComplexVector) -> Result<ComplexVector> {
        self.check(r)?;
        self.momentum_raw(r)
    }

    fn jacobian(&self, r: &ComplexVector) -> Result<Jacobian> {
        self.check(r)?;
        self.jacobian_raw(r)
    }

    fn vector_laplacian(&self, r: &ComplexVector) -> Result<ComplexVector> {
        self.check(r)?;
        self.laplacian_raw(r)
    }

    fn divergence(&self, r: &ComplexVector) -> Result<C64> {
        Ok(self.jacobian(r)?.trace())
    }

    fn curl(&self, r: &ComplexVector) -> Result<ComplexVector> {
        if self.dim() < 2 {
            return Err(Error::DimensionTooLow(self.dim()));
        }
        self.jacobian(r)?.curl()
    }
}
