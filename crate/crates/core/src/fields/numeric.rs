//! Central-difference derivatives with one level of Richardson extrapolation.
//!
//! First derivatives use the step `1e-5 * (1 + |r|)`, second derivatives
//! `1e-3 * (1 + |r|)`. Near a singularity both shrink to a hundredth of the
//! distance to it.

use crate::error::Result;
use crate::fields::Jacobian;
use crate::model::{ComplexVector, C64};

pub const FIRST_STEP: f64 = 1e-5;
pub const SECOND_STEP: f64 = 1e-3;

/// Steps are also capped at this fraction of the distance to the nearest
/// singularity, where derivatives grow like inverse powers of that distance.
pub const CLEARANCE_FRACTION: f64 = 0.01;

/// Absolute steps used at one evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Steps {
    pub first: f64,
    pub second: f64,
}

impl Steps {
    pub fn at(r: &ComplexVector, clearance: Option<f64>) -> Self {
        let scale = 1.0 + r.norm();
        let cap = clearance.map_or(f64::INFINITY, |d| CLEARANCE_FRACTION * d);
        Steps { first: (FIRST_STEP * scale).min(cap), second: (SECOND_STEP * scale).min(cap) }
    }

    /// The wider step for both orders, for functions that are themselves
    /// numeric derivatives and carry extra roundoff.
    pub fn widened(self) -> Self {
        Steps { first: self.second, second: self.second }
    }
}

fn shifted(r: &ComplexVector, axis: usize, h: f64) -> ComplexVector {
    let mut s = *r;
    s[axis] += C64::new(h, 0.0);
    s
}

/// `d f / d x_axis` for a vector-valued `f` with absolute step `h`.
pub fn partial_with<F>(f: F, r: &ComplexVector, axis: usize, h: f64) -> Result<ComplexVector>
where
    F: Fn(&ComplexVector) -> Result<ComplexVector>,
{
    let central = |h: f64| -> Result<ComplexVector> {
        Ok((f(&shifted(r, axis, h))? - f(&shifted(r, axis, -h))?) * (0.5 / h))
    };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    Ok((fine * 4.0 - coarse) * (1.0 / 3.0))
}

/// `d^2 f / d x_axis^2` for a vector-valued `f` with absolute step `h`.
pub fn second_partial_with<F>(f: F, r: &ComplexVector, axis: usize, h: f64) -> Result<ComplexVector>
where
    F: Fn(&ComplexVector) -> Result<ComplexVector>,
{
    let center = f(r)?;
    let stencil = |h: f64| -> Result<ComplexVector> {
        Ok((f(&shifted(r, axis, h))? + f(&shifted(r, axis, -h))? - center * 2.0) * (1.0 / (h * h)))
    };
    let coarse = stencil(h)?;
    let fine = stencil(0.5 * h)?;
    Ok((fine * 4.0 - coarse) * (1.0 / 3.0))
}

pub fn partial<F>(f: F, r: &ComplexVector, axis: usize) -> Result<ComplexVector>
where
    F: Fn(&ComplexVector) -> Result<ComplexVector>,
{
    partial_with(f, r, axis, Steps::at(r, None).first)
}

pub fn second_partial<F>(f: F, r: &ComplexVector, axis: usize) -> Result<ComplexVector>
where
    F: Fn(&ComplexVector) -> Result<ComplexVector>,
{
    second_partial_with(f, r, axis, Steps::at(r, None).second)
}

pub fn jacobian_with<F>(f: F, r: &ComplexVector, steps: Steps) -> Result<Jacobian>
where
    F: Fn(&ComplexVector) -> Result<ComplexVector>,
{
    let d = r.dim();
    let mut j = Jacobian::zeros(d);
    for k in 0..d {
        let col = partial_with(&f, r, k, steps.first)?;
        for i in 0..d {
            j.set(i, k, col[i]);
        }
    }
    Ok(j)
}

pub fn jacobian<F>(f: F, r: &ComplexVector) -> Result<Jacobian>
where
    F: Fn(&ComplexVector) -> Result<ComplexVector>,
{
    jacobian_with(f, r, Steps::at(r, None))
}

/// Componentwise Laplacian `sum_k d^2 f / d x_k^2`.
pub fn vector_laplacian_with<F>(f: F, r: &ComplexVector, steps: Steps) -> Result<ComplexVector>
where
    F: Fn(&ComplexVector) -> Result<ComplexVector>,
{
    let mut acc = ComplexVector::zeros(r.dim());
    for k in 0..r.dim() {
        acc += second_partial_with(&f, r, k, steps.second)?;
    }
    Ok(acc)
}

pub fn vector_laplacian<F>(f: F, r: &ComplexVector) -> Result<ComplexVector>
where
    F: Fn(&ComplexVector) -> Result<ComplexVector>,
{
    vector_laplacian_with(f, r, Steps::at(r, None))
}

/// Gradient of a scalar function.
pub fn gradient_with<F>(f: F, r: &ComplexVector, steps: Steps) -> Result<ComplexVector>
where
    F: Fn(&ComplexVector) -> Result<C64>,
{
    let mut g = ComplexVector::zeros(r.dim());
    for k in 0..r.dim() {
        g[k] = partial_with(|x| f(x).map(ComplexVector::scalar), r, k, steps.first)?[0];
    }
    Ok(g)
}

pub fn gradient<F>(f: F, r: &ComplexVector) -> Result<ComplexVector>
where
    F: Fn(&ComplexVector) -> Result<C64>,
{
    gradient_with(f, r, Steps::at(r, None))
}

/// Derivative of a scalar function of one real variable.
pub fn derivative(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = FIRST_STEP * (1.0 + x.abs());
    let central = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * central(0.5 * h) - central(h)) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partials_of_polynomial() {
        // f = (x^3 y, x + y^2)
        let f = |r: &ComplexVector| -> Result<ComplexVector> {
            let (x, y) = (r[0], r[1]);
            Ok(ComplexVector::from_slice(&[x * x * x * y, x + y * y]))
        };
        let r = ComplexVector::from_real(&[1.3, -0.7]);
        let j = jacobian(f, &r).unwrap();
        let (x, y) = (1.3f64, -0.7f64);
        assert!((j.get(0, 0).re - 3.0 * x * x * y).abs() < 1e-9);
        assert!((j.get(0, 1).re - x.powi(3)).abs() < 1e-9);
        assert!((j.get(1, 0).re - 1.0).abs() < 1e-9);
        assert!((j.get(1, 1).re - 2.0 * y).abs() < 1e-9);
        let lap = vector_laplacian(f, &r).unwrap();
        assert!((lap[0].re - 6.0 * x * y).abs() < 1e-8);
        assert!((lap[1].re - 2.0).abs() < 1e-8);
    }

    #[test]
    fn scalar_derivative_of_sine() {
        assert!((derivative(f64::sin, 0.4) - 0.4f64.cos()).abs() < 1e-10);
    }
}
