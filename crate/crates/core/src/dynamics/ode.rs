//! Explicit Runge-Kutta steppers over complex states.

use crate::error::Result;
use crate::model::ComplexVector;

/// State vector of an ODE `dy/dt = f(t, y)`.
pub trait OdeState: Copy {
    /// `self + sum_i c_i k_i`.
    fn combine(&self, terms: &[(f64, &Self)]) -> Self;

    /// Largest component magnitude.
    fn max_abs(&self) -> f64;

    /// Largest componentwise magnitude of `self - other`.
    fn max_diff(&self, other: &Self) -> f64;
}

impl OdeState for ComplexVector {
    fn combine(&self, terms: &[(f64, &Self)]) -> Self {
        let mut out = *self;
        for &(c, k) in terms {
            if c != 0.0 {
                out += *k * c;
            }
        }
        out
    }

    fn max_abs(&self) -> f64 {
        self.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn max_diff(&self, other: &Self) -> f64 {
        self.iter().zip(other.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Position and momentum integrated side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub position: ComplexVector,
    pub momentum: ComplexVector,
}

impl OdeState for PhaseState {
    fn combine(&self, terms: &[(f64, &Self)]) -> Self {
        let mut out = *self;
        for &(c, k) in terms {
            if c != 0.0 {
                out.position += k.position * c;
                out.momentum += k.momentum * c;
            }
        }
        out
    }

    fn max_abs(&self) -> f64 {
        self.position.max_abs().max(self.momentum.max_abs())
    }

    fn max_diff(&self, other: &Self) -> f64 {
        self.position.max_diff(&other.position).max(self.momentum.max_diff(&other.momentum))
    }
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step<S, F>(f: &F, t: f64, y: &S, h: f64) -> Result<S>
where
    S: OdeState,
    F: Fn(f64, &S) -> Result<S>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &y.combine(&[(0.5 * h, &k1)]))?;
    let k3 = f(t + 0.5 * h, &y.combine(&[(0.5 * h, &k2)]))?;
    let k4 = f(t + h, &y.combine(&[(h, &k3)]))?;
    Ok(y.combine(&[(h / 6.0, &k1), (h / 3.0, &k2), (h / 3.0, &k3), (h / 6.0, &k4)]))
}

// Runge-Kutta-Fehlberg 4(5) tableau.
const C: [f64; 6] = [0.0, 0.25, 0.375, 12.0 / 13.0, 1.0, 0.5];
const A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [0.25, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];
const B4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -0.2, 0.0];
const B5: [f64; 6] = [16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0];

/// One Fehlberg step. Returns the fifth-order solution (local extrapolation)
/// and the scaled error `max |y5 - y4| / (abs_tol + rel_tol * |y|)`.
pub fn rkf45_step<S, F>(f: &F, t: f64, y: &S, h: f64, abs_tol: f64, rel_tol: f64) -> Result<(S, f64)>
where
    S: OdeState,
    F: Fn(f64, &S) -> Result<S>,
{
    let mut k: Vec<S> = Vec::with_capacity(6);
    for stage in 0..6 {
        let terms: Vec<(f64, &S)> = (0..stage).map(|j| (h * A[stage][j], &k[j])).collect();
        let ys = y.combine(&terms);
        k.push(f(t + C[stage] * h, &ys)?);
    }
    let t5: Vec<(f64, &S)> = (0..6).map(|j| (h * B5[j], &k[j])).collect();
    let t4: Vec<(f64, &S)> = (0..6).map(|j| (h * B4[j], &k[j])).collect();
    let y5 = y.combine(&t5);
    let y4 = y.combine(&t4);
    let scale = abs_tol + rel_tol * y.max_abs().max(y5.max_abs());
    Ok((y5, y5.max_diff(&y4) / scale))
}
