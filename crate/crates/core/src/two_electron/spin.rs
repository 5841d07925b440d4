use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use super::InvariantSeries;
use crate::error::{Error, Result};
use crate::model::{UnitSystem, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// `[[cos, -sin], [sin, cos]]`
    Plus,
    /// `[[cos, sin], [-sin, cos]]`
    Minus,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::Plus => 1.0,
            Orientation::Minus => -1.0,
        }
    }
}

/// Per-component spin momentum `p0_k R(±αt)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationMomentum {
    pub p0: Vec<f64>,
    pub alpha: f64,
    pub orientation: Orientation,
}

fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

fn generator() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

impl RotationMomentum {
    fn angle(&self, t: f64) -> f64 {
        self.orientation.sign() * self.alpha * t
    }

    pub fn derivative(&self, component: usize, t: f64) -> Matrix2<f64> {
        generator() * spin_rotation_momentum(self, component, t) * (self.orientation.sign() * self.alpha)
    }
}

pub fn spin_rotation_momentum(rm: &RotationMomentum, component: usize, t: f64) -> Matrix2<f64> {
    rotation(rm.angle(t)) * rm.p0[component]
}

/// Frobenius norm of `(ħ/2) Σ_k (p1k⁻¹ dp1k/dt + p2k⁻¹ dp2k/dt)` at each
/// time. The inverse multiplies from the left.
pub fn matrix_delta_e(
    first: &RotationMomentum,
    second: &RotationMomentum,
    times: &[f64],
    units: &UnitSystem,
) -> Result<InvariantSeries> {
    if first.p0.len() != second.p0.len() {
        return Err(Error::DimensionMismatch { expected: first.p0.len(), got: second.p0.len() });
    }
    if let Some(component) =
        first.p0.iter().zip(&second.p0).position(|(a, b)| *a == 0.0 || *b == 0.0 || !a.is_finite() || !b.is_finite())
    {
        return Err(Error::SingularMomentumMatrix { component });
    }
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        let mut sum = Matrix2::zeros();
        for k in 0..first.p0.len() {
            for rm in [first, second] {
                let inv = spin_rotation_momentum(rm, k, t)
                    .try_inverse()
                    .ok_or(Error::SingularMomentumMatrix { component: k })?;
                sum += inv * rm.derivative(k, t);
            }
        }
        values.push(C64::new((sum * (units.hbar / 2.0)).norm(), 0.0));
    }
    Ok(InvariantSeries::new("matrix_delta_e", times.to_vec(), values))
}

/// Largest entry of `p1k p2k / (p1k⁰ p2k⁰) - I` over components and times.
pub fn paired_product_deviation(first: &RotationMomentum, second: &RotationMomentum, times: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for &t in times {
        for k in 0..first.p0.len().min(second.p0.len()) {
            let prod = spin_rotation_momentum(first, k, t) * spin_rotation_momentum(second, k, t)
                / (first.p0[k] * second.p0[k]);
            worst = worst.max((prod - Matrix2::identity()).abs().max());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn rm(alpha: f64, orientation: Orientation) -> RotationMomentum {
        RotationMomentum { p0: vec![1.5, -0.7, 2.0], alpha, orientation }
    }

    #[test]
    fn quarter_turn_and_determinant() {
        let r = rm(1.0, Orientation::Plus);
        let m = spin_rotation_momentum(&r, 0, 0.0);
        assert_eq!(m, Matrix2::identity() * 1.5);
        let m = spin_rotation_momentum(&r, 0, FRAC_PI_2);
        assert!((m - Matrix2::new(0.0, -1.5, 1.5, 0.0)).abs().max() < 1e-15);
        let m = spin_rotation_momentum(&rm(1.0, Orientation::Minus), 0, FRAC_PI_2);
        assert!((m - Matrix2::new(0.0, 1.5, -1.5, 0.0)).abs().max() < 1e-15);
        for t in [0.3, 1.7, 9.0] {
            let m = spin_rotation_momentum(&r, 1, t);
            assert!((m.determinant() / (0.7 * 0.7) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_difference() {
        let r = rm(1.3, Orientation::Minus);
        let h = 1e-6;
        let fd = (spin_rotation_momentum(&r, 2, 0.4 + h) - spin_rotation_momentum(&r, 2, 0.4 - h)) / (2.0 * h);
        assert!((fd - r.derivative(2, 0.4)).abs().max() < 1e-8);
    }

    #[test]
    fn same_orientation_does_not_cancel() {
        let alpha = 0.9;
        let times: Vec<f64> = (0..50).map(|j| j as f64 * 0.1).collect();
        let s = matrix_delta_e(&rm(alpha, Orientation::Plus), &rm(alpha, Orientation::Plus), &times, &UnitSystem::natural())
            .unwrap();
        let expected = 2.0 * 3.0 * 0.5 * alpha * SQRT_2;
        assert!((s.mean.re - expected).abs() < 1e-12 && s.max_drift < 1e-12);
        let zero = matrix_delta_e(&rm(0.0, Orientation::Plus), &rm(0.0, Orientation::Plus), &times, &UnitSystem::natural())
            .unwrap();
        assert_eq!(zero.max_abs, 0.0);
    }

    #[test]
    fn zero_amplitude_is_singular() {
        let mut a = rm(1.0, Orientation::Plus);
        a.p0[1] = 0.0;
        assert!(matches!(
            matrix_delta_e(&a, &rm(1.0, Orientation::Minus), &[0.0], &UnitSystem::natural()),
            Err(Error::SingularMomentumMatrix { component: 1 })
        ));
    }
}
