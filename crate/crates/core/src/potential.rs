//! External potentials `U(r)` with analytic gradients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ComplexVector, UnitSystem, C64};

pub trait PotentialField: Send + Sync {
    fn value(&self, r: &ComplexVector) -> C64;

    fn gradient(&self, r: &ComplexVector) -> ComplexVector;
}

/// Sum over coordinates of the same 1D polynomial,
/// `U(r) = sum_k sum_n c_n x_k^n`.
///
/// Covers the free particle, constant wells, the harmonic trap and quartic
/// anharmonic terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialPotential {
    /// Ascending coefficients `c_0, c_1, ...`.
    pub coefficients: Vec<f64>,
}

impl PolynomialPotential {
    pub fn new(coefficients: Vec<f64>) -> Self {
        PolynomialPotential { coefficients }
    }

    pub fn zero() -> Self {
        Self::new(vec![])
    }

    pub fn constant(u0: f64) -> Self {
        Self::new(vec![u0])
    }

    /// `m omega^2 x^2 / 2` per coordinate.
    pub fn harmonic(units: &UnitSystem) -> Self {
        Self::new(vec![0.0, 0.0, 0.5 * units.mass * units.omega * units.omega])
    }

    /// `m omega^2 x^2 / 2 + lambda x^4`.
    pub fn anharmonic(units: &UnitSystem, lambda: f64) -> Self {
        Self::new(vec![0.0, 0.0, 0.5 * units.mass * units.omega * units.omega, 0.0, lambda])
    }

    fn eval_1d(&self, x: C64) -> C64 {
        self.coefficients.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    fn deriv_1d(&self, x: C64) -> C64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, (n, &c)| acc * x + c * n as f64)
    }
}

impl PotentialField for PolynomialPotential {
    fn value(&self, r: &ComplexVector) -> C64 {
        let constant = self.coefficients.first().copied().unwrap_or(0.0);
        // the constant term counts once, not once per coordinate
        r.iter().map(|&x| self.eval_1d(x) - constant).sum::<C64>() + constant
    }

    fn gradient(&self, r: &ComplexVector) -> ComplexVector {
        r.map(|x| self.deriv_1d(x))
    }
}

/// Interaction energy `U_12(r_1, r_2)` between two electrons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairPotential {
    /// `strength / |r_1 - r_2|` with the bilinear distance, so it continues
    /// analytically to complex positions.
    Coulomb { strength: f64 },
    ConstantWell { value: f64 },
}

impl Default for PairPotential {
    fn default() -> Self {
        PairPotential::Coulomb { strength: 1.0 }
    }
}

impl PairPotential {
    pub fn value(&self, r1: &ComplexVector, r2: &ComplexVector) -> Result<C64> {
        match *self {
            PairPotential::Coulomb { strength } => {
                let d = (*r1 - *r2).square().sqrt();
                if d.norm() == 0.0 {
                    return Err(Error::InvalidParameter("coincident electrons".into()));
                }
                Ok(C64::new(strength, 0.0) / d)
            }
            PairPotential::ConstantWell { value } => Ok(C64::new(value, 0.0)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::numeric;

    #[test]
    fn harmonic_values() {
        let u = PolynomialPotential::harmonic(&UnitSystem::natural());
        assert_eq!(u.value(&ComplexVector::real_scalar(2.0)), C64::new(2.0, 0.0));
        let r = ComplexVector::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(u.value(&r), C64::new(7.0, 0.0));
        assert_eq!(PolynomialPotential::constant(3.0).value(&r), C64::new(3.0, 0.0));
        assert_eq!(PolynomialPotential::zero().value(&r), C64::new(0.0, 0.0));
    }

    #[test]
    fn gradient_matches_numeric() {
        let u = PolynomialPotential::anharmonic(&UnitSystem::new(1.0, 1.4, 0.8).unwrap(), 0.1);
        for x in [-2.1, -0.3, 0.7, 3.3] {
            let r = ComplexVector::from_real(&[x, 0.5 * x]);
            let g = u.gradient(&r);
            let gn = numeric::gradient(|y| Ok(u.value(y)), &r).unwrap();
            for k in 0..2 {
                assert!((g[k] - gn[k]).norm() <= 1e-6 * g[k].norm().max(1e-3));
            }
        }
    }

    #[test]
    fn coulomb_pair() {
        let p = PairPotential::Coulomb { strength: 2.0 };
        let a = ComplexVector::from_real(&[0.0, 0.0, 0.0]);
        let b = ComplexVector::from_real(&[3.0, 4.0, 0.0]);
        assert!((p.value(&a, &b).unwrap() - C64::new(0.4, 0.0)).norm() < 1e-15);
        assert!(p.value(&a, &a).is_err());
    }
}
