//! Single-particle dynamics: force law, flow law, trajectories.
//!
//! The force is `F = -grad U + i (hbar / 2m) lap p`. Trajectories follow the
//! flow `dr/dt = p(r) / m` with the momentum slaved to the field; for a
//! stationary field the force law then holds along the flow, which
//! [`stationarity_residual`] checks pointwise.

mod analytic;
mod evolve;
mod fixed_points;
pub mod ode;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fields::MomentumField;
use crate::model::{ComplexVector, UnitSystem, I};
use crate::potential::PotentialField;

pub use analytic::{qho_analytic_u, qho_analytic_x, qho_analytic_x_guarded};
pub use evolve::{
    evolve, evolve_coupled, evolve_partial, IntegratorConfig, Scheme, Termination, TerminationReason, Trajectory,
};
pub use fixed_points::{classify_fixed_points, FixedPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub t: f64,
    pub position: ComplexVector,
    pub momentum: ComplexVector,
}

pub fn force_at(
    field: &dyn MomentumField,
    potential: &dyn PotentialField,
    r: &ComplexVector,
    units: &UnitSystem,
) -> Result<ComplexVector> {
    let lap = field.vector_laplacian(r)?;
    Ok(-potential.gradient(r) + lap * (I * (units.hbar / (2.0 * units.mass))))
}

/// `(p / m) . grad p - F`: the convective rate of change of the slaved momentum
/// minus the force. Zero certifies that the flow law and the force law agree.
pub fn stationarity_residual(
    field: &dyn MomentumField,
    potential: &dyn PotentialField,
    r: &ComplexVector,
    units: &UnitSystem,
) -> Result<ComplexVector> {
    let p = field.momentum(r)?;
    let convective = field.jacobian(r)?.directional(&p) * (1.0 / units.mass);
    Ok(convective - force_at(field, potential, r, units)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{ConstantField, QhoField};
    use crate::model::C64;
    use crate::potential::PolynomialPotential;

    fn x(v: f64) -> ComplexVector {
        ComplexVector::real_scalar(v)
    }

    #[test]
    fn oscillator_force_values() {
        let units = UnitSystem::natural();
        let f = QhoField::new(1, units).unwrap();
        let u = PolynomialPotential::harmonic(&units);
        assert!(force_at(&f, &u, &x(1.0), &units).unwrap()[0].norm() < 1e-15);
        let f2 = force_at(&f, &u, &x(2.0), &units).unwrap()[0];
        assert!((f2 - C64::new(-1.875, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn free_particle_has_no_force() {
        let units = UnitSystem::natural();
        let f = ConstantField::new(ComplexVector::real_scalar(0.7));
        let u = PolynomialPotential::zero();
        assert_eq!(force_at(&f, &u, &x(3.0), &units).unwrap()[0], C64::new(0.0, 0.0));
        assert_eq!(stationarity_residual(&f, &u, &x(3.0), &units).unwrap()[0], C64::new(0.0, 0.0));
    }

    #[test]
    fn residual_vanishes_only_for_matching_potential() {
        let units = UnitSystem::natural();
        let f = QhoField::new(1, units).unwrap();
        let good = stationarity_residual(&f, &PolynomialPotential::harmonic(&units), &x(2.0), &units).unwrap();
        assert!(good.norm() < 1e-14);
        let quartic = PolynomialPotential::new(vec![0.0, 0.0, 0.0, 0.0, 0.25]);
        let bad = stationarity_residual(&f, &quartic, &x(2.0), &units).unwrap();
        assert!(bad.norm() > 1.0);
    }
}
