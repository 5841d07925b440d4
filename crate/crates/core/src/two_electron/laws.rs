use serde::{Deserialize, Serialize};

use super::{InvariantSeries, MomentumHistory};
use crate::error::{Error, Result};
use crate::model::{ComplexVector, TolerancePolicy, UnitSystem, C64};

/// `|(p1 + p2)(t_j) - (p1 + p2)(t_0)|` at every sample.
pub fn total_momentum_drift(history: &MomentumHistory) -> InvariantSeries {
    let total0 = history.p1[0] + history.p2[0];
    let values = history
        .p1
        .iter()
        .zip(&history.p2)
        .map(|(a, b)| C64::new((*a + *b - total0).norm(), 0.0))
        .collect();
    InvariantSeries::new("total_momentum_drift", history.times(), values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceNormReport {
    pub series: InvariantSeries,
    /// The measured `<d|d>`, a third of the mean.
    pub dd: f64,
    pub exact_derivatives: bool,
}

/// `|dp1/dt|² + |dp2/dt|²` along the history.
pub fn force_norm_invariant(history: &MomentumHistory) -> ForceNormReport {
    let d1 = history.first_derivative(0);
    let d2 = history.first_derivative(1);
    let values = d1.iter().zip(&d2).map(|(a, b)| C64::new(a.norm_sqr() + b.norm_sqr(), 0.0)).collect();
    let series = InvariantSeries::new("force_norm", history.times(), values);
    let dd = series.mean.re / 3.0;
    ForceNormReport { series, dd, exact_derivatives: history.has_exact_derivatives() }
}

/// `p2k² d²p1k/dt² + p1k² d²p2k/dt²` for component `k`.
pub fn pair_acceleration_residual(history: &MomentumHistory, component: usize) -> Result<InvariantSeries> {
    if component >= history.dim() {
        return Err(Error::DimensionMismatch { expected: history.dim(), got: component + 1 });
    }
    let a1 = history.second_derivative(0);
    let a2 = history.second_derivative(1);
    let values = (0..history.len())
        .map(|j| {
            let (p1, p2) = (history.p1[j][component], history.p2[j][component]);
            p2 * p2 * a1[j][component] + p1 * p1 * a2[j][component]
        })
        .collect();
    Ok(InvariantSeries::new(format!("pair_acceleration_residual_{component}"), history.times(), values))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEnergy {
    pub total: C64,
    /// `E1 + E2 = -(p1² + p2²)/2m + U12`.
    pub pair: C64,
    /// `(ħ/2m)(div p1 + div p2)`, zero when `ħ` is switched off.
    pub divergence: C64,
    pub pure_imaginary: bool,
}

/// Energy of a bound pair. Momenta that are not pure imaginary are accepted
/// with a warning.
pub fn bound_energy(
    p1: &ComplexVector,
    p2: &ComplexVector,
    div1: C64,
    div2: C64,
    u12: C64,
    units: &UnitSystem,
    with_hbar: bool,
) -> BoundEnergy {
    let tol = TolerancePolicy::default().abs_tol;
    let pure_imaginary = p1.iter().chain(p2.iter()).all(|c| c.re.abs() <= tol);
    if !pure_imaginary {
        log::warn!("bound_energy: momenta are not pure imaginary");
    }
    let pair = -(p1.square() + p2.square()) / (2.0 * units.mass) + u12;
    let divergence = if with_hbar { (div1 + div2) * (units.hbar / (2.0 * units.mass)) } else { C64::new(0.0, 0.0) };
    BoundEnergy { total: pair + divergence, pair, divergence, pure_imaginary }
}

fn check_components(history: &MomentumHistory, guard: f64) -> Result<()> {
    for (electron, samples) in [&history.p1, &history.p2].iter().enumerate() {
        for (sample, p) in samples.iter().enumerate() {
            if let Some(component) = p.iter().position(|c| c.norm() < guard) {
                return Err(Error::ComponentNearZero { electron, component, sample });
            }
        }
    }
    Ok(())
}

/// `δE = (ħ/2) Σ_k (p1k'/p1k + p2k'/p2k)` along the history.
pub fn delta_e(history: &MomentumHistory, units: &UnitSystem) -> Result<InvariantSeries> {
    check_components(history, TolerancePolicy::default().node_guard)?;
    let d1 = history.first_derivative(0);
    let d2 = history.first_derivative(1);
    let values = (0..history.len())
        .map(|j| {
            let s: C64 = (0..history.dim())
                .map(|k| d1[j][k] / history.p1[j][k] + d2[j][k] / history.p2[j][k])
                .sum();
            s * (units.hbar / 2.0)
        })
        .collect();
    Ok(InvariantSeries::new("delta_e", history.times(), values))
}

/// `Π_k p1k p2k` along the history. Whether the constant is positive is
/// left to the caller via `mean`.
pub fn component_product(history: &MomentumHistory) -> Result<InvariantSeries> {
    check_components(history, TolerancePolicy::default().node_guard)?;
    let values = history
        .p1
        .iter()
        .zip(&history.p2)
        .map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| x * y).product())
        .collect();
    Ok(InvariantSeries::new("component_product", history.times(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::two_electron::{MomentumSource, SpinningPair};

    fn cv(v: &[f64]) -> ComplexVector {
        ComplexVector::from_real(v)
    }

    #[test]
    fn bound_energy_examples() {
        let u = UnitSystem::natural();
        let i = C64::new(0.0, 1.0);
        let e = bound_energy(
            &ComplexVector::scalar(i),
            &ComplexVector::scalar(2.0 * i),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            &u,
            true,
        );
        assert!((e.total - C64::new(2.5, 0.0)).norm() < 1e-15);
        assert!(e.pure_imaginary);
        let div = C64::new(0.4, 0.0);
        let on = bound_energy(&ComplexVector::scalar(i), &ComplexVector::scalar(i), div, div, C64::new(1.0, 0.0), &u, true);
        let off = bound_energy(&ComplexVector::scalar(i), &ComplexVector::scalar(i), div, div, C64::new(1.0, 0.0), &u, false);
        assert!((on.total - C64::new(2.4, 0.0)).norm() < 1e-15);
        assert_eq!(off.total, off.pair);
        assert_eq!(off.pair, on.pair);
        let real = bound_energy(&cv(&[1.0]), &cv(&[1.0]), div, div, C64::new(0.0, 0.0), &u, true);
        assert!(!real.pure_imaginary);
    }

    #[test]
    fn ramp_force_norm() {
        let a = 0.7;
        let p1: Vec<_> = (0..20).map(|j| cv(&[a * j as f64 * 0.1, 0.0])).collect();
        let p2 = vec![cv(&[1.0, 2.0]); 20];
        let h = MomentumHistory::uniform(0.0, 0.1, p1, p2).unwrap();
        let r = force_norm_invariant(&h);
        assert!((r.series.mean.re - a * a).abs() < 1e-12);
        assert!(r.series.max_drift < 1e-12);
    }

    #[test]
    fn phase_rotating_component() {
        // p1 = c e^{iβt}: contribution (ħ/2) iβ; p2 constant contributes 0
        struct Phase(f64);
        impl MomentumSource for Phase {
            fn momenta(&self, t: f64) -> (ComplexVector, ComplexVector) {
                (ComplexVector::scalar(C64::from_polar(1.5, self.0 * t)), ComplexVector::real_scalar(2.0))
            }
        }
        let beta = 0.8;
        let h = MomentumHistory::from_source(&Phase(beta), 0.0, 1e-3, 200).unwrap();
        let s = delta_e(&h, &UnitSystem::natural()).unwrap();
        assert!((s.mean - C64::new(0.0, 0.5 * beta)).norm() < 1e-9);
        assert!(s.max_drift < 1e-8);
    }

    #[test]
    fn near_zero_component_is_refused() {
        let pair = SpinningPair::centred(1.0, 1.0, 1.0).unwrap();
        // the y component passes through zero at t = 0
        let h = MomentumHistory::from_source(&pair, 0.0, 0.01, 10).unwrap();
        assert!(matches!(delta_e(&h, &UnitSystem::natural()), Err(Error::ComponentNearZero { component: 1, .. })));
    }
}
