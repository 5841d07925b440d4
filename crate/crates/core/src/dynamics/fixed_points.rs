use serde::{Deserialize, Serialize};

use crate::dynamics::force_at;
use crate::error::{Error, Result};
use crate::fields::MomentumField;
use crate::model::{ComplexVector, UnitSystem};
use crate::potential::PotentialField;

const SCAN_POINTS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub x: f64,
    /// `|p(x)|` at the refined root.
    pub momentum_residual: f64,
    /// `|F(x)|` at the refined root.
    pub force_residual: f64,
}

/// Real-axis points in `[lo, hi]` where the 1D field vanishes.
///
/// Brackets sign changes of the real and imaginary parts of `p` on a uniform
/// scan, skips brackets that contain a known singularity (poles flip sign
/// too), refines by bisection and keeps roots where `|p|` is negligible.
pub fn classify_fixed_points(
    field: &dyn MomentumField,
    potential: &dyn PotentialField,
    lo: f64,
    hi: f64,
    units: &UnitSystem,
) -> Result<Vec<FixedPoint>> {
    if field.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: field.dim() });
    }
    if !(hi > lo) {
        return Err(Error::EmptyRegion);
    }
    let at = ComplexVector::real_scalar;
    let h = (hi - lo) / SCAN_POINTS as f64;
    let samples: Vec<(f64, Option<ComplexVector>)> = (0..=SCAN_POINTS)
        .map(|j| {
            let x = lo + j as f64 * h;
            (x, field.momentum(&at(x)).ok())
        })
        .collect();
    let scale = {
        let mags: Vec<f64> = samples.iter().filter_map(|(_, p)| p.map(|p| p.norm())).collect();
        if mags.is_empty() {
            return Err(Error::EmptyRegion);
        }
        mags.iter().sum::<f64>() / mags.len() as f64
    };
    let accept = 1e-8 * scale.max(1e-3);

    let mut roots: Vec<f64> = Vec::new();
    for w in samples.windows(2) {
        let ((xa, Some(pa)), (xb, Some(pb))) = (w[0], w[1]) else {
            continue;
        };
        if field.singularities().iter().any(|s| s.at >= xa && s.at <= xb) {
            continue;
        }
        if pa.norm() == 0.0 {
            roots.push(xa);
            continue;
        }
        let parts: [fn(&ComplexVector) -> f64; 2] = [|p| p[0].re, |p| p[0].im];
        let Some(part) = parts.iter().find(|f| f(&pa) * f(&pb) < 0.0) else {
            continue;
        };
        let (mut a, mut b, mut fa) = (xa, xb, part(&pa));
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = part(&field.momentum(&at(mid))?);
            if fm == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if fm * fa > 0.0 {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        roots.push(0.5 * (a + b));
    }
    if let (x, Some(p)) = samples[SCAN_POINTS] {
        if p.norm() == 0.0 {
            roots.push(x);
        }
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 2.0 * h);

    let mut out = Vec::new();
    for x in roots {
        let p = field.momentum(&at(x))?.norm();
        if p <= accept {
            let f = force_at(field, potential, &at(x), units)?.norm();
            out.push(FixedPoint { x, momentum_residual: p, force_residual: f });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{ConstantField, QhoField};
    use crate::potential::PolynomialPotential;

    #[test]
    fn first_excited_state_rests_at_oscillator_length() {
        let units = UnitSystem::new(1.0, 2.0, 0.5).unwrap();
        let f = QhoField::new(1, units).unwrap();
        let u = PolynomialPotential::harmonic(&units);
        let fps = classify_fixed_points(&f, &u, 0.2, 3.0, &units).unwrap();
        assert_eq!(fps.len(), 1);
        assert!((fps[0].x - units.oscillator_length()).abs() < 1e-12);
        assert!(fps[0].force_residual < 1e-10);
    }

    #[test]
    fn poles_are_not_roots() {
        let units = UnitSystem::natural();
        let f = QhoField::new(1, units).unwrap();
        let u = PolynomialPotential::harmonic(&units);
        let fps = classify_fixed_points(&f, &u, -3.0, 3.0, &units).unwrap();
        let xs: Vec<f64> = fps.iter().map(|f| f.x).collect();
        assert_eq!(xs.len(), 2, "{xs:?}");
        assert!((xs[0] + 1.0).abs() < 1e-12 && (xs[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn free_particle_has_none() {
        let units = UnitSystem::natural();
        let f = ConstantField::new(ComplexVector::real_scalar(0.8));
        let fps = classify_fixed_points(&f, &PolynomialPotential::zero(), -5.0, 5.0, &units).unwrap();
        assert!(fps.is_empty());
    }

    #[test]
    fn second_excited_state_root() {
        let units = UnitSystem::natural();
        let f = QhoField::new(2, units).unwrap();
        let u = PolynomialPotential::harmonic(&units);
        let fps = classify_fixed_points(&f, &u, 0.05, 4.0, &units).unwrap();
        assert_eq!(fps.len(), 1);
        assert!((fps[0].x - 2.5f64.sqrt()).abs() < 1e-12);
    }
}
