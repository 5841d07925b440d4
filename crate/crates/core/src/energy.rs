//! Local energy `E = p.p / 2m + U - i (hbar / 2m) div p`, spatial constancy
//! scans and the curl check.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::MomentumField;
use crate::io::{num, write_csv, ReportHeader};
use crate::model::{ComplexVector, UnitSystem, C64, I};
use crate::potential::PotentialField;

/// The three terms of the local energy, kept separate so the quantum term can
/// be switched off to recover the classical `p^2/2m + U`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: C64,
    pub potential: C64,
    pub quantum: C64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> C64 {
        self.kinetic + self.potential + self.quantum
    }

    /// The `hbar -> 0` limit of the divergence term.
    pub fn classical(&self) -> C64 {
        self.kinetic + self.potential
    }
}

pub fn energy_terms(
    field: &dyn MomentumField,
    potential: &dyn PotentialField,
    r: &ComplexVector,
    units: &UnitSystem,
) -> Result<EnergyBreakdown> {
    let p = field.momentum(r)?;
    let div = field.divergence(r)?;
    Ok(EnergyBreakdown {
        kinetic: p.square() / (2.0 * units.mass),
        potential: potential.value(r),
        quantum: -I * div * (units.hbar / (2.0 * units.mass)),
    })
}

/// Full complex local energy; no projection onto the real axis.
pub fn energy_at(
    field: &dyn MomentumField,
    potential: &dyn PotentialField,
    r: &ComplexVector,
    units: &UnitSystem,
) -> Result<C64> {
    Ok(energy_terms(field, potential, r, units)?.total())
}

/// Hermitian norm of `curl p` from the field's own derivative evaluators.
pub fn curl_residual(field: &dyn MomentumField, r: &ComplexVector) -> Result<f64> {
    Ok(field.curl(r)?.norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScanRegion {
    /// Inclusive uniform grid on `[lo, hi]` (1D fields).
    Interval { lo: f64, hi: f64 },
    /// Axis-aligned box filled with an additive-recurrence low-discrepancy
    /// sequence.
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl ScanRegion {
    pub fn interval(lo: f64, hi: f64) -> Self {
        ScanRegion::Interval { lo, hi }
    }

    pub fn dim(&self) -> usize {
        match self {
            ScanRegion::Interval { .. } => 1,
            ScanRegion::Box { lo, .. } => lo.len(),
        }
    }

    pub fn points(&self, count: usize) -> Result<Vec<ComplexVector>> {
        if count == 0 {
            return Err(Error::EmptyRegion);
        }
        match self {
            ScanRegion::Interval { lo, hi } => {
                if !(hi > lo) {
                    return Err(Error::EmptyRegion);
                }
                if count == 1 {
                    return Ok(vec![ComplexVector::real_scalar(0.5 * (lo + hi))]);
                }
                let h = (hi - lo) / (count - 1) as f64;
                Ok((0..count).map(|j| ComplexVector::real_scalar(lo + j as f64 * h)).collect())
            }
            ScanRegion::Box { lo, hi } => {
                let d = lo.len();
                if d == 0 || d > 3 || hi.len() != d || lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
                    return Err(Error::EmptyRegion);
                }
                let alpha = additive_recurrence(d);
                Ok((0..count)
                    .map(|n| {
                        let coords: Vec<f64> = (0..d)
                            .map(|k| {
                                let u = (0.5 + alpha[k] * (n + 1) as f64).fract();
                                lo[k] + u * (hi[k] - lo[k])
                            })
                            .collect();
                        ComplexVector::from_real(&coords)
                    })
                    .collect())
            }
        }
    }
}

/// Increments `phi^-k` where `phi` is the positive root of `x^(d+1) = x + 1`.
fn additive_recurrence(d: usize) -> Vec<f64> {
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    (1..=d).map(|k| phi.powi(-(k as i32))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub position: Vec<f64>,
    pub momentum: ComplexVector,
    pub energy: C64,
    pub curl_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub samples: Vec<ScanSample>,
    /// Points dropped because they fell inside a node guard.
    pub skipped: usize,
    pub mean_energy: C64,
    pub max_deviation: f64,
    pub worst_point: Vec<f64>,
    pub worst_energy: C64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ScanReport {
    pub fn write_csv<W: Write>(&self, out: W, header: Option<&ReportHeader>) -> Result<()> {
        let d = self.samples.first().map_or(1, |s| s.position.len());
        let mut columns = Vec::new();
        if d == 1 {
            columns.extend(["x", "re(p)", "im(p)"].map(String::from));
        } else {
            columns.extend((0..d).map(|k| format!("x{k}")));
            for k in 0..d {
                columns.push(format!("re(p{k})"));
                columns.push(format!("im(p{k})"));
            }
        }
        columns.extend(["re(E)", "im(E)", "curl_residual"].map(String::from));
        let rows = self.samples.iter().map(|s| {
            let mut row: Vec<String> = s.position.iter().map(|&x| num(x)).collect();
            for c in s.momentum.iter() {
                row.push(num(c.re));
                row.push(num(c.im));
            }
            row.push(num(s.energy.re));
            row.push(num(s.energy.im));
            row.push(s.curl_residual.map(num).unwrap_or_default());
            row
        });
        write_csv(out, header, &columns, rows)
    }
}

/// Samples the local energy over `region` and reports its spread.
///
/// Passing means `max |E(r) - mean E| <= tol`. Points inside a node guard are
/// skipped and counted.
pub fn energy_constancy_scan(
    field: &dyn MomentumField,
    potential: &dyn PotentialField,
    region: &ScanRegion,
    count: usize,
    tol: f64,
    units: &UnitSystem,
) -> Result<ScanReport> {
    if region.dim() != field.dim() {
        return Err(Error::DimensionMismatch { expected: field.dim(), got: region.dim() });
    }
    let mut samples = Vec::with_capacity(count);
    let mut skipped = 0;
    for r in region.points(count)? {
        let terms = match energy_terms(field, potential, &r, units) {
            Ok(t) => t,
            Err(Error::NodeEvaluation { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let curl = if field.dim() > 1 { Some(curl_residual(field, &r)?) } else { None };
        samples.push(ScanSample {
            position: r.re(),
            momentum: field.momentum(&r)?,
            energy: terms.total(),
            curl_residual: curl,
        });
    }
    if samples.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let mean = samples.iter().map(|s| s.energy).sum::<C64>() / samples.len() as f64;
    let (worst, dev) = samples
        .iter()
        .map(|s| (s, (s.energy - mean).norm()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    Ok(ScanReport {
        worst_point: worst.position.clone(),
        worst_energy: worst.energy,
        mean_energy: mean,
        max_deviation: dev,
        tolerance: tol,
        passed: dev <= tol,
        skipped,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{ConstantField, QhoField};
    use crate::potential::PolynomialPotential;

    fn x(v: f64) -> ComplexVector {
        ComplexVector::real_scalar(v)
    }

    #[test]
    fn oscillator_terms_at_two() {
        let units = UnitSystem::natural();
        let f = QhoField::new(1, units).unwrap();
        let u = PolynomialPotential::harmonic(&units);
        let t = energy_terms(&f, &u, &x(2.0), &units).unwrap();
        assert!((t.kinetic - C64::new(-1.125, 0.0)).norm() < 1e-14);
        assert!((t.potential - C64::new(2.0, 0.0)).norm() < 1e-14);
        assert!((t.quantum - C64::new(0.625, 0.0)).norm() < 1e-14);
        assert!((t.total() - C64::new(1.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn energy_is_position_independent() {
        let units = UnitSystem::natural();
        let f = QhoField::new(1, units).unwrap();
        let u = PolynomialPotential::harmonic(&units);
        for v in [0.3, 0.7, 1.9, 4.2] {
            let e = energy_at(&f, &u, &x(v), &units).unwrap();
            assert!((e - C64::new(1.5, 0.0)).norm() < 1e-10, "{v}: {e}");
        }
    }

    #[test]
    fn free_particle_energy() {
        let units = UnitSystem::new(0.5, 2.0, 1.0).unwrap();
        let k = 3.0;
        let f = ConstantField::new(ComplexVector::real_scalar(units.hbar * k));
        let e = energy_at(&f, &PolynomialPotential::zero(), &x(0.2), &units).unwrap();
        let expected = units.hbar * units.hbar * k * k / (2.0 * units.mass);
        assert!((e - C64::new(expected, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn classical_toggle_drops_divergence_term() {
        let units = UnitSystem::natural();
        let f = QhoField::new(3, units).unwrap();
        let u = PolynomialPotential::harmonic(&units);
        let r = x(1.7);
        let t = energy_terms(&f, &u, &r, &units).unwrap();
        let p = f.momentum(&r).unwrap();
        assert_eq!(t.classical(), p.square() / 2.0 + u.value(&r));
    }

    #[test]
    fn scan_detects_wrong_potential() {
        let units = UnitSystem::natural();
        let f = QhoField::new(1, units).unwrap();
        let good = energy_constancy_scan(
            &f,
            &PolynomialPotential::harmonic(&units),
            &ScanRegion::interval(0.1, 5.0),
            1000,
            1e-9,
            &units,
        )
        .unwrap();
        assert!(good.passed, "{}", good.max_deviation);
        let quartic = PolynomialPotential::new(vec![0.0, 0.0, 0.0, 0.0, 0.25]);
        let bad = energy_constancy_scan(&f, &quartic, &ScanRegion::interval(0.1, 5.0), 1000, 1e-9, &units).unwrap();
        assert!(!bad.passed);
        assert!(bad.max_deviation > 0.5);
    }

    #[test]
    fn scan_skips_nodes_and_rejects_empty() {
        let units = UnitSystem::natural();
        let f = QhoField::new(1, units).unwrap();
        let u = PolynomialPotential::harmonic(&units);
        let r = energy_constancy_scan(&f, &u, &ScanRegion::interval(-1.0, 1.0), 3, 1e-9, &units).unwrap();
        assert_eq!(r.skipped, 1);
        assert_eq!(r.samples.len(), 2);
        assert!(matches!(
            energy_constancy_scan(&f, &u, &ScanRegion::interval(1.0, 1.0), 10, 1e-9, &units),
            Err(Error::EmptyRegion)
        ));
    }

    #[test]
    fn box_points_fill_region() {
        let region = ScanRegion::Box { lo: vec![0.0, -1.0, 2.0], hi: vec![1.0, 1.0, 3.0] };
        let pts = region.points(500).unwrap();
        assert_eq!(pts.len(), 500);
        for p in &pts {
            assert!(p[0].re >= 0.0 && p[0].re < 1.0 && p[1].re >= -1.0 && p[2].re >= 2.0);
        }
        let mean: f64 = pts.iter().map(|p| p[0].re).sum::<f64>() / 500.0;
        assert!((mean - 0.5).abs() < 0.01);
    }

    #[test]
    fn csv_columns_for_1d() {
        let units = UnitSystem::natural();
        let f = QhoField::new(1, units).unwrap();
        let r = energy_constancy_scan(
            &f,
            &PolynomialPotential::harmonic(&units),
            &ScanRegion::interval(1.0, 2.0),
            2,
            1e-9,
            &units,
        )
        .unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,re(p),im(p),re(E),im(E),curl_residual"));
        assert_eq!(lines.next().unwrap().split(',').count(), 6);
    }
}
