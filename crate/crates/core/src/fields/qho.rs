use crate::error::{Error, Result};
use crate::fields::{DerivativeKind, Jacobian, MomentumField, Singularity};
use crate::model::{ComplexVector, TolerancePolicy, UnitSystem, C64, I};

/// Highest oscillator level with a validated Hermite table.
pub const MAX_QHO_LEVEL: u32 = 10;

/// Physicists' Hermite polynomials `(H_{n-1}(z), H_n(z))` by the three-term
/// recurrence `H_{k+1} = 2 z H_k - 2 k H_{k-1}`.
pub fn hermite(n: u32, z: C64) -> (C64, C64) {
    let mut prev = C64::new(0.0, 0.0);
    let mut cur = C64::new(1.0, 0.0);
    for k in 0..n {
        let next = z * cur * 2.0 - prev * (2.0 * k as f64);
        prev = cur;
        cur = next;
    }
    (prev, cur)
}

fn hermite_real(n: u32, x: f64) -> f64 {
    hermite(n, C64::new(x, 0.0)).1.re
}

/// Real zeros of `H_n`, ascending. All of them lie inside `|z| < sqrt(2n + 1)`.
fn hermite_zeros(n: u32) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let bound = (2.0 * n as f64 + 1.0).sqrt() + 0.5;
    let steps = 4000;
    let h = bound / steps as f64;
    let mut positive = Vec::new();
    let mut a = 1e-9;
    let mut fa = hermite_real(n, a);
    for s in 1..=steps {
        let b = s as f64 * h;
        let fb = hermite_real(n, b);
        if fa.signum() != fb.signum() {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = hermite_real(n, mid);
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            positive.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    let mut zeros: Vec<f64> = positive.iter().rev().map(|z| -z).collect();
    if n % 2 == 1 {
        zeros.push(0.0);
    }
    zeros.extend(positive);
    zeros
}

/// Momentum field of the 1D harmonic-oscillator eigenstate
/// `psi_n = H_n(x / l) exp(-x^2 / 2 l^2)` with `l = sqrt(hbar / m omega)`.
///
/// With `L = psi'/psi = (2n H_{n-1}/H_n - x/l) / l` the field and its
/// derivatives are closed form:
///
/// ```text
/// p   = -i hbar L
/// L'  = x^2/l^4 - (2n+1)/l^2 - L^2
/// L'' = 2x/l^4 - 2 L L'
/// ```
///
/// For `n = 1` this is `p = -i hbar (1/x - m omega x / hbar)`.
#[derive(Debug, Clone)]
pub struct QhoField {
    level: u32,
    units: UnitSystem,
    nodes: Vec<Singularity>,
    node_guard: f64,
}

impl QhoField {
    pub fn new(level: u32, units: UnitSystem) -> Result<Self> {
        Self::with_tolerance(level, units, TolerancePolicy::default())
    }

    pub fn with_tolerance(level: u32, units: UnitSystem, tol: TolerancePolicy) -> Result<Self> {
        if level > MAX_QHO_LEVEL {
            return Err(Error::UnsupportedLevel(level));
        }
        units.validate()?;
        tol.validate()?;
        let l = units.oscillator_length();
        let nodes = hermite_zeros(level).into_iter().map(|z| Singularity::point(z * l)).collect();
        Ok(QhoField { level, units, nodes, node_guard: tol.node_guard })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn units(&self) -> &UnitSystem {
        &self.units
    }

    /// Eigenvalue `hbar omega (n + 1/2)`.
    pub fn energy(&self) -> f64 {
        self.units.hbar * self.units.omega * (self.level as f64 + 0.5)
    }

    /// Unnormalized eigenfunction `H_n(x/l) exp(-x^2 / 2 l^2)`.
    pub fn psi(&self, x: C64) -> C64 {
        let l = self.units.oscillator_length();
        let z = x / l;
        hermite(self.level, z).1 * (-z * z * 0.5).exp()
    }

    /// `(L, L', L'')` for the log-derivative `L = psi'/psi`.
    fn log_derivatives(&self, x: C64) -> (C64, C64, C64) {
        let l = self.units.oscillator_length();
        let l2 = l * l;
        let l4 = l2 * l2;
        let z = x / l;
        let n = self.level as f64;
        let (hm1, hn) = hermite(self.level, z);
        let ld = if self.level == 0 { -z / l } else { (hm1 * (2.0 * n) / hn - z) / l };
        let ld1 = x * x / l4 - (2.0 * n + 1.0) / l2 - ld * ld;
        let ld2 = x * 2.0 / l4 - ld * ld1 * 2.0;
        (ld, ld1, ld2)
    }
}

impl MomentumField for QhoField {
    fn dim(&self) -> usize {
        1
    }

    fn derivative_kind(&self) -> DerivativeKind {
        DerivativeKind::ClosedForm
    }

    fn singularities(&self) -> &[Singularity] {
        &self.nodes
    }

    fn node_guard(&self) -> f64 {
        self.node_guard
    }

    fn is_holomorphic(&self) -> bool {
        true
    }

    fn momentum_raw(&self, r: &ComplexVector) -> Result<ComplexVector> {
        let (ld, _, _) = self.log_derivatives(r[0]);
        Ok(ComplexVector::scalar(-I * self.units.hbar * ld))
    }

    fn jacobian_raw(&self, r: &ComplexVector) -> Result<Jacobian> {
        let (_, ld1, _) = self.log_derivatives(r[0]);
        Ok(Jacobian::diagonal(&ComplexVector::scalar(-I * self.units.hbar * ld1)))
    }

    fn laplacian_raw(&self, r: &ComplexVector) -> Result<ComplexVector> {
        let (_, _, ld2) = self.log_derivatives(r[0]);
        Ok(ComplexVector::scalar(-I * self.units.hbar * ld2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::numeric;

    fn at(x: f64) -> ComplexVector {
        ComplexVector::real_scalar(x)
    }

    /// Coefficients of H_n in ascending powers, from the standard table.
    const HERMITE_TABLE: [&[f64]; 11] = [
        &[1.0],
        &[0.0, 2.0],
        &[-2.0, 0.0, 4.0],
        &[0.0, -12.0, 0.0, 8.0],
        &[12.0, 0.0, -48.0, 0.0, 16.0],
        &[0.0, 120.0, 0.0, -160.0, 0.0, 32.0],
        &[-120.0, 0.0, 720.0, 0.0, -480.0, 0.0, 64.0],
        &[0.0, -1680.0, 0.0, 3360.0, 0.0, -1344.0, 0.0, 128.0],
        &[1680.0, 0.0, -13440.0, 0.0, 13440.0, 0.0, -3584.0, 0.0, 256.0],
        &[0.0, 30240.0, 0.0, -80640.0, 0.0, 48384.0, 0.0, -9216.0, 0.0, 512.0],
        &[-30240.0, 0.0, 302400.0, 0.0, -403200.0, 0.0, 161280.0, 0.0, -23040.0, 0.0, 1024.0],
    ];

    #[test]
    fn recurrence_matches_table() {
        for (n, coeffs) in HERMITE_TABLE.iter().enumerate() {
            for &x in &[-1.7, -0.3, 0.0, 0.9, 2.2] {
                let table: f64 = coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
                let rec = hermite_real(n as u32, x);
                assert!((table - rec).abs() <= 1e-10 * table.abs().max(1.0), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn level_one_reference_values() {
        let f = QhoField::new(1, UnitSystem::natural()).unwrap();
        assert_eq!(f.momentum(&at(1.0)).unwrap()[0], C64::new(0.0, 0.0));
        let p2 = f.momentum(&at(2.0)).unwrap()[0];
        assert!((p2 - C64::new(0.0, 1.5)).norm() < 1e-15);
        let ph = f.momentum(&at(0.5)).unwrap()[0];
        assert!((ph - C64::new(0.0, -1.5)).norm() < 1e-15);
        // d2p/dx2 = -2 i hbar / x^3
        let lap = f.vector_laplacian(&at(2.0)).unwrap()[0];
        assert!((lap - C64::new(0.0, -0.25)).norm() < 1e-14);
    }

    #[test]
    fn rejects_high_levels() {
        assert!(matches!(QhoField::new(11, UnitSystem::natural()), Err(Error::UnsupportedLevel(11))));
        assert!(QhoField::new(10, UnitSystem::natural()).is_ok());
    }

    #[test]
    fn nodes_are_hermite_zeros() {
        let f = QhoField::new(2, UnitSystem::natural()).unwrap();
        let nodes: Vec<f64> = f.singularities().iter().map(|s| s.at).collect();
        assert_eq!(nodes.len(), 2);
        assert!((nodes[1] - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((nodes[0] + 0.5f64.sqrt()).abs() < 1e-14);
        assert!(matches!(f.momentum(&at(0.5f64.sqrt())), Err(Error::NodeEvaluation { .. })));
        for n in 0..=MAX_QHO_LEVEL {
            let f = QhoField::new(n, UnitSystem::natural()).unwrap();
            assert_eq!(f.singularities().len(), n as usize);
            for s in f.singularities() {
                assert!(f.psi(C64::new(s.at, 0.0)).norm() < 1e-9 * (2f64).powi(n as i32));
            }
        }
    }

    #[test]
    fn closed_form_matches_numeric_derivatives() {
        let units = UnitSystem::new(1.3, 0.7, 2.1).unwrap();
        for n in 0..=MAX_QHO_LEVEL {
            let f = QhoField::new(n, units).unwrap();
            for &x in &[-2.3, -0.41, 0.37, 1.15, 2.9] {
                let r = at(x);
                if f.distance_to_singularity(&r).is_some_and(|d| d < 0.05) {
                    continue;
                }
                let jn = numeric::jacobian(|y| f.momentum_raw(y), &r).unwrap().get(0, 0);
                let jc = f.jacobian(&r).unwrap().get(0, 0);
                assert!((jn - jc).norm() <= 1e-6 * jc.norm().max(1.0), "n={n} x={x}: {jn} vs {jc}");
                let ln = numeric::vector_laplacian(|y| f.momentum_raw(y), &r).unwrap()[0];
                let lc = f.vector_laplacian(&r).unwrap()[0];
                assert!((ln - lc).norm() <= 1e-6 * lc.norm().max(1.0), "n={n} x={x}: {ln} vs {lc}");
            }
        }
    }

    #[test]
    fn evaluates_off_axis() {
        let f = QhoField::new(1, UnitSystem::natural()).unwrap();
        let x = C64::new(1.1, 0.4);
        let p = f.momentum(&ComplexVector::scalar(x)).unwrap()[0];
        let expected = -I * (x.inv() - x);
        assert!((p - expected).norm() < 1e-14);
    }
}
