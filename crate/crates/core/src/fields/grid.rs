use crate::error::{Error, Result};
use crate::fields::{DerivativeKind, Jacobian, MomentumField, Singularity};
use crate::model::{ComplexVector, TolerancePolicy, UnitSystem, C64, I};

const STENCIL: usize = 4;

/// Momentum field of a wavefunction sampled on a uniform 1D grid.
///
/// At every interior sample the log-derivative `L = psi'/psi` and the ratio
/// `K = psi''/psi` are taken from 3-point central differences. Between samples
/// both are interpolated with a local cubic, and
///
/// ```text
/// p = -i hbar L,   p' = -i hbar (K - L^2),   p'' = -i hbar (K' - 2 L (K - L^2))
/// ```
///
/// Using the same second difference as the finite-difference Hamiltonian
/// means `-hbar^2 K / 2m + U` reproduces the grid eigenvalue at the samples.
#[derive(Debug, Clone)]
pub struct GridField {
    x_min: f64,
    spacing: f64,
    samples: Vec<C64>,
    log_derivative: Vec<C64>,
    curvature: Vec<C64>,
    nodes: Vec<Singularity>,
    hbar: f64,
    node_guard: f64,
}

impl GridField {
    pub fn from_samples(x_min: f64, spacing: f64, samples: Vec<C64>, units: UnitSystem) -> Result<Self> {
        units.validate()?;
        if samples.len() < STENCIL + 2 {
            return Err(Error::TooFewSamples { needed: STENCIL + 2, got: samples.len() });
        }
        if !(spacing > 0.0) {
            return Err(Error::InvalidParameter("grid spacing must be > 0".into()));
        }
        let m = samples.len();
        let mut nodes = Vec::new();
        for j in 0..m - 1 {
            let (a, b) = (samples[j], samples[j + 1]);
            if j > 0 && a.norm() == 0.0 {
                nodes.push(Singularity::point(x_min + j as f64 * spacing));
                continue;
            }
            if a.norm() == 0.0 || b.norm() == 0.0 {
                continue;
            }
            // phase jump beyond a quarter turn: a sign change for real samples
            let proj = (b * a.conj()).re / a.norm();
            if proj < 0.0 {
                let frac = a.norm() / (a.norm() - proj);
                nodes.push(Singularity::point(x_min + (j as f64 + frac) * spacing));
            }
        }
        let mut log_derivative = vec![C64::new(f64::NAN, 0.0); m];
        let mut curvature = vec![C64::new(f64::NAN, 0.0); m];
        for j in 1..m - 1 {
            let (l, c, r) = (samples[j - 1], samples[j], samples[j + 1]);
            log_derivative[j] = (r - l) / (c * 2.0 * spacing);
            curvature[j] = (r - c * 2.0 + l) / (c * spacing * spacing);
        }
        Ok(GridField {
            x_min,
            spacing,
            samples,
            log_derivative,
            curvature,
            nodes,
            hbar: units.hbar,
            node_guard: TolerancePolicy::default().node_guard,
        })
    }

    pub fn with_node_guard(mut self, guard: f64) -> Self {
        self.node_guard = guard;
        self
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn x_at(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.spacing
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Interior range where the field can be evaluated.
    pub fn interior(&self) -> (f64, f64) {
        (self.x_at(1), self.x_at(self.len() - 2))
    }

    /// First sample index of the interpolation stencil and the local
    /// coordinate `t` of `x` measured from that sample.
    fn stencil(&self, r: &ComplexVector) -> Result<(usize, f64)> {
        let x = r[0].re;
        let (lo, hi) = self.interior();
        let eps = 1e-12 * self.spacing;
        if !(x >= lo - eps && x <= hi + eps) {
            return Err(Error::OutsideGrid(x));
        }
        let s = (x - self.x_min) / self.spacing;
        let last_start = self.len() - 1 - STENCIL;
        let start = ((s.floor() as isize) - 1).clamp(1, last_start as isize) as usize;
        let (a, b) = (self.x_at(start), self.x_at(start + STENCIL - 1));
        for node in &self.nodes {
            if node.at >= a && node.at <= b {
                return Err(Error::NodeEvaluation { axis: 0, node: node.at, distance: (x - node.at).abs() });
            }
        }
        Ok((start, s - start as f64))
    }

    /// Interpolated `(L, K, K')` at `x`.
    fn interpolate(&self, r: &ComplexVector) -> Result<(C64, C64, C64)> {
        let (start, t) = self.stencil(r)?;
        let (w, dw) = lagrange_weights(t);
        let mut l = C64::new(0.0, 0.0);
        let mut k = C64::new(0.0, 0.0);
        let mut dk = C64::new(0.0, 0.0);
        for i in 0..STENCIL {
            l += self.log_derivative[start + i] * w[i];
            k += self.curvature[start + i] * w[i];
            dk += self.curvature[start + i] * dw[i];
        }
        Ok((l, k, dk / self.spacing))
    }
}

/// Cubic Lagrange weights on nodes 0..=3 and their derivatives in `t`.
fn lagrange_weights(t: f64) -> ([f64; STENCIL], [f64; STENCIL]) {
    let mut w = [0.0; STENCIL];
    let mut dw = [0.0; STENCIL];
    for i in 0..STENCIL {
        let denom: f64 = (0..STENCIL).filter(|&j| j != i).map(|j| i as f64 - j as f64).product();
        let others: Vec<f64> = (0..STENCIL).filter(|&j| j != i).map(|j| t - j as f64).collect();
        w[i] = others.iter().product::<f64>() / denom;
        dw[i] = (0..others.len())
            .map(|skip| others.iter().enumerate().filter(|(q, _)| *q != skip).map(|(_, v)| v).product::<f64>())
            .sum::<f64>()
            / denom;
    }
    (w, dw)
}

impl MomentumField for GridField {
    fn dim(&self) -> usize {
        1
    }

    fn derivative_kind(&self) -> DerivativeKind {
        DerivativeKind::NumericCentralDifference
    }

    fn singularities(&self) -> &[Singularity] {
        &self.nodes
    }

    fn node_guard(&self) -> f64 {
        self.node_guard
    }

    fn is_holomorphic(&self) -> bool {
        false
    }

    fn momentum_raw(&self, r: &ComplexVector) -> Result<ComplexVector> {
        let (l, _, _) = self.interpolate(r)?;
        Ok(ComplexVector::scalar(-I * self.hbar * l))
    }

    fn jacobian_raw(&self, r: &ComplexVector) -> Result<Jacobian> {
        let (l, k, _) = self.interpolate(r)?;
        Ok(Jacobian::diagonal(&ComplexVector::scalar(-I * self.hbar * (k - l * l))))
    }

    fn laplacian_raw(&self, r: &ComplexVector) -> Result<ComplexVector> {
        let (l, k, dk) = self.interpolate(r)?;
        Ok(ComplexVector::scalar(-I * self.hbar * (dk - l * (k - l * l) * 2.0)))
    }
}
