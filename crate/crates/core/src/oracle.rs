//! Finite-difference eigensolver for `-ħ²/2m ψ'' + U ψ = E ψ` on a uniform
//! grid with `ψ = 0` at both ends. Used to cross-check closed-form fields and
//! to build fields for potentials that have none.
//!
//! The tridiagonal Hamiltonian is diagonalized by Sturm-sequence bisection
//! for the eigenvalues and inverse iteration for the vectors.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::GridField;
use crate::io::{num, write_csv, ReportHeader};
use crate::model::{ComplexVector, UnitSystem, C64};
use crate::potential::PotentialField;

pub const MIN_GRID_POINTS: usize = 64;

/// `points` samples from `x_min` to `x_max` inclusive; the two end samples
/// carry the boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, points: usize) -> Result<Self> {
        let g = Grid1D { x_min, x_max, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < MIN_GRID_POINTS {
            return Err(Error::TooFewSamples { needed: MIN_GRID_POINTS, got: self.points });
        }
        if !(self.x_max > self.x_min) || !self.x_min.is_finite() || !self.x_max.is_finite() {
            return Err(Error::EmptyRegion);
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.points - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.spacing()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub grid: Grid1D,
    pub energies: Vec<f64>,
    /// One vector per state over every grid point, boundaries included,
    /// with `Σ ψ² h = 1` and the first lobe positive.
    pub states: Vec<Vec<f64>>,
}

/// Symmetric tridiagonal matrix with diagonal `d` and off-diagonal `e`.
struct Tridiagonal {
    d: Vec<f64>,
    e: Vec<f64>,
}

impl Tridiagonal {
    /// Number of eigenvalues strictly below `x`.
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.d.len() {
            let off = if i == 0 { 0.0 } else { self.e[i - 1] * self.e[i - 1] / q };
            q = self.d[i] - x - off;
            if q == 0.0 {
                q = -f64::EPSILON * (self.d[i].abs() + x.abs()).max(1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.d.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.e[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - r);
            hi = hi.max(self.d[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue.
    fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(T - shift) x = b` by Gaussian elimination with partial
    /// pivoting, which keeps the shifted near-singular system stable.
    fn solve_shifted(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        // pivoted rows as (diag, upper, upper2)
        let mut a = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut rhs = b.to_vec();
        let mut cur_d = self.d[0] - shift;
        let mut cur_u = if n > 1 { self.e[0] } else { 0.0 };
        let mut cur_u2 = 0.0;
        for i in 0..n {
            if i + 1 == n {
                a[i] = cur_d;
                u1[i] = 0.0;
                u2[i] = 0.0;
                break;
            }
            let below_l = self.e[i];
            let below_d = self.d[i + 1] - shift;
            let below_u = if i + 2 < n { self.e[i + 1] } else { 0.0 };
            if below_l.abs() > cur_d.abs() {
                // swap row i with row i+1
                a[i] = below_l;
                u1[i] = below_d;
                u2[i] = below_u;
                rhs.swap(i, i + 1);
                let m = cur_d / below_l;
                cur_d = cur_u - m * below_d;
                cur_u = cur_u2 - m * below_u;
                rhs[i + 1] -= m * rhs[i];
            } else {
                u1[i] = cur_u;
                u2[i] = cur_u2;
                let pivot = if cur_d == 0.0 { f64::EPSILON } else { cur_d };
                a[i] = pivot;
                let m = below_l / pivot;
                cur_d = below_d - m * cur_u;
                cur_u = below_u - m * cur_u2;
                rhs[i + 1] -= m * rhs[i];
            }
            cur_u2 = 0.0;
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = rhs[i];
            if i + 1 < n {
                s -= u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= u2[i] * x[i + 2];
            }
            let piv = if a[i] == 0.0 { f64::EPSILON } else { a[i] };
            x[i] = s / piv;
        }
        x
    }

    fn eigenvector(&self, lambda: f64, seed: usize) -> Result<Vec<f64>> {
        let n = self.d.len();
        let scale = self.gershgorin().1.abs().max(1.0);
        let shift = lambda + 1e-13 * scale;
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (((i + seed) * 7919) % 13) as f64).collect();
        normalize(&mut v);
        for _ in 0..8 {
            let mut w = self.solve_shifted(shift, &v);
            normalize(&mut w);
            let aligned = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().abs();
            v = w;
            if (1.0 - aligned) < 1e-14 {
                return Ok(v);
            }
        }
        let residual = self.residual(&v, lambda);
        if residual < 1e-6 * scale {
            Ok(v)
        } else {
            Err(Error::ConvergenceFailure(format!("inverse iteration at E = {lambda} left residual {residual:e}")))
        }
    }

    fn residual(&self, v: &[f64], lambda: f64) -> f64 {
        let n = v.len();
        (0..n)
            .map(|i| {
                let mut s = (self.d[i] - lambda) * v[i];
                if i > 0 {
                    s += self.e[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.e[i] * v[i + 1];
                }
                s.abs()
            })
            .fold(0.0, f64::max)
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// Lowest `n_states` eigenpairs. At most a quarter of the grid points may be
/// requested, since higher states are poorly resolved.
pub fn solve_schrodinger_1d(
    potential: &dyn PotentialField,
    grid: Grid1D,
    n_states: usize,
    units: &UnitSystem,
) -> Result<OracleSolution> {
    grid.validate()?;
    units.validate()?;
    if n_states == 0 || n_states > grid.points / 4 {
        return Err(Error::InvalidParameter(format!(
            "n_states must be in 1..={} for {} grid points",
            grid.points / 4,
            grid.points
        )));
    }
    let h = grid.spacing();
    let kinetic = units.hbar * units.hbar / (2.0 * units.mass * h * h);
    let interior = grid.points - 2;
    let mut d = Vec::with_capacity(interior);
    for j in 1..=interior {
        let u = potential.value(&ComplexVector::real_scalar(grid.x(j)));
        d.push(2.0 * kinetic + u.re);
    }
    let t = Tridiagonal { d, e: vec![-kinetic; interior - 1] };
    let mut energies = Vec::with_capacity(n_states);
    let mut states = Vec::with_capacity(n_states);
    for k in 0..n_states {
        let lambda = t.eigenvalue(k);
        let v = t.eigenvector(lambda, k)?;
        let mut psi = Vec::with_capacity(grid.points);
        psi.push(0.0);
        psi.extend(v);
        psi.push(0.0);
        let norm = (psi.iter().map(|x| x * x).sum::<f64>() * h).sqrt();
        let peak = psi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let first_lobe = psi.iter().find(|x| x.abs() > 1e-3 * peak).copied().unwrap_or(1.0);
        let sign = if first_lobe < 0.0 { -1.0 } else { 1.0 };
        psi.iter_mut().for_each(|x| *x *= sign / norm);
        energies.push(lambda);
        states.push(psi);
    }
    Ok(OracleSolution { grid, energies, states })
}

impl OracleSolution {
    pub fn psi(&self, state: usize) -> Result<&[f64]> {
        self.states.get(state).map(Vec::as_slice).ok_or(Error::UnsupportedLevel(state as u32))
    }

    /// Linear interpolation of state `n` at `x`, zero outside the grid.
    pub fn psi_at(&self, state: usize, x: f64) -> f64 {
        let Some(psi) = self.states.get(state) else { return 0.0 };
        let s = (x - self.grid.x_min) / self.grid.spacing();
        if !(s >= 0.0 && s <= (self.grid.points - 1) as f64) {
            return 0.0;
        }
        let j = (s.floor() as usize).min(self.grid.points - 2);
        let f = s - j as f64;
        psi[j] * (1.0 - f) + psi[j + 1] * f
    }

    pub fn write_csv<W: Write>(&self, out: W, header: Option<&ReportHeader>) -> Result<()> {
        let mut header = header.cloned().unwrap_or_default();
        for (n, e) in self.energies.iter().enumerate() {
            header = header.with(format!("E{n}"), e);
        }
        let mut columns = vec!["x".to_string()];
        columns.extend((0..self.states.len()).map(|n| format!("psi{n}")));
        let rows = (0..self.grid.points).map(|j| {
            let mut row = vec![num(self.grid.x(j))];
            row.extend(self.states.iter().map(|s| num(s[j])));
            row
        });
        write_csv(out, Some(&header), &columns, rows)
    }
}

/// Momentum field of a computed state.
pub fn field_from_grid(solution: &OracleSolution, state: usize, units: &UnitSystem) -> Result<GridField> {
    let psi = solution.psi(state)?;
    let samples = psi.iter().map(|&v| C64::new(v, 0.0)).collect();
    GridField::from_samples(solution.grid.x_min, solution.grid.spacing(), samples, *units)
}
