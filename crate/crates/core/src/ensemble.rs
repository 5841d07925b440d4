//! Seeded ensembles of independent field-driven trajectories and the
//! population density they produce.
//!
//! Trajectory `i` draws its start point from its own ChaCha8 stream seeded
//! with `mix_seed(master, first_index + i)`, so results do not depend on
//! scheduling and two ensembles over disjoint index ranges merge into the
//! ensemble of the union.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_partial, IntegratorConfig, PhasePoint, TerminationReason, Trajectory};
use crate::energy::energy_at;
use crate::error::{Error, Result};
use crate::fields::MomentumField;
use crate::io::{num, write_csv, ReportHeader};
use crate::model::{ComplexVector, SeedSpec, UnitSystem, C64};
use crate::potential::PotentialField;
use crate::reconstruct::gauss_legendre;

/// Largest ensemble whose per-trajectory dump may be written.
pub const MAX_TRAJECTORY_DUMP: usize = 100_000;

/// Imaginary part beyond which a position counts as off the real axis.
pub const OFF_AXIS_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SamplingRegion {
    pub fn interval(lo: f64, hi: f64) -> Self {
        SamplingRegion { lo: vec![lo], hi: vec![hi] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    fn validate(&self) -> Result<()> {
        let d = self.lo.len();
        if d == 0 || d > 3 || self.hi.len() != d || self.lo.iter().zip(&self.hi).any(|(a, b)| !(b > a)) {
            return Err(Error::EmptyRegion);
        }
        Ok(())
    }

    fn contains(&self, r: &[f64]) -> bool {
        r.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (a, b))| x >= a && x <= b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialDistribution {
    Uniform,
    /// Independent normals per axis, truncated to the region by rejection.
    Gaussian { mean: Vec<f64>, sigma: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub count: usize,
    pub region: SamplingRegion,
    pub distribution: InitialDistribution,
    pub seed: SeedSpec,
    /// Index of the first trajectory; ensembles with disjoint index ranges
    /// can be merged.
    #[serde(default)]
    pub first_index: u64,
    pub integrator: IntegratorConfig,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidParameter("ensemble count must be >= 1".into()));
        }
        self.region.validate()?;
        if let InitialDistribution::Gaussian { mean, sigma } = &self.distribution {
            if mean.len() != self.region.dim() || sigma.len() != self.region.dim() {
                return Err(Error::DimensionMismatch { expected: self.region.dim(), got: mean.len() });
            }
            if sigma.iter().any(|s| !(*s > 0.0)) {
                return Err(Error::InvalidParameter("gaussian sigma must be > 0".into()));
            }
        }
        self.integrator.validate()
    }
}

const MAX_REJECTIONS: usize = 10_000;

fn sample_one(spec: &EnsembleSpec, index: u64) -> Result<ComplexVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.stream(index));
    let region = &spec.region;
    let coords: Vec<f64> = match &spec.distribution {
        InitialDistribution::Uniform => {
            region.lo.iter().zip(&region.hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect()
        }
        InitialDistribution::Gaussian { mean, sigma } => {
            let normals: Vec<Normal<f64>> = mean
                .iter()
                .zip(sigma)
                .map(|(&m, &s)| Normal::new(m, s).map_err(|e| Error::InvalidParameter(e.to_string())))
                .collect::<Result<_>>()?;
            let mut tries = 0;
            loop {
                let x: Vec<f64> = normals.iter().map(|n| n.sample(&mut rng)).collect();
                if region.contains(&x) {
                    break x;
                }
                tries += 1;
                if tries >= MAX_REJECTIONS {
                    return Err(Error::InvalidParameter("gaussian places negligible mass in the region".into()));
                }
            }
        }
    };
    Ok(ComplexVector::from_real(&coords))
}

/// Start points on the real axis, one per trajectory index.
pub fn sample_initial(spec: &EnsembleSpec, field: &dyn MomentumField) -> Result<Vec<ComplexVector>> {
    spec.validate()?;
    if spec.region.dim() != field.dim() {
        return Err(Error::DimensionMismatch { expected: field.dim(), got: spec.region.dim() });
    }
    let guard = field.node_guard();
    for s in field.singularities() {
        if s.at > spec.region.lo[s.axis] - guard && s.at < spec.region.hi[s.axis] + guard {
            return Err(Error::RegionOverlapsSingularity { axis: s.axis, node: s.at });
        }
    }
    (0..spec.count as u64).map(|i| sample_one(spec, spec.first_index + i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    Terminated { reason: TerminationReason, t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub index: u64,
    pub start: ComplexVector,
    pub outcome: Outcome,
    pub steps: usize,
    /// `max |E(t) - E(0)|` over the recorded points.
    pub energy_drift: f64,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub count: usize,
    pub completed: usize,
    pub terminated: usize,
    pub completion_fraction: f64,
    /// Over completed trajectories.
    pub max_energy_drift: f64,
    pub total_steps: usize,
    pub mean_steps: f64,
    pub t_end: f64,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub records: Vec<TrajectoryRecord>,
    pub t_end: f64,
    pub wall_clock_seconds: f64,
}

fn energy_drift(
    field: &dyn MomentumField,
    potential: &dyn PotentialField,
    traj: &Trajectory,
    units: &UnitSystem,
) -> f64 {
    let energies: Vec<C64> =
        traj.points.iter().filter_map(|pt| energy_at(field, potential, &pt.position, units).ok()).collect();
    let Some(e0) = energies.first() else { return f64::NAN };
    energies.iter().map(|e| (e - e0).norm()).fold(0.0, f64::max)
}

/// Evolves every sampled start point in parallel. Per-trajectory failures
/// become outcomes; the batch itself only fails on invalid input.
pub fn evolve_ensemble(
    field: &dyn MomentumField,
    potential: &dyn PotentialField,
    spec: &EnsembleSpec,
    units: &UnitSystem,
) -> Result<EnsembleResult> {
    let started = Instant::now();
    let starts = sample_initial(spec, field)?;
    let records: Vec<TrajectoryRecord> = starts
        .par_iter()
        .enumerate()
        .map(|(i, x0)| -> Result<TrajectoryRecord> {
            let traj = evolve_partial(field, x0, &spec.integrator, units)?;
            let outcome = match traj.termination {
                None => Outcome::Completed,
                Some(t) => Outcome::Terminated { reason: t.reason, t: t.t },
            };
            Ok(TrajectoryRecord {
                index: spec.first_index + i as u64,
                start: *x0,
                outcome,
                steps: traj.accepted_steps,
                energy_drift: energy_drift(field, potential, &traj, units),
                trajectory: traj,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EnsembleResult { records, t_end: spec.integrator.t_end, wall_clock_seconds: started.elapsed().as_secs_f64() })
}

impl EnsembleResult {
    /// Aggregates in index order so the numbers do not depend on threading.
    pub fn summary(&self) -> EnsembleSummary {
        let count = self.records.len();
        let completed = self.records.iter().filter(|r| r.outcome == Outcome::Completed).count();
        let total_steps: usize = self.records.iter().map(|r| r.steps).sum();
        let max_energy_drift = self
            .records
            .iter()
            .filter(|r| r.outcome == Outcome::Completed)
            .map(|r| r.energy_drift)
            .fold(0.0, f64::max);
        EnsembleSummary {
            count,
            completed,
            terminated: count - completed,
            completion_fraction: completed as f64 / count.max(1) as f64,
            max_energy_drift,
            total_steps,
            mean_steps: total_steps as f64 / count.max(1) as f64,
            t_end: self.t_end,
            wall_clock_seconds: self.wall_clock_seconds,
        }
    }

    /// Union of two ensembles over disjoint index ranges.
    pub fn merge(mut self, other: EnsembleResult) -> Result<EnsembleResult> {
        if self.t_end != other.t_end {
            return Err(Error::InvalidParameter("cannot merge ensembles with different t_end".into()));
        }
        self.records.extend(other.records);
        self.records.sort_by_key(|r| r.index);
        if self.records.windows(2).any(|w| w[0].index == w[1].index) {
            return Err(Error::InvalidParameter("ensembles share trajectory indices".into()));
        }
        self.wall_clock_seconds += other.wall_clock_seconds;
        Ok(self)
    }

    /// Stored point nearest to `t`, or `None` if the trajectory stopped before.
    fn point_at(record: &TrajectoryRecord, t: f64) -> Option<&PhasePoint> {
        let pts = &record.trajectory.points;
        if let Outcome::Terminated { t: stop, .. } = record.outcome {
            if t > stop {
                return None;
            }
        }
        let idx = pts.partition_point(|p| p.t < t);
        let candidates = [idx.checked_sub(1), Some(idx)];
        candidates
            .iter()
            .flatten()
            .filter_map(|&i| pts.get(i))
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    /// Picks one particle uniformly at random and returns its state at `t`.
    ///
    /// The uniform weighting is an assumption: nothing fixes how a measurement
    /// selects a particle from the set.
    pub fn measure(&self, t: f64, seed: u64) -> Result<PhasePoint> {
        self.check_time(t)?;
        let alive: Vec<&PhasePoint> = self.records.iter().filter_map(|r| Self::point_at(r, t)).collect();
        if alive.is_empty() {
            return Err(Error::ZeroMass);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(*alive[rng.random_range(0..alive.len())])
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.t_end).contains(&t) {
            return Err(Error::TimeOutOfRange { t, start: 0.0, end: self.t_end });
        }
        Ok(())
    }

    pub fn write_trajectories_csv<W: Write>(&self, out: W, header: Option<&ReportHeader>) -> Result<()> {
        if self.records.len() > MAX_TRAJECTORY_DUMP {
            return Err(Error::InvalidParameter(format!(
                "refusing to dump {} trajectories (limit {MAX_TRAJECTORY_DUMP})",
                self.records.len()
            )));
        }
        let d = self.records.first().map_or(1, |r| r.start.dim());
        let mut columns = vec!["index".to_string(), "t".to_string()];
        for k in 0..d {
            columns.push(format!("re(x{k})"));
            columns.push(format!("im(x{k})"));
        }
        for k in 0..d {
            columns.push(format!("re(p{k})"));
            columns.push(format!("im(p{k})"));
        }
        let rows = self.records.iter().flat_map(|r| {
            r.trajectory.points.iter().map(move |pt| {
                let mut row = vec![r.index.to_string(), num(pt.t)];
                for c in pt.position.iter().chain(pt.momentum.iter()) {
                    row.push(num(c.re));
                    row.push(num(c.im));
                }
                row
            })
        });
        write_csv(out, header, &columns, rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl BinSpec {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.count).map(|j| self.lo + j as f64 * self.width()).collect()
    }

    fn index(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x <= self.hi) {
            return None;
        }
        Some((((x - self.lo) / self.width()) as usize).min(self.count - 1))
    }
}

/// Population over `re(x_0)` at one time.
///
/// `counts` plus `out_of_range` always equals `total - terminated`. Positions
/// with `|im(x_0)| > 0.01` are still binned by their real part and counted
/// again in `off_axis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityHistogram {
    pub t: f64,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: usize,
    pub terminated: usize,
    pub out_of_range: usize,
    pub off_axis: usize,
    /// Born density `|psi|^2` integrated over each bin and normalized, when
    /// one has been attached.
    pub reference: Option<Vec<f64>>,
}

pub fn density_histogram(result: &EnsembleResult, t: f64, bins: BinSpec) -> Result<DensityHistogram> {
    result.check_time(t)?;
    if bins.count == 0 || !(bins.hi > bins.lo) {
        return Err(Error::EmptyRegion);
    }
    let mut counts = vec![0u64; bins.count];
    let (mut terminated, mut out_of_range, mut off_axis) = (0, 0, 0);
    for record in &result.records {
        let Some(pt) = EnsembleResult::point_at(record, t) else {
            terminated += 1;
            continue;
        };
        let x = pt.position[0];
        if x.im.abs() > OFF_AXIS_THRESHOLD {
            off_axis += 1;
        }
        match bins.index(x.re) {
            Some(b) => counts[b] += 1,
            None => out_of_range += 1,
        }
    }
    Ok(DensityHistogram {
        t,
        edges: bins.edges(),
        counts,
        total: result.records.len(),
        terminated,
        out_of_range,
        off_axis,
        reference: None,
    })
}

impl DensityHistogram {
    pub fn binned(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Adds the counts of a histogram over the same bins and time.
    pub fn merge(&self, other: &DensityHistogram) -> Result<DensityHistogram> {
        if self.edges != other.edges || self.t != other.t {
            return Err(Error::InvalidParameter("histograms differ in bins or time".into()));
        }
        Ok(DensityHistogram {
            t: self.t,
            edges: self.edges.clone(),
            counts: self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect(),
            total: self.total + other.total,
            terminated: self.terminated + other.terminated,
            out_of_range: self.out_of_range + other.out_of_range,
            off_axis: self.off_axis + other.off_axis,
            reference: None,
        })
    }

    pub fn write_csv<W: Write>(&self, out: W, header: Option<&ReportHeader>) -> Result<()> {
        let base = header.cloned().unwrap_or_default();
        let header = base
            .with("t", self.t)
            .with("total", self.total)
            .with("terminated", self.terminated)
            .with("out_of_range", self.out_of_range)
            .with("off_axis", self.off_axis);
        let n = self.binned().max(1) as f64;
        let width = self.edges[1] - self.edges[0];
        let columns: Vec<String> =
            ["bin_lo", "bin_hi", "count", "density", "born_density"].iter().map(|s| s.to_string()).collect();
        let rows = (0..self.counts.len()).map(|j| {
            vec![
                num(self.edges[j]),
                num(self.edges[j + 1]),
                self.counts[j].to_string(),
                num(self.counts[j] as f64 / n / width),
                self.reference.as_ref().map(|r| num(r[j] / width)).unwrap_or_default(),
            ]
        });
        write_csv(out, Some(&header), &columns, rows)
    }
}

/// Report-only distances between the histogram and the Born density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityComparison {
    /// `sum |p_j - q_j|`, in `[0, 2]`.
    pub l1: f64,
    /// Jensen-Shannon divergence in nats, in `[0, ln 2]`.
    pub jensen_shannon: f64,
    /// `p_j - q_j` per bin.
    pub residuals: Vec<f64>,
    /// Normalized `|psi|^2` mass per bin.
    pub born: Vec<f64>,
}

fn kl_term(p: f64, m: f64) -> f64 {
    if p > 0.0 {
        p * (p / m).ln()
    } else {
        0.0
    }
}

/// Compares bin occupation against `|psi|^2` integrated over each bin. No
/// pass/fail verdict is attached.
pub fn compare_density_to_born(hist: &DensityHistogram, psi: &dyn Fn(f64) -> C64) -> Result<DensityComparison> {
    let total = hist.binned();
    if total == 0 {
        return Err(Error::ZeroMass);
    }
    let mut born = Vec::with_capacity(hist.counts.len());
    for w in hist.edges.windows(2) {
        let mass: f64 = gauss_legendre(&|x: f64| Ok(psi(x).norm_sqr()), w[0], w[1], 4)?;
        born.push(mass);
    }
    let born_total: f64 = born.iter().sum();
    if !(born_total > 0.0) {
        return Err(Error::ZeroMass);
    }
    born.iter_mut().for_each(|b| *b /= born_total);
    let observed: Vec<f64> = hist.counts.iter().map(|&c| c as f64 / total as f64).collect();
    let residuals: Vec<f64> = observed.iter().zip(&born).map(|(p, q)| p - q).collect();
    let l1 = residuals.iter().map(|r| r.abs()).sum();
    let js = observed
        .iter()
        .zip(&born)
        .map(|(&p, &q)| {
            let m = 0.5 * (p + q);
            0.5 * kl_term(p, m) + 0.5 * kl_term(q, m)
        })
        .sum::<f64>()
        .max(0.0);
    Ok(DensityComparison { l1, jensen_shannon: js, residuals, born })
}
