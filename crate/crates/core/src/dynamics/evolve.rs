use std::f64::consts::TAU;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::ode::{rk4_step, rkf45_step, OdeState, PhaseState};
use crate::dynamics::{force_at, PhasePoint};
use crate::error::{Error, Result};
use crate::fields::MomentumField;
use crate::io::{num, write_csv, ReportHeader};
use crate::model::{ComplexVector, UnitSystem, C64};
use crate::potential::PotentialField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Rk4,
    Rkf45,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    /// Fixed step for RK4, initial step for RKF45.
    pub dt: f64,
    pub t_end: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Keep every n-th accepted step (the last step is always kept).
    pub record_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            scheme: Scheme::Rk4,
            dt: 1e-3,
            t_end: 1.0,
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            dt_min: 1e-12,
            dt_max: 0.1,
            record_every: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(dt: f64, t_end: f64) -> Self {
        IntegratorConfig { scheme: Scheme::Rk4, dt, t_end, ..Default::default() }
    }

    pub fn rkf45(t_end: f64) -> Self {
        IntegratorConfig { scheme: Scheme::Rkf45, t_end, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be > 0");
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be > 0");
        }
        if self.record_every == 0 {
            return bad("record_every must be >= 1");
        }
        if self.scheme == Scheme::Rkf45
            && !(self.abs_tol + self.rel_tol > 0.0 && self.dt_min > 0.0 && self.dt_max >= self.dt_min)
        {
            return bad("adaptive scheme needs positive tolerances and 0 < dt_min <= dt_max");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    NearSingularity,
    StepUnderflow,
    /// The field refused a stage evaluation, e.g. a grid field left its domain.
    FieldUnavailable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Termination {
    pub reason: TerminationReason,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<PhasePoint>,
    pub scheme: Scheme,
    pub dt: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Center used for branch tracking: the singularity on axis 0 nearest to
    /// the start, or the origin when the field has none.
    pub winding_center: f64,
    /// Net turns of `x_0 - winding_center` over the run.
    pub winding_turns: f64,
    pub termination: Option<Termination>,
}

impl Trajectory {
    pub fn last(&self) -> &PhasePoint {
        self.points.last().expect("trajectory holds its initial point")
    }

    pub fn completed(&self) -> bool {
        self.termination.is_none()
    }

    /// Continuous phase of component `axis` about the origin.
    pub fn unwrapped_phase(&self, axis: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.points.len());
        let mut acc = self.points[0].position[axis].arg();
        out.push(acc);
        for w in self.points.windows(2) {
            acc += (w[1].position[axis] / w[0].position[axis]).arg();
            out.push(acc);
        }
        out
    }

    pub fn write_csv<W: Write>(&self, out: W, header: Option<&ReportHeader>) -> Result<()> {
        let d = self.points[0].position.dim();
        let mut columns = vec!["t".to_string()];
        for k in 0..d {
            columns.push(format!("re(x{k})"));
            columns.push(format!("im(x{k})"));
        }
        for k in 0..d {
            columns.push(format!("re(p{k})"));
            columns.push(format!("im(p{k})"));
        }
        let base = header.cloned().unwrap_or_default();
        let header = base.with("scheme", format!("{:?}", self.scheme).to_lowercase()).with("dt", self.dt);
        let rows = self.points.iter().map(|pt| {
            let mut row = vec![num(pt.t)];
            for c in pt.position.iter().chain(pt.momentum.iter()) {
                row.push(num(c.re));
                row.push(num(c.im));
            }
            row
        });
        write_csv(out, Some(&header), &columns, rows)
    }
}

enum StepOutcome {
    Continue,
    Halt(TerminationReason),
}

/// Shared stepping loop. `advance` makes one step of size `h` from `(t, y)`
/// and returns the new state with an optional scaled error estimate.
struct Stepper<'a> {
    field: &'a dyn MomentumField,
    config: &'a IntegratorConfig,
}

impl Stepper<'_> {
    /// Rejects steps that land inside the node guard or that move more than
    /// half the distance to the nearest singularity.
    fn guard(&self, from: &ComplexVector, to: &ComplexVector) -> bool {
        if !to.is_finite() {
            return false;
        }
        let Some(d_from) = self.field.distance_to_singularity(from) else {
            return true;
        };
        let d_to = self.field.distance_to_singularity(to).unwrap_or(f64::INFINITY);
        d_to >= self.field.node_guard() && (*to - *from).norm() <= 0.5 * d_from
    }

    fn run<S, F, P>(&self, y0: S, rhs: F, position: P) -> (Vec<(f64, S)>, usize, usize, Option<Termination>)
    where
        S: OdeState,
        F: Fn(f64, &S) -> Result<S>,
        P: Fn(&S) -> ComplexVector,
    {
        let cfg = self.config;
        let mut records = vec![(0.0, y0)];
        let (mut accepted, mut rejected) = (0usize, 0usize);
        let mut t = 0.0;
        let mut y = y0;
        let mut h = cfg.dt.min(cfg.t_end);
        let mut since_record = 0usize;
        let halt = |t: f64, reason| Some(Termination { reason, t });
        loop {
            if t >= cfg.t_end {
                break;
            }
            let outcome = match cfg.scheme {
                Scheme::Rk4 => {
                    let n = accepted + 1;
                    let t_next = (n as f64 * cfg.dt).min(cfg.t_end);
                    let t_next = if cfg.t_end - t_next < 1e-9 * cfg.dt { cfg.t_end } else { t_next };
                    match rk4_step(&rhs, t, &y, t_next - t) {
                        Ok(next) if self.guard(&position(&y), &position(&next)) => {
                            t = t_next;
                            y = next;
                            accepted += 1;
                            StepOutcome::Continue
                        }
                        Ok(_) | Err(Error::NodeEvaluation { .. }) => {
                            StepOutcome::Halt(TerminationReason::NearSingularity)
                        }
                        Err(_) => StepOutcome::Halt(TerminationReason::FieldUnavailable),
                    }
                }
                Scheme::Rkf45 => {
                    h = h.min(cfg.dt_max).min(cfg.t_end - t);
                    if h < cfg.dt_min && cfg.t_end - t > cfg.dt_min {
                        StepOutcome::Halt(TerminationReason::StepUnderflow)
                    } else {
                        match rkf45_step(&rhs, t, &y, h, cfg.abs_tol, cfg.rel_tol) {
                            Ok((next, err)) if err <= 1.0 && self.guard(&position(&y), &position(&next)) => {
                                t += h;
                                y = next;
                                accepted += 1;
                                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                                h *= grow;
                                StepOutcome::Continue
                            }
                            Ok((_, err)) => {
                                rejected += 1;
                                let shrink = if err.is_finite() && err > 1.0 {
                                    (0.9 * err.powf(-0.25)).clamp(0.1, 0.5)
                                } else {
                                    0.25
                                };
                                h *= shrink;
                                StepOutcome::Continue
                            }
                            Err(Error::NodeEvaluation { .. }) => {
                                rejected += 1;
                                h *= 0.25;
                                StepOutcome::Continue
                            }
                            Err(_) => StepOutcome::Halt(TerminationReason::FieldUnavailable),
                        }
                    }
                }
            };
            match outcome {
                StepOutcome::Continue => {}
                StepOutcome::Halt(reason) => {
                    if records.last().map(|r| r.0) != Some(t) {
                        records.push((t, y));
                    }
                    return (records, accepted, rejected, halt(t, reason));
                }
            }
            if records.last().map(|r| r.0) != Some(t) {
                since_record += 1;
                if since_record >= cfg.record_every || t >= cfg.t_end {
                    records.push((t, y));
                    since_record = 0;
                }
            }
        }
        (records, accepted, rejected, None)
    }
}

fn winding(points: &[PhasePoint], center: f64) -> f64 {
    let c = C64::new(center, 0.0);
    points.windows(2).map(|w| ((w[1].position[0] - c) / (w[0].position[0] - c)).arg()).sum::<f64>() / TAU
}

fn winding_center(field: &dyn MomentumField, x0: &ComplexVector) -> f64 {
    field
        .singularities()
        .iter()
        .filter(|s| s.axis == 0)
        .min_by(|a, b| a.distance(x0).total_cmp(&b.distance(x0)))
        .map_or(0.0, |s| s.at)
}

/// Field-driven evolution `dr/dt = p(r) / m`. Never fails once the start
/// point is valid: a trajectory that runs into a singularity (or an adaptive
/// step that underflows) is returned with `termination` set.
pub fn evolve_partial(
    field: &dyn MomentumField,
    x0: &ComplexVector,
    config: &IntegratorConfig,
    units: &UnitSystem,
) -> Result<Trajectory> {
    config.validate()?;
    units.validate()?;
    field.check(x0)?;
    let inv_m = 1.0 / units.mass;
    let rhs = |_t: f64, r: &ComplexVector| -> Result<ComplexVector> { Ok(field.momentum(r)? * inv_m) };
    let stepper = Stepper { field, config };
    let (records, accepted, rejected, termination) = stepper.run(*x0, rhs, |r| *r);
    let points = records
        .into_iter()
        .map(|(t, r)| -> Result<PhasePoint> { Ok(PhasePoint { t, position: r, momentum: field.momentum(&r)? }) })
        .collect::<Result<Vec<_>>>()?;
    let center = winding_center(field, x0);
    Ok(Trajectory {
        winding_turns: winding(&points, center),
        winding_center: center,
        points,
        scheme: config.scheme,
        dt: config.dt,
        accepted_steps: accepted,
        rejected_steps: rejected,
        termination,
    })
}

/// Like [`evolve_partial`] but turns an early stop into an error carrying the
/// last good phase point.
pub fn evolve(
    field: &dyn MomentumField,
    x0: &ComplexVector,
    config: &IntegratorConfig,
    units: &UnitSystem,
) -> Result<Trajectory> {
    let traj = evolve_partial(field, x0, config, units)?;
    match traj.termination {
        None => Ok(traj),
        Some(Termination { reason: TerminationReason::StepUnderflow, t }) => Err(Error::StepUnderflow { t }),
        Some(Termination { reason: TerminationReason::NearSingularity, .. }) => {
            Err(Error::TrajectoryNearSingularity { last: Box::new(*traj.last()) })
        }
        Some(Termination { reason: TerminationReason::FieldUnavailable, t }) => Err(Error::FieldUnavailable { t }),
    }
}

/// Co-integrates `dr/dt = p/m` and `dp/dt = F(r)` with `p(0) = field(x0)`.
///
/// The Laplacian in the force is read from the field at the current position,
/// so on a stationary field this tracks [`evolve`]. Experimental: the stored
/// momentum is free to drift away from the field.
pub fn evolve_coupled(
    field: &dyn MomentumField,
    potential: &dyn PotentialField,
    x0: &ComplexVector,
    config: &IntegratorConfig,
    units: &UnitSystem,
) -> Result<Trajectory> {
    config.validate()?;
    field.check(x0)?;
    let y0 = PhaseState { position: *x0, momentum: field.momentum(x0)? };
    let rhs = |_t: f64, s: &PhaseState| -> Result<PhaseState> {
        Ok(PhaseState {
            position: s.momentum * (1.0 / units.mass),
            momentum: force_at(field, potential, &s.position, units)?,
        })
    };
    let stepper = Stepper { field, config };
    let (records, accepted, rejected, termination) = stepper.run(y0, rhs, |s| s.position);
    let points: Vec<PhasePoint> = records
        .into_iter()
        .map(|(t, s)| PhasePoint { t, position: s.position, momentum: s.momentum })
        .collect();
    let center = winding_center(field, x0);
    Ok(Trajectory {
        winding_turns: winding(&points, center),
        winding_center: center,
        points,
        scheme: config.scheme,
        dt: config.dt,
        accepted_steps: accepted,
        rejected_steps: rejected,
        termination,
    })
}
