use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use momentum_core::dynamics::{evolve_coupled, evolve_partial, Trajectory};
use momentum_core::energy::{energy_at, energy_constancy_scan};
use momentum_core::ensemble::{compare_density_to_born, density_histogram, evolve_ensemble};
use momentum_core::io::{write_json, ReportHeader};
use momentum_core::oracle::solve_schrodinger_1d;
use momentum_core::reconstruct::{reconstruct_wavefunction, straight_path};
use momentum_core::two_electron::{
    component_product, delta_e, pair_acceleration_residual, force_norm_invariant, matrix_delta_e, paired_product_deviation,
    total_momentum_drift, InvariantSeries, MomentumHistory, SpinningPair,
};
use momentum_core::{ComplexVector, C64};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::*;
use crate::error::CliError;
use crate::plot::{emit_plot, Plot, Series, Style};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    InvariantViolation,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, passed: value <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub status: Status,
    pub checks: Vec<Check>,
    pub results: Value,
    pub artifacts: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

struct Outputs {
    dir: PathBuf,
    format: Format,
    svg: bool,
    header: ReportHeader,
    files: Vec<String>,
}

impl Outputs {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        self.files.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    /// Writes `stem.csv` or `stem.json` depending on the configured format.
    fn data<T: Serialize>(
        &mut self,
        stem: &str,
        body: &T,
        csv: impl FnOnce(&mut BufWriter<File>, &ReportHeader) -> momentum_core::Result<()>,
    ) -> Result<(), CliError> {
        let header = self.header.clone();
        match self.format {
            Format::Csv => {
                let mut w = self.create(&format!("{stem}.csv"))?;
                csv(&mut w, &header)?;
                w.flush()?;
            }
            Format::Json => {
                let mut w = self.create(&format!("{stem}.json"))?;
                write_json(&mut w, Some(&header), body)?;
                w.flush()?;
            }
        }
        Ok(())
    }

    fn plot(&mut self, stem: &str, plot: Plot) -> Result<(), CliError> {
        if !self.svg {
            return Ok(());
        }
        let svg = emit_plot(&plot)?;
        let mut w = self.create(&format!("{stem}.svg"))?;
        w.write_all(svg.as_bytes())?;
        w.flush()?;
        Ok(())
    }
}

struct Outcome {
    checks: Vec<Check>,
    results: Value,
}

fn c64(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Runs one scenario. `summary.json` is written whenever the output directory
/// can be created, including when the scenario itself fails.
pub fn execute(cfg: &RunConfig) -> Result<RunReport, CliError> {
    cfg.units.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let header = ReportHeader {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: crate::config_hash(cfg),
        seed: cfg.seed(),
        extra: vec![("scenario".into(), cfg.scenario.name().into())],
    };
    let mut out = Outputs { dir: cfg.output_dir.clone(), format: cfg.format, svg: cfg.svg, header, files: vec![] };
    let outcome = match &cfg.scenario {
        Scenario::FieldScan(s) => field_scan(cfg, s, &mut out),
        Scenario::Evolve(s) => evolve(cfg, s, &mut out),
        Scenario::Ensemble(s) => ensemble(cfg, s, &mut out),
        Scenario::Reconstruct(s) => reconstruct(cfg, s, &mut out),
        Scenario::Twobody(s) => twobody(cfg, s, &mut out),
        Scenario::Oracle(s) => oracle(cfg, s, &mut out),
    };
    let mut report = match outcome {
        Ok(o) => RunReport {
            scenario: cfg.scenario.name().into(),
            status: if o.checks.iter().all(|c| c.passed) { Status::Ok } else { Status::InvariantViolation },
            checks: o.checks,
            results: o.results,
            artifacts: vec![],
            error: None,
        },
        Err(e) => RunReport {
            scenario: cfg.scenario.name().into(),
            status: Status::Error,
            checks: vec![],
            results: Value::Null,
            artifacts: vec![],
            error: Some(e.to_string()),
        },
    };
    report.artifacts = out.files.clone();
    report.artifacts.push("summary.json".into());
    let mut w = BufWriter::new(File::create(cfg.output_dir.join("summary.json"))?);
    write_json(&mut w, Some(&out.header), &report)?;
    w.flush()?;
    Ok(report)
}

fn field_scan(cfg: &RunConfig, s: &FieldScanConfig, out: &mut Outputs) -> Result<Outcome, CliError> {
    let built = s.field.build(&cfg.units)?;
    let potential = s.potential.build(&cfg.units);
    let scan = energy_constancy_scan(built.field.as_ref(), &potential, &s.region, s.count, s.tolerance, &cfg.units)?;
    out.data("scan", &scan, |w, h| scan.write_csv(w, Some(h)))?;
    let pts: Vec<(f64, f64)> = scan
        .samples
        .iter()
        .enumerate()
        .map(|(i, p)| (if p.position.len() == 1 { p.position[0] } else { i as f64 }, p.energy.re))
        .collect();
    out.plot(
        "scan",
        Plot {
            title: "local energy".into(),
            x_label: if built.field.dim() == 1 { "x".into() } else { "sample".into() },
            y_label: "re(E)".into(),
            log_y: false,
            series: vec![Series::new("re(E)", Style::Scatter, pts)],
        },
    )?;
    let checks = vec![Check::at_most("energy_constancy", scan.max_deviation, s.tolerance)];
    Ok(Outcome {
        checks,
        results: json!({
            "mean_energy": c64(scan.mean_energy),
            "max_deviation": scan.max_deviation,
            "worst_point": scan.worst_point,
            "worst_energy": c64(scan.worst_energy),
            "samples": scan.samples.len(),
            "skipped": scan.skipped,
        }),
    })
}

fn trajectory_plot(traj: &Trajectory) -> Plot {
    let re = traj.points.iter().map(|p| (p.t, p.position[0].re)).collect();
    let im = traj.points.iter().map(|p| (p.t, p.position[0].im)).collect();
    Plot {
        title: "trajectory".into(),
        x_label: "t".into(),
        y_label: "x".into(),
        log_y: false,
        series: vec![Series::new("re(x)", Style::Line, re), Series::new("im(x)", Style::Line, im)],
    }
}

fn evolve(cfg: &RunConfig, s: &EvolveConfig, out: &mut Outputs) -> Result<Outcome, CliError> {
    let built = s.field.build(&cfg.units)?;
    let field = built.field.as_ref();
    let potential = s.potential.build(&cfg.units);
    let traj = match s.mode {
        EvolveMode::Field => evolve_partial(field, &s.x0, &s.integrator, &cfg.units)?,
        EvolveMode::Coupled => evolve_coupled(field, &potential, &s.x0, &s.integrator, &cfg.units)?,
    };
    let e0 = energy_at(field, &potential, &traj.points[0].position, &cfg.units)?;
    let mut drift: f64 = 0.0;
    for pt in &traj.points {
        if let Ok(e) = energy_at(field, &potential, &pt.position, &cfg.units) {
            drift = drift.max((e - e0).norm());
        }
    }
    let displacement = traj.points.iter().map(|p| (p.position - s.x0).norm()).fold(0.0, f64::max);
    out.data("trajectory", &traj, |w, h| traj.write_csv(w, Some(h)))?;
    out.plot("trajectory", trajectory_plot(&traj))?;
    let mut checks = vec![Check::at_most("energy_drift", drift, s.energy_tolerance)];
    if s.require_completion {
        let stopped_at = traj.termination.map_or(s.integrator.t_end, |t| t.t);
        checks.push(Check {
            name: "completed".into(),
            value: stopped_at,
            tolerance: s.integrator.t_end,
            passed: traj.completed(),
        });
    }
    let last = traj.last();
    Ok(Outcome {
        checks,
        results: json!({
            "scheme": traj.scheme,
            "dt": traj.dt,
            "accepted_steps": traj.accepted_steps,
            "rejected_steps": traj.rejected_steps,
            "termination": traj.termination,
            "final": last,
            "energy": c64(e0),
            "energy_drift": drift,
            "max_displacement": displacement,
            "winding_turns": traj.winding_turns,
        }),
    })
}

fn ensemble(cfg: &RunConfig, s: &EnsembleConfig, out: &mut Outputs) -> Result<Outcome, CliError> {
    let built = s.field.build(&cfg.units)?;
    let potential = s.potential.build(&cfg.units);
    let result = evolve_ensemble(built.field.as_ref(), &potential, &s.ensemble, &cfg.units)?;
    let summary = result.summary();
    let times = if s.times.is_empty() { vec![s.ensemble.integrator.t_end] } else { s.times.clone() };
    let mut histograms = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        let mut hist = density_histogram(&result, t, s.bins)?;
        let comparison = match &built.psi {
            Some(psi) if hist.binned() > 0 => {
                let cmp = compare_density_to_born(&hist, &|x| psi(x))?;
                hist.reference = Some(cmp.born.clone());
                Some(cmp)
            }
            _ => None,
        };
        let stem = format!("histogram_{i}");
        out.data(&stem, &hist, |w, h| hist.write_csv(w, Some(h)))?;
        let width = s.bins.width();
        let total = hist.binned().max(1) as f64;
        let centres = hist.edges.windows(2).map(|e| 0.5 * (e[0] + e[1]));
        let mut series = vec![Series::new(
            "ensemble",
            Style::Bars,
            centres.clone().zip(&hist.counts).map(|(x, &c)| (x, c as f64 / total / width)).collect(),
        )];
        if let Some(born) = &hist.reference {
            series.push(Series::new("|psi|^2", Style::Line, centres.zip(born).map(|(x, b)| (x, b / width)).collect()));
        }
        out.plot(
            &stem,
            Plot { title: format!("density at t = {t}"), x_label: "re(x)".into(), y_label: "density".into(), log_y: false, series },
        )?;
        histograms.push(json!({
            "t": t,
            "file_stem": stem,
            "binned": hist.binned(),
            "terminated": hist.terminated,
            "out_of_range": hist.out_of_range,
            "off_axis": hist.off_axis,
            "born_l1": comparison.as_ref().map(|c| c.l1),
            "born_jensen_shannon": comparison.as_ref().map(|c| c.jensen_shannon),
        }));
    }
    if s.dump_trajectories {
        let mut w = out.create("trajectories.csv")?;
        result.write_trajectories_csv(&mut w, Some(&out.header))?;
        w.flush()?;
    }
    let checks = vec![Check::at_most("energy_drift", summary.max_energy_drift, s.energy_tolerance)];
    Ok(Outcome { checks, results: json!({ "summary": summary, "histograms": histograms }) })
}

fn reconstruct(cfg: &RunConfig, s: &ReconstructConfig, out: &mut Outputs) -> Result<Outcome, CliError> {
    let built = s.field.build(&cfg.units)?;
    let path = match &s.path {
        PathSpec::Straight { from, to, count } => {
            if *count < 2 {
                return Err(CliError::Usage("path needs at least 2 points".into()));
            }
            straight_path(*from, *to, *count)
        }
        PathSpec::Points { points } => points.clone(),
    };
    let a = s.normalization.map(|[re, im]| C64::new(re, im));
    let samples = reconstruct_wavefunction(built.field.as_ref(), &path, a, &cfg.units)?;
    let columns: Vec<String> =
        ["re(x)", "im(x)", "re(psi)", "im(psi)", "re(phase)", "im(phase)"].iter().map(|s| s.to_string()).collect();
    out.data("wavefunction", &samples, |w, h| {
        let rows = samples.nodes.iter().zip(&samples.values).zip(&samples.phase_integral).map(|((x, v), ph)| {
            [x[0].re, x[0].im, v.re, v.im, ph.re, ph.im].iter().map(|f| f.to_string()).collect()
        });
        momentum_core::io::write_csv(w, Some(h), &columns, rows)
    })?;
    out.plot(
        "wavefunction",
        Plot {
            title: "reconstructed wavefunction".into(),
            x_label: "path point".into(),
            y_label: "psi".into(),
            log_y: false,
            series: vec![
                Series::new("re(psi)", Style::Line, samples.values.iter().enumerate().map(|(i, v)| (i as f64, v.re)).collect()),
                Series::new("im(psi)", Style::Line, samples.values.iter().enumerate().map(|(i, v)| (i as f64, v.im)).collect()),
            ],
        },
    )?;
    let mut checks = Vec::new();
    let mut max_rel = None;
    let real_path = path.iter().all(|r| r.dim() == 1 && r.max_imag() == 0.0);
    if let (Some(psi), true) = (&built.psi, real_path) {
        let x0 = path[0][0].re;
        let anchor = psi(x0);
        let mut worst: f64 = 0.0;
        for (r, v) in path.iter().zip(&samples.values) {
            let expected = psi(r[0].re) / anchor * samples.normalization;
            worst = worst.max((v - expected).norm() / expected.norm());
        }
        checks.push(Check::at_most("reconstruction_error", worst, s.tolerance));
        max_rel = Some(worst);
    }
    Ok(Outcome {
        checks,
        results: json!({
            "points": path.len(),
            "final_ratio": c64(samples.ratio(path.len() - 1)),
            "max_relative_error": max_rel,
        }),
    })
}

fn drift_plot(series: &[&InvariantSeries]) -> Plot {
    Plot {
        title: "invariant drift".into(),
        x_label: "t".into(),
        y_label: "|value - mean|".into(),
        log_y: true,
        series: series
            .iter()
            .map(|s| {
                Series::new(
                    s.name.clone(),
                    Style::Line,
                    s.t.iter().zip(&s.values).map(|(t, v)| (*t, (v - s.mean).norm())).collect(),
                )
            })
            .collect(),
    }
}

fn write_series(out: &mut Outputs, s: &InvariantSeries) -> Result<(), CliError> {
    out.data(&s.name.clone(), s, |w, h| s.write_csv(w, Some(h)))
}

fn twobody(cfg: &RunConfig, s: &TwobodyConfig, out: &mut Outputs) -> Result<Outcome, CliError> {
    let tol = s.tolerances;
    match &s.source {
        TwobodySource::Spinning { p1_0, p2_0, radius, gamma, mass } => {
            let pair = SpinningPair::new(
                ComplexVector::from_real(p1_0),
                ComplexVector::from_real(p2_0),
                *radius,
                *gamma,
                *mass,
            )?;
            let mut history = MomentumHistory::from_source(&pair, 0.0, s.dt, s.samples)?;
            if s.derivatives == DerivativeSource::Stencil {
                history = history.without_exact_derivatives();
            }
            let total = total_momentum_drift(&history);
            let force = force_norm_invariant(&history);
            write_series(out, &total)?;
            write_series(out, &force.series)?;
            let residuals = (0..history.dim())
                .map(|k| Ok(pair_acceleration_residual(&history, k)?.max_abs))
                .collect::<Result<Vec<f64>, CliError>>()?;
            let (de, product) = match (delta_e(&history, &cfg.units), component_product(&history)) {
                (Ok(de), Ok(p)) => {
                    write_series(out, &de)?;
                    write_series(out, &p)?;
                    (json!({ "max_abs": de.max_abs, "mean": c64(de.mean) }), json!({ "mean": c64(p.mean), "max_drift": p.max_drift }))
                }
                (Err(e), _) | (_, Err(e)) => (json!({ "unavailable": e.to_string() }), json!({ "unavailable": e.to_string() })),
            };
            out.plot("invariants", drift_plot(&[&total, &force.series]))?;
            let checks = vec![
                Check::at_most("momentum_conservation", total.max_abs, tol.conservation),
                Check::at_most("force_norm_constancy", force.series.max_drift, tol.force_norm),
            ];
            Ok(Outcome {
                checks,
                results: json!({
                    "force_norm": force.series.mean.re,
                    "expected_force_norm": 2.0 * (mass * radius * gamma * gamma).powi(2),
                    "dd": force.dd,
                    "exact_derivatives": force.exact_derivatives,
                    "momentum_drift": total.max_abs,
                    "pair_acceleration_residual": residuals,
                    "delta_e": de,
                    "component_product": product,
                }),
            })
        }
        TwobodySource::Rotation { first, second } => {
            let times: Vec<f64> = (0..s.samples).map(|j| j as f64 * s.dt).collect();
            let m = matrix_delta_e(first, second, &times, &cfg.units)?;
            let identity = paired_product_deviation(first, second, &times);
            write_series(out, &m)?;
            out.plot(
                "matrix_delta_e",
                Plot {
                    title: "matrix energy difference".into(),
                    x_label: "t".into(),
                    y_label: "|dE|".into(),
                    log_y: false,
                    series: vec![Series::new("|dE|", Style::Line, m.t.iter().zip(&m.values).map(|(t, v)| (*t, v.re)).collect())],
                },
            )?;
            let checks = vec![
                Check::at_most("matrix_delta_e", m.max_abs, tol.matrix),
                Check::at_most("paired_product_identity", identity, tol.matrix),
            ];
            Ok(Outcome { checks, results: json!({ "matrix_delta_e_max": m.max_abs, "identity_deviation": identity }) })
        }
    }
}

fn oracle(cfg: &RunConfig, s: &OracleConfig, out: &mut Outputs) -> Result<Outcome, CliError> {
    let potential = s.potential.build(&cfg.units);
    let sol = solve_schrodinger_1d(&potential, s.grid, s.states, &cfg.units)?;
    out.data("eigenstates", &sol, |w, h| sol.write_csv(w, Some(h)))?;
    out.plot(
        "eigenstates",
        Plot {
            title: "eigenstates".into(),
            x_label: "x".into(),
            y_label: "psi".into(),
            log_y: false,
            series: sol
                .states
                .iter()
                .enumerate()
                .map(|(n, psi)| {
                    Series::new(format!("n = {n}"), Style::Line, psi.iter().enumerate().map(|(j, v)| (sol.grid.x(j), *v)).collect())
                })
                .collect(),
        },
    )?;
    let mut checks = Vec::new();
    if s.potential == PotentialSpec::Harmonic {
        let hw = cfg.units.hbar * cfg.units.omega;
        let worst = sol
            .energies
            .iter()
            .enumerate()
            .map(|(n, e)| (e - hw * (n as f64 + 0.5)).abs())
            .fold(0.0, f64::max);
        checks.push(Check::at_most("harmonic_levels", worst, s.tolerance));
    }
    Ok(Outcome { checks, results: json!({ "energies": sol.energies, "grid": sol.grid }) })
}
