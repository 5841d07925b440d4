//! Acceptance criteria. Each test prints one PASS/FAIL line (visible with
//! `--nocapture`) before asserting.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;
use std::time::Instant;

use momentum_core::dynamics::{evolve, qho_analytic_x, stationarity_residual, IntegratorConfig};
use momentum_core::energy::{curl_residual, energy_constancy_scan, ScanRegion};
use momentum_core::ensemble::{
    compare_density_to_born, density_histogram, evolve_ensemble, BinSpec, EnsembleSpec, InitialDistribution,
    SamplingRegion,
};
use momentum_core::fields::{MomentumField, QhoField, SeparableField};
use momentum_core::oracle::{field_from_grid, solve_schrodinger_1d, Grid1D};
use momentum_core::potential::PolynomialPotential;
use momentum_core::reconstruct::{reconstruct_wavefunction, straight_path};
use momentum_core::two_electron::{
    component_product, delta_e, force_norm_invariant, matrix_delta_e, paired_product_deviation,
    total_momentum_drift, MomentumHistory, MomentumSource, Orientation, RotationMomentum, SpinningPair,
};
use momentum_core::{ComplexVector, SeedSpec, UnitSystem, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: u32, name: &str, pass: bool, detail: String) -> bool {
    println!("criterion {n:>2} {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    pass
}

fn units() -> UnitSystem {
    UnitSystem::natural()
}

fn random_points(seed: u64, count: usize, dim: usize, lo: f64, hi: f64) -> Vec<ComplexVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(lo..hi)).collect();
            ComplexVector::from_real(&v)
        })
        .collect()
}

#[test]
fn criterion_01_energy_equation() {
    let u = units();
    let field = QhoField::new(1, u).unwrap();
    let scan = energy_constancy_scan(
        &field,
        &PolynomialPotential::harmonic(&u),
        &ScanRegion::interval(0.1, 5.0),
        1000,
        1e-9,
        &u,
    )
    .unwrap();
    let mean_ok = (scan.mean_energy - C64::new(1.5, 0.0)).norm() < 1e-9;
    let pass = report(
        1,
        "energy equation",
        scan.passed && mean_ok && scan.samples.len() == 1000,
        format!("mean {:.12}, max deviation {:.2e}", scan.mean_energy.re, scan.max_deviation),
    );
    assert!(pass);
}

fn rk4_error(dt: f64) -> f64 {
    let u = units();
    let field = QhoField::new(1, u).unwrap();
    let x0 = ComplexVector::real_scalar(SQRT_2);
    let traj = evolve(&field, &x0, &IntegratorConfig::rk4(dt, 0.78), &u).unwrap();
    traj.points
        .iter()
        .map(|pt| (pt.position[0] - qho_analytic_x(C64::new(SQRT_2, 0.0), pt.t, &u).unwrap()).norm())
        .fold(0.0, f64::max)
}

#[test]
fn criterion_02_analytic_trajectory() {
    let err = rk4_error(1e-4);
    let coarse: Vec<f64> = [0.039, 0.0195, 0.00975].iter().map(|&dt| rk4_error(dt)).collect();
    let orders: Vec<f64> = coarse.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let order = orders[orders.len() - 1];
    let pass = report(
        2,
        "analytic trajectory",
        err < 1e-6 && (3.7..=4.3).contains(&order),
        format!("max error {err:.2e} at dt=1e-4, convergence exponent {order:.3} (all {orders:.3?})"),
    );
    assert!(pass);
}

#[test]
fn criterion_03_fixed_point() {
    let u = units();
    let field = QhoField::new(1, u).unwrap();
    let x0 = u.oscillator_length();
    let traj = evolve(&field, &ComplexVector::real_scalar(x0), &IntegratorConfig::rk4(1e-3, 10.0), &u).unwrap();
    let worst = traj.points.iter().map(|p| (p.position[0] - x0).norm()).fold(0.0, f64::max);
    let pass = report(
        3,
        "fixed point",
        worst < 1e-12 && (traj.last().t - 10.0).abs() < 1e-9,
        format!("max |x - x0| {worst:.2e} over {} steps", traj.accepted_steps),
    );
    assert!(pass);
}

#[test]
fn criterion_04_classical_limit() {
    let u = units();
    let field = QhoField::new(1, u).unwrap();
    let period = 2.0 * PI / u.omega;
    let traj = evolve(&field, &ComplexVector::real_scalar(100.0), &IntegratorConfig::rk4(1e-3, period), &u).unwrap();
    let radius_dev = traj.points.iter().map(|p| (p.position[0].norm() - 100.0).abs() / 100.0).fold(0.0, f64::max);
    let phase = traj.unwrapped_phase(0);
    let n = phase.len() as f64;
    let ts: Vec<f64> = traj.points.iter().map(|p| p.t).collect();
    let (mt, mp) = (ts.iter().sum::<f64>() / n, phase.iter().sum::<f64>() / n);
    let cov: f64 = ts.iter().zip(&phase).map(|(t, p)| (t - mt) * (p - mp)).sum();
    let var: f64 = ts.iter().map(|t| (t - mt).powi(2)).sum();
    let slope = cov / var;
    let slope_ok = ((slope - u.omega) / u.omega).abs() < 1e-3;
    let pass = report(
        4,
        "classical limit",
        radius_dev < 1e-4 && slope_ok,
        format!("max radial deviation {radius_dev:.6e} (limit 1e-4), phase slope {slope:.6}"),
    );
    assert!(pass);
}

#[test]
fn criterion_05_reconstruction() {
    let u = units();
    let field = QhoField::new(1, u).unwrap();
    let exact = |x: f64| x * (-x * x / 2.0).exp();
    let path = straight_path(0.5, 4.0, 351);
    let rec = reconstruct_wavefunction(&field, &path, Some(C64::new(exact(0.5), 0.0)), &u).unwrap();
    let worst = path
        .iter()
        .zip(&rec.values)
        .map(|(r, v)| {
            let e = exact(r[0].re);
            (v - C64::new(e, 0.0)).norm() / e
        })
        .fold(0.0, f64::max);
    let pass = report(5, "reconstruction", worst < 1e-8, format!("max relative error {worst:.2e}"));
    assert!(pass);
}

#[test]
fn criterion_06_curl_free() {
    let u = units();
    let factors: Vec<Arc<dyn MomentumField>> = vec![
        Arc::new(QhoField::new(1, u).unwrap()),
        Arc::new(QhoField::new(2, u).unwrap()),
        Arc::new(QhoField::new(0, u).unwrap()),
    ];
    let field = SeparableField::new(factors).unwrap();
    let mut worst: f64 = 0.0;
    let mut evaluated = 0;
    for r in random_points(6, 100, 3, -3.0, 3.0) {
        if field.distance_to_singularity(&r).unwrap_or(f64::INFINITY) < 1e-3 {
            continue;
        }
        worst = worst.max(curl_residual(&field, &r).unwrap());
        evaluated += 1;
    }
    let pass = report(
        6,
        "curl free",
        worst < 1e-10 && evaluated >= 95,
        format!("max curl residual {worst:.2e} at {evaluated} points"),
    );
    assert!(pass);
}

#[test]
fn criterion_07_stationarity() {
    let u = units();
    let potential = PolynomialPotential::harmonic(&u);
    let mut worst: f64 = 0.0;
    for level in [1, 2, 3] {
        let field = QhoField::new(level, u).unwrap();
        let mut evaluated = 0;
        for r in random_points(7 + level as u64, 100, 1, -4.0, 4.0) {
            if field.distance_to_singularity(&r).unwrap_or(f64::INFINITY) < 0.05 {
                continue;
            }
            let res = stationarity_residual(&field, &potential, &r, &u).unwrap();
            worst = worst.max(res.norm());
            evaluated += 1;
        }
        assert!(evaluated > 80);
    }
    let pass = report(7, "stationarity consistency", worst < 1e-9, format!("max residual {worst:.2e}"));
    assert!(pass);
}

#[test]
fn criterion_08_two_body_conservation() {
    let pair = SpinningPair::new(
        ComplexVector::from_real(&[0.4, -1.1]),
        ComplexVector::from_real(&[-0.2, 0.9]),
        1.3,
        2.0,
        1.0,
    )
    .unwrap();
    let history = MomentumHistory::from_source(&pair, 0.0, 1e-2, 1000).unwrap();
    let drift = total_momentum_drift(&history);
    let pass = report(8, "two-body conservation", drift.max_abs < 1e-12, format!("max drift {:.2e}", drift.max_abs));
    assert!(pass);
}

#[test]
fn criterion_09_correlation_invariant() {
    let pair = SpinningPair::centred(1.0, 2.0, 1.0).unwrap();
    let exact = force_norm_invariant(&MomentumHistory::from_source(&pair, 0.0, 1e-3, 2000).unwrap());
    let stencil =
        force_norm_invariant(&MomentumHistory::from_source(&pair, 0.0, 1e-3, 2000).unwrap().without_exact_derivatives());
    let pass = report(
        9,
        "correlation invariant",
        (exact.series.mean.re - 32.0).abs() < 1e-6
            && exact.series.max_drift < 1e-6
            && (stencil.series.mean.re - 32.0).abs() < 1e-4
            && stencil.series.max_drift < 1e-4,
        format!(
            "closed form mean {:.10} drift {:.2e}; stencil mean {:.10} drift {:.2e}; <d|d> {:.6}",
            exact.series.mean.re, exact.series.max_drift, stencil.series.mean.re, stencil.series.max_drift, exact.dd
        ),
    );
    assert!(pass);
}

struct PhasePair {
    c1: [C64; 2],
    c2: [C64; 2],
    beta: f64,
}

impl MomentumSource for PhasePair {
    fn momenta(&self, t: f64) -> (ComplexVector, ComplexVector) {
        let ph = C64::from_polar(1.0, self.beta * t);
        (
            ComplexVector::from_slice(&[self.c1[0] * ph, self.c1[1] / ph]),
            ComplexVector::from_slice(&[self.c2[0] / ph, self.c2[1] * ph]),
        )
    }
}

#[test]
fn criterion_10_exclusion_conditions() {
    let u = units();
    let constant = MomentumHistory::uniform(
        0.0,
        1e-2,
        vec![ComplexVector::from_slice(&[C64::new(0.0, 1.3), C64::new(0.0, -0.4)]); 50],
        vec![ComplexVector::from_slice(&[C64::new(0.0, 2.0), C64::new(0.0, 0.7)]); 50],
    )
    .unwrap();
    let de_const = delta_e(&constant, &u).unwrap();

    let phase = PhasePair {
        c1: [C64::new(1.0, 0.5), C64::new(-0.3, 2.0)],
        c2: [C64::new(0.8, -0.2), C64::new(1.5, 0.0)],
        beta: 0.9,
    };
    let h = MomentumHistory::from_source(&phase, 0.0, 1e-3, 1000).unwrap();
    let de_prod = delta_e(&h, &u).unwrap();
    let product = component_product(&h).unwrap();

    let times: Vec<f64> = (0..200).map(|j| j as f64 * 0.05).collect();
    let plus = RotationMomentum { p0: vec![1.2, -0.8, 2.5], alpha: 1.7, orientation: Orientation::Plus };
    let minus = RotationMomentum { p0: vec![0.6, 1.9, -1.1], alpha: 1.7, orientation: Orientation::Minus };
    let matrix = matrix_delta_e(&plus, &minus, &times, &u).unwrap();
    let identity_dev = paired_product_deviation(&plus, &minus, &times);

    let pass = report(
        10,
        "exclusion conditions",
        de_const.max_abs == 0.0 && de_prod.max_abs < 1e-10 && matrix.max_abs < 1e-12 && identity_dev < 1e-12,
        format!(
            "constant |dE| {:.1e}; constant-product |dE| {:.2e} (product drift {:.1e}); matrix |dE| {:.2e}; product vs identity {:.1e}",
            de_const.max_abs, de_prod.max_abs, product.max_drift, matrix.max_abs, identity_dev
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_11_oracle_cross_validation() {
    let u = units();
    let grid = Grid1D::new(-8.0, 8.0, 1601).unwrap();
    let qho = solve_schrodinger_1d(&PolynomialPotential::harmonic(&u), grid, 4, &u).unwrap();
    let e1_err = (qho.energies[1] - 1.5).abs();

    let closed = QhoField::new(1, u).unwrap();
    let grid_field = field_from_grid(&qho, 1, &u).unwrap();
    let mut field_err: f64 = 0.0;
    for j in 0..=400 {
        let x = -3.0 + 6.0 * j as f64 / 400.0;
        if x.abs() < 0.2 {
            continue;
        }
        let r = ComplexVector::real_scalar(x);
        let a = closed.momentum(&r).unwrap()[0];
        let b = grid_field.momentum(&r).unwrap()[0];
        field_err = field_err.max((a - b).norm() / a.norm().max(1.0));
    }

    let anharmonic = PolynomialPotential::anharmonic(&u, 0.1);
    let grid = Grid1D::new(-6.0, 6.0, 4001).unwrap();
    let ground = solve_schrodinger_1d(&anharmonic, grid, 1, &u).unwrap();
    let field = field_from_grid(&ground, 0, &u).unwrap();
    let scan = energy_constancy_scan(&field, &anharmonic, &ScanRegion::interval(-3.0, 3.0), 1000, 1e-4, &u).unwrap();

    let pass = report(
        11,
        "oracle cross-validation",
        e1_err < 1e-4 && field_err < 1e-3 && scan.passed,
        format!(
            "E1 error {e1_err:.2e}; field error {field_err:.2e}; anharmonic E0 {:.8} spread {:.2e}",
            ground.energies[0], scan.max_deviation
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_12_ensemble_determinism() {
    let u = units();
    let field = QhoField::new(1, u).unwrap();
    let potential = PolynomialPotential::harmonic(&u);
    let spec = |count| EnsembleSpec {
        count,
        region: SamplingRegion::interval(0.2, 3.0),
        distribution: InitialDistribution::Uniform,
        seed: SeedSpec::new(2024),
        first_index: 0,
        integrator: IntegratorConfig::rk4(1e-2, 1.0),
    };
    let bins = BinSpec { lo: -4.0, hi: 4.0, count: 40 };
    let a = evolve_ensemble(&field, &potential, &spec(500), &u).unwrap();
    let b = evolve_ensemble(&field, &potential, &spec(500), &u).unwrap();
    let identical = density_histogram(&a, 1.0, bins).unwrap() == density_histogram(&b, 1.0, bins).unwrap();

    let started = Instant::now();
    let big = evolve_ensemble(&field, &potential, &spec(10_000), &u).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let hist = density_histogram(&big, 1.0, bins).unwrap();
    let cmp = compare_density_to_born(&hist, &|x| field.psi(C64::new(x, 0.0))).unwrap();
    let summary = big.summary();
    let pass = report(
        12,
        "ensemble determinism",
        identical && elapsed < 10.0 && cmp.l1.is_finite() && cmp.jensen_shannon.is_finite(),
        format!(
            "identical {identical}; N=10^4 in {elapsed:.2}s ({} completed); L1 {:.4}, JS {:.4} (report only)",
            summary.completed, cmp.l1, cmp.jensen_shannon
        ),
    );
    assert!(pass);
}
