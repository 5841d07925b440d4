use momentum_core::fields::{MomentumField, QhoField};
use momentum_core::io::write_json;
use momentum_core::oracle::{field_from_grid, solve_schrodinger_1d, Grid1D};
use momentum_core::potential::PolynomialPotential;
use momentum_core::{ComplexVector, Error, UnitSystem};

#[test]
fn grid_fields_match_closed_form_away_from_nodes() {
    let u = UnitSystem::natural();
    let grid = Grid1D::new(-8.0, 8.0, 1601).unwrap();
    let h = grid.spacing();
    let sol = solve_schrodinger_1d(&PolynomialPotential::harmonic(&u), grid, 3, &u).unwrap();
    for level in 0..3u32 {
        let closed = QhoField::new(level, u).unwrap();
        let field = field_from_grid(&sol, level as usize, &u).unwrap();
        let mut worst: f64 = 0.0;
        for j in 0..=600 {
            let r = ComplexVector::real_scalar(-3.0 + 6.0 * j as f64 / 600.0);
            if closed.distance_to_singularity(&r).is_some_and(|d| d < 5.0 * h) {
                continue;
            }
            let a = closed.momentum(&r).unwrap()[0];
            let b = field.momentum(&r).unwrap()[0];
            worst = worst.max((a - b).norm() / a.norm().max(1.0));
        }
        assert!(worst < 1e-3, "level {level}: {worst}");
    }
}

#[test]
fn eigenvalues_converge_at_second_order() {
    let u = UnitSystem::natural();
    let pot = PolynomialPotential::harmonic(&u);
    let err = |m: usize| {
        let sol = solve_schrodinger_1d(&pot, Grid1D::new(-10.0, 10.0, m).unwrap(), 3, &u).unwrap();
        sol.energies.iter().enumerate().map(|(n, e)| (e - (n as f64 + 0.5)).abs()).collect::<Vec<_>>()
    };
    let (coarse, fine) = (err(401), err(801));
    for n in 0..3 {
        let ratio = coarse[n] / fine[n];
        assert!((3.5..4.5).contains(&ratio), "state {n}: ratio {ratio}");
    }
}

#[test]
fn grid_field_refuses_points_near_nodes_and_outside() {
    let u = UnitSystem::natural();
    let sol = solve_schrodinger_1d(&PolynomialPotential::harmonic(&u), Grid1D::new(-6.0, 6.0, 601).unwrap(), 2, &u)
        .unwrap();
    let field = field_from_grid(&sol, 1, &u).unwrap();
    assert_eq!(field.singularities().len(), 1);
    assert!(field.singularities()[0].at.abs() < 1e-9);
    assert!(matches!(field.momentum(&ComplexVector::real_scalar(0.0)), Err(Error::NodeEvaluation { .. })));
    assert!(matches!(field.momentum(&ComplexVector::real_scalar(7.0)), Err(Error::OutsideGrid(_))));
}

#[test]
fn exports() {
    let u = UnitSystem::natural();
    let sol = solve_schrodinger_1d(&PolynomialPotential::zero(), Grid1D::new(0.0, 1.0, 64).unwrap(), 2, &u).unwrap();
    let mut csv = Vec::new();
    sol.write_csv(&mut csv, None).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.contains("x,psi0,psi1"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 65);
    let mut json = Vec::new();
    write_json(&mut json, None, &sol).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(v["grid"]["points"], 64);
    assert_eq!(v["energies"].as_array().unwrap().len(), 2);
}
