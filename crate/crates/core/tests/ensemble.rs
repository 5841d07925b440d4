use momentum_core::dynamics::IntegratorConfig;
use momentum_core::ensemble::{
    density_histogram, evolve_ensemble, BinSpec, EnsembleResult, EnsembleSpec, InitialDistribution, SamplingRegion,
};
use momentum_core::fields::QhoField;
use momentum_core::io::write_json;
use momentum_core::potential::PolynomialPotential;
use momentum_core::{Error, SeedSpec, UnitSystem};
use proptest::prelude::*;

fn spec(count: usize, first_index: u64, seed: u64) -> EnsembleSpec {
    EnsembleSpec {
        count,
        region: SamplingRegion::interval(0.3, 3.5),
        distribution: InitialDistribution::Uniform,
        seed: SeedSpec::new(seed),
        first_index,
        integrator: IntegratorConfig::rk4(1e-2, 2.0),
    }
}

fn run(spec: &EnsembleSpec) -> EnsembleResult {
    let u = UnitSystem::natural();
    let field = QhoField::new(1, u).unwrap();
    evolve_ensemble(&field, &PolynomialPotential::harmonic(&u), spec, &u).unwrap()
}

const BINS: BinSpec = BinSpec { lo: -3.0, hi: 3.0, count: 30 };

#[test]
fn merged_halves_equal_the_whole() {
    let whole = run(&spec(300, 0, 5));
    let merged = run(&spec(120, 0, 5)).merge(run(&spec(180, 120, 5))).unwrap();
    for t in [0.0, 0.7, 2.0] {
        let a = density_histogram(&whole, t, BINS).unwrap();
        let b = density_histogram(&merged, t, BINS).unwrap();
        assert_eq!(a.counts, b.counts);
        assert_eq!((a.terminated, a.out_of_range, a.off_axis), (b.terminated, b.out_of_range, b.off_axis));
    }
    let (sa, sb) = (whole.summary(), merged.summary());
    assert_eq!((sa.completed, sa.total_steps), (sb.completed, sb.total_steps));
    assert_eq!(sa.max_energy_drift, sb.max_energy_drift);
}

#[test]
fn aggregates_ignore_record_order() {
    let a = run(&spec(200, 0, 9));
    let mut shuffled = a.clone();
    shuffled.records.reverse();
    shuffled.records.rotate_left(37);
    let hist_a = density_histogram(&a, 1.0, BINS).unwrap();
    let hist_b = density_histogram(&shuffled, 1.0, BINS).unwrap();
    assert_eq!(hist_a, hist_b);
    let (sa, sb) = (a.summary(), shuffled.summary());
    assert_eq!(sa.max_energy_drift, sb.max_energy_drift);
    assert_eq!(sa.total_steps, sb.total_steps);
}

#[test]
fn fixed_point_ensemble_stays_in_one_bin() {
    let u = UnitSystem::natural();
    let field = QhoField::new(1, u).unwrap();
    let mut s = spec(50, 0, 1);
    // a region narrower than one bin around x = 1
    s.region = SamplingRegion::interval(1.0, 1.0 + 1e-12);
    let res = evolve_ensemble(&field, &PolynomialPotential::harmonic(&u), &s, &u).unwrap();
    let hist = density_histogram(&res, 2.0, BINS).unwrap();
    assert_eq!(hist.occupied_bins(), 1);
    assert_eq!(hist.binned(), 50);
}

#[test]
fn seed_change_changes_the_sample() {
    let a = density_histogram(&run(&spec(200, 0, 1)), 1.0, BINS).unwrap();
    let b = density_histogram(&run(&spec(200, 0, 2)), 1.0, BINS).unwrap();
    assert_ne!(a.counts, b.counts);
}

#[test]
fn time_outside_run_is_rejected() {
    let res = run(&spec(10, 0, 3));
    assert!(matches!(density_histogram(&res, 2.5, BINS), Err(Error::TimeOutOfRange { .. })));
    assert!(matches!(res.measure(-1.0, 0), Err(Error::TimeOutOfRange { .. })));
    let picked = res.measure(1.0, 42).unwrap();
    assert!((picked.t - 1.0).abs() < 1e-9);
    assert_eq!(picked, res.measure(1.0, 42).unwrap());
}

#[test]
fn reports_serialize() {
    let res = run(&spec(20, 0, 4));
    let hist = density_histogram(&res, 1.0, BINS).unwrap();
    let mut csv = Vec::new();
    hist.write_csv(&mut csv, None).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("# tool_version"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + BINS.count);
    let mut json = Vec::new();
    write_json(&mut json, None, &res.summary()).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(v["count"], 20);
    let mut dump = Vec::new();
    res.write_trajectories_csv(&mut dump, None).unwrap();
    let rows = String::from_utf8(dump).unwrap().lines().count();
    assert_eq!(rows, 1 + res.records.iter().map(|r| r.trajectory.points.len()).sum::<usize>());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn histogram_accounts_for_every_trajectory(seed in any::<u64>(), count in 1usize..60, t in 0.0f64..2.0, lo in -3.0f64..0.0, width in 0.5f64..4.0) {
        let res = run(&spec(count, 0, seed));
        let bins = BinSpec { lo, hi: lo + width, count: 12 };
        let h = density_histogram(&res, t, bins).unwrap();
        prop_assert_eq!(h.binned() as usize + h.out_of_range, h.total - h.terminated);
        prop_assert_eq!(h.total, count);
        let again = density_histogram(&run(&spec(count, 0, seed)), t, bins).unwrap();
        prop_assert_eq!(h, again);
    }
}
