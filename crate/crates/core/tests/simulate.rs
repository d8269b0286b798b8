use nalgebra::DVector;
use proptest::prelude::*;

use switchopt::analysis::BisectionOptions;
use switchopt::linalg::eigvals_sym;
use switchopt::model::{ring_plant, single_mode_graph, SwitchingPath};
use switchopt::regulation::solve_regulator;
use switchopt::simulate::*;
use switchopt::synthesis::{bisect_synthesis, SynthesisOptions};
use switchopt::transforms::{FilterCoefficients, SectorSpec};

fn run_many(cl: &switchopt::model::SwitchedSystem, s: SectorSpec, lp: f64, d: usize, runs: usize, steps: usize, seed: u64) -> Vec<SimulationTrace> {
    let lifted = cl.kron_lift(d);
    let n = lifted.dims().0;
    seed_stream(seed, 3 * runs)
        .chunks(3)
        .map(|sd| {
            let f = make_function(s, lp, d, sd[0]).unwrap();
            let zs = minimize_oracle(&f).unwrap();
            let path = random_path(&lifted.graph, steps, sd[1]).unwrap();
            deploy(&lifted, &f, &zs, &path, &random_state(n, sd[2])).unwrap()
        })
        .collect()
}

#[test]
fn empirical_rate_of_geometric_sequence() {
    let d: Vec<f64> = (0..100).map(|k| 3.0 * 0.8f64.powi(k)).collect();
    assert!((empirical_rate(&d, 0.3) - 0.8).abs() < 1e-12);
    let d: Vec<f64> = (0..100).map(|k| 0.5f64.powi(k)).collect();
    assert!((empirical_rate(&d, 0.3) - 0.5).abs() < 1e-9);
    assert_eq!(empirical_rate(&[1e-20, 1e-21], 0.3), 0.0);
    assert_eq!(empirical_rate(&[1.0, f64::INFINITY], 0.3), f64::INFINITY);
}

#[test]
fn oracle_finds_stationary_point() {
    let s = SectorSpec::new(1.0, 10.0).unwrap();
    for seed in 0..20 {
        let f = make_function(s, 9.0, 10, seed).unwrap();
        let z = minimize_oracle(&f).unwrap();
        assert!(f.gradient(&z).norm() <= 1e-10);
    }
}

#[test]
fn function_rejects_bad_curvature() {
    let s = SectorSpec::new(1.0, 2.0).unwrap();
    assert!(make_function(s, 1.0, 3, 0).is_err());
    assert!(make_function(s, 2.5, 3, 0).is_err());
    assert!(make_function(s, 1.5, 0, 0).is_err());
}

#[test]
fn gradient_descent_meets_its_rate() {
    let s = SectorSpec::new(1.0, 10.0).unwrap();
    let cl = baseline_gd(s, &single_mode_graph()).unwrap();
    for tr in run_many(&cl, s, 9.9, 10, 30, 300, 7) {
        assert!(!tr.diverged);
        assert!(empirical_rate(&tr.distances, DEFAULT_BURN_IN) <= 9.0 / 11.0 + 0.01);
    }
}

#[test]
fn deploy_is_deterministic() {
    let s = SectorSpec::new(1.0, 4.0).unwrap();
    let cl = baseline_tm(s, &single_mode_graph()).unwrap();
    let a = run_many(&cl, s, 3.5, 5, 3, 100, 11);
    let b = run_many(&cl, s, 3.5, 5, 3, 100, 11);
    assert_eq!(a, b);
}

#[test]
fn deploy_checks_inputs() {
    let s = SectorSpec::new(1.0, 4.0).unwrap();
    let cl = baseline_gd(s, &single_mode_graph()).unwrap();
    let f = make_function(s, 3.0, 2, 0).unwrap();
    let zs = minimize_oracle(&f).unwrap();
    let path = SwitchingPath::constant(0, 5, &cl.graph).unwrap();
    assert!(deploy(&cl, &f, &zs, &path, &random_state(1, 0)).is_err());
    let lifted = cl.kron_lift(2);
    assert!(deploy(&lifted, &f, &zs, &path, &random_state(1, 0)).is_err());
    assert!(deploy(&lifted, &f, &zs, &SwitchingPath(vec![0, 1]), &random_state(2, 0)).is_err());
    let tr = deploy(&lifted, &f, &zs, &path, &random_state(2, 0)).unwrap();
    assert_eq!(tr.modes.len(), 5);
    let mut csv = Vec::new();
    tr.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("k,mode,distance\n0,1,"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn gradient_descent_breaks_on_the_ring() {
    let s = SectorSpec::new(1.0, 1.01).unwrap();
    let plant = ring_plant();
    let k = gradient_descent(s);
    let cl = plant.star_controller(&vec![k; 4]).unwrap();
    let f = make_function(s, 1.005, 1, 3).unwrap();
    let zs = minimize_oracle(&f).unwrap();
    let path = SwitchingPath::constant(3, 500, &cl.graph).unwrap();
    let tr = deploy(&cl, &f, &zs, &path, &random_state(cl.dims().0, 3)).unwrap();
    assert!(tr.diverged || tr.max_distance() > 1e6, "max distance {}", tr.max_distance());
}

#[test]
fn synthesized_ring_algorithm_regulates_to_the_minimizer() {
    let plant = ring_plant();
    let sol = solve_regulator(&plant).unwrap();
    let s = SectorSpec::new(1.0, 1.5).unwrap();
    let opts = SynthesisOptions::new(FilterCoefficients::identity(0), false);
    let r = bisect_synthesis(&plant, &sol, s, &opts, BisectionOptions { tol: 1e-3, ..Default::default() }).unwrap();
    let r = r.result().unwrap();
    for tr in run_many(&r.closed_loop, s, 1.49, 4, 20, 500, 5) {
        assert!(tr.final_distance() <= 1e-6, "{}", tr.final_distance());
        assert!(empirical_rate(&tr.distances, DEFAULT_BURN_IN) <= r.rho + 0.01);
    }
}

#[test]
fn seeds_and_paths_are_reproducible() {
    assert_eq!(seed_stream(42, 5), seed_stream(42, 5));
    assert_ne!(seed_stream(42, 5), seed_stream(43, 5));
    let g = ring_plant().graph;
    assert_eq!(random_path(&g, 50, 1).unwrap(), random_path(&g, 50, 1).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hessian_stays_in_sector(seed in any::<u64>(), d in 1usize..8, frac in 0.01f64..1.0, scale in 0.1f64..30.0) {
        let s = SectorSpec::new(0.5, 6.0).unwrap();
        let f = make_function(s, s.m + frac * (s.l - s.m), d, seed).unwrap();
        let z = random_state(d, seed ^ 1) * scale;
        for e in eigvals_sym(&f.hessian(&z)) {
            prop_assert!(e >= s.m - 1e-9 && e <= s.l + 1e-9, "eigenvalue {e}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences(seed in any::<u64>(), d in 1usize..6) {
        let s = SectorSpec::new(1.0, 5.0).unwrap();
        let f = make_function(s, 3.0, d, seed).unwrap();
        let z = random_state(d, seed ^ 2);
        let g = f.gradient(&z);
        let h = 1e-6;
        for i in 0..d {
            let e = DVector::from_fn(d, |j, _| if i == j { h } else { 0.0 });
            let fd = (f.value(&(&z + &e)) - f.value(&(&z - &e))) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() <= 1e-5 * (1.0 + g[i].abs()));
        }
    }

    #[test]
    fn static_multiplier_sums_grow(seed in any::<u64>(), rho in 0.8f64..1.0) {
        let s = SectorSpec::new(1.0, 4.0).unwrap();
        let f = make_function(s, 3.0, 2, seed).unwrap();
        let zs = minimize_oracle(&f).unwrap();
        let z: Vec<DVector<f64>> = (0..30).map(|k| random_state(2, seed.wrapping_add(k))).collect();
        let w: Vec<DVector<f64>> = z.iter().map(|zk| f.gradient(&(zk + &zs))).collect();
        let sums = multiplier_partial_sums(&z, &w, s, &FilterCoefficients::identity(0), rho);
        prop_assert!(sums.windows(2).all(|p| p[1] >= p[0] - 1e-12));
    }
}
