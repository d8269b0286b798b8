use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use switchopt::linalg::{from_rows, scalar, zeros, Mat};
use switchopt::model::*;
use switchopt::simulate::random_path;

fn rand_mat(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> Mat {
    Mat::from_fn(r, c, |_, _| scale * rng.random_range(-1.0..1.0))
}

fn rand_real(rng: &mut ChaCha8Rng, n: usize, m: usize, p: usize) -> ModeRealization {
    ModeRealization {
        a: rand_mat(rng, n, n, 0.4),
        b: rand_mat(rng, n, m, 1.0),
        c: rand_mat(rng, p, n, 1.0),
        d: rand_mat(rng, p, m, 1.0),
    }
}

fn rand_inputs(rng: &mut ChaCha8Rng, len: usize, m: usize) -> Vec<Mat> {
    (0..len).map(|_| rand_mat(rng, m, 1, 1.0)).collect()
}

fn close(a: &Mat, b: &Mat, tol: f64) -> bool {
    (a - b).amax() <= tol * (1.0 + a.amax().max(b.amax()))
}

#[test]
fn ring_plant_blocks() {
    let p = ring_plant();
    assert_eq!(p.dims(), PlantDims { n: 2, d: 1, nu: 1, ny: 1 });
    assert_eq!(p.graph.num_modes(), 4);
    let m2 = &p.modes[1];
    assert_eq!(m2.a, from_rows(&[&[0.2, 0.0], &[0.0, 0.9]]));
    assert_eq!(m2.c2, from_rows(&[&[-0.5, 0.0]]));
    assert_eq!(m2.d22, scalar(3.0));
    assert_eq!(m2.b1, from_rows(&[&[1.0], &[0.0]]));
    assert_eq!(m2.b2, from_rows(&[&[0.0], &[1.0]]));
    assert_eq!(m2.c1, from_rows(&[&[0.0, 1.0]]));
    for r in 0..4 {
        assert!(p.graph.has_edge(r, r));
        assert!(p.graph.has_edge(r, (r + 1) % 4));
    }
    assert_eq!(p.graph.edges().len(), 8);
}

#[test]
fn builders_pass_dimension_checks() {
    ring_plant().check().unwrap();
    trivial_plant().check().unwrap();
    for h in 0..=6 {
        packet_drop_delay_plant(h).unwrap().check().unwrap();
        build_delay_system(h).check().unwrap();
    }
    for s in Scenario::ALL {
        scenario_plant(s, 3).unwrap().check().unwrap();
    }
}

#[test]
fn trivial_plant_is_identity_wiring() {
    let p = trivial_plant();
    assert_eq!(p.dims(), PlantDims { n: 0, d: 1, nu: 1, ny: 1 });
    let m = &p.modes[0];
    assert_eq!(m.d12, scalar(1.0));
    assert_eq!(m.d21, scalar(1.0));
    assert_eq!(m.d11, scalar(0.0));
    assert_eq!(m.d22, scalar(0.0));
}

#[test]
fn invalid_graph_is_diagnosed() {
    let g = SwitchingGraph::new(3, [(0, 1), (1, 2), (2, 2)]).unwrap();
    assert!(g.is_valid());
    let g = SwitchingGraph::new(3, [(0, 1), (1, 2)]).unwrap();
    assert!(!g.is_valid());
    assert_eq!(g.diagnose().offending, vec![0, 1, 2]);
    let g = SwitchingGraph::new(3, [(0, 0), (1, 2)]).unwrap();
    assert_eq!(g.diagnose().offending, vec![1, 2]);
    assert!(matches!(g.require_valid(), Err(switchopt::Error::InvalidGraph(_))));
    assert!(SwitchingGraph::new(2, [(0, 2)]).is_err());
    assert!(SwitchingGraph::new(0, []).is_err());
}

#[test]
fn graph_files_are_one_based() {
    let g = ring_graph(3).unwrap();
    let text = serde_json::to_string(&g).unwrap();
    assert!(text.contains("[3,1]"), "{text}");
    let back: SwitchingGraph = serde_json::from_str(&text).unwrap();
    assert_eq!(back, g);
    assert!(serde_json::from_str::<SwitchingGraph>(r#"{"num_modes":2,"edges":[[0,1]]}"#).is_err());
}

#[test]
fn packet_drop_edges() {
    let g = packet_drop_graph(3, false).unwrap();
    let mut e = g.edges().to_vec();
    e.sort();
    assert_eq!(e, vec![(0, 1), (1, 0), (1, 2), (2, 0), (2, 3), (3, 0)]);
    assert!(g.is_valid());
    assert!(packet_drop_graph(3, true).unwrap().has_edge(0, 0));
}

#[test]
fn scenario_graphs_nest() {
    let g: Vec<SwitchingGraph> = Scenario::ALL.iter().map(|s| s.graph(3).unwrap()).collect();
    assert!(g[0].is_subgraph_of(&g[1]));
    assert!(g[1].is_subgraph_of(&g[3]));
    assert!(g[2].is_subgraph_of(&g[3]));
    assert!(!g[1].is_subgraph_of(&g[0]));
    assert_eq!(g[3].edges().len(), 16);
    assert!(Scenario::ALL.iter().all(|s| Scenario::parse(s.name()) == Some(*s)));
}

#[test]
fn block_assemble_transfer_functions() {
    // [[1/(z-0.5), 2], [0, 3/(z+0.2)]]
    let g11 = first_order_tf(1.0, 0.5);
    let g12 = const_tf(2.0);
    let g21 = const_tf(0.0);
    let g22 = first_order_tf(3.0, -0.2);
    let sys = block_assemble([[&g11, &g12], [&g21, &g22]]).unwrap();
    assert_eq!(sys.dims(), (2, 2, 2));
    let h = sys.impulse_response(4);
    assert_eq!(h[0], from_rows(&[&[0.0, 2.0], &[0.0, 0.0]]));
    assert!(close(&h[1], &from_rows(&[&[1.0, 0.0], &[0.0, 3.0]]), 1e-14));
    assert!(close(&h[2], &from_rows(&[&[0.5, 0.0], &[0.0, -0.6]]), 1e-14));
    assert!(close(&h[3], &from_rows(&[&[0.25, 0.0], &[0.0, 0.12]]), 1e-14));
}

#[test]
fn plant_serde_round_trip() {
    for p in [ring_plant(), trivial_plant(), packet_drop_delay_plant(2).unwrap()] {
        let text = serde_json::to_string(&p).unwrap();
        let back: SwitchedPlant = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }
}

#[test]
fn plant_file_with_wrong_blocks_is_rejected() {
    let mut v = serde_json::to_value(ring_plant()).unwrap();
    v["modes"][0]["A"] = serde_json::json!([[1.0, 0.0, 0.0]]);
    assert!(serde_json::from_value::<SwitchedPlant>(v).is_err());
}

#[test]
fn ill_posed_star_is_reported() {
    let p = ring_plant();
    // D22 = 3 in mode 2; Dk = 1/3 makes I − Dk D22 singular.
    let mut k: Vec<ModeRealization> = (0..4).map(|_| ModeRealization::static_gain(scalar(0.0))).collect();
    k[1] = ModeRealization::static_gain(scalar(1.0 / 3.0));
    assert!(matches!(p.star_controller(&k), Err(switchopt::Error::IllPosed { mode: 2 })));
}

#[test]
fn switching_path_rejects_non_edges() {
    let g = ring_graph(4).unwrap();
    assert!(SwitchingPath::new(vec![0, 1, 2, 3, 0], &g).is_ok());
    assert!(SwitchingPath::new(vec![0, 2], &g).is_err());
    assert!(SwitchingPath::constant(3, 10, &g).is_ok());
}

/// Explicit per-step signal exchange between plant and controller.
fn explicit_loop(p: &PlantMode, k: &ModeRealization, w: &[Mat]) -> Vec<Mat> {
    let PlantDims { n, nu, .. } = p.dims();
    let mut x = zeros(n, 1);
    let mut xi = zeros(k.states(), 1);
    let lhs = Mat::identity(nu, nu) - &k.d * &p.d22;
    w.iter()
        .map(|wk| {
            // u = Ck ξ + Dk (C2 x + D21 w + D22 u)
            let rhs = &k.c * &xi + &k.d * (&p.c2 * &x + &p.d21 * wk);
            let u = lhs.clone().lu().solve(&rhs).unwrap();
            let y = &p.c2 * &x + &p.d21 * wk + &p.d22 * &u;
            let z = &p.c1 * &x + &p.d11 * wk + &p.d12 * &u;
            x = &p.a * &x + &p.b1 * wk + &p.b2 * &u;
            xi = &k.a * &xi + &k.b * &y;
            z
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn star_matches_explicit_wiring(seed in any::<u64>(), n in 0usize..4, nk in 0usize..3, d in 1usize..3, nu in 1usize..3, ny in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = PlantMode {
            a: rand_mat(&mut rng, n, n, 0.4),
            b1: rand_mat(&mut rng, n, d, 1.0),
            b2: rand_mat(&mut rng, n, nu, 1.0),
            c1: rand_mat(&mut rng, d, n, 1.0),
            c2: rand_mat(&mut rng, ny, n, 1.0),
            d11: rand_mat(&mut rng, d, d, 1.0),
            d12: rand_mat(&mut rng, d, nu, 1.0),
            d21: rand_mat(&mut rng, ny, d, 1.0),
            d22: rand_mat(&mut rng, ny, nu, 0.5),
        };
        let k = rand_real(&mut rng, nk, ny, nu);
        let cl = p.star(&k);
        prop_assume!(cl.is_some());
        let cl = cl.unwrap();
        let w = rand_inputs(&mut rng, 20, d);
        let got = cl.simulate(&w);
        let want = explicit_loop(&p, &k, &w);
        for (g, e) in got.iter().zip(&want) {
            prop_assert!(close(g, e, 1e-9), "{g} vs {e}");
        }
    }

    #[test]
    fn series_composes_simulations(seed in any::<u64>(), n1 in 0usize..4, n2 in 0usize..4, m in 1usize..3, k in 1usize..3, p in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = rand_real(&mut rng, n1, m, k);
        let g = rand_real(&mut rng, n2, k, p);
        let u = rand_inputs(&mut rng, 50, m);
        let got = ModeRealization::series(&f, &g).unwrap().simulate(&u);
        let want = g.simulate(&f.simulate(&u));
        for (a, b) in got.iter().zip(&want) {
            prop_assert!(close(a, b, 1e-10));
        }
    }

    #[test]
    fn similarity_keeps_impulse_response(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = rand_real(&mut rng, n, 2, 2);
        let t = rand_mat(&mut rng, n, n, 1.0) + Mat::identity(n, n) * 3.0;
        let s = r.similarity(&t).unwrap();
        for (a, b) in r.impulse_response(8).iter().zip(&s.impulse_response(8)) {
            prop_assert!(close(a, b, 1e-9));
        }
    }

    #[test]
    fn delay_line_matches_ring_buffer(seed in any::<u64>(), h in 1usize..7, len in 1usize..60) {
        let sys = build_delay_system(h);
        let path = random_path(&sys.graph, len, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let u: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut x = zeros(h, 1);
        for (k, &s) in path.0.iter().enumerate() {
            let (xn, y) = sys.modes[s].step(&x, &scalar(u[k]));
            x = xn;
            if k >= s {
                prop_assert_eq!(y[(0, 0)], u[k - s]);
            }
        }
    }

    #[test]
    fn valid_graph_paths_never_stall(seed in any::<u64>(), n in 1usize..6, density in 0.1f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .filter(|_| rng.random_bool(density))
            .collect();
        let g = SwitchingGraph::new(n, edges).unwrap();
        prop_assume!(g.is_valid());
        let p = random_path(&g, 100_000, seed).unwrap();
        prop_assert_eq!(p.len(), 100_000);
        prop_assert!(g.admits(&p.0));
    }
}
