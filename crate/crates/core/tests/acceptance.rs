//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `cargo test --test acceptance -- 1 4 9` runs a subset. The process exits
//! nonzero on a FAIL only when `ACCEPTANCE_STRICT=1`.

use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use switchopt::alternation::{run_alternation, AlternationOptions, Phase};
use switchopt::analysis::{bisect_rate, threshold_search, AnalysisOptions, BisectionOptions, LambdaMode, Threshold};
use switchopt::cli::{delay_network, linspace, synthesize_point};
use switchopt::model::{ring_plant, scenario_plant, single_mode_graph, Scenario, SwitchedSystem, SwitchingPath};
use switchopt::regulation::{connect_plant_model, solve_regulator};
use switchopt::simulate::*;
use switchopt::synthesis::{bisect_synthesis, synth_feasible_at_rate, SynthesisOptions, SynthesisResult};
use switchopt::transforms::{FilterCoefficients, SectorSpec};

const SWEEP_TOL: f64 = 1e-3;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// A certificate to be checked by simulation.
struct Certified {
    name: String,
    closed_loop: SwitchedSystem,
    sector: SectorSpec,
    rho: f64,
}

#[derive(Default)]
struct Shared {
    /// (criterion, label, cross-certified)
    synthesized: Vec<(usize, String, bool)>,
    certificates: Vec<Certified>,
}

fn ring_sector() -> SectorSpec {
    SectorSpec::new(1.0, 1.5).unwrap()
}

fn record(sh: &mut Shared, crit: usize, label: &str, r: &SynthesisResult) {
    sh.synthesized.push((crit, label.to_string(), r.cross_certified_at.is_some()));
}

fn criterion_1(sh: &mut Shared) -> Verdict {
    let plant = ring_plant();
    let sol = solve_regulator(&plant).unwrap();
    let opts = SynthesisOptions::new(FilterCoefficients::identity(0), false);
    let out = bisect_synthesis(&plant, &sol, ring_sector(), &opts, BisectionOptions::default()).unwrap();
    let Some(r) = out.result() else {
        return verdict(false, "synthesis diverged");
    };
    record(sh, 1, "ring static", r);
    sh.certificates.push(Certified { name: "ring static".into(), closed_loop: r.closed_loop.clone(), sector: ring_sector(), rho: r.rho });
    verdict(r.rho <= 0.905, format!("rho = {:.4} (bound 0.905), controller order {}", r.rho, r.order()))
}

fn criterion_2(sh: &mut Shared) -> Verdict {
    let plant = ring_plant();
    let sol = solve_regulator(&plant).unwrap();
    let opts = AlternationOptions { order: 3, iter_max: 3, common_storage: false, bisection: BisectionOptions::default() };
    let out = run_alternation(&plant, &sol, ring_sector(), &opts).unwrap();
    let Some(best) = out.result else {
        return verdict(false, "first synthesis diverged");
    };
    let first = out.trace.records.iter().find(|r| r.iteration == 1 && r.phase == Phase::Synthesis).and_then(|r| r.rho);
    record(sh, 2, "ring alternation", &best);
    sh.certificates.push(Certified { name: "ring alternation".into(), closed_loop: best.closed_loop.clone(), sector: ring_sector(), rho: best.rho });
    let lam = best.lambda.coefficients();
    let tail_ok = lam.len() > 2 && lam[1] < 0.0 && lam[2] < 0.0;
    let first = first.unwrap_or(f64::INFINITY);
    let iters = out.trace.records.last().map_or(0, |r| r.iteration);
    verdict(
        best.rho <= 0.902 && best.rho <= first && tail_ok,
        format!("rho = {:.4} (iteration 1: {first:.4}, bound 0.902) after {iters} iterations, lambda = [{}]", best.rho, lam.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")),
    )
}

fn ring_threshold(common: bool) -> Threshold {
    let plant = ring_plant();
    let sol = solve_regulator(&plant).unwrap();
    let g = connect_plant_model(&plant, &sol).unwrap();
    let opts = SynthesisOptions::new(FilterCoefficients::identity(0), common);
    threshold_search(1.01, 6.0, 0.01, |l| {
        Ok(synth_feasible_at_rate(&g, SectorSpec::new(1.0, l)?, 1.0, &opts)?.feasible())
    })
    .unwrap()
}

fn criterion_3(_: &mut Shared) -> Verdict {
    let path = ring_threshold(false);
    let common = ring_threshold(true);
    let inside = |t: Threshold, lo: f64, hi: f64| matches!(t, Threshold::Boundary(b) if (lo..=hi).contains(&b));
    verdict(
        inside(path, 3.26, 3.46) && inside(common, 1.61, 1.71),
        format!("path-dependent {path:?} (want [3.26, 3.46]), common {common:?} (want [1.61, 1.71])"),
    )
}

fn criterion_4(sh: &mut Shared) -> Verdict {
    let s = SectorSpec::new(1.0, 10.0).unwrap();
    let g = single_mode_graph();
    let gd = baseline_gd(s, &g).unwrap();
    let fixed = AnalysisOptions::new(LambdaMode::Fixed(FilterCoefficients::identity(0)), false);
    let rg = bisect_rate(&gd, s, &fixed, BisectionOptions::default()).unwrap().rho();
    let tm = baseline_tm(s, &g).unwrap();
    let free = AnalysisOptions::new(LambdaMode::free(3), false);
    let rt = bisect_rate(&tm, s, &free, BisectionOptions::default()).unwrap().rho();
    let tm_bound = 1.0 - (s.m / s.l).sqrt() + 0.02;
    if let Some(r) = rg {
        sh.certificates.push(Certified { name: "gradient descent".into(), closed_loop: gd, sector: s, rho: r });
    }
    if let Some(r) = rt {
        sh.certificates.push(Certified { name: "triple momentum".into(), closed_loop: tm, sector: s, rho: r });
    }
    let gd_ok = rg.is_some_and(|r| (r - 9.0 / 11.0).abs() <= 1e-3);
    let tm_ok = rt.is_some_and(|r| r <= tm_bound);
    verdict(gd_ok && tm_ok, format!("GD rho = {rg:.5?} (9/11 = {:.5}), TM rho = {rt:.4?} (bound {tm_bound:.4})", 9.0 / 11.0))
}

/// `+∞` for diverged points.
fn rho_or_inf(r: &Option<SynthesisResult>) -> f64 {
    r.as_ref().map_or(f64::INFINITY, |r| r.rho)
}

fn criterion_5(sh: &mut Shared) -> Verdict {
    let delays: Vec<usize> = (0..=6).collect();
    let ls = [1.5, 2.0, 3.0, 5.0, 7.5, 10.0];
    let mut table = vec![vec![f64::NAN; ls.len()]; delays.len()];
    for (i, &h) in delays.iter().enumerate() {
        let plant = delay_network(h).unwrap();
        for (j, &l) in ls.iter().enumerate() {
            let r = synthesize_point(&plant, SectorSpec::new(1.0, l).unwrap(), false, SWEEP_TOL).unwrap();
            if let Some(res) = &r {
                record(sh, 5, &format!("delay {h}, L = {l}"), res);
            }
            table[i][j] = rho_or_inf(&r);
        }
        eprintln!("  delay {h}: {:?}", table[i]);
    }
    // Both axes are compared on the bisection grid, so a step of one grid cell is resolution.
    let slack = SWEEP_TOL;
    let mut bad = Vec::new();
    for i in 0..delays.len() {
        for j in 0..ls.len() {
            if j + 1 < ls.len() && table[i][j + 1] < table[i][j] - slack {
                bad.push(format!("delay {} L {}→{}", delays[i], ls[j], ls[j + 1]));
            }
            if i + 1 < delays.len() && table[i + 1][j] < table[i][j] - slack {
                bad.push(format!("L {} delay {}→{}", ls[j], delays[i], delays[i + 1]));
            }
        }
    }
    let diverged = table.iter().flatten().filter(|r| r.is_infinite()).count();
    verdict(bad.is_empty(), format!("{} points, {diverged} diverged, violations: {bad:?}", delays.len() * ls.len()))
}

fn criterion_6(sh: &mut Shared) -> Verdict {
    let ls = linspace(1.5, 5.0, 5);
    let mut rows = Vec::new();
    for s in [Scenario::RateOne, Scenario::RateTwo, Scenario::Snap, Scenario::Arbitrary] {
        let plant = scenario_plant(s, 3).unwrap();
        let row: Vec<f64> = ls
            .iter()
            .map(|&l| {
                let r = synthesize_point(&plant, SectorSpec::new(1.0, l).unwrap(), s.requires_common_storage(), SWEEP_TOL).unwrap();
                if let Some(res) = &r {
                    record(sh, 6, &format!("{} L = {l}", s.name()), res);
                }
                rho_or_inf(&r)
            })
            .collect();
        eprintln!("  {}: {row:?}", s.name());
        rows.push(row);
    }
    let mut bad = Vec::new();
    for (j, l) in ls.iter().enumerate() {
        let (r1, r2, r4) = (rows[0][j], rows[1][j], rows[3][j]);
        if r1 > r2 + 1e-4 || r2 > r4 + 1e-4 {
            bad.push(format!("ordering at L = {l}: {r1} {r2} {r4}"));
        }
        for (s, row) in Scenario::ALL.iter().zip(&rows) {
            if !(row[j] < 1.0) {
                bad.push(format!("{} not convergent at L = {l}", s.name()));
            }
        }
    }
    verdict(bad.is_empty(), format!("L grid {ls:?}, violations: {bad:?}"))
}

fn criterion_7(sh: &mut Shared) -> Verdict {
    let total = sh.synthesized.len();
    let failed: Vec<String> = sh.synthesized.iter().filter(|s| !s.2).map(|s| format!("c{} {}", s.0, s.1)).collect();
    verdict(total > 0 && failed.is_empty(), format!("{}/{total} controllers cross-certified, failures: {failed:?}", total - failed.len()))
}

fn criterion_8(sh: &mut Shared) -> Verdict {
    if sh.certificates.is_empty() {
        return verdict(false, "no certificates (run criteria 1, 2, 4 first)");
    }
    let mut lines = Vec::new();
    let mut ok = true;
    for (ci, c) in sh.certificates.iter().enumerate() {
        let lp = c.sector.m + 0.99 * (c.sector.l - c.sector.m);
        let lifted = c.closed_loop.kron_lift(10);
        let n = lifted.dims().0;
        let (mut worst_rate, mut worst_dist) = (0.0f64, 0.0f64);
        for sd in seed_stream(1000 + ci as u64, 300).chunks(3) {
            let f = make_function(c.sector, lp, 10, sd[0]).unwrap();
            let zs = minimize_oracle(&f).unwrap();
            let path = random_path(&lifted.graph, 500, sd[1]).unwrap();
            let tr = deploy(&lifted, &f, &zs, &path, &random_state(n, sd[2])).unwrap();
            worst_rate = worst_rate.max(empirical_rate(&tr.distances, DEFAULT_BURN_IN));
            worst_dist = worst_dist.max(tr.final_distance());
        }
        let pass = worst_rate <= c.rho + 0.01 && worst_dist <= 1e-6;
        ok &= pass;
        lines.push(format!("{}: rate {worst_rate:.4} vs rho {:.4}, final {worst_dist:.1e}", c.name, c.rho));
    }
    verdict(ok, lines.join("; "))
}

fn criterion_9(_: &mut Shared) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = f64::INFINITY;
    for draw in 0..100u64 {
        let s = SectorSpec::new(1.0, rng.random_range(1.1..10.0)).unwrap();
        let lp = s.m + (s.l - s.m) * rng.random_range(0.05..1.0);
        let f = make_function(s, lp, 3, draw).unwrap();
        let zs = minimize_oracle(&f).unwrap();
        let rho: f64 = rng.random_range(0.6..1.0);
        let order = rng.random_range(0..5usize);
        let raw: Vec<f64> = (0..order).map(|_| rng.random_range(0.0..1.0)).collect();
        let weighted: f64 = raw.iter().enumerate().map(|(i, r)| r * rho.powi(-(i as i32 + 1))).sum();
        let scale = if weighted > 0.0 { rng.random_range(0.0..0.99) / weighted } else { 0.0 };
        let mut lam = vec![1.0];
        lam.extend(raw.iter().map(|r| -r * scale));
        let lam = FilterCoefficients::new(lam).unwrap();
        let z: Vec<DVector<f64>> = (0..50).map(|_| DVector::from_fn(3, |_, _| rng.random_range(-2.0..2.0))).collect();
        let w: Vec<DVector<f64>> = z.iter().map(|zk| f.gradient(&(zk + &zs))).collect();
        let m = multiplier_partial_sums(&z, &w, s, &lam, rho).into_iter().fold(f64::INFINITY, f64::min);
        worst = worst.min(m);
    }
    verdict(worst >= -1e-8, format!("smallest partial sum over 100 draws: {worst:.3e}"))
}

fn criterion_10(_: &mut Shared) -> Verdict {
    let s = SectorSpec::new(1.0, 1.01).unwrap();
    let plant = ring_plant();
    let mut details = Vec::new();
    let mut all = true;
    for (name, k) in [("GD", gradient_descent(s)), ("TM", triple_momentum(s))] {
        let cl = plant.star_controller(&vec![k; 4]).unwrap();
        let n = cl.dims().0;
        let mut paths: Vec<SwitchingPath> = seed_stream(10, 20).iter().map(|&sd| random_path(&cl.graph, 2000, sd).unwrap()).collect();
        paths.push(SwitchingPath::constant(3, 2000, &cl.graph).unwrap());
        let mut diverged = 0;
        for (i, p) in paths.iter().enumerate() {
            let f = make_function(s, 1.005, 1, i as u64).unwrap();
            let zs = minimize_oracle(&f).unwrap();
            let tr = deploy(&cl, &f, &zs, p, &random_state(n, i as u64)).unwrap();
            if tr.max_distance() > 1e6 {
                diverged += 1;
            }
        }
        all &= diverged > 0;
        details.push(format!("{name}: {diverged}/{} paths exceed 1e6", paths.len()));
    }
    verdict(all, details.join(", "))
}

fn main() {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(usize, fn(&mut Shared) -> Verdict); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut sh = Shared::default();
    let mut failed = 0;
    let mut ran = 0;
    for (k, f) in criteria {
        if !wanted.is_empty() && !wanted.contains(&k) {
            continue;
        }
        let t = Instant::now();
        let v = f(&mut sh);
        ran += 1;
        if !v.pass {
            failed += 1;
        }
        println!("criterion {k}: {} ({}) [{:.1} s]", if v.pass { "PASS" } else { "FAIL" }, v.detail, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed);
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
