use switchopt::linalg::{from_rows, scalar, Mat};
use switchopt::lmi::*;

/// `P ≻ 0`, `AᵀPA − P ≺ 0`, each constraint multiplied by `scale`.
fn lyapunov(a: &Mat, scale: f64) -> (LmiProblem, VarId) {
    let mut p = LmiProblem::new();
    let v = p.symmetric("P", a.nrows());
    let e = p.expr(v);
    p.lmi("pos", e.scale(scale), Sense::Pos);
    p.lmi("decrease", e.congruence(a).sub(&e).scale(scale), Sense::Neg);
    (p, v)
}

/// `1 < x < 2` written as `[[x, 1], [1, x]] ≻ 0` and `x − 2 ≺ 0`; infeasible when `hi ≤ 1`.
fn interval(hi: f64, scale: f64) -> LmiProblem {
    let mut p = LmiProblem::new();
    let v = p.vector("x", 1);
    let x = p.scalar(v, 0);
    let m = MatExpr::scalar_times(&x, &Mat::identity(2, 2)).add_const(&from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]));
    p.lmi("lower", m.scale(scale), Sense::Pos);
    p.lmi("upper", MatExpr::scalar_times(&x, &scalar(1.0)).add_const(&scalar(-hi)).scale(scale), Sense::Neg);
    p
}

#[test]
fn lyapunov_status() {
    for (a, expect) in [(0.5, Status::Feasible), (-0.99, Status::Feasible), (1.1, Status::Infeasible)] {
        let (p, _) = lyapunov(&scalar(a), 1.0);
        assert_eq!(p.solve(&LmiConfig::default()).status, expect, "a = {a}");
    }
    let rot = from_rows(&[&[0.6, -0.7], &[0.7, 0.6]]);
    let (p, v) = lyapunov(&rot, 1.0);
    let s = p.solve(&LmiConfig::default());
    assert_eq!(s.status, Status::Feasible);
    let pm = p.value(&s, v);
    assert!(switchopt::linalg::min_eig(&pm) > 0.0);
}

#[test]
fn feasible_solutions_verify() {
    let cfgs = [LmiConfig::default(), LmiConfig { margin_mode: false, ..LmiConfig::default() }];
    for cfg in &cfgs {
        for a in [0.1, 0.5, 0.9] {
            let (p, _) = lyapunov(&scalar(a), 1.0);
            let s = p.solve(cfg);
            assert_eq!(s.status, Status::Feasible);
            let rep = p.verify(&s.x);
            assert!(rep.passes(1e-7), "margin {}", rep.margin);
            assert!((rep.margin - s.margin).abs() < 1e-12);
        }
        let p = interval(2.0, 1.0);
        let s = p.solve(cfg);
        assert_eq!(s.status, Status::Feasible);
        assert!(p.verify(&s.x).passes(1e-7));
    }
}

#[test]
fn scaling_does_not_change_status() {
    for scale in [1e-3, 1.0, 1e3] {
        for (a, expect) in [(0.7, Status::Feasible), (1.05, Status::Infeasible)] {
            let (p, _) = lyapunov(&scalar(a), scale);
            assert_eq!(p.solve(&LmiConfig::default()).status, expect, "a = {a}, scale = {scale}");
        }
        assert_eq!(interval(2.0, scale).solve(&LmiConfig::default()).status, Status::Feasible, "scale {scale}");
        assert_eq!(interval(0.5, scale).solve(&LmiConfig::default()).status, Status::Infeasible, "scale {scale}");
    }
}

#[test]
fn linear_constraints_and_objective() {
    let mut p = LmiProblem::new();
    let v = p.vector("x", 2);
    let (x0, x1) = (p.scalar(v, 0), p.scalar(v, 1));
    let mut sum = x0.clone();
    sum.add_scaled(&x1, 1.0);
    sum.add_scaled(&Affine::constant(-3.0), 1.0);
    p.equal(sum);
    p.nonneg(x1.clone());
    let mut obj = Affine::default();
    obj.add_scaled(&x0, -1.0);
    p.minimize(obj);
    p.lmi("x0 > 0", MatExpr::scalar_times(&x0, &scalar(1.0)), Sense::Pos);
    let s = p.solve(&LmiConfig::default());
    assert_eq!(s.status, Status::Feasible);
    let x = p.value(&s, v);
    assert!((x[(0, 0)] - 3.0).abs() < 1e-5 && x[(1, 0)].abs() < 1e-5, "{x}");
}

#[test]
fn dump_names_constraints() {
    let (p, _) = lyapunov(&scalar(0.5), 1.0);
    let d = p.dump();
    assert!(d.contains("var P"));
    assert!(d.contains("lmi decrease Neg 1x1"));
}
