use std::fmt::Write as _;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use serde::{Deserialize, Serialize};

use super::expr::{Affine, MatExpr};
use crate::linalg::{min_eig, Mat};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Symmetric(usize),
    Rect(usize, usize),
    Vector(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VarId(usize);

#[derive(Clone, Debug)]
struct VarInfo {
    name: String,
    kind: VarKind,
    offset: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    /// expression ≻ 0
    Pos,
    /// expression ≺ 0
    Neg,
}

#[derive(Clone, Debug)]
struct LmiConstraint {
    name: String,
    expr: MatExpr,
    sense: Sense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum LinKind {
    Eq,
    Ge,
}

impl LmiSolution {
    /// Infeasibility decided before any solve.
    pub fn infeasible(reason: &str) -> Self {
        LmiSolution {
            status: Status::Infeasible,
            x: Vec::new(),
            margin: f64::NEG_INFINITY,
            solver_margin: f64::NEG_INFINITY,
            diagnostics: reason.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LmiConfig {
    pub max_iters: u32,
    pub eps_min: f64,
    pub margin_mode: bool,
    pub t_max: f64,
}

impl Default for LmiConfig {
    fn default() -> Self {
        LmiConfig { max_iters: 200, eps_min: 1e-7, margin_mode: true, t_max: 1e3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Feasible,
    Infeasible,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct LmiSolution {
    pub status: Status,
    pub x: Vec<f64>,
    /// Smallest eigenvalue gap over all strict constraints, recomputed densely.
    pub margin: f64,
    /// The margin variable as returned by the solver (or the fixed target).
    pub solver_margin: f64,
    pub diagnostics: String,
}

#[derive(Clone, Debug)]
pub struct ConstraintReport {
    pub name: String,
    /// Signed distance to the boundary: min eigenvalue of the expression (Pos)
    /// or of its negation (Neg).
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub lmis: Vec<ConstraintReport>,
    pub eq_residual: f64,
    pub ineq_violation: f64,
    pub margin: f64,
}

impl VerifyReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.margin >= tol && self.eq_residual <= 1e-6 && self.ineq_violation <= 1e-9
    }
}

/// Affine matrix-inequality program over symmetric, rectangular, and vector
/// decision variables.
#[derive(Clone, Debug, Default)]
pub struct LmiProblem {
    vars: Vec<VarInfo>,
    nvars: usize,
    lmis: Vec<LmiConstraint>,
    lins: Vec<(Affine, LinKind)>,
    objective: Option<Affine>,
}

impl LmiProblem {
    pub fn new() -> Self {
        Self::default()
    }

    fn declare(&mut self, name: &str, kind: VarKind) -> VarId {
        let len = match kind {
            VarKind::Symmetric(k) => k * (k + 1) / 2,
            VarKind::Rect(r, c) => r * c,
            VarKind::Vector(n) => n,
        };
        self.vars.push(VarInfo { name: name.to_string(), kind, offset: self.nvars });
        self.nvars += len;
        VarId(self.vars.len() - 1)
    }

    pub fn symmetric(&mut self, name: &str, k: usize) -> VarId {
        self.declare(name, VarKind::Symmetric(k))
    }

    pub fn rect(&mut self, name: &str, r: usize, c: usize) -> VarId {
        self.declare(name, VarKind::Rect(r, c))
    }

    pub fn vector(&mut self, name: &str, n: usize) -> VarId {
        self.declare(name, VarKind::Vector(n))
    }

    pub fn num_scalars(&self) -> usize {
        self.nvars
    }

    fn index(&self, v: VarId, i: usize, j: usize) -> usize {
        let info = &self.vars[v.0];
        match info.kind {
            VarKind::Symmetric(_) => {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                info.offset + b * (b + 1) / 2 + a
            }
            VarKind::Rect(_, c) => info.offset + i * c + j,
            VarKind::Vector(_) => info.offset + i,
        }
    }

    fn shape(&self, v: VarId) -> (usize, usize) {
        match self.vars[v.0].kind {
            VarKind::Symmetric(k) => (k, k),
            VarKind::Rect(r, c) => (r, c),
            VarKind::Vector(n) => (n, 1),
        }
    }

    /// The variable as a matrix expression (vectors as columns).
    pub fn expr(&self, v: VarId) -> MatExpr {
        let (r, c) = self.shape(v);
        let entries = (0..r)
            .flat_map(|i| (0..c).map(move |j| (i, j)))
            .map(|(i, j)| Affine::var(self.index(v, i, j)))
            .collect();
        MatExpr::from_entries(r, c, entries)
    }

    /// Same as [`expr`](Self::expr) but with selected entries pinned to zero.
    pub fn expr_masked(&self, v: VarId, zero: impl Fn(usize, usize) -> bool) -> MatExpr {
        let mut e = self.expr(v);
        let (r, c) = self.shape(v);
        for i in 0..r {
            for j in 0..c {
                if zero(i, j) {
                    *e.at_mut(i, j) = Affine::default();
                }
            }
        }
        e
    }

    pub fn scalar(&self, v: VarId, i: usize) -> Affine {
        Affine::var(self.index(v, i, 0))
    }

    /// Require `expr ≻ 0` (Pos) or `expr ≺ 0` (Neg); the expression is symmetrized.
    pub fn lmi(&mut self, name: &str, expr: MatExpr, sense: Sense) {
        assert_eq!(expr.nrows(), expr.ncols(), "LMI must be square");
        if expr.nrows() == 0 {
            return;
        }
        self.lmis.push(LmiConstraint { name: name.to_string(), expr: expr.symmetrized(), sense });
    }

    pub fn equal(&mut self, mut a: Affine) {
        a.compress();
        self.lins.push((a, LinKind::Eq));
    }

    /// Require `a ≥ 0`.
    pub fn nonneg(&mut self, mut a: Affine) {
        a.compress();
        self.lins.push((a, LinKind::Ge));
    }

    pub fn minimize(&mut self, mut a: Affine) {
        a.compress();
        self.objective = Some(a);
    }

    pub fn value(&self, sol: &LmiSolution, v: VarId) -> Mat {
        self.expr(v).eval(&sol.x)
    }

    pub fn dump(&self) -> String {
        let mut s = String::new();
        for v in &self.vars {
            let _ = writeln!(s, "var {} {:?} @{}", v.name, v.kind, v.offset);
        }
        for c in &self.lmis {
            let _ = writeln!(s, "lmi {} {:?} {}x{}", c.name, c.sense, c.expr.nrows(), c.expr.ncols());
            let _ = writeln!(s, "  constant part:");
            let m = c.expr.eval(&vec![0.0; self.nvars]);
            for i in 0..m.nrows() {
                let row: Vec<String> = m.row(i).iter().map(|x| format!("{x:.6e}")).collect();
                let _ = writeln!(s, "  {}", row.join(" "));
            }
        }
        for (a, k) in &self.lins {
            let _ = writeln!(s, "lin {:?} {:?}", k, a);
        }
        s
    }

    /// Re-evaluate every constraint at `x` with a dense symmetric eigensolver.
    pub fn verify(&self, x: &[f64]) -> VerifyReport {
        let lmis: Vec<ConstraintReport> = self
            .lmis
            .iter()
            .map(|c| {
                let m = c.expr.eval(x);
                let gap = match c.sense {
                    Sense::Pos => min_eig(&m),
                    Sense::Neg => min_eig(&(-m)),
                };
                ConstraintReport { name: c.name.clone(), gap }
            })
            .collect();
        let mut eq_residual: f64 = 0.0;
        let mut ineq_violation: f64 = 0.0;
        for (a, k) in &self.lins {
            let v = a.eval(x);
            match k {
                LinKind::Eq => eq_residual = eq_residual.max(v.abs()),
                LinKind::Ge => ineq_violation = ineq_violation.max(-v),
            }
        }
        let margin = lmis.iter().map(|c| c.gap).fold(f64::INFINITY, f64::min);
        VerifyReport { lmis, eq_residual, ineq_violation, margin }
    }

    pub fn solve(&self, cfg: &LmiConfig) -> LmiSolution {
        let margin_mode = cfg.margin_mode && self.objective.is_none();
        let n = self.nvars + usize::from(margin_mode);
        let t_idx = self.nvars;
        let target = 2.0 * cfg.eps_min;

        let mut trip_i = Vec::new();
        let mut trip_j = Vec::new();
        let mut trip_v = Vec::new();
        let mut b = Vec::new();
        let mut cones = Vec::new();
        let mut row = 0usize;
        let mut push_row = |aff: &Affine, scale: f64, t_coef: f64, b: &mut Vec<f64>| {
            b.push(scale * aff.constant);
            for &(i, a) in &aff.terms {
                trip_i.push(row);
                trip_j.push(i);
                trip_v.push(-scale * a);
            }
            if t_coef != 0.0 {
                trip_i.push(row);
                trip_j.push(t_idx);
                trip_v.push(t_coef);
            }
            row += 1;
        };

        let eqs: Vec<&Affine> = self.lins.iter().filter(|l| l.1 == LinKind::Eq).map(|l| &l.0).collect();
        let ges: Vec<&Affine> = self.lins.iter().filter(|l| l.1 == LinKind::Ge).map(|l| &l.0).collect();
        if !eqs.is_empty() {
            for a in &eqs {
                push_row(a, 1.0, 0.0, &mut b);
            }
            cones.push(SupportedConeT::ZeroConeT(eqs.len()));
        }
        let n_ge = ges.len() + usize::from(margin_mode);
        if n_ge > 0 {
            for a in &ges {
                push_row(a, 1.0, 0.0, &mut b);
            }
            if margin_mode {
                // t_max - t >= 0
                push_row(&Affine::constant(cfg.t_max), 1.0, 1.0, &mut b);
            }
            cones.push(SupportedConeT::NonnegativeConeT(n_ge));
        }
        let sqrt2 = std::f64::consts::SQRT_2;
        for c in &self.lmis {
            let k = c.expr.nrows();
            let sign = if c.sense == Sense::Pos { 1.0 } else { -1.0 };
            for j in 0..k {
                for i in 0..=j {
                    let mut aff = c.expr.at(i, j).scaled(sign);
                    let scale = if i == j { 1.0 } else { sqrt2 };
                    let mut t_coef = 0.0;
                    if i == j {
                        if margin_mode {
                            t_coef = 1.0;
                        } else {
                            aff.constant -= target;
                        }
                    }
                    push_row(&aff, scale, t_coef, &mut b);
                }
            }
            cones.push(SupportedConeT::PSDTriangleConeT(k));
        }

        let a = CscMatrix::new_from_triplets(row, n, trip_i, trip_j, trip_v);
        let p = CscMatrix::zeros((n, n));
        let mut q = vec![0.0; n];
        if margin_mode {
            q[t_idx] = -1.0;
        } else if let Some(obj) = &self.objective {
            for &(i, c) in &obj.terms {
                q[i] += c;
            }
        }
        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .max_iter(cfg.max_iters)
            .build()
            .expect("valid solver settings");
        let mut solver = match DefaultSolver::new(&p, &q, &a, &b, &cones, settings) {
            Ok(s) => s,
            Err(e) => {
                return LmiSolution {
                    status: Status::NumericalFailure,
                    x: vec![0.0; self.nvars],
                    margin: f64::NEG_INFINITY,
                    solver_margin: f64::NEG_INFINITY,
                    diagnostics: format!("solver setup: {e:?}"),
                }
            }
        };
        solver.solve();
        let status = solver.solution.status;
        let xs = solver.solution.x.clone();
        let x: Vec<f64> = xs[..self.nvars].to_vec();
        let solver_margin = if margin_mode { xs[t_idx] } else { target };
        let report = self.verify(&x);
        let diagnostics = format!(
            "{status:?} iters={} r_prim={:.2e} r_dual={:.2e} t={solver_margin:.3e} verified={:.3e}",
            solver.solution.iterations, solver.solution.r_prim, solver.solution.r_dual, report.margin
        );
        let solved = matches!(status, SolverStatus::Solved | SolverStatus::AlmostSolved);
        let status = if solved && report.passes(cfg.eps_min) {
            Status::Feasible
        } else if (solved && margin_mode && solver_margin < cfg.eps_min)
            || matches!(status, SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible)
        {
            Status::Infeasible
        } else {
            Status::NumericalFailure
        };
        LmiSolution { status, x, margin: report.margin, solver_margin, diagnostics }
    }
}
