//! Rate certification: regulation witness, per-edge dissipation LMIs and bisection on ρ.

use serde::{Deserialize, Serialize};

use crate::linalg::{self, blkdiag, eye, hstack, kron, lstsq, shift, unit, vstack, zeros, Mat};
use crate::lmi::{Affine, LmiConfig, LmiProblem, LmiSolution, MatExpr, Sense, Status};
use crate::model::SwitchedSystem;
use crate::transforms::{rho_weight_and_loop, FilterCoefficients, SectorSpec, ADMISSIBILITY_MARGIN};
use crate::{Error, Result};

pub const WITNESS_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegulationWitness {
    #[serde(with = "linalg::rows_vec")]
    pub theta: Vec<Mat>,
    pub edge_residual: f64,
    pub output_residual: f64,
}

/// Solves `Ã_rΘ_r = Θ_{r'}` on every edge and `C̃_rΘ_r = I` on every mode jointly.
pub fn find_regulation_witness(cl: &SwitchedSystem) -> Result<RegulationWitness> {
    let (n, _, d) = cl.dims();
    let nm = cl.modes.len();
    let id = eye(d);
    let per = n * d;
    let edges = cl.graph.edges();
    let rows = edges.len() * per + nm * d * d;
    let mut a = zeros(rows, nm * per);
    let mut b = zeros(rows, 1);
    let mut row = 0;
    for &(r, rp) in edges {
        a.view_mut((row, r * per), (per, per)).copy_from(&kron(&id, &cl.modes[r].a));
        let mut v = a.view_mut((row, rp * per), (per, per));
        v -= eye(per);
        row += per;
    }
    for (r, m) in cl.modes.iter().enumerate() {
        a.view_mut((row, r * per), (d * d, per)).copy_from(&kron(&id, &m.c));
        b.view_mut((row, 0), (d * d, 1)).copy_from(&Mat::from_column_slice(d * d, 1, id.as_slice()));
        row += d * d;
    }
    let (x, residual) = lstsq(&a, &b);
    if !(residual <= WITNESS_TOL * (1.0 + a.norm() + b.norm())) {
        return Err(Error::NoWitness { residual });
    }
    let theta: Vec<Mat> = (0..nm).map(|r| Mat::from_column_slice(n, d, &x.as_slice()[r * per..(r + 1) * per])).collect();
    let edge_residual = edges
        .iter()
        .map(|&(r, rp)| (&cl.modes[r].a * &theta[r] - &theta[rp]).amax())
        .fold(0.0, f64::max);
    let output_residual = cl.modes.iter().zip(&theta).map(|(m, t)| (&m.c * t - &id).amax()).fold(0.0, f64::max);
    Ok(RegulationWitness { theta, edge_residual, output_residual })
}

/// How the multiplier enters an analysis problem.
#[derive(Clone, Debug, PartialEq)]
pub enum LambdaMode {
    Fixed(FilterCoefficients),
    /// Searched jointly with the storages, with the given order.
    /// `normalize` pins `λ_0 = 1`.
    Free { order: usize, normalize: bool },
}

impl LambdaMode {
    pub fn free(order: usize) -> Self {
        LambdaMode::Free { order, normalize: true }
    }

    pub fn order(&self) -> usize {
        match self {
            LambdaMode::Fixed(f) => f.order(),
            LambdaMode::Free { order, .. } => *order,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    pub lambda: LambdaMode,
    pub common_storage: bool,
    pub lmi: LmiConfig,
}

impl AnalysisOptions {
    pub fn new(lambda: LambdaMode, common_storage: bool) -> Self {
        AnalysisOptions { lambda, common_storage, lmi: LmiConfig::default() }
    }
}

#[derive(Clone, Debug)]
pub struct RateCheck {
    pub solution: LmiSolution,
    pub lambda: Option<FilterCoefficients>,
    pub storages: Vec<Mat>,
}

impl RateCheck {
    pub fn feasible(&self) -> bool {
        self.solution.status == Status::Feasible
    }
}

/// `[[A_f, B_f Ĉ], [0, Â]]`, `[−B_f; B̂]` (filter `⊗ I_d`), and the affine `[C_f, λ_0 Ĉ]`, `−λ_0 I`.
pub(crate) fn cascade_blocks(a_hat: &Mat, b_hat: &Mat, c_hat: &Mat, order: usize, lam: &[Affine]) -> (Mat, Mat, MatExpr, MatExpr) {
    let n = a_hat.nrows();
    let d = c_hat.nrows();
    let id = eye(d);
    let af = kron(&shift(order), &id);
    let bf = kron(&unit(order, 0), &id);
    let aa = linalg::block(&[&[&af, &(&bf * c_hat)], &[&zeros(n, order * d), a_hat]]);
    let bb = vstack(&[&(-&bf), b_hat]);
    let mut cc = MatExpr::scalar_times(&lam[0], &hstack(&[&zeros(d, order * d), c_hat]));
    for (i, li) in lam.iter().enumerate().skip(1) {
        let sel = kron(&unit(order, i - 1).transpose(), &id);
        cc = cc.add(&MatExpr::scalar_times(li, &hstack(&[&sel, &zeros(d, n)])));
    }
    let dd = MatExpr::scalar_times(&lam[0], &(-&id));
    (aa, bb, cc, dd)
}

/// Builds the analysis LMI problem at rate `rho`; returns the problem with its
/// storage and multiplier variables.
fn build_problem(
    cl: &SwitchedSystem,
    sector: SectorSpec,
    rho: f64,
    opts: &AnalysisOptions,
) -> Result<Option<(LmiProblem, Vec<crate::lmi::VarId>, Option<crate::lmi::VarId>)>> {
    let hat = rho_weight_and_loop(cl, sector, rho)?;
    let (n, _, d) = hat.dims();
    let order = opts.lambda.order();
    let nt = n + order * d;
    let mut p = LmiProblem::new();

    let (lam, lam_var): (Vec<Affine>, Option<_>) = match &opts.lambda {
        LambdaMode::Fixed(f) => {
            if !f.check_admissible(rho) {
                return Ok(None);
            }
            (f.coefficients().iter().map(|&c| Affine::constant(c)).collect(), None)
        }
        LambdaMode::Free { order, normalize } => {
            let v = p.vector("lambda", order + 1);
            let lam: Vec<Affine> = (0..=*order).map(|i| p.scalar(v, i)).collect();
            if *normalize {
                let mut e = lam[0].clone();
                e.constant -= 1.0;
                p.equal(e);
            } else {
                p.nonneg(lam[0].clone());
            }
            for li in &lam[1..] {
                p.nonneg(li.scaled(-1.0));
            }
            let mut sum = Affine::constant(-ADMISSIBILITY_MARGIN);
            for (i, li) in lam.iter().enumerate() {
                sum.add_scaled(li, rho.powi(-(i as i32)));
            }
            p.nonneg(sum);
            (lam, Some(v))
        }
    };

    let nm = hat.modes.len();
    let storages: Vec<_> = if opts.common_storage {
        vec![p.symmetric("M", nt); nm]
    } else {
        (0..nm).map(|r| p.symmetric(&format!("M{}", r + 1), nt)).collect()
    };
    let mut seen = Vec::new();
    for &v in &storages {
        if !seen.contains(&v) {
            seen.push(v);
            p.lmi("storage", p.expr(v), Sense::Pos);
        }
    }
    let blocks: Vec<_> = hat.modes.iter().map(|m| cascade_blocks(&m.a, &m.b, &m.c, order, &lam)).collect();
    for &(r, rp) in cl.graph.edges() {
        let (aa, bb, cc, dd) = &blocks[r];
        let ab = hstack(&[aa, bb]);
        let next = p.expr(storages[rp]).congruence(&ab);
        let cur = p.expr(storages[r]);
        let z = MatExpr::zeros(d, d);
        let cur_pad = MatExpr::block(&[vec![Some(&cur), None], vec![None, Some(&z)]]);
        let cct = cc.transpose();
        let dsum = dd.add(&dd.transpose());
        let cross = MatExpr::block(&[vec![None, Some(&cct)], vec![Some(cc), Some(&dsum)]]);
        let expr = next.sub(&cur_pad).add(&cross);
        p.lmi(&format!("edge {}->{}", r + 1, rp + 1), expr, Sense::Neg);
    }
    Ok(Some((p, storages, lam_var)))
}

/// One feasibility test of the analysis LMIs at rate `rho`.
pub fn feasible_at_rate(cl: &SwitchedSystem, sector: SectorSpec, rho: f64, opts: &AnalysisOptions) -> Result<RateCheck> {
    let Some((p, storages, lam_var)) = build_problem(cl, sector, rho, opts)? else {
        return Ok(RateCheck {
            solution: LmiSolution::infeasible("multiplier not admissible at this rate"),
            lambda: None,
            storages: Vec::new(),
        });
    };
    let mut sol = p.solve(&opts.lmi);
    if sol.status != Status::Feasible {
        // Second opinion in feasibility mode with a relaxed strictness.
        let cfg = LmiConfig { margin_mode: !opts.lmi.margin_mode, eps_min: opts.lmi.eps_min * 0.1, ..opts.lmi.clone() };
        let retry = p.solve(&cfg);
        if retry.status == Status::Feasible || sol.status == Status::NumericalFailure {
            sol = retry;
        }
    }
    let storages: Vec<Mat> = storages.iter().map(|&v| p.value(&sol, v)).collect();
    let lambda = match (&opts.lambda, lam_var) {
        (LambdaMode::Fixed(f), _) => Some(f.clone()),
        (_, Some(v)) => {
            // Solver round-off can leave tail entries at +1e-12.
            let clean = p.value(&sol, v).iter().enumerate().map(|(i, &x)| if i > 0 { x.min(0.0) } else { x }).collect();
            FilterCoefficients::new(clean).ok()
        }
        _ => None,
    };
    Ok(RateCheck { solution: sol, lambda, storages })
}

/// Certified rate with its certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCertificate {
    pub rho: f64,
    pub lambda: FilterCoefficients,
    #[serde(with = "linalg::rows_vec")]
    pub storages: Vec<Mat>,
    #[serde(with = "linalg::rows_vec")]
    pub witness: Vec<Mat>,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RateOutcome {
    Certified(RateCertificate),
    /// Infeasible already at `ρ = 1`.
    Diverged,
}

impl RateOutcome {
    pub fn rho(&self) -> Option<f64> {
        match self {
            RateOutcome::Certified(c) => Some(c.rho),
            RateOutcome::Diverged => None,
        }
    }

    pub fn certificate(&self) -> Option<&RateCertificate> {
        match self {
            RateOutcome::Certified(c) => Some(c),
            RateOutcome::Diverged => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BisectionOptions {
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for BisectionOptions {
    fn default() -> Self {
        BisectionOptions { lo: 0.0, hi: 1.0, tol: 1e-4, max_iters: 40 }
    }
}

/// Generic bisection on a monotone predicate; returns the smallest accepted
/// value found together with its payload, or `None` if `hi` is rejected.
pub fn bisect<T>(opts: BisectionOptions, mut test: impl FnMut(f64) -> Result<Option<T>>) -> Result<Option<(f64, T)>> {
    let Some(mut best) = test(opts.hi)? else {
        return Ok(None);
    };
    let (mut lo, mut hi) = (opts.lo, opts.hi);
    for _ in 0..opts.max_iters {
        if hi - lo <= opts.tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match test(mid)? {
            Some(t) => {
                hi = mid;
                best = t;
            }
            None => lo = mid,
        }
    }
    Ok(Some((hi, best)))
}

/// Smallest certified rate within `tol`, or `Diverged`.
pub fn bisect_rate(cl: &SwitchedSystem, sector: SectorSpec, opts: &AnalysisOptions, bis: BisectionOptions) -> Result<RateOutcome> {
    let witness = find_regulation_witness(cl)?;
    let found = bisect(bis, |rho| {
        let c = feasible_at_rate(cl, sector, rho, opts)?;
        Ok(c.feasible().then_some(c))
    })?;
    Ok(match found {
        None => RateOutcome::Diverged,
        Some((rho, c)) => RateOutcome::Certified(RateCertificate {
            rho,
            lambda: c.lambda.expect("feasible check carries a multiplier"),
            storages: c.storages,
            witness: witness.theta,
            margin: c.solution.margin,
        }),
    })
}

/// Independent re-check of a certificate: storages positive definite and every
/// edge inequality negative definite. Returns the smallest margin.
pub fn certificate_margin(cl: &SwitchedSystem, sector: SectorSpec, cert: &RateCertificate) -> Result<f64> {
    let hat = rho_weight_and_loop(cl, sector, cert.rho)?;
    let d = hat.dims().2;
    let order = cert.lambda.order();
    let lam: Vec<Affine> = cert.lambda.coefficients().iter().map(|&c| Affine::constant(c)).collect();
    let mut margin = cert.storages.iter().map(linalg::min_eig).fold(f64::INFINITY, f64::min);
    for &(r, rp) in cl.graph.edges() {
        let m = &hat.modes[r];
        let (aa, bb, cc, dd) = cascade_blocks(&m.a, &m.b, &m.c, order, &lam);
        let ab = hstack(&[&aa, &bb]);
        let cc = cc.eval(&[]);
        let dd = dd.eval(&[]);
        let lmi = ab.transpose() * &cert.storages[rp] * &ab - blkdiag(&[&cert.storages[r], &zeros(d, d)])
            + linalg::block(&[&[&zeros(aa.nrows(), aa.nrows()), &cc.transpose()], &[&cc, &(&dd + dd.transpose())]]);
        margin = margin.min(-linalg::max_eig(&lmi));
    }
    Ok(margin)
}

/// Result of a boundary search over a scalar parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Threshold {
    /// Predicate holds below and fails above this value (within tolerance).
    Boundary(f64),
    /// Predicate holds on the whole range.
    AlwaysHolds,
    /// Predicate fails already at the lower end.
    NeverHolds,
}

/// Binary search for the largest parameter in `[lo, hi]` where `pred` holds.
pub fn threshold_search(lo: f64, hi: f64, tol: f64, mut pred: impl FnMut(f64) -> Result<bool>) -> Result<Threshold> {
    if !pred(lo)? {
        return Ok(Threshold::NeverHolds);
    }
    if pred(hi)? {
        return Ok(Threshold::AlwaysHolds);
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if pred(mid)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Threshold::Boundary(0.5 * (a + b)))
}
