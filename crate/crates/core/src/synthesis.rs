//! Output-feedback synthesis on the plant/internal-model interconnection:
//! weighted loop-transformed plant, filter cascade, convexifying change of
//! controller variables, and controller reconstruction.

use serde::{Deserialize, Serialize};

use crate::analysis::{self, bisect, AnalysisOptions, BisectionOptions, LambdaMode};
use crate::linalg::{self, block, eye, hstack, inverse, kron, shift, unit, vstack, zeros, Mat};
use crate::lmi::{LmiConfig, LmiProblem, LmiSolution, MatExpr, Sense, Status, VarId};
use crate::model::{ModeRealization, PlantDims, PlantMode, SwitchedPlant, SwitchedSystem};
use crate::regulation::{self, connect_plant_model, feedthrough_allowed, RegulatorSolution};
use crate::transforms::{FilterCoefficients, SectorSpec};
use crate::{Error, Result};

/// Step added to the certified rate when re-checking a synthesized loop.
pub const CROSS_CHECK_STEP: f64 = 1e-3;

/// Loop transformation and ρ-weighting of `G_r` with `Δ = (I − m D₁₁)⁻¹`.
pub fn delta_plant(g: &PlantMode, sector: SectorSpec, rho: f64) -> Option<PlantMode> {
    let SectorSpec { m, l } = sector;
    let d = g.dims().d;
    let delta = inverse(&(eye(d) - m * &g.d11))?;
    let bd = &g.b1 * &delta;
    let dyd = &g.d21 * &delta;
    Some(PlantMode {
        a: (&g.a + m * &bd * &g.c1) / rho,
        b1: &bd / rho,
        b2: (&g.b2 + m * &bd * &g.d12) / rho,
        c1: (l - m) * &delta * &g.c1,
        d11: (l - m) * &delta * &g.d11 - eye(d),
        d12: (l - m) * &delta * &g.d12,
        c2: &g.c2 + m * &dyd * &g.c1,
        d21: dyd.clone(),
        d22: &g.d22 + m * &dyd * &g.d12,
    })
}

/// Filter `⊗ I_d` on the first output channel; state `[filter; plant]`.
pub fn synth_cascade(p: &PlantMode, filter: &FilterCoefficients) -> PlantMode {
    let PlantDims { n, d, ny, .. } = p.dims();
    let nu = filter.order();
    let id = eye(d);
    let f = filter.realization();
    let af = kron(&shift(nu), &id);
    let bf = kron(&unit(nu, 0), &id);
    let cf = kron(&f.c, &id);
    let df = kron(&f.d, &id);
    PlantMode {
        a: block(&[&[&af, &(&bf * &p.c1)], &[&zeros(n, nu * d), &p.a]]),
        b1: vstack(&[&(&bf * &p.d11), &p.b1]),
        b2: vstack(&[&(&bf * &p.d12), &p.b2]),
        c1: hstack(&[&cf, &(&df * &p.c1)]),
        d11: &df * &p.d11,
        d12: &df * &p.d12,
        c2: hstack(&[&zeros(ny, nu * d), &p.c2]),
        d21: p.d21.clone(),
        d22: p.d22.clone(),
    }
}

#[derive(Clone, Debug)]
pub struct SynthesisOptions {
    pub lambda: FilterCoefficients,
    pub common_storage: bool,
    pub lmi: LmiConfig,
}

impl SynthesisOptions {
    pub fn new(lambda: FilterCoefficients, common_storage: bool) -> Self {
        SynthesisOptions { lambda, common_storage, lmi: LmiConfig { margin_mode: false, ..LmiConfig::default() } }
    }
}

/// Values of the transformed decision variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisVariables {
    #[serde(with = "linalg::rows")]
    pub x: Mat,
    #[serde(with = "linalg::rows")]
    pub y: Mat,
    #[serde(with = "linalg::rows")]
    pub s: Mat,
    #[serde(with = "linalg::rows_vec")]
    pub storages: Vec<Mat>,
    #[serde(with = "linalg::rows_vec")]
    pub ak: Vec<Mat>,
    #[serde(with = "linalg::rows_vec")]
    pub bk: Vec<Mat>,
    #[serde(with = "linalg::rows_vec")]
    pub ck: Vec<Mat>,
    #[serde(with = "linalg::rows_vec")]
    pub dk: Vec<Mat>,
}

#[derive(Clone, Debug)]
pub struct SynthCheck {
    pub solution: LmiSolution,
    pub vars: Option<SynthesisVariables>,
    /// Weighted, loop-transformed, filtered plant per mode.
    pub plants: Vec<PlantMode>,
    /// Whether `ũ₂` feedthrough is allowed per mode.
    pub feedthrough: Vec<bool>,
}

impl SynthCheck {
    pub fn feasible(&self) -> bool {
        self.solution.status == Status::Feasible
    }
}

struct SynthVars {
    x: VarId,
    y: VarId,
    s: Option<VarId>,
    m: Vec<VarId>,
    ak: Vec<VarId>,
    bk: Vec<VarId>,
    ck: Vec<VarId>,
    dk: Vec<VarId>,
}

pub fn synthesis_plants(g: &SwitchedPlant, sector: SectorSpec, rho: f64, lambda: &FilterCoefficients) -> Result<Vec<PlantMode>> {
    g.modes
        .iter()
        .enumerate()
        .map(|(r, gm)| {
            delta_plant(gm, sector, rho)
                .map(|p| synth_cascade(&p, lambda))
                .ok_or(Error::IllPosed { mode: r + 1 })
        })
        .collect()
}

fn build_problem(plants: &[PlantMode], feed: &[bool], edges: &[(usize, usize)], d: usize, common: bool) -> (LmiProblem, SynthVars) {
    let PlantDims { n: nt, nu, ny, .. } = plants[0].dims();
    let nm = plants.len();
    let mut p = LmiProblem::new();
    let (x, y, s) = if common {
        (p.symmetric("X", nt), p.symmetric("Y", nt), None)
    } else {
        (p.rect("X", nt, nt), p.rect("Y", nt, nt), Some(p.rect("S", nt, nt)))
    };
    let m: Vec<VarId> = if common { Vec::new() } else { (0..nm).map(|r| p.symmetric(&format!("M{}", r + 1), 2 * nt)).collect() };
    let ak: Vec<VarId> = (0..nm).map(|r| p.rect(&format!("Ak{}", r + 1), nt, nt)).collect();
    let bk: Vec<VarId> = (0..nm).map(|r| p.rect(&format!("Bk{}", r + 1), nt, ny)).collect();
    let ck: Vec<VarId> = (0..nm).map(|r| p.rect(&format!("Ck{}", r + 1), nu, nt)).collect();
    let dk: Vec<VarId> = (0..nm).map(|r| p.rect(&format!("Dk{}", r + 1), nu, ny)).collect();

    let xe = p.expr(x);
    let ye = p.expr(y);
    let ident = MatExpr::constant(&eye(nt));
    let se = s.map_or_else(|| ident.clone(), |s| p.expr(s));
    let gm = MatExpr::block(&[vec![Some(&xe), Some(&ident)], vec![Some(&se), Some(&ye)]]);
    let ggt = gm.add(&gm.transpose());
    let storage: Vec<MatExpr> = if common {
        let z = MatExpr::zeros(nt, nt);
        vec![MatExpr::block(&[vec![Some(&xe), Some(&z)], vec![Some(&z), Some(&ye)]]); nm]
    } else {
        m.iter().map(|&v| p.expr(v)).collect()
    };
    if !common {
        for (r, e) in storage.iter().enumerate() {
            p.lmi(&format!("storage {}", r + 1), e.clone(), Sense::Pos);
        }
    }
    let dks: Vec<MatExpr> = (0..nm)
        .map(|r| if feed[r] { p.expr(dk[r]) } else { p.expr_masked(dk[r], |i, _| i >= d) })
        .collect();
    for &(r, rp) in edges {
        let pl = &plants[r];
        let ake = p.expr(ak[r]);
        let bke = p.expr(bk[r]);
        let cke = p.expr(ck[r]);
        let dke = &dks[r];
        let a11 = xe.lmul(&pl.a).add(&cke.lmul(&pl.b2));
        let a12 = dke.sandwich(&pl.b2, &pl.c2).add_const(&pl.a);
        let a22 = ye.rmul(&pl.a).add(&bke.rmul(&pl.c2));
        let acl = MatExpr::block(&[vec![Some(&a11), Some(&a12)], vec![Some(&ake), Some(&a22)]]);
        let b1 = dke.sandwich(&pl.b2, &pl.d21).add_const(&pl.b1);
        let b2 = ye.rmul(&pl.b1).add(&bke.rmul(&pl.d21));
        let bcl = MatExpr::block(&[vec![Some(&b1)], vec![Some(&b2)]]);
        let c1 = xe.lmul(&pl.c1).add(&cke.lmul(&pl.d12));
        let c2 = dke.sandwich(&pl.d12, &pl.c2).add_const(&pl.c1);
        let ccl = MatExpr::block(&[vec![Some(&c1), Some(&c2)]]);
        let dcl = dke.sandwich(&pl.d12, &pl.d21).add_const(&pl.d11);
        let mid = ggt.sub(&storage[r]);
        let aclt = acl.transpose();
        let bclt = bcl.transpose();
        let hc = ccl.scale(-0.5);
        let hct = hc.transpose();
        let hd = dcl.add(&dcl.transpose()).scale(-0.5);
        let big = MatExpr::block(&[
            vec![Some(&storage[rp]), Some(&acl), Some(&bcl)],
            vec![Some(&aclt), Some(&mid), Some(&hct)],
            vec![Some(&bclt), Some(&hc), Some(&hd)],
        ]);
        p.lmi(&format!("edge {}->{}", r + 1, rp + 1), big, Sense::Pos);
    }
    (p, SynthVars { x, y, s, m, ak, bk, ck, dk })
}

fn extract(p: &LmiProblem, v: &SynthVars, sol: &LmiSolution, common: bool, nm: usize, feed: &[bool], d: usize) -> SynthesisVariables {
    let x = p.value(sol, v.x);
    let y = p.value(sol, v.y);
    let nt = x.nrows();
    let s = v.s.map_or_else(|| eye(nt), |s| p.value(sol, s));
    let storages = if common {
        vec![linalg::blkdiag(&[&x, &y]); nm]
    } else {
        v.m.iter().map(|&m| p.value(sol, m)).collect()
    };
    let dk = v
        .dk
        .iter()
        .enumerate()
        .map(|(r, &id)| {
            let mut m = p.value(sol, id);
            if !feed[r] {
                let rows = m.nrows() - d;
                m.rows_mut(d, rows).fill(0.0);
            }
            m
        })
        .collect();
    SynthesisVariables {
        x,
        y,
        s,
        storages,
        ak: v.ak.iter().map(|&id| p.value(sol, id)).collect(),
        bk: v.bk.iter().map(|&id| p.value(sol, id)).collect(),
        ck: v.ck.iter().map(|&id| p.value(sol, id)).collect(),
        dk,
    }
}

/// Synthesis LMIs at rate `rho` on `g = P ⋆ Q`.
pub fn synth_feasible_at_rate(g: &SwitchedPlant, sector: SectorSpec, rho: f64, opts: &SynthesisOptions) -> Result<SynthCheck> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidArgument(format!("rate {rho} outside (0, 1]")));
    }
    let feedthrough: Vec<bool> = g.modes.iter().map(feedthrough_allowed).collect();
    if !opts.lambda.check_admissible(rho) {
        return Ok(SynthCheck {
            solution: LmiSolution::infeasible("multiplier not admissible at this rate"),
            vars: None,
            plants: Vec::new(),
            feedthrough,
        });
    }
    let plants = synthesis_plants(g, sector, rho, &opts.lambda)?;
    let d = g.dims().d;
    let (p, v) = build_problem(&plants, &feedthrough, g.graph.edges(), d, opts.common_storage);
    let sol = p.solve(&opts.lmi);
    let vars = (sol.status == Status::Feasible)
        .then(|| extract(&p, &v, &sol, opts.common_storage, plants.len(), &feedthrough, d));
    Ok(SynthCheck { solution: sol, vars, plants, feedthrough })
}

/// Recovers per-mode subcontrollers `R_r` (inputs `ỹ`, outputs `(ũ₁, ũ₂)`) in
/// unweighted coordinates. The controller state basis is chosen from the
/// certificate so that the realization is well scaled.
pub fn reconstruct(vars: &SynthesisVariables, plants: &[PlantMode], rho: f64) -> Result<Vec<ModeRealization>> {
    let nt = vars.x.nrows();
    let u = &vars.s - &vars.y * &vars.x;
    let svals = u.clone().svd(false, false).singular_values;
    let smin = svals.iter().cloned().fold(f64::INFINITY, f64::min);
    if nt > 0 && !(smin > 1e-9 * (1.0 + u.norm())) {
        return Err(Error::Reconstruction(format!("S − YX is near singular (σ_min = {smin:.2e})")));
    }
    let ui = inverse(&u).ok_or_else(|| Error::Reconstruction("S − YX is singular".into()))?;
    let (x, y) = (&vars.x, &vars.y);
    let mut out = Vec::with_capacity(plants.len());
    for (r, pl) in plants.iter().enumerate() {
        let dc = vars.dk[r].clone();
        let cc = (&vars.ck[r] - &dc * &pl.c2 * x) * &ui;
        let bc = &vars.bk[r] - y * &pl.b2 * &dc;
        let ac = (&vars.ak[r] - y * (&pl.a + &pl.b2 * &dc * &pl.c2) * x - y * &pl.b2 * &cc * &u - &bc * &pl.c2 * x) * &ui;
        // Re-insert the measurement feedthrough.
        let nu = dc.nrows();
        let mi = inverse(&(eye(nu) + &dc * &pl.d22))
            .ok_or_else(|| Error::Reconstruction(format!("feedthrough loop singular in mode {}", r + 1)))?;
        let ny = pl.d22.nrows();
        let ac2 = &ac - &bc * &pl.d22 * &mi * &cc;
        let bc2 = &bc * (eye(ny) - &pl.d22 * &mi * &dc);
        let cc2 = &mi * &cc;
        let mut dc2 = &mi * &dc;
        // A zero row of Dc stays zero through the feedthrough loop; keep it exact.
        for i in 0..nu {
            if dc.row(i).iter().all(|&v| v == 0.0) {
                dc2.row_mut(i).fill(0.0);
            }
        }
        out.push(ModeRealization { a: rho * ac2, b: rho * bc2, c: cc2, d: dc2 });
    }
    if let Some(t) = conditioning_transform(vars) {
        out = out.iter().map(|k| k.similarity(&t)).collect::<Result<_>>()?;
    }
    Ok(out)
}

/// Controller-state transform from the averaged closed-loop storage.
fn conditioning_transform(vars: &SynthesisVariables) -> Option<Mat> {
    let nt = vars.x.nrows();
    if nt == 0 {
        return None;
    }
    let p2i = block(&[&[&eye(nt), &(-&vars.y)], &[&zeros(nt, nt), &eye(nt)]]);
    let mut p = zeros(2 * nt, 2 * nt);
    for m in &vars.storages {
        p += inverse(&(p2i.transpose() * m * &p2i))?;
    }
    p /= vars.storages.len() as f64;
    let pcc = linalg::sym(&p.view((nt, nt), (nt, nt)).into());
    let l = pcc.cholesky()?.l();
    inverse(&l.transpose())
}

/// `K_r = Q_r ⋆ R_r`: maps `y → u` with state `[ω; ξ]`.
pub fn assemble_controller(sol: &RegulatorSolution, sub: &[ModeRealization]) -> Result<Vec<ModeRealization>> {
    sub.iter()
        .enumerate()
        .map(|(r, rr)| {
            regulation::internal_model(&sol.gamma[r], &sol.phi[r])
                .star(rr)
                .ok_or(Error::IllPosed { mode: r + 1 })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub rho: f64,
    pub lambda: FilterCoefficients,
    pub common_storage: bool,
    pub subcontroller: Vec<ModeRealization>,
    pub controller: Vec<ModeRealization>,
    pub closed_loop: SwitchedSystem,
    #[serde(with = "linalg::rows_vec")]
    pub storages: Vec<Mat>,
    pub margin: f64,
    /// Rate at which the analysis LMIs re-certified the closed loop, if they did.
    pub cross_certified_at: Option<f64>,
}

impl SynthesisResult {
    pub fn order(&self) -> usize {
        self.subcontroller.first().map_or(0, |r| r.states())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SynthesisOutcome {
    Synthesized(Box<SynthesisResult>),
    Diverged,
}

impl SynthesisOutcome {
    pub fn result(&self) -> Option<&SynthesisResult> {
        match self {
            SynthesisOutcome::Synthesized(r) => Some(r),
            SynthesisOutcome::Diverged => None,
        }
    }

    pub fn rho(&self) -> Option<f64> {
        self.result().map(|r| r.rho)
    }
}

/// Analysis at `rho + CROSS_CHECK_STEP` (capped at 1) with the same multiplier and storage mode.
pub fn cross_certify(cl: &SwitchedSystem, sector: SectorSpec, rho: f64, lambda: &FilterCoefficients, common: bool) -> Result<Option<f64>> {
    let at = (rho + CROSS_CHECK_STEP).min(1.0);
    let opts = AnalysisOptions::new(LambdaMode::Fixed(lambda.clone()), common);
    let c = analysis::feasible_at_rate(cl, sector, at, &opts)?;
    Ok(c.feasible().then_some(at))
}

/// Bisection on ρ for the synthesis LMIs; the controller at the smallest
/// feasible rate is reconstructed, assembled and cross-certified.
pub fn bisect_synthesis(
    plant: &SwitchedPlant,
    sol: &RegulatorSolution,
    sector: SectorSpec,
    opts: &SynthesisOptions,
    bis: BisectionOptions,
) -> Result<SynthesisOutcome> {
    let g = connect_plant_model(plant, sol)?;
    let found = bisect(bis, |rho| {
        let c = synth_feasible_at_rate(&g, sector, rho, opts)?;
        if !c.feasible() {
            return Ok(None);
        }
        Ok(reconstruct(c.vars.as_ref().expect("feasible"), &c.plants, rho).ok().map(|sub| (c, sub)))
    })?;
    let Some((rho, (check, sub))) = found else {
        return Ok(SynthesisOutcome::Diverged);
    };
    let vars = check.vars.expect("feasible");
    let controller = assemble_controller(sol, &sub)?;
    let closed_loop = plant.star_controller(&controller)?;
    let cross = cross_certify(&closed_loop, sector, rho, &opts.lambda, opts.common_storage)?;
    Ok(SynthesisOutcome::Synthesized(Box::new(SynthesisResult {
        rho,
        lambda: opts.lambda.clone(),
        common_storage: opts.common_storage,
        subcontroller: sub,
        controller,
        closed_loop,
        storages: vars.storages,
        margin: check.solution.margin,
        cross_certified_at: cross,
    })))
}
