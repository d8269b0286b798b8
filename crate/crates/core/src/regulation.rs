//! Regulator equations, per-mode internal models and the plant/model interconnection.

use serde::{Deserialize, Serialize};

use crate::linalg::{self, block, eye, hstack, kron, lstsq, vstack, zeros, Mat};
use crate::model::{ModeRealization, PlantDims, PlantMode, SwitchedPlant, SwitchedSystem};
use crate::{Error, Result};

pub const REGULATION_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegulatorSolution {
    #[serde(with = "linalg::rows_vec")]
    pub pi: Vec<Mat>,
    #[serde(with = "linalg::rows_vec")]
    pub gamma: Vec<Mat>,
    #[serde(with = "linalg::rows_vec")]
    pub phi: Vec<Mat>,
    pub residual: f64,
}

fn vec_of(m: &Mat) -> Mat {
    Mat::from_column_slice(m.len(), 1, m.as_slice())
}

fn unvec(v: &[f64], r: usize, c: usize) -> Mat {
    Mat::from_column_slice(r, c, v)
}

/// Stacks `AΠ_r + B₂Γ_r = Π_{r'}` per edge and `C₁Π_r + D₁₂Γ_r = −I` per mode,
/// and takes the minimum-norm least-squares solution.
pub fn solve_regulator(plant: &SwitchedPlant) -> Result<RegulatorSolution> {
    plant.check()?;
    let PlantDims { n, d, nu, .. } = plant.dims();
    let nm = plant.modes.len();
    let per = n * d + nu * d;
    let id = eye(d);
    let edges = plant.graph.edges();
    let rows = edges.len() * n * d + nm * d * d;
    let mut a = zeros(rows, nm * per);
    let mut b = zeros(rows, 1);
    let mut row = 0;
    for &(r, rp) in edges {
        let p = &plant.modes[r];
        let k = n * d;
        a.view_mut((row, r * per), (k, k)).copy_from(&kron(&id, &p.a));
        a.view_mut((row, r * per + k), (k, nu * d)).copy_from(&kron(&id, &p.b2));
        let mut v = a.view_mut((row, rp * per), (k, k));
        v -= eye(k);
        row += k;
    }
    for (r, p) in plant.modes.iter().enumerate() {
        let k = d * d;
        a.view_mut((row, r * per), (k, n * d)).copy_from(&kron(&id, &p.c1));
        a.view_mut((row, r * per + n * d), (k, nu * d)).copy_from(&kron(&id, &p.d12));
        b.view_mut((row, 0), (k, 1)).copy_from(&vec_of(&(-&id)));
        row += k;
    }
    let (x, residual) = lstsq(&a, &b);
    let scale = 1.0 + a.norm() + b.norm();
    if !(residual <= REGULATION_TOL * scale) {
        return Err(Error::RegulatorInfeasible { residual });
    }
    let mut pi = Vec::with_capacity(nm);
    let mut gamma = Vec::with_capacity(nm);
    let mut phi = Vec::with_capacity(nm);
    for (r, p) in plant.modes.iter().enumerate() {
        let s = &x.as_slice()[r * per..(r + 1) * per];
        let pr = unvec(&s[..n * d], n, d);
        let gr = unvec(&s[n * d..], nu, d);
        phi.push(&p.c2 * &pr + &p.d22 * &gr);
        pi.push(pr);
        gamma.push(gr);
    }
    Ok(RegulatorSolution { pi, gamma, phi, residual })
}

impl RegulatorSolution {
    /// Largest violation of the regulator equations on `plant`.
    pub fn max_residual(&self, plant: &SwitchedPlant) -> f64 {
        let d = plant.dims().d;
        let edge = plant.graph.edges().iter().map(|&(r, rp)| {
            let p = &plant.modes[r];
            (&p.a * &self.pi[r] + &p.b2 * &self.gamma[r] - &self.pi[rp]).amax()
        });
        let out = plant
            .modes
            .iter()
            .enumerate()
            .map(|(r, p)| (&p.c1 * &self.pi[r] + &p.d12 * &self.gamma[r] + eye(d)).amax());
        edge.chain(out).fold(0.0, f64::max)
    }
}

/// `ω⁺ = ω + ũ₁`, `u = −Γω + ũ₂`, `ỹ = Φω + y`; inputs `(y, ũ₁, ũ₂)`, outputs `(u, ỹ)`.
pub fn internal_model(gamma: &Mat, phi: &Mat) -> PlantMode {
    let d = gamma.ncols();
    let (nu, ny) = (gamma.nrows(), phi.nrows());
    PlantMode {
        a: eye(d),
        b1: zeros(d, ny),
        b2: hstack(&[&eye(d), &zeros(d, nu)]),
        c1: -gamma,
        c2: phi.clone(),
        d11: zeros(nu, ny),
        d12: hstack(&[&zeros(nu, d), &eye(nu)]),
        d21: eye(ny),
        d22: zeros(ny, d + nu),
    }
}

pub fn build_internal_model(sol: &RegulatorSolution) -> Vec<PlantMode> {
    sol.gamma.iter().zip(&sol.phi).map(|(g, p)| internal_model(g, p)).collect()
}

/// `G_r = P_r ⋆ Q_r` with state `[x; ω]`, inputs `(w, ũ₁, ũ₂)`, outputs `(z, ỹ)`.
pub fn connect_mode(p: &PlantMode, gamma: &Mat, phi: &Mat) -> PlantMode {
    let PlantDims { n, d, nu, ny } = p.dims();
    let b2g = &p.b2 * gamma;
    PlantMode {
        a: block(&[&[&p.a, &(-b2g)], &[&zeros(d, n), &eye(d)]]),
        b1: vstack(&[&p.b1, &zeros(d, d)]),
        b2: block(&[&[&zeros(n, d), &p.b2], &[&eye(d), &zeros(d, nu)]]),
        c1: hstack(&[&p.c1, &(-(&p.d12 * gamma))]),
        c2: hstack(&[&p.c2, &(phi - &p.d22 * gamma)]),
        d11: p.d11.clone(),
        d12: hstack(&[&zeros(d, d), &p.d12]),
        d21: p.d21.clone(),
        d22: hstack(&[&zeros(ny, d), &p.d22]),
    }
}

pub fn connect_plant_model(plant: &SwitchedPlant, sol: &RegulatorSolution) -> Result<SwitchedPlant> {
    let modes = plant
        .modes
        .iter()
        .enumerate()
        .map(|(r, p)| connect_mode(p, &sol.gamma[r], &sol.phi[r]))
        .collect();
    SwitchedPlant::new(modes, plant.graph.clone())
}

/// Whether subcontroller mode `r` may feed `ỹ` through to `ũ₂`.
pub fn feedthrough_allowed(g: &PlantMode) -> bool {
    let d = g.dims().d;
    let nu = g.dims().nu - d;
    let plant_d12 = g.d12.columns(d, nu);
    let plant_d22 = g.d22.columns(d, nu);
    plant_d12.iter().all(|&x| x == 0.0) && plant_d22.iter().all(|&x| x == 0.0)
}

/// Zero rows of the subcontroller feedthrough that violate the structure rule.
pub fn structure_violation(g: &PlantMode, r: &ModeRealization) -> f64 {
    if feedthrough_allowed(g) {
        return 0.0;
    }
    let d = g.dims().d;
    r.d.rows(d, r.d.nrows() - d).amax()
}

/// Witness `Θ_r = [−Π_r; I; 0]` for a closed loop with `order_r` controller states.
pub fn regulation_witness(sol: &RegulatorSolution, orders: &[usize]) -> Vec<Mat> {
    sol.pi
        .iter()
        .zip(orders)
        .map(|(p, &k)| {
            let d = p.ncols();
            vstack(&[&(-p), &eye(d), &zeros(k, d)])
        })
        .collect()
}

/// `(max edge residual, max output residual)` of a witness.
pub fn witness_residuals(cl: &SwitchedSystem, theta: &[Mat]) -> (f64, f64) {
    let e = cl
        .graph
        .edges()
        .iter()
        .map(|&(r, rp)| (&cl.modes[r].a * &theta[r] - &theta[rp]).amax())
        .fold(0.0, f64::max);
    let o = cl
        .modes
        .iter()
        .zip(theta)
        .map(|(m, t)| (&m.c * t - eye(m.outputs())).amax())
        .fold(0.0, f64::max);
    (e, o)
}

/// Closed loop `G_r ⋆ R_r`, state `[x; ω; ξ]`.
pub fn close_loop(plant: &SwitchedPlant, sol: &RegulatorSolution, sub: &[ModeRealization]) -> Result<SwitchedSystem> {
    connect_plant_model(plant, sol)?.star_controller(sub)
}

/// Regulation witness holds to `1e-8` and the loop has no feedthrough.
pub fn verify_closed_loop_regulation(
    plant: &SwitchedPlant,
    sol: &RegulatorSolution,
    sub: &[ModeRealization],
) -> Result<bool> {
    let cl = close_loop(plant, sol, sub)?;
    let orders: Vec<usize> = sub.iter().map(|r| r.states()).collect();
    let theta = regulation_witness(sol, &orders);
    let (e, o) = witness_residuals(&cl, &theta);
    let dmax = cl.modes.iter().map(|m| m.d.amax()).fold(0.0, f64::max);
    Ok(e <= REGULATION_TOL && o <= REGULATION_TOL && dmax <= REGULATION_TOL)
}
