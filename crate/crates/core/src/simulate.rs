//! Test functions, gradient-oracle deployment over switching paths, rate
//! estimation and classical baselines.

use nalgebra::{DVector, QR};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, from_rows, scalar, Mat};
use crate::model::{ModeRealization, SwitchedSystem, SwitchingGraph, SwitchingPath};
use crate::transforms::{loop_signal_map, FilterCoefficients, SectorSpec};
use crate::{Error, Result};

pub type Vector = DVector<f64>;

/// Distances below this are treated as converged to machine precision.
pub const DISTANCE_FLOOR: f64 = 1e-13;
pub const DEFAULT_BURN_IN: f64 = 0.3;
/// Distance at which a run is declared divergent.
pub const DIVERGENCE_BOUND: f64 = 1e10;

/// `f(z) = ½zᵀΛz + bᵀz + (L − L')·log Σ_i (e^{z_i} + e^{−z_i})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    #[serde(with = "linalg::rows")]
    pub lambda: Mat,
    pub b: Vec<f64>,
    pub l_prime: f64,
    pub sector: SectorSpec,
    pub seed: u64,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal_vec(n: usize, rng: &mut impl Rng) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Haar-ish random orthogonal matrix (QR of a Gaussian matrix with sign fix).
fn random_orthogonal(d: usize, rng: &mut impl Rng) -> Mat {
    let g = Mat::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    let qr = QR::new(g);
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn make_function(sector: SectorSpec, l_prime: f64, d: usize, seed: u64) -> Result<TestFunction> {
    if !(l_prime > sector.m && l_prime <= sector.l) {
        return Err(Error::InvalidArgument(format!("L' = {l_prime} outside (m, L]")));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut r = rng(seed);
    let q = random_orthogonal(d, &mut r);
    let eig: Vec<f64> = (0..d).map(|_| r.random_range(sector.m..=l_prime)).collect();
    let lambda = linalg::sym(&(q.transpose() * Mat::from_diagonal(&Vector::from_vec(eig)) * &q));
    let b: Vec<f64> = (0..d).map(|_| r.sample(StandardNormal)).collect();
    Ok(TestFunction { lambda, b, l_prime, sector, seed })
}

impl TestFunction {
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    fn lse_weight(&self) -> f64 {
        self.sector.l - self.l_prime
    }

    /// Shifted `cosh`/`sinh` terms: `(c_i, s_i, shift)` with `c_i = e^{z_i − M} + e^{−z_i − M}`.
    fn lse_parts(z: &Vector) -> (Vector, Vector, f64) {
        let shift = z.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let c = z.map(|x| (x - shift).exp() + (-x - shift).exp());
        let s = z.map(|x| (x - shift).exp() - (-x - shift).exp());
        (c, s, shift)
    }

    pub fn value(&self, z: &Vector) -> f64 {
        let b = Vector::from_column_slice(&self.b);
        let quad = 0.5 * z.dot(&(&self.lambda * z)) + b.dot(z);
        let (c, _, shift) = Self::lse_parts(z);
        quad + self.lse_weight() * (c.sum().ln() + shift)
    }

    pub fn gradient(&self, z: &Vector) -> Vector {
        let (c, s, _) = Self::lse_parts(z);
        &self.lambda * z + Vector::from_column_slice(&self.b) + self.lse_weight() / c.sum() * s
    }

    pub fn hessian(&self, z: &Vector) -> Mat {
        let (c, s, _) = Self::lse_parts(z);
        let total = c.sum();
        let lse = Mat::from_diagonal(&(&c / total)) - (&s * s.transpose()) / (total * total);
        &self.lambda + self.lse_weight() * lse
    }
}

/// Damped Newton iteration to `‖∇f‖ ≤ 1e-12`.
pub fn minimize_oracle(f: &TestFunction) -> Result<Vector> {
    let b = Vector::from_column_slice(&f.b);
    let mut z = f
        .lambda
        .clone()
        .lu()
        .solve(&(-&b))
        .ok_or_else(|| Error::InvalidArgument("singular quadratic part".into()))?;
    for _ in 0..200 {
        let g = f.gradient(&z);
        if g.norm() <= 1e-12 {
            return Ok(z);
        }
        let step = f
            .hessian(&z)
            .cholesky()
            .map(|c| c.solve(&g))
            .ok_or_else(|| Error::InvalidArgument("Hessian lost definiteness".into()))?;
        let f0 = f.value(&z);
        let slope = g.dot(&step);
        if slope <= 1e-10 * (1.0 + f0.abs()) {
            z -= &step;
            continue;
        }
        let mut t = 1.0;
        while f.value(&(&z - t * &step)) > f0 - 1e-4 * t * slope && t > 1e-10 {
            t *= 0.5;
        }
        z -= t * &step;
    }
    let g = f.gradient(&z).norm();
    if g <= 1e-10 {
        Ok(z)
    } else {
        Err(Error::Solver(format!("Newton stalled at ‖∇f‖ = {g:.2e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub modes: Vec<usize>,
    pub states: Vec<Vec<f64>>,
    pub iterates: Vec<Vec<f64>>,
    pub gradients: Vec<Vec<f64>>,
    pub distances: Vec<f64>,
    pub diverged: bool,
}

impl SimulationTrace {
    pub fn final_distance(&self) -> f64 {
        self.distances.last().copied().unwrap_or(f64::NAN)
    }

    pub fn max_distance(&self) -> f64 {
        self.distances.iter().cloned().fold(0.0, f64::max)
    }

    /// CSV with header `k,mode,distance` (1-based modes).
    pub fn write_csv(&self, w: impl std::io::Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["k", "mode", "distance"])?;
        for (k, (m, d)) in self.modes.iter().zip(&self.distances).enumerate() {
            out.write_record([k.to_string(), (m + 1).to_string(), format!("{d:e}")])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Steps `ζ⁺ = Ã_{s_k}ζ + B̃_{s_k}∇f(z)`, `z = C̃_{s_k}ζ` along `path`.
/// A run stops early once the distance exceeds [`DIVERGENCE_BOUND`].
pub fn deploy(cl: &SwitchedSystem, f: &TestFunction, z_star: &Vector, path: &SwitchingPath, zeta0: &Vector) -> Result<SimulationTrace> {
    let (n, m, p) = cl.dims();
    if m != f.dim() || p != f.dim() {
        return Err(Error::Dimension(format!("loop channel width {p} but function dimension {}", f.dim())));
    }
    if zeta0.len() != n {
        return Err(Error::Dimension(format!("initial state has length {}, loop has {n} states", zeta0.len())));
    }
    if cl.modes.iter().any(|md| md.d.iter().any(|&x| x != 0.0)) {
        return Err(Error::InvalidArgument("deployment needs a loop without feedthrough".into()));
    }
    if !cl.graph.admits(&path.0) {
        return Err(Error::InvalidArgument("path is not admissible for the loop's graph".into()));
    }
    let mut zeta = zeta0.clone();
    let mut tr = SimulationTrace {
        modes: Vec::with_capacity(path.len()),
        states: Vec::with_capacity(path.len()),
        iterates: Vec::with_capacity(path.len()),
        gradients: Vec::with_capacity(path.len()),
        distances: Vec::with_capacity(path.len()),
        diverged: false,
    };
    for &s in &path.0 {
        let md = &cl.modes[s];
        let z = &md.c * &zeta;
        let w = f.gradient(&z);
        let dist = (&z - z_star).norm();
        tr.modes.push(s);
        tr.states.push(zeta.as_slice().to_vec());
        tr.iterates.push(z.as_slice().to_vec());
        tr.gradients.push(w.as_slice().to_vec());
        tr.distances.push(dist);
        if !(dist <= DIVERGENCE_BOUND) {
            tr.diverged = true;
            break;
        }
        zeta = &md.a * &zeta + &md.b * &w;
    }
    Ok(tr)
}

/// Exponentiated least-squares slope of `log‖z_k − z*‖` over the samples above
/// [`DISTANCE_FLOOR`], after dropping the first `burn_in_fraction` of them. Returns `0` when fewer than two
/// samples remain (already at the floor).
pub fn empirical_rate(distances: &[f64], burn_in_fraction: f64) -> f64 {
    if distances.iter().any(|d| !d.is_finite()) {
        return f64::INFINITY;
    }
    let Some(end) = distances.iter().rposition(|&d| d > DISTANCE_FLOOR) else {
        return 0.0;
    };
    let start = ((end + 1) as f64 * burn_in_fraction).floor() as usize;
    if end <= start {
        return 0.0;
    }
    let pts: Vec<(f64, f64)> = (start..=end).map(|k| (k as f64, distances[k].ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxy / sxx).exp()
}

/// Gradient descent with step `2/(m + L)`: `ξ⁺ = ξ − αy`, `u = ξ`.
pub fn gradient_descent(sector: SectorSpec) -> ModeRealization {
    let alpha = 2.0 / (sector.m + sector.l);
    ModeRealization { a: scalar(1.0), b: scalar(-alpha), c: scalar(1.0), d: scalar(0.0) }
}

/// Triple momentum with `ρ = 1 − √(m/L)`, state `(x_k, x_k − x_{k−1})`.
pub fn triple_momentum(sector: SectorSpec) -> ModeRealization {
    let rho = 1.0 - (sector.m / sector.l).sqrt();
    let alpha = (1.0 + rho) / sector.l;
    let beta = rho * rho / (2.0 - rho);
    let gamma = rho * rho / ((1.0 + rho) * (2.0 - rho));
    ModeRealization {
        a: from_rows(&[&[1.0, beta], &[0.0, beta]]),
        b: from_rows(&[&[-alpha], &[-alpha]]),
        c: from_rows(&[&[1.0, gamma]]),
        d: scalar(0.0),
    }
}

/// The same controller in every mode of `graph`.
pub fn mode_independent(k: ModeRealization, graph: &SwitchingGraph) -> Result<SwitchedSystem> {
    SwitchedSystem::new(vec![k; graph.num_modes()], graph.clone())
}

pub fn baseline_gd(sector: SectorSpec, graph: &SwitchingGraph) -> Result<SwitchedSystem> {
    mode_independent(gradient_descent(sector), graph)
}

pub fn baseline_tm(sector: SectorSpec, graph: &SwitchingGraph) -> Result<SwitchedSystem> {
    mode_independent(triple_momentum(sector), graph)
}

/// Uniform random walk on `graph` from a uniformly drawn start vertex.
pub fn random_path(graph: &SwitchingGraph, len: usize, seed: u64) -> Result<SwitchingPath> {
    let mut r = rng(seed);
    let mut path = Vec::with_capacity(len);
    if len == 0 {
        return Ok(SwitchingPath(path));
    }
    let mut s = r.random_range(0..graph.num_modes());
    path.push(s);
    while path.len() < len {
        let next: Vec<usize> = graph.successors(s).collect();
        if next.is_empty() {
            return Err(Error::InvalidGraph(format!("walk stalled at vertex {}", s + 1)));
        }
        s = next[r.random_range(0..next.len())];
        path.push(s);
    }
    Ok(SwitchingPath(path))
}

/// Standard-normal vector of length `n`, deterministic in `seed`.
pub fn random_state(n: usize, seed: u64) -> Vector {
    normal_vec(n, &mut rng(seed))
}

fn as_col(v: &Vector) -> Mat {
    Mat::from_column_slice(v.len(), 1, v.as_slice())
}

/// Partial sums `Σ_{k<T} q̄_kᵀ ḡ_k` with `ḡ_k = Σ_ν λ_ν p̄_{k−ν}` for a gradient
/// sequence `w = ∇f⁰(z)`, where bars denote `ρ^{−k}` weighting.
pub fn multiplier_partial_sums(z: &[Vector], w: &[Vector], sector: SectorSpec, lambda: &FilterCoefficients, rho: f64) -> Vec<f64> {
    let pq: Vec<(Mat, Mat)> = z
        .iter()
        .zip(w)
        .enumerate()
        .map(|(k, (zk, wk))| {
            let (p, q) = loop_signal_map(&as_col(wk), &as_col(zk), sector);
            let s = rho.powi(-(k as i32));
            (p * s, q * s)
        })
        .collect();
    let lam = lambda.coefficients();
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(z.len());
    for k in 0..pq.len() {
        let mut g = pq[k].0.clone() * lam[0];
        for (nu, &l) in lam.iter().enumerate().skip(1) {
            if nu <= k {
                g += &pq[k - nu].0 * l;
            }
        }
        acc += pq[k].1.dot(&g);
        out.push(acc);
    }
    out
}

/// Per-run seeds derived from one base seed.
pub fn seed_stream(base: u64, count: usize) -> Vec<u64> {
    let mut r = rng(base);
    (0..count).map(|_| r.random()).collect()
}
