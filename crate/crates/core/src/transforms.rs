//! Exponential weighting, sector loop transformation and FIR Zames-Falb filters.

use serde::{Deserialize, Serialize};

use crate::linalg::{eye, shift, unit, Mat};
use crate::model::{ModeRealization, SwitchedSystem};
use crate::{Error, Result};

/// Strictness used for the weighted-sum condition.
pub const ADMISSIBILITY_MARGIN: f64 = 1e-9;

/// Gradient sector: `m`-strongly convex with `L`-Lipschitz gradient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub m: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

impl SectorSpec {
    pub fn new(m: f64, l: f64) -> Result<Self> {
        if !(m > 0.0 && l > m && l.is_finite()) {
            return Err(Error::InvalidArgument(format!("need 0 < m < L < inf, got m = {m}, L = {l}")));
        }
        Ok(SectorSpec { m, l })
    }
}

/// FIR coefficients `λ_0, …, λ_ν`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct FilterCoefficients(Vec<f64>);

impl TryFrom<Vec<f64>> for FilterCoefficients {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        FilterCoefficients::new(v)
    }
}

impl From<FilterCoefficients> for Vec<f64> {
    fn from(f: FilterCoefficients) -> Self {
        f.0
    }
}

impl FilterCoefficients {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidArgument("filter needs at least λ_0".into()));
        }
        if lambda.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite filter coefficient".into()));
        }
        if let Some(i) = lambda.iter().skip(1).position(|&x| x > 0.0) {
            return Err(Error::InvalidArgument(format!("λ_{} is positive", i + 1)));
        }
        Ok(FilterCoefficients(lambda))
    }

    /// `(1, 0, …, 0)` of the given order.
    pub fn identity(order: usize) -> Self {
        let mut v = vec![0.0; order + 1];
        v[0] = 1.0;
        FilterCoefficients(v)
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.0
    }

    /// `Σ_{ν≥0} ρ^{−ν} λ_ν`.
    pub fn weighted_sum(&self, rho: f64) -> f64 {
        self.0.iter().enumerate().map(|(i, l)| l * rho.powi(-(i as i32))).sum()
    }

    pub fn check_admissible(&self, rho: f64) -> bool {
        rho > 0.0
            && rho <= 1.0
            && self.0.iter().skip(1).all(|&x| x <= 0.0)
            && self.weighted_sum(rho) >= ADMISSIBILITY_MARGIN
    }

    /// Realization `(A_f, B_f, C_f, D_f)` as a SISO system.
    pub fn realization(&self) -> ModeRealization {
        let nu = self.order();
        ModeRealization {
            a: shift(nu),
            b: unit(nu, 0),
            c: Mat::from_row_slice(1, nu, &self.0[1..]),
            d: Mat::from_element(1, 1, self.0[0]),
        }
    }
}

/// Per-mode `Â = (Ã + mB̃C̃)/ρ`, `B̂ = B̃/ρ`, `Ĉ = (L − m)C̃`, `D̂ = −I`.
pub fn rho_weight_and_loop(sys: &SwitchedSystem, sector: SectorSpec, rho: f64) -> Result<SwitchedSystem> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidArgument(format!("rate {rho} outside (0, 1]")));
    }
    let SectorSpec { m, l } = sector;
    let modes = sys
        .modes
        .iter()
        .enumerate()
        .map(|(r, md)| {
            if md.inputs() != md.outputs() {
                return Err(Error::Dimension(format!("mode {} is not square in its oracle channel", r + 1)));
            }
            if md.d.iter().any(|&x| x != 0.0) {
                return Err(Error::InvalidArgument(format!("mode {} has nonzero feedthrough", r + 1)));
            }
            Ok(ModeRealization {
                a: (&md.a + m * &md.b * &md.c) / rho,
                b: &md.b / rho,
                c: (l - m) * &md.c,
                d: -eye(md.outputs()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SwitchedSystem::new(modes, sys.graph.clone())
}

/// `p = Lz − w`, `q = w − mz`.
pub fn loop_signal_map(w: &Mat, z: &Mat, sector: SectorSpec) -> (Mat, Mat) {
    (sector.l * z - w, w - sector.m * z)
}

/// Inverse of [`loop_signal_map`]: recovers `(w, z)` from `(p, q)`.
pub fn loop_signal_map_inverse(p: &Mat, q: &Mat, sector: SectorSpec) -> (Mat, Mat) {
    let s = sector.l - sector.m;
    let z = (p + q) / s;
    let w = (sector.l * q + sector.m * p) / s;
    (w, z)
}

/// Multiplies element `k` by `ρ^{−k}`.
pub fn exp_weight_signals(seq: &[Mat], rho: f64) -> Vec<Mat> {
    seq.iter().enumerate().map(|(k, x)| x * rho.powi(-(k as i32))).collect()
}

/// Filter `⊗ I_d` driven by each mode's output; state `[filter; plant]`.
pub fn filtered_loop(sys_hat: &SwitchedSystem, filter: &FilterCoefficients) -> Result<SwitchedSystem> {
    let d = sys_hat.dims().2;
    let f = filter.realization().kron_lift(d);
    let modes = sys_hat
        .modes
        .iter()
        .map(|m| ModeRealization::series(m, &f))
        .collect::<Result<Vec<_>>>()?;
    SwitchedSystem::new(modes, sys_hat.graph.clone())
}

/// Output of the FIR filter for a SISO sequence (zero initial state).
pub fn fir_apply(filter: &FilterCoefficients, input: &[f64]) -> Vec<f64> {
    let l = filter.coefficients();
    (0..input.len())
        .map(|k| l.iter().enumerate().take(k + 1).map(|(i, li)| li * input[k - i]).sum())
        .collect()
}
