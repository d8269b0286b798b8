use serde::{Deserialize, Serialize};

use super::graph::SwitchingGraph;
use super::realization::ModeRealization;
use crate::linalg::{self, block, eye, hstack, inverse, kron, vstack, zeros, Mat};
use crate::{Error, Result};

/// Switched system: one realization per vertex of the switching graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchedSystem {
    pub modes: Vec<ModeRealization>,
    pub graph: SwitchingGraph,
}

impl SwitchedSystem {
    pub fn new(modes: Vec<ModeRealization>, graph: SwitchingGraph) -> Result<Self> {
        let s = SwitchedSystem { modes, graph };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<()> {
        if self.modes.len() != self.graph.num_modes() {
            return Err(Error::Dimension(format!(
                "{} modes for a graph on {} vertices",
                self.modes.len(),
                self.graph.num_modes()
            )));
        }
        let dims = self.modes[0].dims();
        for (r, m) in self.modes.iter().enumerate() {
            m.check()?;
            if m.dims() != dims {
                return Err(Error::Dimension(format!("mode {} has dims {:?}, mode 1 has {:?}", r + 1, m.dims(), dims)));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.modes[0].dims()
    }

    pub fn kron_lift(&self, d: usize) -> Self {
        SwitchedSystem { modes: self.modes.iter().map(|m| m.kron_lift(d)).collect(), graph: self.graph.clone() }
    }

    pub fn similarity(&self, t: &Mat) -> Result<Self> {
        Ok(SwitchedSystem {
            modes: self.modes.iter().map(|m| m.similarity(t)).collect::<Result<_>>()?,
            graph: self.graph.clone(),
        })
    }
}

/// One mode of a two-port plant `(w, u) → (z, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantMode {
    #[serde(rename = "A", with = "linalg::rows")]
    pub a: Mat,
    #[serde(rename = "B1", with = "linalg::rows")]
    pub b1: Mat,
    #[serde(rename = "B2", with = "linalg::rows")]
    pub b2: Mat,
    #[serde(rename = "C1", with = "linalg::rows")]
    pub c1: Mat,
    #[serde(rename = "C2", with = "linalg::rows")]
    pub c2: Mat,
    #[serde(rename = "D11", with = "linalg::rows")]
    pub d11: Mat,
    #[serde(rename = "D12", with = "linalg::rows")]
    pub d12: Mat,
    #[serde(rename = "D21", with = "linalg::rows")]
    pub d21: Mat,
    #[serde(rename = "D22", with = "linalg::rows")]
    pub d22: Mat,
}

/// Channel widths: states, oracle width, control inputs, measurements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantDims {
    pub n: usize,
    pub d: usize,
    pub nu: usize,
    pub ny: usize,
}

impl PlantMode {
    /// Rebuild empty blocks with the right shapes (files cannot encode `0×k`).
    pub fn reshape(mut self, dims: PlantDims) -> Self {
        let PlantDims { n, d, nu, ny } = dims;
        for (m, r, c) in [
            (&mut self.a, n, n),
            (&mut self.b1, n, d),
            (&mut self.b2, n, nu),
            (&mut self.c1, d, n),
            (&mut self.c2, ny, n),
            (&mut self.d11, d, d),
            (&mut self.d12, d, nu),
            (&mut self.d21, ny, d),
            (&mut self.d22, ny, nu),
        ] {
            if m.is_empty() && (r == 0 || c == 0) {
                *m = zeros(r, c);
            }
        }
        self
    }

    pub fn dims(&self) -> PlantDims {
        PlantDims { n: self.a.nrows(), d: self.b1.ncols(), nu: self.b2.ncols(), ny: self.c2.nrows() }
    }

    pub fn check(&self) -> Result<()> {
        let PlantDims { n, d, nu, ny } = self.dims();
        let expect = [
            ("A", &self.a, n, n),
            ("B1", &self.b1, n, d),
            ("B2", &self.b2, n, nu),
            ("C1", &self.c1, d, n),
            ("C2", &self.c2, ny, n),
            ("D11", &self.d11, d, d),
            ("D12", &self.d12, d, nu),
            ("D21", &self.d21, ny, d),
            ("D22", &self.d22, ny, nu),
        ];
        for (name, m, r, c) in expect {
            if m.shape() != (r, c) {
                return Err(Error::Dimension(format!("{name} is {:?}, expected {r}x{c}", m.shape())));
            }
            if !linalg::is_finite(m) {
                return Err(Error::InvalidArgument(format!("{name} has non-finite entries")));
            }
        }
        Ok(())
    }

    /// The mode as a single realization with inputs `(w, u)` and outputs `(z, y)`.
    pub fn realization(&self) -> ModeRealization {
        ModeRealization {
            a: self.a.clone(),
            b: hstack(&[&self.b1, &self.b2]),
            c: vstack(&[&self.c1, &self.c2]),
            d: block(&[&[&self.d11, &self.d12], &[&self.d21, &self.d22]]),
        }
    }

    /// Split a realization with inputs `(w, u)` and outputs `(z, y)` at widths `d` (both sides).
    pub fn from_realization(r: &ModeRealization, d: usize) -> Result<Self> {
        let (n, m, p) = r.dims();
        if d > m || d > p {
            return Err(Error::Dimension("partition wider than the realization".into()));
        }
        let (nu, ny) = (m - d, p - d);
        let pm = PlantMode {
            a: r.a.clone(),
            b1: r.b.columns(0, d).into(),
            b2: r.b.columns(d, nu).into(),
            c1: r.c.rows(0, d).into(),
            c2: r.c.rows(d, ny).into(),
            d11: r.d.view((0, 0), (d, d)).into(),
            d12: r.d.view((0, d), (d, nu)).into(),
            d21: r.d.view((d, 0), (ny, d)).into(),
            d22: r.d.view((d, d), (ny, nu)).into(),
        };
        debug_assert_eq!(pm.a.nrows(), n);
        Ok(pm)
    }

    pub fn kron_lift(&self, d: usize) -> Self {
        let i = eye(d);
        let k = |m: &Mat| kron(m, &i);
        PlantMode {
            a: k(&self.a),
            b1: k(&self.b1),
            b2: k(&self.b2),
            c1: k(&self.c1),
            c2: k(&self.c2),
            d11: k(&self.d11),
            d12: k(&self.d12),
            d21: k(&self.d21),
            d22: k(&self.d22),
        }
    }

    /// Lower linear fractional interconnection with a controller `y → u`;
    /// closed-loop state `[x; ξ]`, channel `w → z`.
    pub fn star(&self, k: &ModeRealization) -> Option<ModeRealization> {
        let PlantDims { n, nu, ny, .. } = self.dims();
        assert_eq!(k.inputs(), ny, "controller input width");
        assert_eq!(k.outputs(), nu, "controller output width");
        let nk = k.states();
        let e = inverse(&(eye(nu) - &k.d * &self.d22))?;
        // u = Ux x + Uk ξ + Uw w
        let ux = &e * &k.d * &self.c2;
        let uk = &e * &k.c;
        let uw = &e * &k.d * &self.d21;
        // y = Yx x + Yk ξ + Yw w
        let yx = &self.c2 + &self.d22 * &ux;
        let yk = &self.d22 * &uk;
        let yw = &self.d21 + &self.d22 * &uw;
        let a = block(&[
            &[&(&self.a + &self.b2 * &ux), &(&self.b2 * &uk)],
            &[&(&k.b * &yx), &(&k.a + &k.b * &yk)],
        ]);
        let b = vstack(&[&(&self.b1 + &self.b2 * &uw), &(&k.b * &yw)]);
        let c = hstack(&[&(&self.c1 + &self.d12 * &ux), &(&self.d12 * &uk)]);
        let d = &self.d11 + &self.d12 * &uw;
        debug_assert_eq!(a.nrows(), n + nk);
        Some(ModeRealization { a, b, c, d })
    }
}

/// Switched two-port network model.
#[derive(Clone, Debug, PartialEq)]
pub struct SwitchedPlant {
    pub modes: Vec<PlantMode>,
    pub graph: SwitchingGraph,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct PlantFile {
    pub modes: Vec<PlantMode>,
    pub graph: SwitchingGraph,
    pub dims: PlantDims,
}

impl Serialize for SwitchedPlant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PlantFile { modes: self.modes.clone(), graph: self.graph.clone(), dims: self.dims() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SwitchedPlant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let f = PlantFile::deserialize(d)?;
        let modes = f.modes.into_iter().map(|m| m.reshape(f.dims)).collect();
        let p = SwitchedPlant { modes, graph: f.graph };
        p.check().map_err(D::Error::custom)?;
        if p.dims() != f.dims {
            return Err(D::Error::custom("declared dims disagree with the blocks"));
        }
        Ok(p)
    }
}

impl SwitchedPlant {
    pub fn new(modes: Vec<PlantMode>, graph: SwitchingGraph) -> Result<Self> {
        let p = SwitchedPlant { modes, graph };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        if self.modes.len() != self.graph.num_modes() {
            return Err(Error::Dimension(format!(
                "{} plant modes for a graph on {} vertices",
                self.modes.len(),
                self.graph.num_modes()
            )));
        }
        let dims = self.modes[0].dims();
        for (r, m) in self.modes.iter().enumerate() {
            m.check()?;
            if m.dims() != dims {
                return Err(Error::Dimension(format!("plant mode {} has different channel widths", r + 1)));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> PlantDims {
        self.modes[0].dims()
    }

    pub fn with_graph(&self, graph: SwitchingGraph) -> Result<Self> {
        SwitchedPlant::new(self.modes.clone(), graph)
    }

    pub fn kron_lift(&self, d: usize) -> Self {
        SwitchedPlant { modes: self.modes.iter().map(|m| m.kron_lift(d)).collect(), graph: self.graph.clone() }
    }

    /// Per-mode `P_r ⋆ K_r`.
    pub fn star_controller(&self, controller: &[ModeRealization]) -> Result<SwitchedSystem> {
        if controller.len() != self.modes.len() {
            return Err(Error::Dimension("one controller mode per plant mode required".into()));
        }
        let PlantDims { nu, ny, .. } = self.dims();
        let modes = self
            .modes
            .iter()
            .zip(controller)
            .enumerate()
            .map(|(r, (p, k))| {
                if k.inputs() != ny || k.outputs() != nu {
                    return Err(Error::Dimension(format!("controller mode {} must map {ny} → {nu}", r + 1)));
                }
                p.star(k).ok_or(Error::IllPosed { mode: r + 1 })
            })
            .collect::<Result<Vec<_>>>()?;
        SwitchedSystem::new(modes, self.graph.clone())
    }
}

/// Sequence of modes that respects a switching graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchingPath(pub Vec<usize>);

impl SwitchingPath {
    pub fn new(modes: Vec<usize>, graph: &SwitchingGraph) -> Result<Self> {
        if !graph.admits(&modes) {
            return Err(Error::InvalidArgument("path uses a transition that is not an edge".into()));
        }
        Ok(SwitchingPath(modes))
    }

    pub fn constant(mode: usize, len: usize, graph: &SwitchingGraph) -> Result<Self> {
        Self::new(vec![mode; len], graph)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
