use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{block, hstack, inverse, is_finite, kron, to_rows, try_from_rows, vstack, zeros, Mat};
use crate::{Error, Result};

/// One discrete-time state-space quadruple `x⁺ = Ax + Bu, y = Cx + Du`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeRealization {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
}

impl ModeRealization {
    pub fn new(a: Mat, b: Mat, c: Mat, d: Mat) -> Result<Self> {
        let r = ModeRealization { a, b, c, d };
        r.check()?;
        Ok(r)
    }

    /// Stateless gain `y = D u`.
    pub fn static_gain(d: Mat) -> Self {
        let (p, m) = d.shape();
        ModeRealization { a: zeros(0, 0), b: zeros(0, m), c: zeros(p, 0), d }
    }

    pub fn check(&self) -> Result<()> {
        let n = self.a.nrows();
        let ok = self.a.ncols() == n
            && self.b.nrows() == n
            && self.c.ncols() == n
            && self.d.nrows() == self.c.nrows()
            && self.d.ncols() == self.b.ncols();
        if !ok {
            return Err(Error::Dimension(format!(
                "A {:?}, B {:?}, C {:?}, D {:?}",
                self.a.shape(),
                self.b.shape(),
                self.c.shape(),
                self.d.shape()
            )));
        }
        if ![&self.a, &self.b, &self.c, &self.d].iter().all(|m| is_finite(m)) {
            return Err(Error::InvalidArgument("non-finite realization entry".into()));
        }
        Ok(())
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.states(), self.inputs(), self.outputs())
    }

    /// One step: returns `(x⁺, y)`.
    pub fn step(&self, x: &Mat, u: &Mat) -> (Mat, Mat) {
        (&self.a * x + &self.b * u, &self.c * x + &self.d * u)
    }

    /// Output sequence for an input sequence from the zero state.
    pub fn simulate(&self, inputs: &[Mat]) -> Vec<Mat> {
        let mut x = zeros(self.states(), 1);
        inputs
            .iter()
            .map(|u| {
                let (xn, y) = self.step(&x, u);
                x = xn;
                y
            })
            .collect()
    }

    /// Markov parameters `D, CB, CAB, …` (length `steps`).
    pub fn impulse_response(&self, steps: usize) -> Vec<Mat> {
        let mut out = Vec::with_capacity(steps);
        if steps == 0 {
            return out;
        }
        out.push(self.d.clone());
        let mut ak_b = self.b.clone();
        for _ in 1..steps {
            out.push(&self.c * &ak_b);
            ak_b = &self.a * ak_b;
        }
        out
    }

    /// State transform `x = T x̃`.
    pub fn similarity(&self, t: &Mat) -> Result<Self> {
        let ti = inverse(t).ok_or_else(|| Error::InvalidArgument("singular state transform".into()))?;
        Ok(ModeRealization {
            a: &ti * &self.a * t,
            b: &ti * &self.b,
            c: &self.c * t,
            d: self.d.clone(),
        })
    }

    /// Every block replaced by `block ⊗ I_d`.
    pub fn kron_lift(&self, d: usize) -> Self {
        let i = Mat::identity(d, d);
        ModeRealization {
            a: kron(&self.a, &i),
            b: kron(&self.b, &i),
            c: kron(&self.c, &i),
            d: kron(&self.d, &i),
        }
    }

    /// Series interconnection: the output of `first` drives `second`.
    /// The state is `[x_second; x_first]`.
    pub fn series(first: &Self, second: &Self) -> Result<Self> {
        if first.outputs() != second.inputs() {
            return Err(Error::Dimension(format!(
                "series: first has {} outputs, second has {} inputs",
                first.outputs(),
                second.inputs()
            )));
        }
        let (n1, n2) = (first.states(), second.states());
        Ok(ModeRealization {
            a: block(&[&[&second.a, &(&second.b * &first.c)], &[&zeros(n1, n2), &first.a]]),
            b: vstack(&[&(&second.b * &first.d), &first.b]),
            c: hstack(&[&second.c, &(&second.d * &first.c)]),
            d: &second.d * &first.d,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RawRealization {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    d: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dims: Option<[usize; 3]>,
}

impl Serialize for ModeRealization {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (n, m, p) = self.dims();
        RawRealization {
            a: to_rows(&self.a),
            b: to_rows(&self.b),
            c: to_rows(&self.c),
            d: to_rows(&self.d),
            dims: Some([n, m, p]),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModeRealization {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawRealization::deserialize(d)?;
        let [n, m, p] = raw.dims.unwrap_or_else(|| {
            let n = raw.a.len();
            let p = raw.c.len().max(raw.d.len());
            let m = raw.d.first().or(raw.b.first()).map_or(0, |r| r.len());
            [n, m, p]
        });
        let get = |rows: &[Vec<f64>], r: usize, c: usize| -> std::result::Result<Mat, D::Error> {
            let m = if rows.is_empty() { Some(zeros(r, c)) } else { try_from_rows(rows, c) };
            match m {
                Some(m) if m.shape() == (r, c) => Ok(m),
                _ => Err(D::Error::custom(format!("matrix does not have shape {r}x{c}"))),
            }
        };
        let out = ModeRealization {
            a: get(&raw.a, n, n)?,
            b: get(&raw.b, n, m)?,
            c: get(&raw.c, p, n)?,
            d: get(&raw.d, p, m)?,
        };
        out.check().map_err(D::Error::custom)?;
        Ok(out)
    }
}
