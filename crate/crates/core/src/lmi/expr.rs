use crate::linalg::Mat;

/// Affine scalar form `c + Σ a_i x_i`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Affine {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl Affine {
    pub fn constant(c: f64) -> Self {
        Affine { constant: c, terms: Vec::new() }
    }

    pub fn var(i: usize) -> Self {
        Affine { constant: 0.0, terms: vec![(i, 1.0)] }
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.terms.is_empty()
    }

    pub fn add_scaled(&mut self, other: &Affine, s: f64) {
        if s == 0.0 {
            return;
        }
        self.constant += s * other.constant;
        self.terms.extend(other.terms.iter().map(|&(i, a)| (i, s * a)));
    }

    pub fn scaled(&self, s: f64) -> Affine {
        let mut out = Affine::default();
        out.add_scaled(self, s);
        out
    }

    /// Sort and merge duplicate indices, dropping exact zeros.
    pub fn compress(&mut self) {
        if self.terms.len() < 2 {
            self.terms.retain(|t| t.1 != 0.0);
            return;
        }
        self.terms.sort_by_key(|t| t.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len());
        for &(i, a) in &self.terms {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += a,
                _ => out.push((i, a)),
            }
        }
        out.retain(|t| t.1 != 0.0);
        self.terms = out;
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, a)| a * x[i]).sum::<f64>()
    }
}

/// Matrix whose entries are affine in the decision variables (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct MatExpr {
    rows: usize,
    cols: usize,
    entries: Vec<Affine>,
}

impl MatExpr {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        MatExpr { rows, cols, entries: vec![Affine::default(); rows * cols] }
    }

    pub fn constant(m: &Mat) -> Self {
        let mut e = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                e.entries[i * m.ncols() + j].constant = m[(i, j)];
            }
        }
        e
    }

    pub(crate) fn from_entries(rows: usize, cols: usize, entries: Vec<Affine>) -> Self {
        assert_eq!(entries.len(), rows * cols);
        MatExpr { rows, cols, entries }
    }

    /// `s · m` for an affine scalar `s`.
    pub fn scalar_times(s: &Affine, m: &Mat) -> Self {
        let mut e = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                e.entries[i * m.ncols() + j] = s.scaled(m[(i, j)]);
            }
        }
        e
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn at(&self, i: usize, j: usize) -> &Affine {
        &self.entries[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Affine {
        &mut self.entries[i * self.cols + j]
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[j * self.rows + i] = self.at(i, j).clone();
            }
        }
        out
    }

    pub fn add(&self, other: &MatExpr) -> Self {
        assert_eq!(self.shape(), other.shape(), "MatExpr add shape");
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(&other.entries) {
            a.add_scaled(b, 1.0);
            a.compress();
        }
        out
    }

    pub fn sub(&self, other: &MatExpr) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn add_const(&self, m: &Mat) -> Self {
        assert_eq!(self.shape(), (m.nrows(), m.ncols()), "MatExpr add_const shape");
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[i * self.cols + j].constant += m[(i, j)];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        MatExpr {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|a| a.scaled(s)).collect(),
        }
    }

    /// `c · self`
    pub fn lmul(&self, c: &Mat) -> Self {
        assert_eq!(c.ncols(), self.rows, "lmul inner dimension");
        let mut out = Self::zeros(c.nrows(), self.cols);
        for i in 0..c.nrows() {
            for k in 0..self.rows {
                let s = c[(i, k)];
                if s == 0.0 {
                    continue;
                }
                for j in 0..self.cols {
                    out.entries[i * self.cols + j].add_scaled(&self.entries[k * self.cols + j], s);
                }
            }
        }
        out.entries.iter_mut().for_each(Affine::compress);
        out
    }

    /// `self · c`
    pub fn rmul(&self, c: &Mat) -> Self {
        assert_eq!(self.cols, c.nrows(), "rmul inner dimension");
        let mut out = Self::zeros(self.rows, c.ncols());
        for i in 0..self.rows {
            for k in 0..self.cols {
                let e = &self.entries[i * self.cols + k];
                if e.is_zero() {
                    continue;
                }
                for j in 0..c.ncols() {
                    let s = c[(k, j)];
                    if s != 0.0 {
                        out.entries[i * c.ncols() + j].add_scaled(e, s);
                    }
                }
            }
        }
        out.entries.iter_mut().for_each(Affine::compress);
        out
    }

    /// `l · self · r`
    pub fn sandwich(&self, l: &Mat, r: &Mat) -> Self {
        self.lmul(l).rmul(r)
    }

    /// `tᵀ · self · t`
    pub fn congruence(&self, t: &Mat) -> Self {
        self.lmul(&t.transpose()).rmul(t)
    }

    pub fn symmetrized(&self) -> Self {
        self.add(&self.transpose()).scale(0.5)
    }

    /// Block assembly; `None` entries are zero blocks sized from their row/column.
    pub fn block(grid: &[Vec<Option<&MatExpr>>]) -> Self {
        let nbr = grid.len();
        let nbc = grid[0].len();
        let mut heights = vec![usize::MAX; nbr];
        let mut widths = vec![usize::MAX; nbc];
        for (bi, row) in grid.iter().enumerate() {
            assert_eq!(row.len(), nbc, "ragged block grid");
            for (bj, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    for (slot, v) in [(&mut heights[bi], b.rows), (&mut widths[bj], b.cols)] {
                        assert!(*slot == usize::MAX || *slot == v, "inconsistent block sizes");
                        *slot = v;
                    }
                }
            }
        }
        assert!(
            heights.iter().chain(&widths).all(|&v| v != usize::MAX),
            "block row or column with no sized entry"
        );
        let rows: usize = heights.iter().sum();
        let cols: usize = widths.iter().sum();
        let mut out = Self::zeros(rows, cols);
        let mut r0 = 0;
        for (bi, row) in grid.iter().enumerate() {
            let mut c0 = 0;
            for (bj, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    for i in 0..b.rows {
                        for j in 0..b.cols {
                            out.entries[(r0 + i) * cols + c0 + j] = b.at(i, j).clone();
                        }
                    }
                }
                c0 += widths[bj];
            }
            r0 += heights[bi];
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| self.at(i, j).eval(x))
    }

    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(|a| a.terms.is_empty())
    }
}
