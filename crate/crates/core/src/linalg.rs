//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

pub fn eye(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> Mat {
    Mat::zeros(r, c)
}

pub fn scalar(x: f64) -> Mat {
    Mat::from_element(1, 1, x)
}

pub fn from_rows(rows: &[&[f64]]) -> Mat {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    Mat::from_fn(r, c, |i, j| rows[i][j])
}

/// Assemble a block matrix. Every row of blocks must agree on row counts and
/// every column on column counts.
pub fn block(blocks: &[&[&Mat]]) -> Mat {
    let heights: Vec<usize> = blocks.iter().map(|row| row[0].nrows()).collect();
    let widths: Vec<usize> = blocks[0].iter().map(|b| b.ncols()).collect();
    let mut out = zeros(heights.iter().sum(), widths.iter().sum());
    let mut r0 = 0;
    for (bi, row) in blocks.iter().enumerate() {
        let mut c0 = 0;
        for (bj, b) in row.iter().enumerate() {
            assert_eq!(b.nrows(), heights[bi], "block row height");
            assert_eq!(b.ncols(), widths[bj], "block column width");
            out.view_mut((r0, c0), (b.nrows(), b.ncols())).copy_from(*b);
            c0 += widths[bj];
        }
        r0 += heights[bi];
    }
    out
}

pub fn hstack(ms: &[&Mat]) -> Mat {
    block(&[ms])
}

pub fn vstack(ms: &[&Mat]) -> Mat {
    let rows: Vec<[&Mat; 1]> = ms.iter().map(|m| [*m]).collect();
    let refs: Vec<&[&Mat]> = rows.iter().map(|r| &r[..]).collect();
    block(&refs)
}

pub fn blkdiag(ms: &[&Mat]) -> Mat {
    let r: usize = ms.iter().map(|m| m.nrows()).sum();
    let c: usize = ms.iter().map(|m| m.ncols()).sum();
    let mut out = zeros(r, c);
    let (mut r0, mut c0) = (0, 0);
    for m in ms {
        out.view_mut((r0, c0), (m.nrows(), m.ncols())).copy_from(*m);
        r0 += m.nrows();
        c0 += m.ncols();
    }
    out
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

/// Down-shift matrix: ones on the first subdiagonal.
pub fn shift(n: usize) -> Mat {
    Mat::from_fn(n, n, |i, j| if i == j + 1 { 1.0 } else { 0.0 })
}

/// `e_i` in `R^n`; the empty column when `n = 0`.
pub fn unit(n: usize, i: usize) -> Mat {
    let mut e = zeros(n, 1);
    if n > 0 {
        e[(i, 0)] = 1.0;
    }
    e
}

pub fn sym(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn eigvals_sym(m: &Mat) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(sym(m)).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

pub fn min_eig(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    eigvals_sym(m)[0]
}

pub fn max_eig(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return f64::NEG_INFINITY;
    }
    *eigvals_sym(m).last().unwrap()
}

pub fn spectral_radius(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_finite(m: &Mat) -> bool {
    m.iter().all(|x| x.is_finite())
}

pub fn inverse(m: &Mat) -> Option<Mat> {
    if m.nrows() == 0 {
        return Some(m.clone());
    }
    let inv = m.clone().try_inverse()?;
    is_finite(&inv).then_some(inv)
}

/// Minimum-norm least-squares solution of `a x = b` and its residual norm.
pub fn lstsq(a: &Mat, b: &Mat) -> (Mat, f64) {
    if a.ncols() == 0 {
        return (zeros(0, b.ncols()), b.norm());
    }
    let svd = a.clone().svd(true, true);
    let tol = 1e-12 * svd.singular_values.max().max(1.0);
    let x = svd.solve(b, tol).expect("svd computed with both factors");
    let res = (a * &x - b).norm();
    (x, res)
}

pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Builds a matrix from nested rows; `cols` is used when there are no rows.
pub fn try_from_rows(rows: &[Vec<f64>], cols: usize) -> Option<Mat> {
    let c = rows.first().map_or(cols, |r| r.len());
    if rows.iter().any(|r| r.len() != c) {
        return None;
    }
    Some(Mat::from_fn(rows.len(), c, |i, j| rows[i][j]))
}

/// Serde adapter: matrices as row-major nested arrays.
pub mod rows {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        try_from_rows(&rows, 0).ok_or_else(|| serde::de::Error::custom("ragged matrix rows"))
    }
}

/// Serde adapter for lists of matrices.
pub mod rows_vec {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[Mat], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(to_rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Mat>, D::Error> {
        let all = Vec::<Vec<Vec<f64>>>::deserialize(d)?;
        all.iter()
            .map(|rows| try_from_rows(rows, 0).ok_or_else(|| serde::de::Error::custom("ragged matrix rows")))
            .collect()
    }
}
