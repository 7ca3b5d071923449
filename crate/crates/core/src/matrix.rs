//! Dense row-major matrices over either chain ring, with the handful of
//! exact operations the enumeration and verification layers need.

use crate::error::{Error, Result};
use crate::params::RingParams;
use crate::ring::{RElem, Ring, ZmodRing};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.cols + j]
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn identity<R: Ring>(ring: &R, n: usize) -> Matrix<R::Elem> {
    let mut m = Matrix::filled(n, n, ring.zero());
    for i in 0..n {
        *m.at_mut(i, i) = ring.one();
    }
    m
}

pub fn mat_mul<R: Ring>(
    ring: &R,
    a: &Matrix<R::Elem>,
    b: &Matrix<R::Elem>,
) -> Result<Matrix<R::Elem>> {
    if a.cols != b.rows {
        return Err(Error::ShapeMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = Matrix::filled(a.rows, b.cols, ring.zero());
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a.at(i, k);
            if ring.is_zero(aik) {
                continue;
            }
            for j in 0..b.cols {
                let t = ring.mul(aik, b.at(k, j));
                *out.at_mut(i, j) = ring.add(out.at(i, j), &t);
            }
        }
    }
    Ok(out)
}

pub fn mat_add<R: Ring>(
    ring: &R,
    a: &Matrix<R::Elem>,
    b: &Matrix<R::Elem>,
) -> Result<Matrix<R::Elem>> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::ShapeMismatch("mismatched shapes in addition".into()));
    }
    let data = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| ring.add(x, y))
        .collect();
    Matrix::new(a.rows, a.cols, data)
}

/// `a^k` by repeated multiplication; exponents here are tiny.
pub fn mat_pow<R: Ring>(ring: &R, a: &Matrix<R::Elem>, k: usize) -> Result<Matrix<R::Elem>> {
    let mut out = identity(ring, a.rows);
    for _ in 0..k {
        out = mat_mul(ring, &out, a)?;
    }
    Ok(out)
}

/// Determinant by cofactor expansion along the first row. Exponential in n;
/// used on the small matrices that appear in transform verification.
pub fn det<R: Ring>(ring: &R, a: &Matrix<R::Elem>) -> R::Elem {
    assert!(a.is_square(), "determinant of a non-square matrix");
    let n = a.rows;
    match n {
        0 => ring.one(),
        1 => a.at(0, 0).clone(),
        _ => {
            let mut acc = ring.zero();
            for j in 0..n {
                if ring.is_zero(a.at(0, j)) {
                    continue;
                }
                let mut minor = Matrix::filled(n - 1, n - 1, ring.zero());
                for i in 1..n {
                    let mut c = 0;
                    for jj in 0..n {
                        if jj == j {
                            continue;
                        }
                        *minor.at_mut(i - 1, c) = a.at(i, jj).clone();
                        c += 1;
                    }
                }
                let term = ring.mul(a.at(0, j), &det(ring, &minor));
                if j % 2 == 0 {
                    acc = ring.add(&acc, &term);
                } else {
                    acc = ring.sub(&acc, &term);
                }
            }
            acc
        }
    }
}

/// Evaluates the modulus polynomial of `params` at a square matrix over
/// `Z/p^(N+1)` by Horner's scheme.
pub fn eval_poly(x: &Matrix<u64>, params: &RingParams) -> Matrix<u64> {
    assert!(x.is_square(), "polynomial evaluation needs a square matrix");
    let ring = ZmodRing::new(params);
    let n = x.rows;
    let poly = params.poly();
    let mut acc = Matrix::filled(n, n, 0u64);
    for i in 0..n {
        *acc.at_mut(i, i) = poly[params.degree()] % ring.modulus();
    }
    for k in (0..params.degree()).rev() {
        acc = mat_mul(&ring, &acc, x).expect("square shapes");
        let c = poly[k] % ring.modulus();
        for i in 0..n {
            *acc.at_mut(i, i) = ring.add(acc.at(i, i), &c);
        }
    }
    acc
}

/// Embeds a scalar matrix into `Mat_n(R)` as constants.
pub fn embed_in_ext(x: &Matrix<u64>, params: &RingParams) -> Matrix<RElem> {
    let data = x
        .data()
        .iter()
        .map(|&v| RElem::constant(v, params))
        .collect();
    Matrix::new(x.rows(), x.cols(), data).expect("same shape")
}

/// Reduces a scalar matrix entrywise mod p^level.
pub fn reduce_entries(x: &Matrix<u64>, params: &RingParams, level: u32) -> Matrix<u64> {
    let m = params.p().pow(level);
    let data = x.data().iter().map(|&v| v % m).collect();
    Matrix::new(x.rows(), x.cols(), data).expect("same shape")
}

/// Parses a JSON array-of-arrays of integers into a scalar matrix, reducing
/// entries mod p^(N+1).
pub fn zmod_matrix_from_json(v: &serde_json::Value, params: &RingParams) -> Result<Matrix<u64>> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Parse("matrix must be a JSON array of rows".into()))?;
    if rows.is_empty() {
        return Err(Error::Parse("matrix has no rows".into()));
    }
    let ring = ZmodRing::new(params);
    let mut data = Vec::new();
    let mut width = None;
    for row in rows {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Parse("matrix row must be a JSON array".into()))?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse("ragged matrix rows".into()));
            }
            _ => {}
        }
        for e in row {
            let x = e
                .as_i64()
                .ok_or_else(|| Error::Parse(format!("matrix entry {e} is not an integer")))?;
            data.push(ring.reduce(x));
        }
    }
    Matrix::new(rows.len(), width.unwrap_or(0), data)
}

/// Parses a JSON array-of-arrays of coefficient arrays into a matrix over R.
/// Coefficient lists shorter than deg(P) are zero-padded.
pub fn ext_matrix_from_json(v: &serde_json::Value, params: &RingParams) -> Result<Matrix<RElem>> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Parse("matrix must be a JSON array of rows".into()))?;
    if rows.is_empty() {
        return Err(Error::Parse("matrix has no rows".into()));
    }
    let mut data = Vec::new();
    let mut width = None;
    for row in rows {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Parse("matrix row must be a JSON array".into()))?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse("ragged matrix rows".into()));
            }
            _ => {}
        }
        for e in row {
            let coeffs = e
                .as_array()
                .ok_or_else(|| Error::Parse("entry must be a coefficient array".into()))?;
            if coeffs.len() > params.degree() {
                return Err(Error::DimensionMismatch {
                    expected: params.degree(),
                    found: coeffs.len(),
                });
            }
            let mut padded = vec![0i64; params.degree()];
            for (i, c) in coeffs.iter().enumerate() {
                padded[i] = c
                    .as_i64()
                    .ok_or_else(|| Error::Parse(format!("coefficient {c} is not an integer")))?;
            }
            data.push(RElem::new(&padded, params)?);
        }
    }
    Matrix::new(rows.len(), width.unwrap_or(0), data)
}

pub fn zmod_matrix_to_json(m: &Matrix<u64>) -> serde_json::Value {
    serde_json::Value::Array(
        (0..m.rows())
            .map(|i| {
                serde_json::Value::Array(
                    (0..m.cols())
                        .map(|j| serde_json::Value::from(*m.at(i, j)))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn ext_matrix_to_json(m: &Matrix<RElem>) -> serde_json::Value {
    serde_json::Value::Array(
        (0..m.rows())
            .map(|i| {
                serde_json::Value::Array(
                    (0..m.cols())
                        .map(|j| {
                            serde_json::Value::Array(
                                m.at(i, j)
                                    .coeffs()
                                    .iter()
                                    .map(|&c| serde_json::Value::from(c))
                                    .collect(),
                            )
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

/// A parsed matrix over either base ring, as it appears at the CLI boundary.
pub enum ParsedMatrix {
    Zmod(Matrix<u64>),
    Ext(Matrix<RElem>),
}

/// Detects the base ring from the nesting depth of the JSON value: integer
/// entries mean the scalar ring, array entries mean R.
pub fn matrix_from_json(v: &serde_json::Value, params: &RingParams) -> Result<ParsedMatrix> {
    let first = v
        .as_array()
        .and_then(|rows| rows.first())
        .and_then(|row| row.as_array())
        .and_then(|row| row.first())
        .ok_or_else(|| Error::Parse("matrix must be a nonempty array of arrays".into()))?;
    if first.is_array() {
        Ok(ParsedMatrix::Ext(ext_matrix_from_json(v, params)?))
    } else {
        Ok(ParsedMatrix::Zmod(zmod_matrix_from_json(v, params)?))
    }
}
