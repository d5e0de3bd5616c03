use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest coordinate count handled anywhere (space form of dimension 4 plus the warping axis).
pub const MAX_DIM: usize = 5;

/// Index pattern of a flat semi-Euclidean metric: the first `negatives` coordinates carry a minus sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub negatives: usize,
    pub positives: usize,
}

impl Signature {
    pub fn new(negatives: usize, positives: usize) -> Result<Self> {
        let n = negatives + positives;
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::Dimension(format!(
                "signature ({negatives},{positives}) has dimension {n}, expected 2..=5"
            )));
        }
        Ok(Self {
            negatives,
            positives,
        })
    }

    pub fn dim(&self) -> usize {
        self.negatives + self.positives
    }

    #[inline]
    pub fn sign(&self, i: usize) -> f64 {
        if i < self.negatives {
            -1.0
        } else {
            1.0
        }
    }

    /// Inner product of raw coordinate vectors; callers guarantee matching lengths.
    #[inline]
    pub fn inner(&self, a: &Vector, b: &Vector) -> f64 {
        let mut s = 0.0;
        for i in 0..a.len() {
            let p = a[i] * b[i];
            if i < self.negatives {
                s -= p;
            } else {
                s += p;
            }
        }
        s
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.negatives, self.positives)
    }
}

/// Small stack-allocated coordinate vector (length at most [`MAX_DIM`]).
#[derive(Clone, Copy, PartialEq)]
pub struct Vector {
    data: [f64; MAX_DIM],
    len: usize,
}

impl Vector {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_DIM, "vector length {len} exceeds {MAX_DIM}");
        Self {
            data: [0.0; MAX_DIM],
            len,
        }
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut v = Self::zeros(xs.len());
        v.data[..xs.len()].copy_from_slice(xs);
        v
    }

    pub fn basis(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.data[i] = 1.0;
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.len]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.as_slice().to_vec()
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Append one coordinate.
    pub fn extended(&self, x: f64) -> Vector {
        let mut v = Vector::zeros(self.len + 1);
        v.data[..self.len].copy_from_slice(self.as_slice());
        v.data[self.len] = x;
        v
    }

    /// Leading `len` coordinates.
    pub fn head(&self, len: usize) -> Vector {
        Vector::from_slice(&self.data[..len])
    }

    pub fn last(&self) -> f64 {
        self.data[self.len - 1]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Vector {
        let mut v = *self;
        for x in v.data[..self.len].iter_mut() {
            *x = f(*x);
        }
        v
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_slice())
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        debug_assert!(i < self.len);
        &self.data[i]
    }
}

impl IndexMut<usize> for Vector {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        debug_assert!(i < self.len);
        &mut self.data[i]
    }
}

impl Add for Vector {
    type Output = Vector;
    #[inline]
    fn add(mut self, rhs: Vector) -> Vector {
        debug_assert_eq!(self.len, rhs.len);
        for i in 0..self.len {
            self.data[i] += rhs.data[i];
        }
        self
    }
}

impl Sub for Vector {
    type Output = Vector;
    #[inline]
    fn sub(mut self, rhs: Vector) -> Vector {
        debug_assert_eq!(self.len, rhs.len);
        for i in 0..self.len {
            self.data[i] -= rhs.data[i];
        }
        self
    }
}

impl AddAssign for Vector {
    #[inline]
    fn add_assign(&mut self, rhs: Vector) {
        *self = *self + rhs;
    }
}

impl SubAssign for Vector {
    #[inline]
    fn sub_assign(&mut self, rhs: Vector) {
        *self = *self - rhs;
    }
}

impl Mul<f64> for Vector {
    type Output = Vector;
    #[inline]
    fn mul(mut self, s: f64) -> Vector {
        for x in self.data[..self.len].iter_mut() {
            *x *= s;
        }
        self
    }
}

impl Mul<Vector> for f64 {
    type Output = Vector;
    #[inline]
    fn mul(self, v: Vector) -> Vector {
        v * self
    }
}

impl Neg for Vector {
    type Output = Vector;
    #[inline]
    fn neg(self) -> Vector {
        self * -1.0
    }
}

/// Coordinate vector tagged with the signature of its flat ambient space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmbientVector {
    pub coords: Vector,
    pub signature: Signature,
}

impl AmbientVector {
    pub fn new(coords: &[f64], signature: Signature) -> Result<Self> {
        if coords.len() != signature.dim() {
            return Err(Error::Dimension(format!(
                "{} coordinates for signature {signature}",
                coords.len()
            )));
        }
        Ok(Self {
            coords: Vector::from_slice(coords),
            signature,
        })
    }

    pub fn from_vector(coords: Vector, signature: Signature) -> Result<Self> {
        Self::new(coords.as_slice(), signature)
    }

    pub fn zeros(signature: Signature) -> Self {
        Self {
            coords: Vector::zeros(signature.dim()),
            signature,
        }
    }
}

impl Add for AmbientVector {
    type Output = AmbientVector;
    fn add(self, rhs: AmbientVector) -> AmbientVector {
        debug_assert_eq!(self.signature, rhs.signature);
        AmbientVector {
            coords: self.coords + rhs.coords,
            signature: self.signature,
        }
    }
}

impl Sub for AmbientVector {
    type Output = AmbientVector;
    fn sub(self, rhs: AmbientVector) -> AmbientVector {
        debug_assert_eq!(self.signature, rhs.signature);
        AmbientVector {
            coords: self.coords - rhs.coords,
            signature: self.signature,
        }
    }
}

impl Mul<f64> for AmbientVector {
    type Output = AmbientVector;
    fn mul(self, s: f64) -> AmbientVector {
        AmbientVector {
            coords: self.coords * s,
            signature: self.signature,
        }
    }
}

/// Signature-aware inner product `-Σ_{i<neg} u_i v_i + Σ_{i≥neg} u_i v_i`.
pub fn inner(u: &AmbientVector, v: &AmbientVector) -> Result<f64> {
    if u.signature != v.signature || u.coords.len() != v.coords.len() {
        return Err(Error::Dimension(format!(
            "inner product of vectors with signatures {} and {}",
            u.signature, v.signature
        )));
    }
    Ok(u.signature.inner(&u.coords, &v.coords))
}

/// 2×2 real matrix, row-major. Operators act on coordinate columns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn scalar(s: f64) -> Self {
        Mat2::new(s, 0.0, 0.0, s)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.0[0][0], self.0[1][0], self.0[0][1], self.0[1][1])
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        if d.abs() <= 1e-300 || d.abs() < 1e-14 * scale * scale {
            return None;
        }
        Some(Mat2::new(
            self.0[1][1] / d,
            -self.0[0][1] / d,
            -self.0[1][0] / d,
            self.0[0][0] / d,
        ))
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let mut r = [[0.0; 2]; 2];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j];
            }
        }
        Mat2(r)
    }

    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        [
            self.0[0][0] * x[0] + self.0[0][1] * x[1],
            self.0[1][0] * x[0] + self.0[1][1] * x[1],
        ]
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        self.map(|x| x * s)
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.0[0][0] + o.0[0][0],
            self.0[0][1] + o.0[0][1],
            self.0[1][0] + o.0[1][0],
            self.0[1][1] + o.0[1][1],
        )
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        self.add(&o.scale(-1.0))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat2 {
        Mat2::new(
            f(self.0[0][0]),
            f(self.0[0][1]),
            f(self.0[1][0]),
            f(self.0[1][1]),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flat_map(|r| r.iter()).all(|x| x.is_finite())
    }

    /// Entry-wise max distance.
    pub fn dist(&self, o: &Mat2) -> f64 {
        self.sub(o).max_abs()
    }
}

/// Determinant of a square matrix given as rows (Gaussian elimination with partial pivoting).
pub fn determinant(rows: &[Vector]) -> f64 {
    let n = rows.len();
    let mut m: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap_or(col);
        if m[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..n {
            let factor = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= factor * m[col][c];
            }
        }
    }
    det
}

/// Covector `w_i = det(v_1, …, v_{n-1}, e_i)` annihilating the `n-1` given vectors.
pub fn complement_covector(vectors: &[Vector], n: usize) -> Vector {
    debug_assert_eq!(vectors.len() + 1, n);
    let mut w = Vector::zeros(n);
    let mut rows: Vec<Vector> = vectors.to_vec();
    rows.push(Vector::zeros(n));
    for i in 0..n {
        rows[n - 1] = Vector::basis(n, i);
        w[i] = determinant(&rows);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(n: usize, p: usize) -> Signature {
        Signature::new(n, p).unwrap()
    }

    #[test]
    fn null_vector_in_lorentz_plane() {
        let u = AmbientVector::new(&[1.0, 1.0, 0.0], sig(1, 2)).unwrap();
        assert_eq!(inner(&u, &u).unwrap(), 0.0);
    }

    #[test]
    fn timelike_unit() {
        let u = AmbientVector::new(&[1.0, 0.0, 0.0, 0.0], sig(1, 3)).unwrap();
        assert_eq!(inner(&u, &u).unwrap(), -1.0);
    }

    #[test]
    fn split_signature_orthogonality() {
        let s = sig(2, 2);
        let u = AmbientVector::new(&[1.0, 0.0, 1.0, 0.0], s).unwrap();
        let v = AmbientVector::new(&[0.0, 1.0, 0.0, 1.0], s).unwrap();
        assert_eq!(inner(&u, &v).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_signatures_rejected() {
        let u = AmbientVector::new(&[1.0, 0.0, 0.0], sig(1, 2)).unwrap();
        let v = AmbientVector::new(&[1.0, 0.0, 0.0, 0.0], sig(1, 3)).unwrap();
        assert!(matches!(inner(&u, &v), Err(Error::Dimension(_))));
        assert!(AmbientVector::new(&[1.0, 2.0], sig(1, 2)).is_err());
        assert!(Signature::new(3, 3).is_err());
        assert!(Signature::new(1, 0).is_err());
    }

    #[test]
    fn determinant_and_complement() {
        let rows = [
            Vector::from_slice(&[2.0, 0.0, 1.0]),
            Vector::from_slice(&[1.0, 3.0, 0.0]),
            Vector::from_slice(&[0.0, 1.0, 4.0]),
        ];
        assert!((determinant(&rows) - 25.0).abs() < 1e-12);
        let w = complement_covector(&rows[..2], 3);
        assert!(w.dot(&rows[0]).abs() < 1e-12);
        assert!(w.dot(&rows[1]).abs() < 1e-12);
        assert!(w.dot(&rows[2]) > 0.0);
    }

    #[test]
    fn mat2_inverse_roundtrip() {
        let m = Mat2::new(1.0, 2.0, -0.5, 3.0);
        let p = m.mul(&m.inverse().unwrap());
        assert!(p.dist(&Mat2::IDENTITY) < 1e-14);
        assert!(Mat2::new(1.0, 2.0, 2.0, 4.0).inverse().is_none());
    }
}
