use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use smallvec::SmallVec;

use super::AlgebraError;

/// Short vector in ℝⁿ; stored inline for n ≤ 4.
pub type Vector = SmallVec<[f64; 4]>;

/// Dense row-major n×n matrix with the dimension carried at runtime.
///
/// Storage is inline up to n = 4, which covers every grid dimension used by
/// the solvers; larger n spills to the heap.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: SmallVec<[f64; 16]>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: SmallVec::from_elem(0.0, n * n),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_slice(n: usize, entries: &[f64]) -> Result<Self, AlgebraError> {
        if entries.len() != n * n {
            return Err(AlgebraError::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        Ok(Self {
            n,
            data: SmallVec::from_slice(entries),
        })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vector]) -> Self {
        let n = columns.len();
        Self::from_fn(n, |i, j| columns[j][i])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[f64]) {
        for (i, x) in v.iter().enumerate() {
            self[(i, j)] = *x;
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= s);
        out
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += s * b;
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vector {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius inner product Tr(AᵀB).
    pub fn frobenius_dot(&self, other: &Self) -> f64 {
        self.data.iter().zip(other.data.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Antisymmetric part (A − Aᵀ)/2.
    pub fn skew(&self) -> Self {
        Self::from_fn(self.n, |i, j| 0.5 * (self[(i, j)] - self[(j, i)]))
    }

    /// Symmetric part (A + Aᵀ)/2.
    pub fn sym(&self) -> Self {
        Self::from_fn(self.n, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }

    /// ‖AAᵀ − I‖_F
    pub fn orthogonality_defect(&self) -> f64 {
        let mut q = self * &self.transpose();
        for i in 0..self.n {
            q[(i, i)] -= 1.0;
        }
        q.frobenius_norm()
    }

    /// ‖A + Aᵀ‖_F
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self[(i, j)] + self[(j, i)];
                s += v * v;
            }
        }
        s.sqrt()
    }

    /// LU factorization with partial pivoting; `None` when a zero pivot appears.
    fn lu(&self) -> Option<(Self, Vec<usize>, f64)> {
        let n = self.n;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].abs();
            for i in k + 1..n {
                if a[(i, k)].abs() > best {
                    best = a[(i, k)].abs();
                    p = i;
                }
            }
            if best == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        let akj = a[(k, j)];
                        a[(i, j)] -= f * akj;
                    }
                }
            }
        }
        Some((a, perm, sign))
    }

    pub fn determinant(&self) -> f64 {
        match self.lu() {
            Some((lu, _, sign)) => (0..self.n).fold(sign, |d, i| d * lu[(i, i)]),
            None => 0.0,
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let (lu, perm, _) = self.lu()?;
        let mut inv = Self::zeros(n);
        let mut col = vec![0.0; n];
        for c in 0..n {
            for i in 0..n {
                col[i] = if perm[i] == c { 1.0 } else { 0.0 };
            }
            for i in 0..n {
                let mut s = col[i];
                for k in 0..i {
                    s -= lu[(i, k)] * col[k];
                }
                col[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = col[i];
                for k in i + 1..n {
                    s -= lu[(i, k)] * col[k];
                }
                col[i] = s / lu[(i, i)];
            }
            for i in 0..n {
                inv[(i, c)] = col[i];
            }
        }
        Some(inv)
    }

    /// Solve `self * X = rhs` for a square right-hand side.
    pub fn solve(&self, rhs: &Self) -> Option<Self> {
        Some(&self.inverse()? * rhs)
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for SquareMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &SquareMatrix {
    type Output = SquareMatrix;
    fn mul(self, rhs: &SquareMatrix) -> SquareMatrix {
        debug_assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &SquareMatrix {
    type Output = SquareMatrix;
    fn add(self, rhs: &SquareMatrix) -> SquareMatrix {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SquareMatrix {
    type Output = SquareMatrix;
    fn sub(self, rhs: &SquareMatrix) -> SquareMatrix {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:.6e}", self[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_determinant() {
        let a = SquareMatrix::from_row_slice(3, &[2.0, 1.0, 0.0, 0.0, 3.0, 1.0, 1.0, 0.0, 4.0]).unwrap();
        // 2(12 - 0) - 1(0 - 1) + 0 = 25
        assert!((a.determinant() - 25.0).abs() < 1e-12);
        let inv = a.inverse().unwrap();
        let id = &a * &inv;
        assert!((&id - &SquareMatrix::identity(3)).frobenius_norm() < 1e-14);
    }

    #[test]
    fn singular_has_no_inverse() {
        let a = SquareMatrix::from_row_slice(2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert_eq!(a.determinant(), 0.0);
        assert!(a.inverse().is_none());
    }

    #[test]
    fn rejects_wrong_length() {
        assert!(matches!(
            SquareMatrix::from_row_slice(2, &[1.0, 2.0, 3.0]),
            Err(AlgebraError::DimensionMismatch { expected: 4, found: 3 })
        ));
    }
}
