//! Small dense complex matrices and the Fourier-type families used for qudit gates.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Primitive m-th root of unity e^{2πi/m}.
pub fn omega(m: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI / m as f64)
}

/// ξ = e^{2πi/3}.
pub fn xi() -> C64 {
    omega(3)
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from real rows; panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<C64>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |v| v.len());
        Self::from_fn(r, c, |i, j| cols[j][i])
    }

    /// Permutation matrix sending basis vector `j` to `perm[j]`.
    pub fn permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut m = Self::zeros(n, n);
        for (j, &i) in perm.iter().enumerate() {
            m[(i, j)] = ONE;
        }
        m
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

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn kron(&self, other: &Matrix) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    pub fn scale(&self, s: C64) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Matrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix) -> Self {
        self.add(&other.scale(-ONE))
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum()).collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Matrix, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && (&self.adjoint() * self).approx_eq(&Matrix::identity(self.rows), tol)
    }

    /// True when every entry is exactly 0 or 1 with a single 1 per row and column.
    pub fn is_permutation(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.rows;
        let exact = self.data.iter().all(|x| *x == ZERO || *x == ONE);
        exact
            && (0..n).all(|i| (0..n).filter(|&j| self[(i, j)] == ONE).count() == 1)
            && (0..n).all(|j| (0..n).filter(|&i| self[(i, j)] == ONE).count() == 1)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let x = self[(i, j)];
                    format!("{:+.4}{:+.4}i", x.re, x.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// m×m discrete Fourier transform F_{jk} = ω_m^{jk}/√m.
pub fn dft(m: usize) -> Matrix {
    let w = omega(m);
    let s = 1.0 / (m as f64).sqrt();
    Matrix::from_fn(m, m, |j, k| w.powu((j * k) as u32) * s)
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

pub fn vdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn normalized(v: &[C64]) -> Option<Vec<C64>> {
    let n = norm_sqr(v).sqrt();
    if n < 1e-300 {
        None
    } else {
        Some(v.iter().map(|x| x / n).collect())
    }
}

/// Extends an orthonormal family to a full orthonormal basis of C^dim by Gram-Schmidt
/// over the standard basis vectors.
pub fn complete_basis(family: &[Vec<C64>], dim: usize) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = family.to_vec();
    for i in 0..dim {
        if out.len() == dim {
            break;
        }
        let mut v = vec![ZERO; dim];
        v[i] = ONE;
        for b in &out {
            let c = vdot(b, &v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        if norm_sqr(&v) > 1e-12 {
            out.push(normalized(&v).expect("nonzero residual"));
        }
    }
    out
}

/// True when the vectors are pairwise orthonormal within `tol`.
pub fn is_orthonormal(vs: &[Vec<C64>], tol: f64) -> bool {
    vs.iter().enumerate().all(|(i, a)| {
        vs.iter().enumerate().all(|(j, b)| {
            let target = if i == j { ONE } else { ZERO };
            (vdot(a, b) - target).norm() <= tol
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dft_is_unitary() {
        for m in 1..=6 {
            assert!(dft(m).is_unitary(1e-12));
        }
    }

    #[test]
    fn kron_dimensions_and_entries() {
        let a = Matrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = Matrix::identity(3);
        let k = a.kron(&b);
        assert_eq!((k.rows(), k.cols()), (6, 6));
        assert_eq!(k[(3, 0)], C64::new(3.0, 0.0));
        assert_eq!(k[(4, 1)], C64::new(3.0, 0.0));
        assert_eq!(k[(4, 0)], ZERO);
    }

    #[test]
    fn completion_is_orthonormal() {
        let s = 1.0 / 2f64.sqrt();
        let fam = vec![vec![C64::new(s, 0.0), C64::new(s, 0.0), ZERO]];
        let full = complete_basis(&fam, 3);
        assert_eq!(full.len(), 3);
        assert!(is_orthonormal(&full, 1e-12));
    }

    #[test]
    fn permutation_matrix_maps_columns() {
        let p = Matrix::permutation(&[2, 0, 1]);
        assert!(p.is_permutation());
        assert_eq!(p[(2, 0)], ONE);
        assert_eq!(p.apply(&[ONE, ZERO, ZERO]), vec![ZERO, ZERO, ONE]);
    }
}
