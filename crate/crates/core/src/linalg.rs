//! Fixed-capacity `d x d` matrices (`d <= 3`) for per-gridpoint Jacobian work.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat {
    dim: usize,
    a: [[f64; 3]; 3],
}

impl Mat {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=3).contains(&dim));
        Self { dim, a: [[0.0; 3]; 3] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, 1.0)
    }

    pub fn scalar(dim: usize, c: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.a[i][i] = c;
        }
        m
    }

    /// Row-major entries; `rows.len()` gives the dimension.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), dim);
            m.a[i][..dim].copy_from_slice(r);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i][j] = v;
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.a[i][j] *= c;
            }
        }
        m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.a[i][i]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.a[i][j] * self.a[i][j];
            }
        }
        s.sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        let mut s: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s = s.max(self.a[i][j].abs());
            }
        }
        s
    }

    pub fn determinant(&self) -> f64 {
        let a = &self.a;
        match self.dim {
            1 => a[0][0],
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            _ => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
        }
    }

    /// Inverse by cofactors; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.determinant();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let a = &self.a;
        let mut m = Self::zeros(self.dim);
        match self.dim {
            1 => m.a[0][0] = 1.0 / a[0][0],
            2 => {
                m.a[0][0] = a[1][1] / det;
                m.a[0][1] = -a[0][1] / det;
                m.a[1][0] = -a[1][0] / det;
                m.a[1][1] = a[0][0] / det;
            }
            _ => {
                for i in 0..3 {
                    for j in 0..3 {
                        let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                        let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                        m.a[i][j] = (a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]) / det;
                    }
                }
            }
        }
        Some(m)
    }

    pub fn mul_vec(&self, v: &[f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[i] += self.a[i][j] * v[j];
            }
        }
        out
    }

    fn to_dmatrix(self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.a[i][j])
    }

    /// Complex eigenvalues via a real Schur decomposition.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        if self.dim == 1 {
            return Ok(vec![Complex64::new(self.a[0][0], 0.0)]);
        }
        let schur = nalgebra::linalg::Schur::try_new(self.to_dmatrix(), 1e-14, 500)
            .ok_or(Error::EigenSolve)?;
        Ok(schur
            .complex_eigenvalues()
            .iter()
            .map(|z| Complex64::new(z.re, z.im))
            .collect())
    }

    /// Spectral (operator 2-) norm.
    pub fn operator_norm(&self) -> f64 {
        let svd = self.to_dmatrix().svd(false, false);
        svd.singular_values.iter().copied().fold(0.0, f64::max)
    }
}

impl Add for Mat {
    type Output = Mat;
    fn add(mut self, rhs: Mat) -> Mat {
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.a[i][j] += rhs.a[i][j];
            }
        }
        self
    }
}

impl Sub for Mat {
    type Output = Mat;
    fn sub(mut self, rhs: Mat) -> Mat {
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.a[i][j] -= rhs.a[i][j];
            }
        }
        self
    }
}

impl Mul for Mat {
    type Output = Mat;
    fn mul(self, rhs: Mat) -> Mat {
        let mut m = Mat::zeros(self.dim);
        for i in 0..self.dim {
            for k in 0..self.dim {
                let aik = self.a[i][k];
                for j in 0..self.dim {
                    m.a[i][j] += aik * rhs.a[k][j];
                }
            }
        }
        m
    }
}
