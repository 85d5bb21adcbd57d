//! Dense square complex matrices, row-major.

use num_complex::Complex64;
use std::ops::{Index, IndexMut};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn scalar(n: usize, value: C64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = value;
        }
        m
    }

    /// Builds from row-major data; `None` if the length is not `n * n`.
    pub fn from_vec(n: usize, data: Vec<C64>) -> Option<Self> {
        (data.len() == n * n).then_some(CMatrix { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(f(r, c));
            }
        }
        CMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[r * n..(r + 1) * n];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `self* · self`, Hermitian positive semidefinite.
    pub fn gram(&self) -> Self {
        self.adjoint().matmul(self)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix { n: self.n, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        CMatrix { n: self.n, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn add_assign_scaled(&mut self, other: &Self, s: C64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        debug_assert_eq!(self.n, other.n);
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| *a == ZERO)
    }

    /// Largest entrywise modulus of `self - self*`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.n {
            for c in r..self.n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// `Re tr(self · other)` without forming the product.
    pub fn trace_product_re(&self, other: &Self) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for r in 0..n {
            for c in 0..n {
                let a = self.data[r * n + c];
                let b = other.data[c * n + r];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.n + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.n + c]
    }
}

/// Cholesky factor `L` with `A = L L*` for Hermitian positive definite `A`.
/// Returns `None` when a pivot is not strictly positive.
pub fn cholesky(a: &CMatrix) -> Option<CMatrix> {
    let n = a.dim();
    let mut l = CMatrix::zeros(n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

/// `log det A` from its Cholesky factor.
pub fn log_det_from_cholesky(l: &CMatrix) -> f64 {
    (0..l.dim()).map(|i| 2.0 * l[(i, i)].re.ln()).sum()
}

/// Inverse of a Hermitian positive definite matrix from its Cholesky factor.
pub fn inverse_from_cholesky(l: &CMatrix) -> CMatrix {
    let n = l.dim();
    // Solve L Y = I column by column, then A^{-1} = Y* Y.
    let mut y = CMatrix::zeros(n);
    for col in 0..n {
        for i in 0..n {
            let mut s = if i == col { ONE } else { ZERO };
            for k in col..i {
                s -= l[(i, k)] * y[(k, col)];
            }
            y[(i, col)] = if i < col { ZERO } else { s / l[(i, i)] };
        }
    }
    y.gram()
}
