//! Finite-dimensional C*-algebras `M(n(1)) ⊕ … ⊕ M(n(N))` and their elements.

pub mod eigen;
pub mod matrix;

use crate::error::{Error, Result};
use num_bigint::BigUint;
use rand::Rng;
use rand_distr::StandardNormal;

pub use matrix::{CMatrix, C64, ONE, ZERO};

/// Self-adjointness tolerance on `max |x - x*|` entries.
pub const TOL_SA: f64 = 1e-10;

/// Block sizes `(n(1), …, n(N))` of a direct sum of full matrix algebras.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlgebraShape(Vec<usize>);

impl AlgebraShape {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::Shape("an algebra needs at least one block".into()));
        }
        if let Some(k) = block_dims.iter().position(|&d| d == 0) {
            return Err(Error::Shape(format!("block {k} has size 0")));
        }
        Ok(AlgebraShape(block_dims))
    }

    /// The one-dimensional algebra `C`.
    pub fn scalars() -> Self {
        AlgebraShape(vec![1])
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn num_blocks(&self) -> usize {
        self.0.len()
    }

    pub fn block(&self, k: usize) -> usize {
        self.0[k]
    }

    /// `Σ n(k)²`, computed without overflow.
    pub fn total_dimension(&self) -> BigUint {
        self.0.iter().map(|&d| BigUint::from(d) * BigUint::from(d)).sum()
    }

    /// Real dimension of the self-adjoint part, equal to `Σ n(k)²`.
    pub fn sa_dimension(&self) -> usize {
        self.0.iter().map(|&d| d * d).sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.0.iter().all(|&d| d == 1)
    }
}

/// Index of the matrix unit `e_{k,j,m}` (zero-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatrixUnit {
    pub block: usize,
    pub row: usize,
    pub col: usize,
}

impl MatrixUnit {
    pub fn adjoint(self) -> Self {
        MatrixUnit { row: self.col, col: self.row, ..self }
    }

    pub fn to_element(self, shape: &AlgebraShape) -> BlockElement {
        let mut x = BlockElement::zeros(shape);
        x.blocks[self.block][(self.row, self.col)] = ONE;
        x
    }
}

/// All matrix units of `shape` in lexicographic order `(k, j, m)`.
pub fn matrix_units(shape: &AlgebraShape) -> Vec<MatrixUnit> {
    let mut units = Vec::with_capacity(shape.sa_dimension());
    for (block, &n) in shape.dims().iter().enumerate() {
        for row in 0..n {
            for col in 0..n {
                units.push(MatrixUnit { block, row, col });
            }
        }
    }
    units
}

/// An element of `⊕_k M(n(k))`: one square complex matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockElement {
    shape: AlgebraShape,
    blocks: Vec<CMatrix>,
}

impl BlockElement {
    pub fn new(shape: AlgebraShape, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != shape.num_blocks() {
            return Err(Error::Shape(format!(
                "expected {} blocks, found {}",
                shape.num_blocks(),
                blocks.len()
            )));
        }
        for (k, (b, &n)) in blocks.iter().zip(shape.dims()).enumerate() {
            if b.dim() != n {
                return Err(Error::Shape(format!("block {k} is {}x{}, expected {n}x{n}", b.dim(), b.dim())));
            }
        }
        Ok(BlockElement { shape, blocks })
    }

    pub fn zeros(shape: &AlgebraShape) -> Self {
        BlockElement { shape: shape.clone(), blocks: shape.dims().iter().map(|&n| CMatrix::zeros(n)).collect() }
    }

    pub fn unit(shape: &AlgebraShape) -> Self {
        Self::scalar(shape, ONE)
    }

    pub fn scalar(shape: &AlgebraShape, value: C64) -> Self {
        BlockElement {
            shape: shape.clone(),
            blocks: shape.dims().iter().map(|&n| CMatrix::scalar(n, value)).collect(),
        }
    }

    /// Element with real diagonal blocks `diag(values[k])`.
    pub fn diagonal(shape: &AlgebraShape, values: &[Vec<f64>]) -> Result<Self> {
        let blocks = values
            .iter()
            .map(|v| CMatrix::from_fn(v.len(), |r, c| if r == c { C64::new(v[r], 0.0) } else { ZERO }))
            .collect();
        Self::new(shape.clone(), blocks)
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMatrix {
        &self.blocks[k]
    }

    pub fn block_mut(&mut self, k: usize) -> &mut CMatrix {
        &mut self.blocks[k]
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!("shape mismatch: {:?} vs {:?}", self.shape.dims(), other.shape.dims())));
        }
        Ok(())
    }

    fn zip_blocks(&self, other: &Self, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(BlockElement {
            shape: self.shape.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        })
    }

    fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        BlockElement { shape: self.shape.clone(), blocks: self.blocks.iter().map(f).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, CMatrix::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, CMatrix::sub)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, CMatrix::matmul)
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_blocks(|b| b.scale(s))
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.map_blocks(|b| b.scale_re(s))
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(CMatrix::adjoint)
    }

    /// `self + s · other` in place.
    pub fn add_scaled(&mut self, other: &Self, s: C64) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            a.add_assign_scaled(b, s);
        }
        Ok(())
    }

    /// Operator norm: the largest singular value over all blocks.
    pub fn op_norm(&self) -> f64 {
        self.blocks.iter().map(eigen::spectral_norm).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation `|x - x*|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.blocks.iter().map(CMatrix::hermitian_defect).fold(0.0, f64::max)
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.hermitian_defect() <= TOL_SA
    }

    /// `(x + x*)/2`.
    pub fn self_adjoint_part(&self) -> Self {
        self.map_blocks(|b| {
            CMatrix::from_fn(b.dim(), |r, c| (b[(r, c)] + b[(c, r)].conj()) * 0.5)
        })
    }

    /// `Some(c)` when the element is exactly `c · 1` with `c` real.
    pub fn as_real_scalar(&self) -> Option<f64> {
        let c = self.blocks[0][(0, 0)];
        if c.im != 0.0 {
            return None;
        }
        for b in &self.blocks {
            for r in 0..b.dim() {
                for col in 0..b.dim() {
                    let expected = if r == col { c } else { ZERO };
                    if b[(r, col)] != expected {
                        return None;
                    }
                }
            }
        }
        Some(c.re)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.blocks.iter().map(CMatrix::max_abs).fold(0.0, f64::max))
    }

    pub fn all_finite(&self) -> bool {
        self.blocks.iter().all(CMatrix::all_finite)
    }

    /// Frobenius pairing `Σ_k Re tr(self_k · other_k)` (unnormalized).
    pub fn trace_pairing_re(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.trace_product_re(b)).sum())
    }

    /// Trace norm of a self-adjoint element, `Σ |eigenvalues|` over blocks.
    pub fn trace_norm_hermitian(&self) -> f64 {
        self.blocks.iter().map(eigen::hermitian_trace_norm).sum()
    }

    /// Gaussian self-adjoint element: real diagonal entries and complex
    /// off-diagonal entries with independent standard normal parts.
    pub fn random_self_adjoint<R: Rng + ?Sized>(shape: &AlgebraShape, rng: &mut R) -> Self {
        let blocks = shape
            .dims()
            .iter()
            .map(|&n| {
                let mut m = CMatrix::zeros(n);
                for r in 0..n {
                    m[(r, r)] = C64::new(rng.sample(StandardNormal), 0.0);
                    for c in (r + 1)..n {
                        let z = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * std::f64::consts::FRAC_1_SQRT_2;
                        m[(r, c)] = z;
                        m[(c, r)] = z.conj();
                    }
                }
                m
            })
            .collect();
        BlockElement { shape: shape.clone(), blocks }
    }

    /// Gaussian element with independent complex entries.
    pub fn random<R: Rng + ?Sized>(shape: &AlgebraShape, rng: &mut R) -> Self {
        let blocks = shape
            .dims()
            .iter()
            .map(|&n| CMatrix::from_fn(n, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))))
            .collect();
        BlockElement { shape: shape.clone(), blocks }
    }
}

/// Jordan product `(ab + ba)/2`.
pub fn jordan(a: &BlockElement, b: &BlockElement) -> Result<BlockElement> {
    let ab = a.mul(b)?;
    let ba = b.mul(a)?;
    Ok(ab.add(&ba)?.scale_re(0.5))
}

/// Lie product `(ab - ba)/(2i)`.
pub fn lie(a: &BlockElement, b: &BlockElement) -> Result<BlockElement> {
    let ab = a.mul(b)?;
    let ba = b.mul(a)?;
    // 1/(2i) = -i/2
    Ok(ab.sub(&ba)?.scale(C64::new(0.0, -0.5)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(d: &[usize]) -> AlgebraShape {
        AlgebraShape::new(d.to_vec()).unwrap()
    }

    #[test]
    fn shape_validation() {
        assert!(AlgebraShape::new(vec![]).is_err());
        assert!(AlgebraShape::new(vec![2, 0]).is_err());
        assert_eq!(shape(&[2, 1]).total_dimension(), BigUint::from(5u32));
    }

    #[test]
    fn op_norm_examples() {
        let s = shape(&[2]);
        let d = BlockElement::diagonal(&s, &[vec![1.0, -2.0]]).unwrap();
        assert!((d.op_norm() - 2.0).abs() < 1e-12);
        assert_eq!(BlockElement::zeros(&s).op_norm(), 0.0);
        let mut n = BlockElement::zeros(&s);
        n.block_mut(0)[(0, 1)] = C64::new(2.0, 0.0);
        assert!((n.op_norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn jordan_and_lie_examples() {
        let s = shape(&[2]);
        let a = BlockElement::diagonal(&s, &[vec![1.0, 2.0]]).unwrap();
        let b = BlockElement::diagonal(&s, &[vec![3.0, 4.0]]).unwrap();
        let j = jordan(&a, &b).unwrap();
        assert_eq!(j, BlockElement::diagonal(&s, &[vec![3.0, 8.0]]).unwrap());
        assert_eq!(jordan(&BlockElement::unit(&s), &b).unwrap(), b);
        assert!(lie(&a, &a).unwrap().op_norm() == 0.0);
    }

    #[test]
    fn jordan_lie_shape_mismatch() {
        let a = BlockElement::unit(&shape(&[2]));
        let b = BlockElement::unit(&shape(&[1, 1]));
        assert!(matches!(jordan(&a, &b), Err(Error::Shape(_))));
        assert!(matches!(lie(&a, &b), Err(Error::Shape(_))));
    }

    #[test]
    fn matrix_unit_counts() {
        assert_eq!(matrix_units(&shape(&[1])).len(), 1);
        let u = matrix_units(&shape(&[2]));
        assert_eq!(u.len(), 4);
        assert_eq!(u[1], MatrixUnit { block: 0, row: 0, col: 1 });
        assert_eq!(matrix_units(&shape(&[2, 1])).len(), 5);
    }

    #[test]
    fn self_adjoint_projection_examples() {
        let s = shape(&[2]);
        let i_unit = BlockElement::scalar(&s, C64::new(0.0, 1.0));
        assert_eq!(i_unit.self_adjoint_part(), BlockElement::zeros(&s));
        let mut n = BlockElement::zeros(&s);
        n.block_mut(0)[(0, 1)] = C64::new(2.0, 0.0);
        let p = n.self_adjoint_part();
        let mut expected = BlockElement::zeros(&s);
        expected.block_mut(0)[(0, 1)] = ONE;
        expected.block_mut(0)[(1, 0)] = ONE;
        assert_eq!(p, expected);
        assert_eq!(p.self_adjoint_part(), p);
    }

    #[test]
    fn scalar_detection() {
        let s = shape(&[2, 1]);
        assert_eq!(BlockElement::scalar(&s, C64::new(3.0, 0.0)).as_real_scalar(), Some(3.0));
        assert_eq!(BlockElement::scalar(&s, C64::new(0.0, 1.0)).as_real_scalar(), None);
        let d = BlockElement::diagonal(&s, &[vec![1.0, 1.0], vec![2.0]]).unwrap();
        assert_eq!(d.as_real_scalar(), None);
    }
}
