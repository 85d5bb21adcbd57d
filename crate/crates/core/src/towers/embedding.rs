//! Unital injective multiplicity embeddings between block algebras.

use crate::algebra::{AlgebraShape, BlockElement, CMatrix, MatrixUnit};
use crate::error::{Error, Result};

/// `mult[j][i]` copies of input block `i` sit on the diagonal of output
/// block `j`, input blocks in index order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiplicityEmbedding {
    in_shape: AlgebraShape,
    out_shape: AlgebraShape,
    mult: Vec<Vec<usize>>,
}

impl MultiplicityEmbedding {
    /// Validates dimensions, unitality and injectivity.
    pub fn new(in_shape: AlgebraShape, out_shape: AlgebraShape, mult: Vec<Vec<usize>>) -> Result<Self> {
        let e = Self::unchecked(in_shape, out_shape, mult)?;
        if !e.is_unital() {
            return Err(Error::Structural(format!(
                "multiplicity matrix {:?} is not unital from {:?} to {:?}",
                e.mult,
                e.in_shape.dims(),
                e.out_shape.dims()
            )));
        }
        if !e.is_injective() {
            return Err(Error::Structural(format!("multiplicity matrix {:?} has a zero column", e.mult)));
        }
        Ok(e)
    }

    /// Checks only that the matrix has the right dimensions.
    pub fn unchecked(in_shape: AlgebraShape, out_shape: AlgebraShape, mult: Vec<Vec<usize>>) -> Result<Self> {
        if mult.len() != out_shape.num_blocks() || mult.iter().any(|r| r.len() != in_shape.num_blocks()) {
            return Err(Error::Shape(format!(
                "multiplicity matrix must be {}x{}",
                out_shape.num_blocks(),
                in_shape.num_blocks()
            )));
        }
        Ok(MultiplicityEmbedding { in_shape, out_shape, mult })
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let n = shape.num_blocks();
        let mult = (0..n).map(|j| (0..n).map(|i| usize::from(i == j)).collect()).collect();
        MultiplicityEmbedding { in_shape: shape.clone(), out_shape: shape.clone(), mult }
    }

    pub fn in_shape(&self) -> &AlgebraShape {
        &self.in_shape
    }

    pub fn out_shape(&self) -> &AlgebraShape {
        &self.out_shape
    }

    pub fn mult(&self) -> &[Vec<usize>] {
        &self.mult
    }

    /// `Σ_i mult(j,i) n_in(i) = n_out(j)` for every `j`, in checked arithmetic.
    pub fn is_unital(&self) -> bool {
        self.mult.iter().zip(self.out_shape.dims()).all(|(row, &n_out)| {
            row.iter()
                .zip(self.in_shape.dims())
                .try_fold(0usize, |acc, (&m, &n)| m.checked_mul(n).and_then(|v| acc.checked_add(v)))
                == Some(n_out)
        })
    }

    /// Every input block appears in some output block.
    pub fn is_injective(&self) -> bool {
        (0..self.in_shape.num_blocks()).all(|i| self.mult.iter().any(|row| row[i] > 0))
    }

    /// `self` followed by `next`: multiplicity matrix `next.mult · self.mult`.
    pub fn then(&self, next: &Self) -> Result<Self> {
        if self.out_shape != next.in_shape {
            return Err(Error::Shape("composed embeddings do not chain".into()));
        }
        let rows = next.out_shape.num_blocks();
        let cols = self.in_shape.num_blocks();
        let mut mult = vec![vec![0usize; cols]; rows];
        for (j, row) in mult.iter_mut().enumerate() {
            for (i, entry) in row.iter_mut().enumerate() {
                let mut acc = 0usize;
                for l in 0..self.out_shape.num_blocks() {
                    let term = next.mult[j][l]
                        .checked_mul(self.mult[l][i])
                        .ok_or_else(|| Error::Shape("multiplicity overflow".into()))?;
                    acc = acc.checked_add(term).ok_or_else(|| Error::Shape("multiplicity overflow".into()))?;
                }
                *entry = acc;
            }
        }
        Ok(MultiplicityEmbedding { in_shape: self.in_shape.clone(), out_shape: next.out_shape.clone(), mult })
    }

    /// Diagonal offsets in output block `j` of each copy of each input block,
    /// as `(input block, offset)` in layout order.
    fn layout(&self, j: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut offset = 0;
        for (i, &m) in self.mult[j].iter().enumerate() {
            let n = self.in_shape.block(i);
            for _ in 0..m {
                out.push((i, offset));
                offset += n;
            }
        }
        out
    }

    pub fn apply(&self, x: &BlockElement) -> Result<BlockElement> {
        if x.shape() != &self.in_shape {
            return Err(Error::Shape(format!(
                "embedding expects shape {:?}, found {:?}",
                self.in_shape.dims(),
                x.shape().dims()
            )));
        }
        let blocks = (0..self.out_shape.num_blocks())
            .map(|j| {
                let mut m = CMatrix::zeros(self.out_shape.block(j));
                for (i, off) in self.layout(j) {
                    let b = x.block(i);
                    for r in 0..b.dim() {
                        for c in 0..b.dim() {
                            m[(off + r, off + c)] = b[(r, c)];
                        }
                    }
                }
                m
            })
            .collect();
        BlockElement::new(self.out_shape.clone(), blocks)
    }

    /// Entry positions of the image of a single entry `(block, row, col)`.
    pub fn map_position(&self, u: MatrixUnit) -> Vec<MatrixUnit> {
        let mut out = Vec::new();
        for j in 0..self.out_shape.num_blocks() {
            for (i, off) in self.layout(j) {
                if i == u.block {
                    out.push(MatrixUnit { block: j, row: off + u.row, col: off + u.col });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::C64;

    fn shape(d: &[usize]) -> AlgebraShape {
        AlgebraShape::new(d.to_vec()).unwrap()
    }

    #[test]
    fn effros_shen_step_layout() {
        let e = MultiplicityEmbedding::new(shape(&[1, 1]), shape(&[2, 1]), vec![vec![1, 1], vec![1, 0]]).unwrap();
        let x = BlockElement::diagonal(&shape(&[1, 1]), &[vec![2.0], vec![3.0]]).unwrap();
        let y = e.apply(&x).unwrap();
        assert_eq!(y, BlockElement::diagonal(&shape(&[2, 1]), &[vec![2.0, 3.0], vec![2.0]]).unwrap());
    }

    #[test]
    fn identity_and_unit() {
        let s = shape(&[2, 1]);
        let id = MultiplicityEmbedding::identity(&s);
        let mut x = BlockElement::unit(&s);
        x.block_mut(0)[(0, 1)] = C64::new(1.0, 2.0);
        assert_eq!(id.apply(&x).unwrap(), x);
        let e = MultiplicityEmbedding::new(s.clone(), shape(&[5, 2]), vec![vec![2, 1], vec![1, 0]]).unwrap();
        assert_eq!(e.apply(&BlockElement::unit(&s)).unwrap(), BlockElement::unit(&shape(&[5, 2])));
    }

    #[test]
    fn rejects_non_unital_and_non_injective() {
        assert!(MultiplicityEmbedding::new(shape(&[1]), shape(&[2]), vec![vec![1]]).is_err());
        assert!(MultiplicityEmbedding::new(shape(&[1, 1]), shape(&[2]), vec![vec![2, 0]]).is_err());
        assert!(MultiplicityEmbedding::new(shape(&[1]), shape(&[2]), vec![vec![2], vec![1]]).is_err());
    }

    #[test]
    fn composition_multiplies_matrices() {
        let s1 = shape(&[1, 1]);
        let s2 = shape(&[2, 1]);
        let s3 = shape(&[3, 2]);
        let a = MultiplicityEmbedding::new(s1, s2.clone(), vec![vec![1, 1], vec![1, 0]]).unwrap();
        let b = MultiplicityEmbedding::new(s2, s3, vec![vec![1, 1], vec![1, 0]]).unwrap();
        let c = a.then(&b).unwrap();
        assert_eq!(c.mult(), &[vec![2, 1], vec![1, 1]]);
        assert!(c.is_unital() && c.is_injective());
    }
}
