use super::cf::ContinuedFraction;
use super::embedding::MultiplicityEmbedding;
use crate::algebra::{matrix_units, AlgebraShape, BlockElement, MatrixUnit, C64, ZERO};
use crate::error::{Error, Result};
use num_bigint::BigInt;

/// Truncated Bratteli diagram: `levels[0] = (1)` and `steps[n]` embeds
/// `levels[n]` unitally and injectively into `levels[n + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tower {
    levels: Vec<AlgebraShape>,
    steps: Vec<MultiplicityEmbedding>,
    label: String,
}

fn to_dim(q: &BigInt) -> Result<usize> {
    usize::try_from(q).map_err(|_| Error::Shape(format!("block dimension {q} does not fit in memory indices")))
}

impl Tower {
    pub fn new(levels: Vec<AlgebraShape>, mults: Vec<Vec<Vec<usize>>>, label: impl Into<String>) -> Result<Self> {
        if levels.first() != Some(&AlgebraShape::scalars()) {
            return Err(Error::Structural("level 0 must have shape (1)".into()));
        }
        if mults.len() + 1 != levels.len() {
            return Err(Error::Structural(format!("{} levels need {} steps, found {}", levels.len(), levels.len() - 1, mults.len())));
        }
        let steps = mults
            .into_iter()
            .enumerate()
            .map(|(n, m)| {
                MultiplicityEmbedding::new(levels[n].clone(), levels[n + 1].clone(), m)
                    .map_err(|e| Error::Structural(format!("step {n}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Tower { levels, steps, label: label.into() })
    }

    /// Effros–Shen tower: level `n ≥ 1` is `(q_n, q_{n-1})`, step `n ≥ 1`
    /// has multiplicities `[[a_{n+1}, 1], [1, 0]]`.
    pub fn effros_shen(cf: &ContinuedFraction, depth: usize) -> Result<Self> {
        let a = cf.quotients();
        if a.len() < depth + 1 {
            return Err(Error::Depth { needed: depth + 1, available: a.len() });
        }
        let conv = cf.convergents();
        let mut levels = vec![AlgebraShape::scalars()];
        let mut mults = Vec::with_capacity(depth);
        for n in 1..=depth {
            levels.push(AlgebraShape::new(vec![to_dim(&conv[n].1)?, to_dim(&conv[n - 1].1)?])?);
            let a_n = usize::try_from(a[n]).map_err(|_| Error::Shape("partial quotient too large".into()))?;
            mults.push(if n == 1 { vec![vec![a_n], vec![1]] } else { vec![vec![a_n, 1], vec![1, 0]] });
        }
        let label = format!(
            "effros-shen cf={} depth={depth}",
            a[..=depth].iter().map(u64::to_string).collect::<Vec<_>>().join(",")
        );
        Self::new(levels, mults, label)
    }

    /// UHF tower: level `n` is the single block `m_1 ⋯ m_n`.
    pub fn uhf(multipliers: &[usize], depth: usize) -> Result<Self> {
        if multipliers.len() < depth {
            return Err(Error::Depth { needed: depth, available: multipliers.len() });
        }
        if let Some(k) = multipliers[..depth].iter().position(|&m| m < 2) {
            return Err(Error::Domain(format!("multiplier {} at index {k} is below 2", multipliers[k])));
        }
        let mut levels = vec![AlgebraShape::scalars()];
        let mut d = 1usize;
        for &m in &multipliers[..depth] {
            d = d.checked_mul(m).ok_or_else(|| Error::Shape("UHF dimension overflow".into()))?;
            levels.push(AlgebraShape::new(vec![d])?);
        }
        let mults = multipliers[..depth].iter().map(|&m| vec![vec![m]]).collect();
        let label = format!(
            "uhf mult={} depth={depth}",
            multipliers[..depth].iter().map(usize::to_string).collect::<Vec<_>>().join(",")
        );
        Self::new(levels, mults, label)
    }

    pub fn depth(&self) -> usize {
        self.steps.len()
    }

    pub fn levels(&self) -> &[AlgebraShape] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> Result<&AlgebraShape> {
        self.levels.get(n).ok_or_else(|| Error::IndexOutOfRange(format!("level {n} of a depth-{} tower", self.depth())))
    }

    pub fn top(&self) -> &AlgebraShape {
        self.levels.last().expect("level 0 always exists")
    }

    pub fn steps(&self) -> &[MultiplicityEmbedding] {
        &self.steps
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Step multiplicity matrices as plain data.
    pub fn step_matrices(&self) -> Vec<Vec<Vec<usize>>> {
        self.steps.iter().map(|s| s.mult().to_vec()).collect()
    }

    fn check_range(&self, m: usize, n: usize) -> Result<()> {
        if m > n || n > self.depth() {
            return Err(Error::IndexOutOfRange(format!("levels {m}..{n} of a depth-{} tower", self.depth())));
        }
        Ok(())
    }

    /// Composite multiplicity data from level `m` to level `n`.
    pub fn compose_steps(&self, m: usize, n: usize) -> Result<MultiplicityEmbedding> {
        self.check_range(m, n)?;
        self.steps[m..n].iter().try_fold(MultiplicityEmbedding::identity(&self.levels[m]), |acc, s| acc.then(s))
    }

    /// Image of `x` (at level `m`) in level `n`, applying each step in turn.
    pub fn embed(&self, m: usize, n: usize, x: &BlockElement) -> Result<BlockElement> {
        self.check_range(m, n)?;
        if x.shape() != &self.levels[m] {
            return Err(Error::Shape(format!("element is not at level {m}")));
        }
        self.steps[m..n].iter().try_fold(x.clone(), |acc, s| s.apply(&acc))
    }

    /// Positions in level `n` where the image of matrix unit `u` (level `m`)
    /// has entry 1; all other entries of the image are 0.
    pub fn unit_image(&self, m: usize, n: usize, u: MatrixUnit) -> Result<Vec<MatrixUnit>> {
        self.check_range(m, n)?;
        let mut positions = vec![u];
        for s in &self.steps[m..n] {
            positions = positions.iter().flat_map(|&p| s.map_position(p)).collect();
        }
        Ok(positions)
    }

    /// Exact agreement of shapes at levels `0..=n` and steps `0..n`.
    pub fn agrees_up_to(&self, other: &Tower, n: usize) -> bool {
        self.depth() >= n
            && other.depth() >= n
            && self.levels[..=n] == other.levels[..=n]
            && self.steps[..n].iter().zip(&other.steps[..n]).all(|(a, b)| a.mult() == b.mult())
    }

    /// Sparse description of the image of level `m` inside level `n`.
    pub fn level_image(&self, m: usize, n: usize) -> Result<LevelImage> {
        self.check_range(m, n)?;
        let units = matrix_units(&self.levels[m]);
        let positions = units.iter().map(|&u| self.unit_image(m, n, u)).collect::<Result<Vec<_>>>()?;
        Ok(LevelImage { source: self.levels[m].clone(), target: self.levels[n].clone(), units, positions })
    }

    /// The first `n` levels as a tower of depth `n`.
    pub fn truncate(&self, n: usize) -> Result<Tower> {
        self.check_range(0, n)?;
        Ok(Tower { levels: self.levels[..=n].to_vec(), steps: self.steps[..n].to_vec(), label: self.label.clone() })
    }
}

/// Image of the matrix units of a lower level inside a higher one.
///
/// `positions[u]` lists the entries equal to 1 in the image of `units[u]`;
/// the lists are pairwise disjoint, and the adjoint unit has the transposed
/// list in the same order.
#[derive(Debug, Clone)]
pub struct LevelImage {
    pub source: AlgebraShape,
    pub target: AlgebraShape,
    pub units: Vec<MatrixUnit>,
    pub positions: Vec<Vec<MatrixUnit>>,
}

impl LevelImage {
    /// Index of `units` entry `(block, row, col)` (lexicographic layout).
    pub fn unit_index(&self, u: MatrixUnit) -> usize {
        let before: usize = self.source.dims()[..u.block].iter().map(|d| d * d).sum();
        let n = self.source.block(u.block);
        before + u.row * n + u.col
    }

    /// Builds `Σ_u coeffs[u] α(units[u])`.
    pub fn combine(&self, coeffs: &[C64]) -> BlockElement {
        let mut x = BlockElement::zeros(&self.target);
        for (ps, &c) in self.positions.iter().zip(coeffs) {
            for p in ps {
                x.block_mut(p.block)[(p.row, p.col)] = c;
            }
        }
        x
    }

    /// Largest deviation of `x` from the image: entries outside every
    /// position list, and spread of entries within one list.
    pub fn membership_defect(&self, x: &BlockElement) -> f64 {
        let mut covered: Vec<Vec<bool>> = self.target.dims().iter().map(|&n| vec![false; n * n]).collect();
        let mut worst: f64 = 0.0;
        for ps in &self.positions {
            let first = ps.first().map(|p| x.block(p.block)[(p.row, p.col)]).unwrap_or(ZERO);
            for p in ps {
                covered[p.block][p.row * self.target.block(p.block) + p.col] = true;
                worst = worst.max((x.block(p.block)[(p.row, p.col)] - first).norm());
            }
        }
        for (k, cov) in covered.iter().enumerate() {
            let n = self.target.block(k);
            for (idx, &c) in cov.iter().enumerate() {
                if !c {
                    worst = worst.max(x.block(k)[(idx / n, idx % n)].norm());
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(t: &Tower) -> Vec<Vec<usize>> {
        t.levels().iter().map(|s| s.dims().to_vec()).collect()
    }

    #[test]
    fn golden_shapes() {
        let t = Tower::effros_shen(&ContinuedFraction::golden(3), 3).unwrap();
        assert_eq!(dims(&t), vec![vec![1], vec![1, 1], vec![2, 1], vec![3, 2]]);
        assert_eq!(t.level(0).unwrap(), &AlgebraShape::scalars());
    }

    #[test]
    fn effros_shen_needs_quotients() {
        let err = Tower::effros_shen(&ContinuedFraction::golden(2), 3).unwrap_err();
        assert!(matches!(err, Error::Depth { needed: 4, available: 3 }));
    }

    #[test]
    fn uhf_shapes() {
        let t = Tower::uhf(&[2, 2, 2], 3).unwrap();
        assert_eq!(dims(&t), vec![vec![1], vec![2], vec![4], vec![8]]);
        let t = Tower::uhf(&[2, 3], 2).unwrap();
        assert_eq!(dims(&t), vec![vec![1], vec![2], vec![6]]);
        assert!(matches!(Tower::uhf(&[2, 1], 2), Err(Error::Domain(_))));
    }

    #[test]
    fn compose_examples() {
        let t = Tower::effros_shen(&ContinuedFraction::golden(3), 3).unwrap();
        assert_eq!(t.compose_steps(2, 2).unwrap().mult(), &[vec![1, 0], vec![0, 1]]);
        assert_eq!(t.compose_steps(1, 3).unwrap().mult(), &[vec![2, 1], vec![1, 1]]);
        assert!(matches!(t.compose_steps(2, 1), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(t.compose_steps(0, 4), Err(Error::IndexOutOfRange(_))));
        let one = BlockElement::unit(&AlgebraShape::scalars());
        assert_eq!(t.embed(0, 3, &one).unwrap(), BlockElement::unit(t.top()));
    }

    #[test]
    fn unit_images_partition_positions() {
        let t = Tower::effros_shen(&ContinuedFraction::golden(3), 3).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for u in crate::algebra::matrix_units(t.level(1).unwrap()) {
            for p in t.unit_image(1, 3, u).unwrap() {
                assert!(seen.insert(p));
            }
        }
    }
}
