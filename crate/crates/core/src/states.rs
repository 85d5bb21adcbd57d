//! Tracial states as block weights and trace-preserving conditional
//! expectations onto tower levels.

use crate::algebra::{AlgebraShape, BlockElement, MatrixUnit, C64};
use crate::error::{Error, Result};
use crate::towers::{ContinuedFraction, LevelImage, MultiplicityEmbedding, Tower};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Weights below this are treated as zero when faithfulness is required.
pub const FAITHFUL_MIN: f64 = 1e-12;
const SUM_TOL: f64 = 1e-12;

/// `τ(x) = Σ_j λ_j tr(x_j)/n(j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceWeights {
    shape: AlgebraShape,
    lambda: Vec<f64>,
}

impl TraceWeights {
    pub fn new(shape: AlgebraShape, lambda: Vec<f64>) -> Result<Self> {
        if lambda.len() != shape.num_blocks() {
            return Err(Error::Shape(format!("{} weights for {} blocks", lambda.len(), shape.num_blocks())));
        }
        if let Some(j) = lambda.iter().position(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::Domain(format!("weight {j} is {} (must be finite and nonnegative)", lambda[j])));
        }
        let sum: f64 = lambda.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::Domain(format!("weights sum to {sum}, not 1")));
        }
        Ok(TraceWeights { shape, lambda })
    }

    /// Weights proportional to block sizes: the normalized trace of the
    /// defining representation on `C^{Σ n(j)}`.
    pub fn canonical(shape: &AlgebraShape) -> Self {
        let total: usize = shape.dims().iter().sum();
        TraceWeights { shape: shape.clone(), lambda: shape.dims().iter().map(|&n| n as f64 / total as f64).collect() }
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn is_faithful(&self) -> bool {
        self.lambda.iter().all(|&l| l > FAITHFUL_MIN)
    }

    pub fn check_faithful(&self) -> Result<()> {
        match self.lambda.iter().position(|&l| l <= FAITHFUL_MIN) {
            Some(block) => Err(Error::NotFaithful { block, weight: self.lambda[block] }),
            None => Ok(()),
        }
    }

    /// Weight on a single entry of block `j`: `λ_j / n(j)`.
    fn entry_weight(&self, j: usize) -> f64 {
        self.lambda[j] / self.shape.block(j) as f64
    }
}

pub fn eval_trace(w: &TraceWeights, x: &BlockElement) -> Result<C64> {
    if x.shape() != &w.shape {
        return Err(Error::Shape("trace and element shapes differ".into()));
    }
    Ok(x.blocks().iter().enumerate().map(|(j, b)| b.trace() * w.entry_weight(j)).sum())
}

/// Weights of `τ_out ∘ e` on the input algebra.
pub fn pullback_trace(e: &MultiplicityEmbedding, w_out: &TraceWeights) -> Result<TraceWeights> {
    if w_out.shape() != e.out_shape() {
        return Err(Error::Shape("trace is not on the embedding's codomain".into()));
    }
    let lambda = (0..e.in_shape().num_blocks())
        .map(|i| {
            let n_in = e.in_shape().block(i) as f64;
            (0..e.out_shape().num_blocks())
                .map(|j| w_out.lambda[j] * e.mult()[j][i] as f64 * n_in / e.out_shape().block(j) as f64)
                .sum()
        })
        .collect();
    TraceWeights::new(e.in_shape().clone(), lambda)
}

/// Restriction of a trace on level `n` to level `m ≤ n`, one step at a time.
pub fn restrict_trace(tower: &Tower, n: usize, m: usize, w: &TraceWeights) -> Result<TraceWeights> {
    if m > n || n > tower.depth() {
        return Err(Error::IndexOutOfRange(format!("levels {m}..{n}")));
    }
    tower.steps()[m..n].iter().rev().try_fold(w.clone(), |acc, s| pullback_trace(s, &acc))
}

/// `Σ_j |λ1_j − λ2_j|`, a bound for `|τ1(b) − τ2(b)| / ‖b‖`.
pub fn weight_distance(w1: &TraceWeights, w2: &TraceWeights) -> Result<f64> {
    if w1.shape != w2.shape {
        return Err(Error::Shape("weight_distance needs equal shapes".into()));
    }
    Ok(w1.lambda.iter().zip(&w2.lambda).map(|(a, b)| (a - b).abs()).sum())
}

/// Effros–Shen trace at one level with its exact center value.
#[derive(Debug, Clone)]
pub struct EffrosShenTrace {
    pub weights: TraceWeights,
    /// `t(θ, n)` evaluated at the center of the θ enclosure.
    pub t: BigRational,
    /// Rigorous bound on `|t(θ, n) − t|` over the enclosure.
    pub half_width: BigRational,
}

fn effros_shen_t(cf: &ContinuedFraction, theta: &BigRational, n: usize) -> Result<(BigRational, BigInt, BigInt)> {
    if n == 0 || n > cf.last_index() {
        return Err(Error::Depth { needed: n + 1, available: cf.quotients().len() });
    }
    let conv = cf.convergents();
    let (p_prev, q_prev) = &conv[n - 1];
    let q_n = &conv[n].1;
    let inner = theta * BigRational::from_integer(q_prev.clone()) - BigRational::from_integer(p_prev.clone());
    let mut t = inner * BigRational::from_integer(q_n.clone());
    if n % 2 == 0 {
        t = -t;
    }
    Ok((t, q_n.clone(), q_prev.clone()))
}

fn weights_from_t(t: &BigRational, q_n: &BigInt, q_prev: &BigInt) -> Result<TraceWeights> {
    let dim = |q: &BigInt| usize::try_from(q).map_err(|_| Error::Shape(format!("dimension {q} too large")));
    let shape = AlgebraShape::new(vec![dim(q_n)?, dim(q_prev)?])?;
    let tf = t.to_f64().ok_or_else(|| Error::Precision("t does not fit a double".into()))?;
    TraceWeights::new(shape, vec![tf, 1.0 - tf])
}

/// Weights `(t(θ,n), 1 − t(θ,n))` on `(q_n, q_{n−1})` for every θ whose
/// expansion starts with `cf`, certified to lie in `(0, 1)`.
pub fn effros_shen_trace(cf: &ContinuedFraction, n: usize) -> Result<EffrosShenTrace> {
    let (center, width) = cf.enclosure();
    let (t, q_n, q_prev) = effros_shen_t(cf, &center, n)?;
    let half_width = width * BigRational::from_integer(&q_n * &q_prev);
    let lo = &t - &half_width;
    let hi = &t + &half_width;
    if !lo.is_positive() || hi >= BigRational::one() {
        return Err(Error::Precision(format!(
            "t at level {n} is only known to within {:.3e}; supply more partial quotients",
            half_width.to_f64().unwrap_or(f64::INFINITY)
        )));
    }
    let weights = weights_from_t(&t, &q_n, &q_prev)?;
    Ok(EffrosShenTrace { weights, t, half_width })
}

/// Same weights for the rational number whose expansion is exactly `cf`.
/// At the last level `t = 1`, so the top trace is not faithful.
pub fn effros_shen_trace_rational(cf: &ContinuedFraction, n: usize) -> Result<EffrosShenTrace> {
    let (t, q_n, q_prev) = effros_shen_t(cf, &cf.value(), n)?;
    if t.is_negative() || t > BigRational::one() {
        return Err(Error::Precision(format!("t at level {n} is {t}, outside [0, 1]")));
    }
    let weights = weights_from_t(&t, &q_n, &q_prev)?;
    Ok(EffrosShenTrace { weights, t, half_width: BigRational::zero() })
}

/// The trace-preserving conditional expectation from level `n` onto the
/// image of level `m`, precomputed for repeated use.
#[derive(Debug, Clone)]
pub struct CondExp {
    image: LevelImage,
    weights: TraceWeights,
    /// `τ(α(e* e))` per unit.
    denominators: Vec<f64>,
}

impl CondExp {
    pub fn new(tower: &Tower, m: usize, n: usize, weights: &TraceWeights) -> Result<Self> {
        let image = tower.level_image(m, n)?;
        if weights.shape() != &image.target {
            return Err(Error::Shape(format!("trace is not on level {n}")));
        }
        weights.check_faithful()?;
        let denominators = image
            .units
            .iter()
            .map(|&u| {
                let diag = image.unit_index(MatrixUnit { row: u.col, ..u });
                image.positions[diag].iter().map(|p| weights.entry_weight(p.block)).sum()
            })
            .collect();
        Ok(CondExp { image, weights: weights.clone(), denominators })
    }

    pub fn image(&self) -> &LevelImage {
        &self.image
    }

    pub fn weights(&self) -> &TraceWeights {
        &self.weights
    }

    /// Coefficients `τ(α(e)* x)/τ(α(e* e))` over the units `e`.
    pub fn coefficients(&self, x: &BlockElement) -> Result<Vec<C64>> {
        if x.shape() != &self.image.target {
            return Err(Error::Shape("element is not on the top level".into()));
        }
        Ok(self
            .image
            .positions
            .iter()
            .zip(&self.denominators)
            .map(|(ps, &d)| {
                let num: C64 = ps.iter().map(|p| x.block(p.block)[(p.row, p.col)] * self.weights.entry_weight(p.block)).sum();
                num / d
            })
            .collect())
    }

    pub fn apply(&self, x: &BlockElement) -> Result<BlockElement> {
        Ok(self.image.combine(&self.coefficients(x)?))
    }

    /// `x − E(x)`.
    pub fn residual(&self, x: &BlockElement) -> Result<BlockElement> {
        x.sub(&self.apply(x)?)
    }
}

/// One-shot `E(x)` for `x` at level `n`, onto level `m`.
pub fn conditional_expectation(
    tower: &Tower,
    n: usize,
    m: usize,
    w: &TraceWeights,
    x: &BlockElement,
) -> Result<BlockElement> {
    CondExp::new(tower, m, n, w)?.apply(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{CMatrix, ZERO};

    fn shape(d: &[usize]) -> AlgebraShape {
        AlgebraShape::new(d.to_vec()).unwrap()
    }

    #[test]
    fn trace_examples() {
        let s = shape(&[2, 1]);
        let w = TraceWeights::new(s.clone(), vec![0.5, 0.5]).unwrap();
        assert_eq!(eval_trace(&w, &BlockElement::unit(&s)).unwrap(), C64::new(1.0, 0.0));
        let x = BlockElement::diagonal(&s, &[vec![2.0, 0.0], vec![4.0]]).unwrap();
        assert_eq!(eval_trace(&w, &x).unwrap(), C64::new(2.5, 0.0));
        let w0 = TraceWeights::new(s.clone(), vec![1.0, 0.0]).unwrap();
        let traceless = BlockElement::diagonal(&s, &[vec![1.0, -1.0], vec![7.0]]).unwrap();
        assert_eq!(eval_trace(&w0, &traceless).unwrap(), ZERO);
    }

    #[test]
    fn weight_validation() {
        let s = shape(&[1, 1]);
        assert!(TraceWeights::new(s.clone(), vec![0.5, 0.6]).is_err());
        assert!(TraceWeights::new(s.clone(), vec![1.5, -0.5]).is_err());
        assert!(TraceWeights::new(s.clone(), vec![1.0]).is_err());
        let w = TraceWeights::new(s, vec![1.0, 0.0]).unwrap();
        assert_eq!(w.check_faithful(), Err(Error::NotFaithful { block: 1, weight: 0.0 }));
    }

    #[test]
    fn golden_pullback_recovers_theta() {
        let cf = ContinuedFraction::golden(40);
        let t2 = effros_shen_trace(&cf, 2).unwrap();
        assert!((t2.weights.lambda()[0] - 0.7639320225002102).abs() < 1e-15);
        let tower = Tower::effros_shen(&cf, 2).unwrap();
        let back = pullback_trace(&tower.steps()[1], &t2.weights).unwrap();
        let theta = (5f64.sqrt() - 1.0) / 2.0;
        assert!((back.lambda()[0] - theta).abs() < 1e-15);
        let t1 = effros_shen_trace(&cf, 1).unwrap();
        assert!((t1.weights.lambda()[0] - theta).abs() < 1e-15);
    }

    #[test]
    fn short_prefix_is_a_precision_error() {
        let cf = ContinuedFraction::golden(3);
        assert!(matches!(effros_shen_trace(&cf, 3), Err(Error::Precision(_))));
    }

    #[test]
    fn rational_top_level_is_degenerate() {
        let cf = ContinuedFraction::new(vec![0, 2, 1, 3]).unwrap();
        let top = effros_shen_trace_rational(&cf, 3).unwrap();
        assert_eq!(top.t, BigRational::one());
    }

    #[test]
    fn weight_distance_examples() {
        let s = shape(&[1, 1]);
        let n = 8.0;
        let a = TraceWeights::new(s.clone(), vec![0.5 + 1.0 / n, 0.5 - 1.0 / n]).unwrap();
        let b = TraceWeights::new(s.clone(), vec![0.5, 0.5]).unwrap();
        assert!((weight_distance(&a, &b).unwrap() - 2.0 / n).abs() < 1e-15);
        let x = BlockElement::diagonal(&s, &[vec![1.0], vec![-1.0]]).unwrap();
        let gap = (eval_trace(&a, &x).unwrap() - eval_trace(&b, &x).unwrap()).norm();
        assert!((gap - 2.0 / n).abs() < 1e-15);
    }

    #[test]
    fn expectation_onto_scalars_is_the_trace() {
        let tower = Tower::uhf(&[2, 2], 2).unwrap();
        let w = TraceWeights::canonical(tower.top());
        let mut x = BlockElement::zeros(tower.top());
        for r in 0..4 {
            for c in 0..4 {
                x.block_mut(0)[(r, c)] = C64::new((r * 4 + c) as f64, (r as f64) - (c as f64));
            }
        }
        let e = conditional_expectation(&tower, 2, 0, &w, &x).unwrap();
        let tau = eval_trace(&w, &x).unwrap();
        assert!(e.sub(&BlockElement::scalar(tower.top(), tau)).unwrap().op_norm() < 1e-12);
    }

    #[test]
    fn expectation_fixes_the_image() {
        let tower = Tower::effros_shen(&ContinuedFraction::golden(3), 3).unwrap();
        let w = effros_shen_trace(&ContinuedFraction::golden(40), 3).unwrap().weights;
        let y = BlockElement::new(
            tower.level(1).unwrap().clone(),
            vec![CMatrix::scalar(1, C64::new(2.0, 0.0)), CMatrix::scalar(1, C64::new(-3.0, 1.0))],
        )
        .unwrap();
        let x = tower.embed(1, 3, &y).unwrap();
        let e = CondExp::new(&tower, 1, 3, &w).unwrap();
        assert!(e.apply(&x).unwrap().max_abs_diff(&x).unwrap() < 1e-15);
        assert_eq!(e.image().membership_defect(&x), 0.0);
    }

    #[test]
    fn expectation_requires_faithful_trace() {
        let tower = Tower::uhf(&[2], 1).unwrap();
        let w = TraceWeights::canonical(tower.top());
        assert!(CondExp::new(&tower, 0, 1, &w).is_ok());
        let t = Tower::effros_shen(&ContinuedFraction::golden(2), 2).unwrap();
        let bad = TraceWeights::new(t.top().clone(), vec![1.0, 0.0]).unwrap();
        assert!(matches!(CondExp::new(&t, 1, 2, &bad), Err(Error::NotFaithful { block: 1, .. })));
    }
}
