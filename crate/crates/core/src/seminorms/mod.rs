//! Lip-norms on tower truncations: the conditional-expectation family and
//! the quotient-norm family.

pub mod best_approx;

use crate::algebra::{jordan, lie, BlockElement, C64};
use crate::error::{Error, Result};
use crate::random;
use crate::states::{CondExp, TraceWeights};
use crate::towers::Tower;
use best_approx::{best_approximation, QuotientValue, SaBasis};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

/// Positive weights `β(0), …, β(N−1)`, optionally with a dominator `B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSequence {
    beta: Vec<BigRational>,
    dominator: Option<Vec<BigRational>>,
}

impl WeightSequence {
    pub fn new(beta: Vec<BigRational>) -> Result<Self> {
        if let Some(m) = beta.iter().position(|b| !b.is_positive()) {
            return Err(Error::Domain(format!("beta({m}) = {} is not positive", beta[m])));
        }
        Ok(WeightSequence { beta, dominator: None })
    }

    /// Attaches `B` with `β(m) ≤ B(m)` checked exactly.
    pub fn with_dominator(mut self, dominator: Vec<BigRational>) -> Result<Self> {
        if dominator.len() < self.beta.len() {
            return Err(Error::Config(format!("dominator covers {} of {} levels", dominator.len(), self.beta.len())));
        }
        for (m, (b, d)) in self.beta.iter().zip(&dominator).enumerate() {
            if b > d {
                return Err(Error::Hypothesis(format!("beta({m}) = {b} exceeds the dominator {d}")));
            }
        }
        self.dominator = Some(dominator);
        Ok(self)
    }

    /// `β(n) = 1/dim(level n)`, so `β(0) = 1`.
    pub fn inverse_dimension(tower: &Tower) -> Self {
        let beta = tower.levels()[..tower.depth()]
            .iter()
            .map(|s| BigRational::new(BigInt::one(), BigInt::from(s.total_dimension())))
            .collect();
        WeightSequence { beta, dominator: None }
    }

    pub fn beta(&self) -> &[BigRational] {
        &self.beta
    }

    pub fn dominator(&self) -> Option<&[BigRational]> {
        self.dominator.as_deref()
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn at(&self, m: usize) -> f64 {
        self.beta[m].to_f64().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LipKind {
    CondExp,
    Quotient,
}

impl LipKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LipKind::CondExp => "cond-exp",
            LipKind::Quotient => "quotient",
        }
    }
}

/// A Lip-norm on the top level of a tower.
#[derive(Debug, Clone)]
pub struct LipSpec {
    tower: Tower,
    kind: LipKind,
    trace: Option<TraceWeights>,
    beta: WeightSequence,
    /// Expectations onto levels `0..N` for this LipSpec's own trace.
    expectations: Vec<CondExp>,
    /// Frobenius-orthogonal expectations (canonical trace) used by the
    /// best-approximation solver.
    canonical: Vec<CondExp>,
    bases: Vec<SaBasis>,
}

impl LipSpec {
    pub fn cond_exp(tower: Tower, trace: TraceWeights, beta: WeightSequence) -> Result<Self> {
        Self::build(tower, LipKind::CondExp, Some(trace), beta)
    }

    pub fn quotient(tower: Tower, beta: WeightSequence) -> Result<Self> {
        Self::build(tower, LipKind::Quotient, None, beta)
    }

    pub fn build(tower: Tower, kind: LipKind, trace: Option<TraceWeights>, beta: WeightSequence) -> Result<Self> {
        let n = tower.depth();
        if n == 0 {
            return Err(Error::Config("a Lip-norm needs a tower of depth at least 1".into()));
        }
        if beta.len() < n {
            return Err(Error::Config(format!("beta covers {} of the {n} levels below the top", beta.len())));
        }
        let canonical_w = TraceWeights::canonical(tower.top());
        let canonical = (0..n).map(|m| CondExp::new(&tower, m, n, &canonical_w)).collect::<Result<Vec<_>>>()?;
        let bases = canonical.iter().map(|e| SaBasis::new(e.image())).collect();
        let expectations = match (kind, &trace) {
            (LipKind::CondExp, Some(w)) => (0..n).map(|m| CondExp::new(&tower, m, n, w)).collect::<Result<Vec<_>>>()?,
            (LipKind::CondExp, None) => return Err(Error::Config("the cond-exp kind needs a trace".into())),
            (LipKind::Quotient, Some(w)) => (0..n).map(|m| CondExp::new(&tower, m, n, w)).collect::<Result<Vec<_>>>()?,
            (LipKind::Quotient, None) => canonical.clone(),
        };
        Ok(LipSpec { tower, kind, trace, beta, expectations, canonical, bases })
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn kind(&self) -> LipKind {
        self.kind
    }

    pub fn trace(&self) -> Option<&TraceWeights> {
        self.trace.as_ref()
    }

    pub fn beta(&self) -> &WeightSequence {
        &self.beta
    }

    /// Top level `N`.
    pub fn depth(&self) -> usize {
        self.tower.depth()
    }

    /// Expectation onto level `m` for this LipSpec's trace (canonical trace for
    /// the quotient kind without one).
    pub fn expectation(&self, m: usize) -> Result<&CondExp> {
        self.expectations.get(m).ok_or_else(|| Error::IndexOutOfRange(format!("level {m} is not below the top")))
    }

    fn check_sa(&self, x: &BlockElement) -> Result<()> {
        if x.shape() != self.tower.top() {
            return Err(Error::Shape(format!("element shape {:?} is not the top level", x.shape().dims())));
        }
        if !x.all_finite() {
            return Err(Error::Domain("element has non-finite entries".into()));
        }
        let d = x.hermitian_defect();
        if d > crate::algebra::TOL_SA {
            return Err(Error::NotSelfAdjoint { deviation: d });
        }
        Ok(())
    }
}

/// Interval enclosing a Lip-norm value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipValue {
    pub lower: f64,
    pub upper: f64,
    pub converged: bool,
}

impl LipValue {
    fn exact(v: f64) -> Self {
        LipValue { lower: v, upper: v, converged: true }
    }
}

/// `max_m ‖x − E_m(x)‖ / β(m)`.
pub fn lip_cond_exp(spec: &LipSpec, x: &BlockElement) -> Result<f64> {
    if spec.kind != LipKind::CondExp {
        return Err(Error::Config("lip_cond_exp needs a cond-exp spec".into()));
    }
    spec.check_sa(x)?;
    if x.as_real_scalar().is_some() {
        return Ok(0.0);
    }
    let mut best: f64 = 0.0;
    for m in 0..spec.depth() {
        best = best.max(spec.expectations[m].residual(x)?.op_norm() / spec.beta.at(m));
    }
    Ok(best)
}

/// Distance `S_m(x)` from `x` to the self-adjoint part of level `m`.
pub fn quotient_seminorm(spec: &LipSpec, m: usize, x: &BlockElement) -> Result<QuotientValue> {
    spec.check_sa(x)?;
    if m >= spec.depth() {
        return Err(Error::IndexOutOfRange(format!("level {m} is not below the top level {}", spec.depth())));
    }
    let mut extra = Vec::new();
    if spec.trace.is_some() {
        extra.push(spec.expectations[m].apply(x)?.self_adjoint_part());
    }
    best_approximation(&spec.canonical[m], &spec.bases[m], x, &extra)
}

/// `max_m S_m(x) / β(m)` as an interval from the solver bounds.
pub fn lip_quotient(spec: &LipSpec, x: &BlockElement) -> Result<LipValue> {
    spec.check_sa(x)?;
    if x.as_real_scalar().is_some() {
        return Ok(LipValue::exact(0.0));
    }
    let mut out = LipValue { lower: 0.0, upper: 0.0, converged: true };
    for m in 0..spec.depth() {
        let q = quotient_seminorm(spec, m, x)?;
        let b = spec.beta.at(m);
        out.lower = out.lower.max(q.lower / b);
        out.upper = out.upper.max(q.value / b);
        out.converged &= q.converged;
    }
    Ok(out)
}

/// The spec's Lip-norm, exact for the cond-exp kind.
pub fn lip(spec: &LipSpec, x: &BlockElement) -> Result<LipValue> {
    match spec.kind {
        LipKind::CondExp => lip_cond_exp(spec, x).map(LipValue::exact),
        LipKind::Quotient => lip_quotient(spec, x),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiLeibnizReport {
    pub c: f64,
    pub d: f64,
    pub pairs: usize,
    /// Largest `LHS − RHS` observed (negative when every pair has slack).
    pub worst_margin: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub unconverged: usize,
}

/// Checks `max(L(a∘b), L({a,b})) ≤ C(‖a‖L(b) + ‖b‖L(a)) + D L(a)L(b)` on
/// random self-adjoint pairs, with upper bounds on the left and lower bounds
/// on the right.
pub fn quasi_leibniz_check(spec: &LipSpec, c: f64, d: f64, n_samples: usize, seed: u64, tol: f64) -> Result<QuasiLeibnizReport> {
    if !(c >= 1.0) || !(d >= 0.0) {
        return Err(Error::Domain(format!("need C ≥ 1 and D ≥ 0, got ({c}, {d})")));
    }
    let mut rng = random::rng(seed);
    let top = spec.tower.top().clone();
    let mut worst = f64::NEG_INFINITY;
    let mut passed = true;
    let mut unconverged = 0;
    for _ in 0..n_samples {
        let a = BlockElement::random_self_adjoint(&top, &mut rng);
        let b = BlockElement::random_self_adjoint(&top, &mut rng);
        let la = lip(spec, &a)?;
        let lb = lip(spec, &b)?;
        let lj = lip(spec, &jordan(&a, &b)?.self_adjoint_part())?;
        let ll = lip(spec, &lie(&a, &b)?.self_adjoint_part())?;
        for v in [la, lb, lj, ll] {
            if !v.converged {
                unconverged += 1;
            }
        }
        let rhs = c * (a.op_norm() * lb.lower + b.op_norm() * la.lower) + d * la.lower * lb.lower;
        let margin = lj.upper.max(ll.upper) - rhs;
        worst = worst.max(margin);
        passed &= margin <= tol;
    }
    Ok(QuasiLeibnizReport { c, d, pairs: n_samples, worst_margin: worst, tolerance: tol, passed, unconverged })
}

/// Self-adjoint elements with `L ≤ 1`: Gaussian samples rescaled by
/// `1/max(1, L)`, then `0`, `±1`, scalar shifts, and for each level `m` a
/// residual direction `x − E_m(x)` scaled to `L = 1`.
pub fn sample_lip_ball(spec: &LipSpec, n_samples: usize, seed: u64) -> Result<Vec<BlockElement>> {
    let mut rng = random::rng(seed);
    let top = spec.tower.top().clone();
    let mut out = Vec::with_capacity(n_samples + 3 + 2 * spec.depth());
    let normalize = |x: BlockElement| -> Result<BlockElement> {
        let l = lip(spec, &x)?.upper;
        Ok(if l > 1.0 { x.scale_re(1.0 / l) } else { x })
    };
    for _ in 0..n_samples {
        out.push(normalize(BlockElement::random_self_adjoint(&top, &mut rng))?);
    }
    out.push(BlockElement::zeros(&top));
    out.push(BlockElement::unit(&top));
    out.push(BlockElement::unit(&top).scale_re(-1.0));
    if let Some(first) = out.first().cloned() {
        for shift in [1.0, -1.0] {
            out.push(first.add(&BlockElement::scalar(&top, C64::new(shift, 0.0)))?);
        }
    }
    for m in 0..spec.depth() {
        let x = BlockElement::random_self_adjoint(&top, &mut rng);
        let r = spec.expectations[m].residual(&x)?.self_adjoint_part();
        let l = lip(spec, &r)?.upper;
        if l > 0.0 {
            out.push(r.scale_re(1.0 / l));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraShape;

    fn two_point() -> LipSpec {
        let tower = Tower::new(
            vec![AlgebraShape::scalars(), AlgebraShape::new(vec![1, 1]).unwrap()],
            vec![vec![vec![1], vec![1]]],
            "two-point",
        )
        .unwrap();
        let w = TraceWeights::new(tower.top().clone(), vec![0.5, 0.5]).unwrap();
        let beta = WeightSequence::new(vec![BigRational::one()]).unwrap();
        LipSpec::cond_exp(tower, w, beta).unwrap()
    }

    #[test]
    fn two_point_values() {
        let spec = two_point();
        let x = BlockElement::diagonal(spec.tower().top(), &[vec![3.0], vec![-1.5]]).unwrap();
        assert!((lip_cond_exp(&spec, &x).unwrap() - 2.25).abs() < 1e-15);
        let q = quotient_seminorm(&spec, 0, &x).unwrap();
        assert!((q.value - 2.25).abs() < 1e-15 && (q.lower - 2.25).abs() < 1e-15);
        assert_eq!(lip_cond_exp(&spec, &BlockElement::unit(spec.tower().top()).scale_re(3.0)).unwrap(), 0.0);
    }

    #[test]
    fn rejects_non_self_adjoint() {
        let spec = two_point();
        let x = BlockElement::scalar(spec.tower().top(), C64::new(0.0, 1.0));
        assert!(matches!(lip_cond_exp(&spec, &x), Err(Error::NotSelfAdjoint { .. })));
    }

    #[test]
    fn beta_must_be_positive() {
        assert!(WeightSequence::new(vec![BigRational::from_integer(0.into())]).is_err());
        let w = WeightSequence::new(vec![BigRational::new(1.into(), 2.into())]).unwrap();
        assert!(matches!(
            w.clone().with_dominator(vec![BigRational::new(1.into(), 3.into())]),
            Err(Error::Hypothesis(_))
        ));
        assert!(w.with_dominator(vec![]).is_err());
    }

    #[test]
    fn ball_samples_have_unit_bound() {
        let spec = two_point();
        let s = sample_lip_ball(&spec, 20, 1).unwrap();
        assert!(s.len() > 20);
        for x in &s {
            assert!(lip_cond_exp(&spec, x).unwrap() <= 1.0 + 1e-9);
        }
    }
}
