//! Bridges with unit pivot and the certificates built on them.
//!
//! With pivot `1` the height of a bridge is 0, so its length is its reach.

use super::{spec_fingerprint, witness, BoundLabel, Check, MetricCertificate, Witness};
use crate::algebra::{AlgebraShape, BlockElement, C64};
use crate::error::{Error, Result};
use crate::random;
use crate::seminorms::{lip, lip_cond_exp, sample_lip_ball, LipKind, LipSpec};
use crate::states::{eval_trace, TraceWeights};
use crate::towers::{MultiplicityEmbedding, Tower};
use rand::Rng;

/// One side of a bridge: a unital monomorphism into the ambient algebra.
#[derive(Debug, Clone, PartialEq)]
pub enum BridgeLeg {
    Identity(AlgebraShape),
    Embedding(MultiplicityEmbedding),
    /// Level `from` of `tower` into level `to`, step by step.
    Tower { tower: Tower, from: usize, to: usize },
}

impl BridgeLeg {
    pub fn domain(&self) -> Result<&AlgebraShape> {
        match self {
            BridgeLeg::Identity(s) => Ok(s),
            BridgeLeg::Embedding(e) => Ok(e.in_shape()),
            BridgeLeg::Tower { tower, from, .. } => tower.level(*from),
        }
    }

    pub fn codomain(&self) -> Result<&AlgebraShape> {
        match self {
            BridgeLeg::Identity(s) => Ok(s),
            BridgeLeg::Embedding(e) => Ok(e.out_shape()),
            BridgeLeg::Tower { tower, to, .. } => tower.level(*to),
        }
    }

    pub fn apply(&self, x: &BlockElement) -> Result<BlockElement> {
        if x.shape() != self.domain()? {
            return Err(Error::Shape("element is not in the domain of the bridge leg".into()));
        }
        match self {
            BridgeLeg::Identity(_) => Ok(x.clone()),
            BridgeLeg::Embedding(e) => e.apply(x),
            BridgeLeg::Tower { tower, from, to } => tower.embed(*from, *to, x),
        }
    }
}

/// Bridge `(D, π_A, π_B, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitPivotBridge {
    ambient: AlgebraShape,
    left: BridgeLeg,
    right: BridgeLeg,
}

impl UnitPivotBridge {
    pub fn new(left: BridgeLeg, right: BridgeLeg) -> Result<Self> {
        let ambient = left.codomain()?.clone();
        if right.codomain()? != &ambient {
            return Err(Error::Shape("bridge legs have different codomains".into()));
        }
        if let BridgeLeg::Tower { tower, from, to } = &left {
            tower.compose_steps(*from, *to)?;
        }
        if let BridgeLeg::Tower { tower, from, to } = &right {
            tower.compose_steps(*from, *to)?;
        }
        Ok(UnitPivotBridge { ambient, left, right })
    }

    /// Inclusion of level `m` of `tower` into its top level.
    pub fn inclusion(tower: &Tower, m: usize) -> Result<Self> {
        let n = tower.depth();
        Self::new(BridgeLeg::Identity(tower.top().clone()), BridgeLeg::Tower { tower: tower.clone(), from: m, to: n })
    }

    pub fn ambient(&self) -> &AlgebraShape {
        &self.ambient
    }

    pub fn left(&self) -> &BridgeLeg {
        &self.left
    }

    pub fn right(&self) -> &BridgeLeg {
        &self.right
    }

    /// Always 0: the 1-level set of the unit pivot is the whole state space.
    pub fn height(&self) -> f64 {
        0.0
    }
}

/// `‖π_A(a) − π_B(c)‖` in the ambient algebra.
pub fn bridge_seminorm(b: &UnitPivotBridge, a: &BlockElement, c: &BlockElement) -> Result<f64> {
    Ok(b.left.apply(a)?.sub(&b.right.apply(c)?)?.op_norm())
}

/// Reach bound `β(m)` for the inclusion of level `m` into the top level.
///
/// For every sampled `a` with `L(a) ≤ 1`, the partner `c = E_m(a)` taken at
/// level `m` satisfies `L(E_m a) ≤ 1` and `‖a − π(c)‖ ≤ β(m)`.
pub fn beta_bound_certificate(spec: &LipSpec, m: usize, n_samples: usize, seed: u64) -> Result<MetricCertificate> {
    if spec.kind() != LipKind::CondExp {
        return Err(Error::Config("the beta bound certificate needs a cond-exp spec".into()));
    }
    if m >= spec.depth() {
        return Err(Error::IndexOutOfRange(format!("level {m} is not below the top level {}", spec.depth())));
    }
    const TOL: f64 = 1e-9;
    let tower = spec.tower();
    let e = spec.expectation(m)?;
    let bridge = UnitPivotBridge::inclusion(tower, m)?;
    let level_m = tower.level(m)?.clone();
    let beta = spec.beta().at(m);
    let mut witnesses = Vec::new();
    let mut pinned = true;
    for (i, a) in sample_lip_ball(spec, n_samples, seed)?.iter().enumerate() {
        let la = lip_cond_exp(spec, a)?;
        pinned &= la <= 1.0 + TOL;
        // Partner at level m from the expectation coefficients.
        let c = BlockElement::new(level_m.clone(), {
            let coeffs = e.coefficients(a)?;
            let mut blocks: Vec<_> = level_m.dims().iter().map(|&d| crate::algebra::CMatrix::zeros(d)).collect();
            for (u, v) in e.image().units.iter().zip(coeffs) {
                blocks[u.block][(u.row, u.col)] = v;
            }
            blocks
        })?
        .self_adjoint_part();
        let image = tower.embed(m, tower.depth(), &c)?;
        witnesses.push(witness(i, "lip(E_m a) <= 1", lip_cond_exp(spec, &image)?, 1.0));
        witnesses.push(witness(i, "||a - E_m a|| <= beta(m)", bridge_seminorm(&bridge, a, &c)?, beta));
    }
    let checks = vec![
        Check { name: "samples-in-lip-ball".into(), passed: pinned, detail: "every sample has L(a) <= 1".into() },
        Check { name: "height".into(), passed: bridge.height() == 0.0, detail: "unit pivot".into() },
    ];
    let inputs = format!("beta-bound;{};m={m};n={n_samples}", spec_fingerprint(spec));
    Ok(MetricCertificate::assemble(
        "beta-bound",
        BoundLabel::Certified,
        beta,
        Some(spec.beta().beta()[m].to_string()),
        seed,
        TOL,
        &inputs,
        checks,
        witnesses,
    ))
}

/// `l(spec, a) = L(embedding of a from level n into the top level)`.
fn restricted_lip(spec: &LipSpec, n: usize, a: &BlockElement) -> Result<f64> {
    let x = spec.tower().embed(n, spec.depth(), a)?;
    Ok(lip(spec, &x)?.upper)
}

/// Smallest `l` value accepted on the unit sphere of a scalar complement.
pub const MIN_SPHERE_LIP: f64 = 1e-8;

/// Rescaling bridge between two Lip-norms restricted to a shared level `n`.
///
/// The sphere is sampled among trace-zero (canonical trace) self-adjoint
/// elements of unit norm; `m_S` is the smallest sampled `l`, and
/// `ε = max |l_member − l_limit| / m_S²`. Each sample and a shifted,
/// rescaled copy `r·b + t·1` get explicit partners in both directions.
pub fn rescaling_bridge_bound(
    member: &LipSpec,
    limit: &LipSpec,
    n: usize,
    sphere_samples: usize,
    seed: u64,
) -> Result<MetricCertificate> {
    if n == 0 {
        return Err(Error::Config("level 0 is the scalars; the bridge term is 0 by definition".into()));
    }
    if n > member.depth() || n > limit.depth() {
        return Err(Error::IndexOutOfRange(format!("level {n} is above a top level")));
    }
    if !member.tower().agrees_up_to(limit.tower(), n) {
        return Err(Error::Hypothesis(format!("towers do not agree up to level {n}")));
    }
    if sphere_samples == 0 {
        return Err(Error::Config("need at least one sphere sample".into()));
    }
    let shape = member.tower().level(n)?.clone();
    let canonical = TraceWeights::canonical(&shape);
    let mut rng = random::rng(seed);
    let mut sphere = Vec::with_capacity(sphere_samples);
    while sphere.len() < sphere_samples {
        let x = BlockElement::random_self_adjoint(&shape, &mut rng);
        let t = eval_trace(&canonical, &x)?.re;
        let w = x.sub(&BlockElement::scalar(&shape, C64::new(t, 0.0)))?;
        let norm = w.op_norm();
        if norm > 1e-6 {
            sphere.push(w.scale_re(1.0 / norm));
        }
    }
    let values: Vec<(f64, f64)> =
        sphere.iter().map(|a| Ok((restricted_lip(member, n, a)?, restricted_lip(limit, n, a)?))).collect::<Result<_>>()?;
    let m_s = values.iter().fold(f64::INFINITY, |acc, &(x, y)| acc.min(x).min(y));
    if !(m_s >= MIN_SPHERE_LIP) {
        return Err(Error::Conditioning(format!("sampled sphere minimum {m_s:e} is below {MIN_SPHERE_LIP:e}")));
    }
    let eps = values.iter().map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / (m_s * m_s);
    let scale = values.iter().fold(1.0f64, |acc, &(x, y)| acc.max(x).max(y));
    let tol = 1e-9 * scale;

    let mut witnesses: Vec<Witness> = Vec::new();
    for (i, (b, &(l_k, l_inf))) in sphere.iter().zip(&values).enumerate() {
        let r = rng.random_range(0.5..2.0);
        let t = rng.random_range(-1.0..1.0);
        let shifted = b.scale_re(r).add(&BlockElement::scalar(&shape, C64::new(t, 0.0)))?;
        let (s_k, s_inf) = (restricted_lip(member, n, &shifted)?, restricted_lip(limit, n, &shifted)?);
        for (a, l_k_a, l_inf_a, tag) in [(b.clone(), l_k, l_inf, "sphere"), (shifted, s_k, s_inf, "shifted")] {
            let scalar = if tag == "sphere" { 0.0 } else { t };
            let core = a.sub(&BlockElement::scalar(&shape, C64::new(scalar, 0.0)))?;
            // Member side: a' = (l_∞/l_k)·core + t·1.
            let fwd = core.scale_re(l_inf_a / l_k_a).add(&BlockElement::scalar(&shape, C64::new(scalar, 0.0)))?;
            witnesses.push(witness(i, &format!("{tag}: ||a - a'|| <= eps l_limit(a)"), a.sub(&fwd)?.op_norm(), eps * l_inf_a));
            witnesses.push(witness(i, &format!("{tag}: l_member(a') <= l_limit(a)"), restricted_lip(member, n, &fwd)?, l_inf_a));
            // Limit side: a'' = (l_k/l_∞)·core + t·1.
            let bwd = core.scale_re(l_k_a / l_inf_a).add(&BlockElement::scalar(&shape, C64::new(scalar, 0.0)))?;
            witnesses.push(witness(i, &format!("{tag}: ||a - a''|| <= eps l_member(a)"), a.sub(&bwd)?.op_norm(), eps * l_k_a));
            witnesses.push(witness(i, &format!("{tag}: l_limit(a'') <= l_member(a)"), restricted_lip(limit, n, &bwd)?, l_k_a));
        }
    }
    let checks = vec![
        Check { name: "shared-levels".into(), passed: true, detail: format!("towers agree up to level {n}") },
        Check { name: "sphere-minimum".into(), passed: true, detail: format!("m_S = {m_s:e}") },
    ];
    let inputs = format!("rescale;member:{};limit:{};n={n};samples={sphere_samples}", spec_fingerprint(member), spec_fingerprint(limit));
    Ok(MetricCertificate::assemble("rescale", BoundLabel::Empirical, eps, None, seed, tol, &inputs, checks, witnesses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seminorms::WeightSequence;
    use crate::states::effros_shen_trace;
    use crate::towers::ContinuedFraction;
    use num_rational::BigRational;

    fn golden_spec(depth: usize) -> LipSpec {
        let cf = ContinuedFraction::golden(40);
        let tower = Tower::effros_shen(&cf, depth).unwrap();
        let w = effros_shen_trace(&cf, depth).unwrap().weights;
        let beta = WeightSequence::inverse_dimension(&tower);
        LipSpec::cond_exp(tower, w, beta).unwrap()
    }

    #[test]
    fn bridge_seminorm_examples() {
        let spec = golden_spec(3);
        let tower = spec.tower();
        let top = tower.top().clone();
        let mut r = random::rng(4);
        let a = BlockElement::random_self_adjoint(&top, &mut r);
        let c = BlockElement::random_self_adjoint(&top, &mut r);
        let id = UnitPivotBridge::new(BridgeLeg::Identity(top.clone()), BridgeLeg::Identity(top.clone())).unwrap();
        assert!((bridge_seminorm(&id, &a, &c).unwrap() - a.sub(&c).unwrap().op_norm()).abs() < 1e-15);
        assert_eq!(bridge_seminorm(&id, &a, &a).unwrap(), 0.0);
        assert_eq!(id.height(), 0.0);
    }

    #[test]
    fn beta_bound_on_golden_tower() {
        let spec = golden_spec(4);
        let cert = beta_bound_certificate(&spec, 2, 30, 9).unwrap();
        assert!(cert.verified, "{:?}", cert.worst_residual);
        assert_eq!(cert.bound_exact.as_deref(), Some("1/5"));
        assert!(cert.recheck());
    }

    #[test]
    fn identical_specs_give_zero_epsilon() {
        let spec = golden_spec(3);
        let cert = rescaling_bridge_bound(&spec, &spec, 3, 20, 2).unwrap();
        assert_eq!(cert.bound, 0.0);
        assert!(cert.verified);
    }

    #[test]
    fn nearby_towers_rescale() {
        let a = golden_spec(3);
        let cf = ContinuedFraction::new([vec![0, 1, 1, 1, 1], vec![2; 30]].concat()).unwrap();
        let tower = Tower::effros_shen(&cf, 3).unwrap();
        let w = effros_shen_trace(&cf, 3).unwrap().weights;
        let b = LipSpec::cond_exp(tower.clone(), w, WeightSequence::inverse_dimension(&tower)).unwrap();
        let cert = rescaling_bridge_bound(&b, &a, 3, 40, 5).unwrap();
        assert!(cert.verified, "{:?}", cert.worst_residual);
        assert!(cert.bound > 0.0);
        let other = Tower::effros_shen(&ContinuedFraction::new(vec![0, 2, 1, 1]).unwrap(), 3).unwrap();
        let w2 = TraceWeights::canonical(other.top());
        let c = LipSpec::cond_exp(other.clone(), w2, WeightSequence::new(vec![BigRational::from_integer(1.into()); 3]).unwrap()).unwrap();
        assert!(matches!(rescaling_bridge_bound(&c, &a, 2, 5, 1), Err(Error::Hypothesis(_))));
    }
}
