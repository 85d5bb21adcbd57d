//! Chain bound `Λ(member k, limit) ≤ 2B(N) + bridge term at level N` for
//! fusing families.

use super::bridge::rescaling_bridge_bound;
use super::MetricCertificate;
use crate::error::{Error, Result};
use crate::seminorms::{LipSpec, WeightSequence};
use crate::states::{effros_shen_trace, weight_distance};
use crate::towers::{dimension_weight, fusing_sequence, golden_dominator, ContinuedFraction, Tower};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// Effros–Shen towers for members `θ_0, θ_1, …` and a limit `θ_∞`, each
/// given by a finite prefix of its expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffrosShenFamily {
    pub limit: ContinuedFraction,
    pub members: Vec<ContinuedFraction>,
}

impl EffrosShenFamily {
    pub fn new(limit: ContinuedFraction, members: Vec<ContinuedFraction>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Domain("a family needs at least one member".into()));
        }
        Ok(EffrosShenFamily { limit, members })
    }

    /// `θ_k = [0; 1^k, 2, 2, …]` for `k < count`, converging to the golden
    /// expansion; every prefix carries `tail` further quotients.
    pub fn golden_perturbation(count: usize, tail: usize) -> Self {
        let members = (0..count)
            .map(|k| {
                let q = std::iter::once(0).chain(std::iter::repeat_n(1, k)).chain(std::iter::repeat_n(2, tail)).collect();
                ContinuedFraction::new(q).expect("valid quotients")
            })
            .collect();
        EffrosShenFamily { limit: ContinuedFraction::golden(count + tail), members }
    }

    pub fn towers(&self, depth: usize) -> Result<(Vec<Tower>, Tower)> {
        let members = self.members.iter().map(|cf| Tower::effros_shen(cf, depth)).collect::<Result<_>>()?;
        Ok((members, Tower::effros_shen(&self.limit, depth)?))
    }

    /// `(c_0, …, c_depth)`.
    pub fn fusing(&self, depth: usize) -> Result<Vec<usize>> {
        let (members, limit) = self.towers(depth)?;
        fusing_sequence(&members, &limit, depth)
    }

    /// Cond-exp spec at top level `depth` with the Effros–Shen trace,
    /// `β(n) = 1/(q_n² + q_{n−1}²)` for `n ≤ depth` and the golden dominator.
    pub fn spec(cf: &ContinuedFraction, depth: usize) -> Result<LipSpec> {
        let tower = Tower::effros_shen(cf, depth)?;
        let trace = effros_shen_trace(cf, depth)?.weights;
        let beta = (0..=depth).map(|n| dimension_weight(cf, n)).collect::<Result<Vec<_>>>()?;
        let dominator = (0..=depth).map(golden_dominator).collect();
        let beta = WeightSequence::new(beta)?.with_dominator(dominator)?;
        LipSpec::cond_exp(tower, trace, beta)
    }

    pub fn member_spec(&self, k: usize, depth: usize) -> Result<LipSpec> {
        let cf = self.members.get(k).ok_or_else(|| Error::IndexOutOfRange(format!("member {k} of {}", self.members.len())))?;
        Self::spec(cf, depth)
    }

    pub fn limit_spec(&self, depth: usize) -> Result<LipSpec> {
        Self::spec(&self.limit, depth)
    }

    /// Chain bound for member `k` at level `n`. Level 0 is the scalars:
    /// no bridge and no weight difference.
    pub fn chain_bound(&self, n: usize, k: usize, sphere_samples: usize, seed: u64) -> Result<ChainBound> {
        let fusing = self.fusing(n)?;
        if n == 0 {
            if k >= self.members.len() {
                return Err(Error::IndexOutOfRange(format!("member {k} of {}", self.members.len())));
            }
            let dominator = golden_dominator(0);
            let truncation_term = &dominator * BigRational::from_integer(BigInt::from(2));
            let bound = truncation_term.to_f64().unwrap_or(f64::NAN);
            return Ok(ChainBound { level: 0, member: k, fusing_index: fusing[0], dominator, truncation_term, bridge: None, weight_distance: 0.0, bound });
        }
        propinquity_chain_bound(&self.member_spec(k, n)?, &self.limit_spec(n)?, &fusing, n, k, sphere_samples, seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainBound {
    pub level: usize,
    pub member: usize,
    pub fusing_index: usize,
    /// `B(N)`.
    pub dominator: BigRational,
    /// `2B(N)`, exact.
    pub truncation_term: BigRational,
    /// Rescaling bridge at level `N`; `None` at level 0, where it is 0.
    pub bridge: Option<MetricCertificate>,
    /// `Σ_j |λ_member − λ_limit|` at level `N`.
    pub weight_distance: f64,
    /// `2B(N) + bridge bound`.
    pub bound: f64,
}

/// `Λ ≤ 2B(N) + ε_N`, with `ε_N` from the rescaling bridge between the two
/// specs restricted to level `N`. Both specs must have top level `N`.
#[allow(clippy::too_many_arguments)]
pub fn propinquity_chain_bound(
    member: &LipSpec,
    limit: &LipSpec,
    fusing: &[usize],
    n: usize,
    k: usize,
    sphere_samples: usize,
    seed: u64,
) -> Result<ChainBound> {
    let c_n = *fusing.get(n).ok_or_else(|| Error::Config(format!("fusing sequence does not reach level {n}")))?;
    if k < c_n {
        return Err(Error::Hypothesis(format!("member {k} is below the fusing index c_{n} = {c_n}")));
    }
    let dominator = match (member.beta().dominator(), limit.beta().dominator()) {
        (Some(dm), Some(dl)) => {
            if dm != dl {
                return Err(Error::Hypothesis("member and limit use different dominators".into()));
            }
            dl.get(n).cloned().ok_or_else(|| Error::Config(format!("dominator does not reach level {n}")))?
        }
        _ => return Err(Error::Config("the chain bound needs a dominator B".into())),
    };
    let upto = (n + 1).min(member.beta().len()).min(limit.beta().len());
    if member.beta().beta()[..upto] != limit.beta().beta()[..upto] {
        return Err(Error::Hypothesis(format!("beta sequences differ below level {upto}")));
    }
    if member.depth() != n || limit.depth() != n {
        return Err(Error::Config(format!("both specs must have top level {n}")));
    }
    let weight_distance = match (member.trace(), limit.trace()) {
        (Some(a), Some(b)) => weight_distance(a, b)?,
        _ => return Err(Error::Config("the chain bound needs traces on both specs".into())),
    };
    let bridge = if n == 0 { None } else { Some(rescaling_bridge_bound(member, limit, n, sphere_samples, seed)?) };
    let truncation_term = &dominator * BigRational::from_integer(BigInt::from(2));
    let bound = truncation_term.to_f64().unwrap_or(f64::NAN) + bridge.as_ref().map_or(0.0, |b| b.bound);
    Ok(ChainBound { level: n, member: k, fusing_index: c_n, dominator, truncation_term, bridge, weight_distance, bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_family_chain() {
        let fam = EffrosShenFamily::golden_perturbation(12, 40);
        let c = fam.fusing(4).unwrap();
        for (n, &cn) in c.iter().enumerate() {
            assert!(cn <= n + 1);
        }
        let b = fam.chain_bound(3, 6, 30, 1).unwrap();
        assert_eq!(b.dominator, BigRational::new(1.into(), 13.into()));
        assert_eq!(b.truncation_term, BigRational::new(2.into(), 13.into()));
        let eps = b.bridge.as_ref().unwrap().bound;
        assert_eq!(b.bound, 2.0 / 13.0 + eps);
        assert!(b.bridge.unwrap().verified);
        assert!(matches!(fam.chain_bound(3, 0, 5, 1), Err(Error::Hypothesis(_))));
        let b0 = fam.chain_bound(0, 0, 5, 1).unwrap();
        assert_eq!(b0.bound, 2.0);
        assert!(b0.bridge.is_none());
    }

    #[test]
    fn member_equal_to_limit_has_no_bridge_term() {
        let cf = ContinuedFraction::golden(40);
        let fam = EffrosShenFamily::new(cf.clone(), vec![cf]).unwrap();
        let b = fam.chain_bound(3, 0, 10, 1).unwrap();
        assert_eq!(b.bound, 2.0 / 13.0);
        assert_eq!(b.weight_distance, 0.0);
    }

    #[test]
    fn missing_dominator_is_a_config_error() {
        let cf = ContinuedFraction::golden(40);
        let spec = EffrosShenFamily::spec(&cf, 2).unwrap();
        let bare = LipSpec::cond_exp(spec.tower().clone(), spec.trace().unwrap().clone(), WeightSequence::inverse_dimension(spec.tower()))
            .unwrap();
        assert!(matches!(propinquity_chain_bound(&bare, &spec, &[0, 0, 0], 2, 0, 5, 1), Err(Error::Config(_))));
    }
}
