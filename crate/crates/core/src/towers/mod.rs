//! Truncated Bratteli towers, continued fractions and fusing families.

pub mod cf;
pub mod embedding;
pub mod tower;

pub use cf::{cf_expand, dimension_weight, golden_dominator, ContinuedFraction};
pub use embedding::MultiplicityEmbedding;
pub use tower::{LevelImage, Tower};

use crate::error::{Error, Result};

/// Outcome of comparing two finite prefixes in the Baire metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaireDistance {
    /// `2^(-i)` for the first index `i` of disagreement, or 0 for equal
    /// sequences of equal length.
    Distance(f64),
    /// The shorter sequence is a prefix of the longer one: the distance is
    /// at most `2^(-depth)` and cannot be decided from this data.
    IndistinguishableAtDepth(usize),
}

pub fn baire_distance(x: &[u64], y: &[u64]) -> Result<BaireDistance> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Domain("Baire distance needs nonempty sequences".into()));
    }
    match x.iter().zip(y).position(|(a, b)| a != b) {
        Some(i) => Ok(BaireDistance::Distance(0.5f64.powi(i32::try_from(i).unwrap_or(i32::MAX)))),
        None if x.len() == y.len() => Ok(BaireDistance::Distance(0.0)),
        None => Ok(BaireDistance::IndistinguishableAtDepth(x.len().min(y.len()))),
    }
}

/// Fusing sequence `(c_0, …, c_depth)`: `c_N` is the least `k₀` such that
/// every member `k ≥ k₀` agrees with `limit` up to level `N`. The horizon
/// is the last member index.
pub fn fusing_sequence(members: &[Tower], limit: &Tower, depth: usize) -> Result<Vec<usize>> {
    if members.is_empty() {
        return Err(Error::Domain("a family needs at least one member".into()));
    }
    if limit.depth() < depth {
        return Err(Error::Depth { needed: depth, available: limit.depth() });
    }
    let horizon = members.len() - 1;
    (0..=depth)
        .map(|n| {
            // Least k0 such that all members from k0 on agree.
            let mut k0 = members.len();
            while k0 > 0 && members[k0 - 1].agrees_up_to(limit, n) {
                k0 -= 1;
            }
            if k0 > horizon {
                Err(Error::NotFusing { depth: n, horizon })
            } else {
                Ok(k0)
            }
        })
        .collect()
}
