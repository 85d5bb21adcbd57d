//! Seeded generators for towers, traces and elements.
//!
//! Every sampler draws from a `ChaCha8Rng` seeded explicitly, so results
//! depend only on the seed and call order.

use crate::algebra::AlgebraShape;
use crate::states::TraceWeights;
use crate::towers::Tower;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for sub-task `index` of a run.
pub fn substream(seed: u64, index: u64) -> SeededRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index.wrapping_add(1));
    r
}

/// Random tower with `1..=max_depth` steps, at most three blocks per level
/// and every block of size at most `max_block`.
pub fn random_tower<R: Rng + ?Sized>(rng: &mut R, max_block: usize, max_depth: usize) -> Tower {
    let depth = rng.random_range(1..=max_depth.max(1));
    let mut levels = vec![AlgebraShape::scalars()];
    let mut mults = Vec::with_capacity(depth);
    for _ in 0..depth {
        let prev = levels.last().expect("nonempty").clone();
        let (shape, mult) = random_step(rng, &prev, max_block);
        levels.push(shape);
        mults.push(mult);
    }
    Tower::new(levels, mults, "random").expect("generated steps are unital and injective")
}

fn random_step<R: Rng + ?Sized>(rng: &mut R, prev: &AlgebraShape, max_block: usize) -> (AlgebraShape, Vec<Vec<usize>>) {
    let n_in = prev.num_blocks();
    for _ in 0..1000 {
        let n_out = rng.random_range(1..=3);
        let mult: Vec<Vec<usize>> = (0..n_out).map(|_| (0..n_in).map(|_| rng.random_range(0..=2)).collect()).collect();
        let dims: Vec<usize> = mult.iter().map(|row| row.iter().zip(prev.dims()).map(|(m, n)| m * n).sum()).collect();
        let injective = (0..n_in).all(|i| mult.iter().any(|row| row[i] > 0));
        if injective && dims.iter().all(|&d| (1..=max_block).contains(&d)) {
            return (AlgebraShape::new(dims).expect("positive dims"), mult);
        }
    }
    let id = (0..n_in).map(|j| (0..n_in).map(|i| usize::from(i == j)).collect()).collect();
    (prev.clone(), id)
}

/// Random tower whose levels are all commutative (blocks of size 1), with
/// at most `max_top` blocks on every level.
pub fn random_commutative_tower<R: Rng + ?Sized>(rng: &mut R, max_top: usize, max_depth: usize) -> Tower {
    let depth = rng.random_range(1..=max_depth.max(1));
    let mut counts = vec![1usize];
    let mut mults = Vec::with_capacity(depth);
    for _ in 0..depth {
        let n_in = *counts.last().expect("nonempty");
        let n_out = rng.random_range(n_in..=max_top.max(n_in));
        // Each output point has one parent; the first n_in cover every input.
        let mut parents: Vec<usize> = (0..n_in).collect();
        parents.extend((n_in..n_out).map(|_| rng.random_range(0..n_in)));
        for i in (1..parents.len()).rev() {
            let j = rng.random_range(0..=i);
            parents.swap(i, j);
        }
        mults.push(parents.iter().map(|&p| (0..n_in).map(|i| usize::from(i == p)).collect()).collect());
        counts.push(n_out);
    }
    let levels = counts.iter().map(|&c| AlgebraShape::new(vec![1; c]).expect("positive dims")).collect();
    Tower::new(levels, mults, "random-commutative").expect("one parent per point is unital and injective")
}

/// Probability vector on the blocks of `shape`; entries may be zero.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, shape: &AlgebraShape) -> TraceWeights {
    let raw: Vec<f64> = (0..shape.num_blocks()).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..1.0) }).collect();
    let total: f64 = raw.iter().sum();
    if total == 0.0 {
        let mut lambda = vec![0.0; raw.len()];
        lambda[0] = 1.0;
        return TraceWeights::new(shape.clone(), lambda).expect("point mass");
    }
    let mut lambda: Vec<f64> = raw.iter().map(|v| v / total).collect();
    let head: f64 = lambda[..lambda.len() - 1].iter().sum();
    *lambda.last_mut().expect("nonempty") = (1.0 - head).max(0.0);
    TraceWeights::new(shape.clone(), lambda).expect("normalized weights")
}

/// Faithful weights with every entry at least a tenth of the largest.
pub fn random_faithful_weights<R: Rng + ?Sized>(rng: &mut R, shape: &AlgebraShape) -> TraceWeights {
    let raw: Vec<f64> = (0..shape.num_blocks()).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut lambda: Vec<f64> = raw.iter().map(|v| v / total).collect();
    // Put the rounding error on the last weight.
    let head: f64 = lambda[..lambda.len() - 1].iter().sum();
    *lambda.last_mut().expect("nonempty") = 1.0 - head;
    TraceWeights::new(shape.clone(), lambda).expect("normalized weights")
}

/// Partial quotients `(0, a_1, …, a_len)` with `a_j ∈ 1..=max_quotient`.
pub fn random_quotients<R: Rng + ?Sized>(rng: &mut R, len: usize, max_quotient: u64) -> Vec<u64> {
    std::iter::once(0).chain((0..len).map(|_| rng.random_range(1..=max_quotient))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn towers_respect_bounds() {
        let mut r = rng(3);
        for _ in 0..50 {
            let t = random_tower(&mut r, 4, 4);
            assert!(t.depth() >= 1 && t.depth() <= 4);
            assert!(t.levels().iter().all(|s| s.dims().iter().all(|&d| d <= 4)));
        }
    }

    #[test]
    fn same_seed_same_draws() {
        let a = random_tower(&mut rng(11), 4, 4);
        let b = random_tower(&mut rng(11), 4, 4);
        assert_eq!(a, b);
        let mut s1 = substream(5, 0);
        let mut s2 = substream(5, 1);
        assert_ne!(s1.random::<u64>(), s2.random::<u64>());
    }
}
