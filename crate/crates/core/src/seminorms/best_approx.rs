//! Operator-norm distance from a self-adjoint element to the image of a
//! lower tower level.
//!
//! The distance is the optimum of the semidefinite program
//! `min s` subject to `s·1 ± (x − b) ⪰ 0` blockwise over self-adjoint `b` in
//! the image, solved by the barrier method. The upper bound is the norm at
//! the best feasible point found; the lower bound comes from a trace-class
//! element `Y` orthogonal to the image: `|Tr(Y x)| / ‖Y‖₁ ≤ ‖x − b‖` for all
//! such `b`.

use crate::algebra::eigen::jacobi_hermitian;
use crate::algebra::{AlgebraShape, BlockElement, CMatrix, MatrixUnit, C64};
use crate::error::{Error, Result};
use crate::optim::barrier::{self, BarrierOptions, Lmi, SdpProblem, SparseHerm};
use crate::states::CondExp;
use crate::towers::LevelImage;

/// Relative gap above which a result is flagged unconverged.
pub const TARGET_REL_GAP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct QuotientValue {
    /// `‖x − witness‖`, an upper bound on the distance.
    pub value: f64,
    /// Certified lower bound on the distance.
    pub lower: f64,
    pub witness: BlockElement,
    pub rel_gap: f64,
    pub converged: bool,
    pub method: &'static str,
}

/// Real basis of the self-adjoint part of a level image, with each element
/// split by top-level block.
#[derive(Debug, Clone)]
pub(crate) struct SaBasis {
    /// `parts[i][j]`: entries of basis element `i` inside top block `j`.
    parts: Vec<Vec<SparseHerm>>,
}

impl SaBasis {
    pub(crate) fn new(image: &LevelImage) -> Self {
        let blocks = image.target.num_blocks();
        let mut parts = Vec::new();
        let split = |entries: Vec<(MatrixUnit, C64)>| {
            let mut per_block = vec![SparseHerm::default(); blocks];
            for (p, v) in entries {
                per_block[p.block].entries.push((p.row, p.col, v));
            }
            per_block
        };
        for (idx, u) in image.units.iter().enumerate() {
            if u.row == u.col {
                let e = image.positions[idx].iter().map(|&p| (p, C64::new(1.0, 0.0))).collect();
                parts.push(split(e));
            } else if u.row < u.col {
                let adj = image.unit_index(u.adjoint());
                let fwd = &image.positions[idx];
                let bwd = &image.positions[adj];
                let re = fwd.iter().map(|&p| (p, C64::new(1.0, 0.0))).chain(bwd.iter().map(|&p| (p, C64::new(1.0, 0.0))));
                parts.push(split(re.collect()));
                let im = fwd.iter().map(|&p| (p, C64::new(0.0, 1.0))).chain(bwd.iter().map(|&p| (p, C64::new(0.0, -1.0))));
                parts.push(split(im.collect()));
            }
        }
        SaBasis { parts }
    }

    pub(crate) fn len(&self) -> usize {
        self.parts.len()
    }

    pub(crate) fn part(&self, i: usize, block: usize) -> &SparseHerm {
        &self.parts[i][block]
    }

    /// Basis element `i` as a dense element of `shape`.
    pub(crate) fn element(&self, i: usize, shape: &AlgebraShape) -> BlockElement {
        let mut y = vec![0.0; self.len()];
        y[i] = 1.0;
        let mut x = BlockElement::zeros(shape);
        self.accumulate(&mut x, &y);
        x
    }

    /// `Σ y_i B_i` added onto `base`.
    pub(crate) fn accumulate(&self, base: &mut BlockElement, y: &[f64]) {
        for (parts, &yi) in self.parts.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            for (j, part) in parts.iter().enumerate() {
                for &(r, c, v) in &part.entries {
                    base.block_mut(j)[(r, c)] += v * yi;
                }
            }
        }
    }
}

/// Spread `(λ_max − λ_min)/2` over all blocks, attained at the midpoint.
fn scalar_distance(x: &BlockElement) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for b in x.blocks() {
        let v = jacobi_hermitian(b, false).values;
        lo = lo.min(v[0]);
        hi = hi.max(*v.last().expect("nonempty block"));
    }
    ((hi - lo) / 2.0, (hi + lo) / 2.0)
}

fn finish(x: &BlockElement, candidates: Vec<BlockElement>, lower: f64, method: &'static str) -> Result<QuotientValue> {
    let mut best: Option<(f64, BlockElement)> = None;
    for c in candidates {
        let v = x.sub(&c)?.op_norm();
        if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
            best = Some((v, c));
        }
    }
    let (value, witness) = best.expect("at least one candidate");
    let lower = lower.min(value).max(0.0);
    let floor = 1e-12 * (1.0 + x.op_norm());
    let rel_gap = (value - lower) / value.max(floor);
    Ok(QuotientValue { value, lower, witness, rel_gap, converged: rel_gap <= TARGET_REL_GAP, method })
}

/// Distance from self-adjoint `x` to the self-adjoint part of the image of
/// `canonical`. `extra` lists further feasible witnesses to try.
pub(crate) fn best_approximation(
    canonical: &CondExp,
    basis: &SaBasis,
    x: &BlockElement,
    extra: &[BlockElement],
) -> Result<QuotientValue> {
    let image = canonical.image();
    let e_can = canonical.apply(x)?.self_adjoint_part();
    let residual = x.sub(&e_can)?;
    let r_norm = residual.op_norm();
    let base_lower = r_norm / 2.0;
    let mut candidates = vec![e_can.clone(), BlockElement::zeros(x.shape())];
    candidates.extend(extra.iter().cloned());

    if r_norm == 0.0 {
        return finish(x, candidates, 0.0, "exact");
    }
    if image.source.num_blocks() == 1 && image.source.block(0) == 1 {
        let (d, mid) = scalar_distance(x);
        candidates.push(BlockElement::scalar(x.shape(), C64::new(mid, 0.0)));
        return finish(x, candidates, d, "closed-form");
    }
    if x.shape().is_commutative() {
        return commutative_distance(image, x, candidates);
    }

    // Scaled problem: x − e_can = r_norm · x', witness e_can + r_norm Σ y B.
    let xs = residual.scale_re(1.0 / r_norm);
    let k = basis.len() + 1;
    let mut lmis = Vec::with_capacity(2 * x.shape().num_blocks());
    for (j, xb) in xs.blocks().iter().enumerate() {
        for sign in [1.0, -1.0] {
            let mut fi = Vec::with_capacity(k);
            fi.push(SparseHerm::identity(xb.dim()));
            for i in 0..basis.len() {
                fi.push(basis.part(i, j).scaled(sign));
            }
            lmis.push(Lmi { f0: xb.scale_re(-sign), fi });
        }
    }
    let mut c = vec![0.0; k];
    c[0] = 1.0;
    let problem = SdpProblem { c, lmis };
    let total_dim: f64 = problem.lmis.iter().map(|l| l.f0.dim() as f64).sum();
    let mut z0 = vec![0.0; k];
    z0[0] = 1.5;
    let opts = BarrierOptions { t0: total_dim, mu: 16.0, gap_tol: 1e-9, max_newton: 400 };
    let solved = barrier::solve(&problem, z0, opts).map_err(|e| Error::Solver(format!("quotient solver: {e}")))?;

    let mut witness = e_can.clone();
    let y: Vec<f64> = solved.z[1..].iter().map(|v| v * r_norm).collect();
    basis.accumulate(&mut witness, &y);
    candidates.push(witness.self_adjoint_part());

    let mut lower = base_lower;
    for duals in solved.stage_duals.iter().chain(std::iter::once(&solved.duals)) {
        lower = lower.max(dual_bound(canonical, &residual, duals)?);
    }
    finish(x, candidates, lower, "barrier")
}

/// `|Tr(Y r)| / ‖Y‖₁` for `Y = P⊥(Z₊ − Z₋)`, where `P⊥` removes the
/// Frobenius-orthogonal projection onto the image. Valid for any duals.
fn dual_bound(canonical: &CondExp, residual: &BlockElement, duals: &[CMatrix]) -> Result<f64> {
    let blocks: Vec<CMatrix> = (0..residual.shape().num_blocks()).map(|j| duals[2 * j].sub(&duals[2 * j + 1])).collect();
    let y_raw = BlockElement::new(residual.shape().clone(), blocks)?.self_adjoint_part();
    let y_perp = y_raw.sub(&canonical.apply(&y_raw)?.self_adjoint_part())?;
    let y_norm = y_perp.trace_norm_hermitian();
    Ok(if y_norm > 0.0 { y_perp.trace_pairing_re(residual)?.abs() / y_norm } else { 0.0 })
}

/// Commutative top level: the image consists of functions constant on the
/// fibers of the level map, so the distance is the largest half-range.
fn commutative_distance(image: &LevelImage, x: &BlockElement, mut candidates: Vec<BlockElement>) -> Result<QuotientValue> {
    let mut witness = BlockElement::zeros(x.shape());
    let mut d: f64 = 0.0;
    for ps in &image.positions {
        if ps.is_empty() || ps[0].row != ps[0].col {
            continue;
        }
        let vals: Vec<f64> = ps.iter().map(|p| x.block(p.block)[(0, 0)].re).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        d = d.max((hi - lo) / 2.0);
        for p in ps {
            witness.block_mut(p.block)[(0, 0)] = C64::new((hi + lo) / 2.0, 0.0);
        }
    }
    candidates.push(witness);
    finish(x, candidates, d, "closed-form")
}
