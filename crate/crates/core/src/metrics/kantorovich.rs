//! `mk_L(φ, ψ) = sup{|φ(a) − ψ(a)| : L(a) ≤ 1}` between tracial states.

use crate::algebra::{BlockElement, CMatrix};
use crate::error::{Error, Result};
use crate::optim::barrier::{self, BarrierOptions, Lmi, SdpProblem, SparseHerm};
use crate::optim::simplex;
use crate::seminorms::best_approx::SaBasis;
use crate::seminorms::{lip, sample_lip_ball, LipKind, LipSpec};
use crate::states::{eval_trace, TraceWeights};

fn check_states(spec: &LipSpec, phi: &TraceWeights, psi: &TraceWeights) -> Result<Vec<f64>> {
    let top = spec.tower().top();
    if phi.shape() != top || psi.shape() != top {
        return Err(Error::Shape("states must live on the top level".into()));
    }
    Ok(phi.lambda().iter().zip(psi.lambda()).map(|(a, b)| a - b).collect())
}

/// Exact value on a commutative top level by the simplex method, with
/// `a = u − v`, `u, v ≥ 0`.
pub fn kantorovich_commutative_exact(spec: &LipSpec, phi: &TraceWeights, psi: &TraceWeights) -> Result<f64> {
    let top = spec.tower().top().clone();
    if !top.is_commutative() {
        return Err(Error::Domain("top level is not commutative; use kantorovich_lower_bound".into()));
    }
    let f = check_states(spec, phi, psi)?;
    if f.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let d = top.num_blocks();
    let n = spec.depth();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs = Vec::new();
    let split = |row: &[f64]| -> Vec<f64> { row.iter().copied().chain(row.iter().map(|v| -v)).collect() };
    for m in 0..n {
        let beta = spec.beta().at(m);
        match spec.kind() {
            LipKind::CondExp => {
                // r[i][j] = (I − P_m)_{ij}, column j from E_m(δ_j).
                let e = spec.expectation(m)?;
                let mut r = vec![vec![0.0; d]; d];
                for j in 0..d {
                    let mut vals = vec![vec![0.0]; d];
                    vals[j][0] = 1.0;
                    let ej = e.apply(&BlockElement::diagonal(&top, &vals)?)?;
                    for (i, row) in r.iter_mut().enumerate() {
                        row[j] = f64::from(u8::from(i == j)) - ej.block(i)[(0, 0)].re;
                    }
                }
                for row in &r {
                    for s in [1.0, -1.0] {
                        let signed: Vec<f64> = row.iter().map(|v| s * v).collect();
                        rows.push(split(&signed));
                        rhs.push(beta);
                    }
                }
            }
            LipKind::Quotient => {
                // Half-range of every level-m fiber at most β(m).
                let image = spec.tower().level_image(m, n)?;
                for (u, ps) in image.units.iter().zip(&image.positions) {
                    if u.row != u.col {
                        continue;
                    }
                    for p in ps {
                        for q in ps {
                            if p.block != q.block {
                                let mut row = vec![0.0; d];
                                row[p.block] = 1.0;
                                row[q.block] = -1.0;
                                rows.push(split(&row));
                                rhs.push(2.0 * beta);
                            }
                        }
                    }
                }
            }
        }
    }
    let c = split(&f);
    Ok(simplex::maximize(&c, &rows, &rhs)?.value.max(0.0))
}

/// `2β(0)`: the level-0 term gives `‖a − τ(a)1‖ ≤ β(0)` on the Lip ball.
pub fn diameter_upper_bound(spec: &LipSpec) -> f64 {
    2.0 * spec.beta().at(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KantorovichEstimate {
    /// Best feasible value found: `max(sampled, refined)`.
    pub value: f64,
    pub sampled: f64,
    /// Value of the rescaled interior-point maximizer, when the solver ran.
    pub refined: Option<f64>,
    pub converged: bool,
}

fn dense_to_sparse(m: &CMatrix) -> SparseHerm {
    let n = m.dim();
    let mut entries = Vec::new();
    for r in 0..n {
        for c in 0..n {
            let v = m[(r, c)];
            if v.norm() > 0.0 {
                entries.push((r, c, v));
            }
        }
    }
    SparseHerm { entries }
}

/// Lower bound from feasible points: the best Lip-ball sample, then an
/// interior-point maximizer of `φ − ψ` over `{L ≤ 1}` rescaled by
/// `1/max(1, L)` so that it stays feasible.
pub fn kantorovich_lower_bound(
    spec: &LipSpec,
    phi: &TraceWeights,
    psi: &TraceWeights,
    n_samples: usize,
    seed: u64,
) -> Result<KantorovichEstimate> {
    let f = check_states(spec, phi, psi)?;
    if f.iter().all(|&v| v == 0.0) {
        return Ok(KantorovichEstimate { value: 0.0, sampled: 0.0, refined: Some(0.0), converged: true });
    }
    let gap = |a: &BlockElement| -> Result<f64> { Ok((eval_trace(phi, a)? - eval_trace(psi, a)?).re.abs()) };
    let mut sampled: f64 = 0.0;
    for a in sample_lip_ball(spec, n_samples, seed)? {
        sampled = sampled.max(gap(&a)?);
    }
    let (refined, converged) = match refine(spec, phi, psi)? {
        Some((a, converged)) => {
            let l = lip(spec, &a)?.upper;
            (Some(gap(&a.scale_re(1.0 / l.max(1.0)))?), converged)
        }
        None => (None, false),
    };
    Ok(KantorovichEstimate { value: sampled.max(refined.unwrap_or(0.0)), sampled, refined, converged })
}

/// Maximizes `(φ − ψ)(a)` subject to `β(m)1 ± (a − E_m a) ⪰ 0` (cond-exp)
/// or `β(m)1 ± (a − b_m) ⪰ 0` with `b_m` in the level-`m` image (quotient).
/// The scalar direction is removed by fixing the first diagonal coordinate.
fn refine(spec: &LipSpec, phi: &TraceWeights, psi: &TraceWeights) -> Result<Option<(BlockElement, bool)>> {
    let n = spec.depth();
    let top = spec.tower().top().clone();
    let top_basis = SaBasis::new(&spec.tower().level_image(n, n)?);
    let elems: Vec<BlockElement> = (1..top_basis.len()).map(|i| top_basis.element(i, &top)).collect();
    let na = elems.len();
    if na == 0 {
        return Ok(None);
    }
    let mut c = Vec::with_capacity(na);
    for b in &elems {
        c.push(-(eval_trace(phi, b)? - eval_trace(psi, b)?).re);
    }
    let lower_bases: Vec<SaBasis> = match spec.kind() {
        LipKind::CondExp => Vec::new(),
        LipKind::Quotient => (0..n).map(|m| spec.tower().level_image(m, n).map(|im| SaBasis::new(&im))).collect::<Result<_>>()?,
    };
    let extra: usize = lower_bases.iter().map(SaBasis::len).sum();
    let k = na + extra;
    c.resize(k, 0.0);

    let mut lmis = Vec::new();
    let mut offset = na;
    for m in 0..n {
        let beta = spec.beta().at(m);
        let directions: Vec<BlockElement> = match spec.kind() {
            LipKind::CondExp => {
                let e = spec.expectation(m)?;
                elems.iter().map(|b| e.residual(b).map(|r| r.self_adjoint_part())).collect::<Result<_>>()?
            }
            LipKind::Quotient => elems.clone(),
        };
        for j in 0..top.num_blocks() {
            let dim = top.block(j);
            for sign in [1.0, -1.0] {
                let mut fi = vec![SparseHerm::default(); k];
                for (i, dir) in directions.iter().enumerate() {
                    fi[i] = dense_to_sparse(&dir.block(j).scale_re(sign));
                }
                if let Some(basis) = lower_bases.get(m) {
                    for i in 0..basis.len() {
                        fi[offset + i] = basis.part(i, j).scaled(-sign);
                    }
                }
                lmis.push(Lmi { f0: CMatrix::identity(dim).scale_re(beta), fi });
            }
        }
        if let Some(basis) = lower_bases.get(m) {
            offset += basis.len();
        }
    }
    let problem = SdpProblem { c, lmis };
    let opts = BarrierOptions { t0: 1.0, mu: 16.0, gap_tol: 1e-9, max_newton: 600 };
    let Ok(solved) = barrier::solve(&problem, vec![0.0; k], opts) else {
        return Ok(None);
    };
    let mut a = BlockElement::zeros(&top);
    for (b, &z) in elems.iter().zip(&solved.z) {
        a.add_scaled(b, crate::algebra::C64::new(z, 0.0))?;
    }
    Ok(Some((a.self_adjoint_part(), solved.converged)))
}
