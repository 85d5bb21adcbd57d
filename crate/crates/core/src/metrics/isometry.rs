//! Verification that a block-permutation map between two towers is a
//! quantum isometry of their top levels.

use super::{spec_fingerprint, witness, BoundLabel, Check, MetricCertificate};
use crate::algebra::{AlgebraShape, BlockElement, CMatrix, C64};
use crate::error::{Error, Result};
use crate::random;
use crate::seminorms::{lip, LipKind, LipSpec};
use crate::states::TraceWeights;
use crate::towers::Tower;

const UNITARY_TOL: f64 = 1e-12;
const MEMBERSHIP_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const LIP_TOL: f64 = 1e-8;

/// Block `i` of level `n` of the source goes to block `level_perms[n][i]`
/// of the target; top block `j` is conjugated by `top_unitaries[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryMap {
    pub level_perms: Vec<Vec<usize>>,
    pub top_unitaries: Option<Vec<CMatrix>>,
}

impl IsometryMap {
    pub fn identity(tower: &Tower) -> Self {
        IsometryMap { level_perms: tower.levels().iter().map(|s| (0..s.num_blocks()).collect()).collect(), top_unitaries: None }
    }

    fn top_perm(&self) -> &[usize] {
        self.level_perms.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// `φ(a)` for `a` on the source top level.
    pub fn apply(&self, a: &BlockElement, target: &AlgebraShape) -> Result<BlockElement> {
        let perm = self.top_perm();
        if perm.len() != a.shape().num_blocks() || target.num_blocks() != perm.len() {
            return Err(Error::Shape("map and element have different block counts".into()));
        }
        let mut blocks = vec![CMatrix::zeros(0); perm.len()];
        for (j, &t) in perm.iter().enumerate() {
            let b = a.block(j);
            blocks[t] = match &self.top_unitaries {
                Some(us) => us[j].matmul(b).matmul(&us[j].adjoint()),
                None => b.clone(),
            };
        }
        BlockElement::new(target.clone(), blocks)
    }

    /// Weights `ν` with `ν ∘ φ = μ`.
    pub fn push_trace(&self, w: &TraceWeights, target: &AlgebraShape) -> Result<TraceWeights> {
        let perm = self.top_perm();
        if perm.len() != w.lambda().len() {
            return Err(Error::Shape("map and trace have different block counts".into()));
        }
        let mut lambda = vec![0.0; perm.len()];
        for (j, &t) in perm.iter().enumerate() {
            lambda[t] = w.lambda()[j];
        }
        TraceWeights::new(target.clone(), lambda)
    }
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&i| i < p.len() && !std::mem::replace(&mut seen[i], true))
}

/// Shapes and step matrices of `v` must be those of `u` relabeled.
fn check_structure(map: &IsometryMap, u: &Tower, v: &Tower) -> Result<()> {
    if u.depth() != v.depth() {
        return Err(Error::Structural(format!("depths differ: {} vs {}", u.depth(), v.depth())));
    }
    if map.level_perms.len() != u.depth() + 1 {
        return Err(Error::Structural(format!("{} level permutations for {} levels", map.level_perms.len(), u.depth() + 1)));
    }
    for (n, p) in map.level_perms.iter().enumerate() {
        let (su, sv) = (&u.levels()[n], &v.levels()[n]);
        if p.len() != su.num_blocks() || sv.num_blocks() != su.num_blocks() || !is_permutation(p) {
            return Err(Error::Structural(format!("level {n}: {p:?} is not a permutation of {} blocks", su.num_blocks())));
        }
        for (i, &t) in p.iter().enumerate() {
            if sv.block(t) != su.block(i) {
                return Err(Error::Structural(format!("level {n}: block {i} has size {} but its image {t} has size {}", su.block(i), sv.block(t))));
            }
        }
    }
    for (n, (su, sv)) in u.steps().iter().zip(v.steps()).enumerate() {
        let (pin, pout) = (&map.level_perms[n], &map.level_perms[n + 1]);
        for (j, row) in su.mult().iter().enumerate() {
            for (i, &m) in row.iter().enumerate() {
                if sv.mult()[pout[j]][pin[i]] != m {
                    return Err(Error::Structural(format!("step {n}: multiplicity ({j},{i}) = {m} is not carried to ({},{})", pout[j], pin[i])));
                }
            }
        }
    }
    if let Some(us) = &map.top_unitaries {
        let top = u.top();
        if us.len() != top.num_blocks() {
            return Err(Error::Structural(format!("{} unitaries for {} top blocks", us.len(), top.num_blocks())));
        }
        for (j, w) in us.iter().enumerate() {
            if w.dim() != top.block(j) {
                return Err(Error::Structural(format!("unitary {j} has size {} for a block of size {}", w.dim(), top.block(j))));
            }
            let defect = w.adjoint().matmul(w).sub(&CMatrix::identity(w.dim())).max_abs();
            if !(defect <= UNITARY_TOL) {
                return Err(Error::Structural(format!("matrix {j} is not unitary (defect {defect:e})")));
            }
        }
    }
    Ok(())
}

/// Checks `φ(A_n) = B_n` for every level, `μ = ν∘φ` (cond-exp kind),
/// equal β, then samples `|L_V(φ a) − L_U(a)|`. Lip samples are skipped
/// once an earlier check fails.
pub fn verify_quantum_isometry(
    map: &IsometryMap,
    spec_u: &LipSpec,
    spec_v: &LipSpec,
    n_samples: usize,
    seed: u64,
) -> Result<MetricCertificate> {
    if spec_u.kind() != spec_v.kind() {
        return Err(Error::Config("specs have different kinds".into()));
    }
    let (u, v) = (spec_u.tower(), spec_v.tower());
    check_structure(map, u, v)?;
    let top_u = u.top().clone();
    let top_v = v.top().clone();
    let n = u.depth();
    let mut checks = Vec::new();

    let mut worst_membership: f64 = 0.0;
    for m in 0..n {
        let (iu, iv) = (u.level_image(m, n)?, v.level_image(m, n)?);
        for ps in &iu.positions {
            let mut x = BlockElement::zeros(&top_u);
            for p in ps {
                x.block_mut(p.block)[(p.row, p.col)] = C64::new(1.0, 0.0);
            }
            worst_membership = worst_membership.max(iv.membership_defect(&map.apply(&x, &top_v)?));
        }
    }
    checks.push(Check {
        name: "intertwining".into(),
        passed: worst_membership <= MEMBERSHIP_TOL,
        detail: format!("largest defect of phi(A_m) in B_m: {worst_membership:e}"),
    });

    match (spec_u.kind(), spec_u.trace(), spec_v.trace()) {
        (LipKind::CondExp, Some(wu), Some(wv)) => {
            let pushed = map.push_trace(wu, &top_v)?;
            let dev = pushed.lambda().iter().zip(wv.lambda()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            checks.push(Check { name: "trace".into(), passed: dev <= TRACE_TOL, detail: format!("max |mu - nu o phi| weight deviation {dev:e}") });
        }
        (LipKind::CondExp, _, _) => return Err(Error::Config("cond-exp specs need traces".into())),
        (LipKind::Quotient, _, _) => checks.push(Check { name: "trace".into(), passed: true, detail: "quotient kind is trace-free".into() }),
    }
    let beta_equal = spec_u.beta().beta()[..n] == spec_v.beta().beta()[..n];
    checks.push(Check { name: "beta".into(), passed: beta_equal, detail: "identical beta below the top level".into() });

    let mut witnesses = Vec::new();
    if checks.iter().all(|c| c.passed) {
        let mut rng = random::rng(seed);
        for i in 0..n_samples {
            let a = BlockElement::random_self_adjoint(&top_u, &mut rng);
            let lu = lip(spec_u, &a)?;
            let lv = lip(spec_v, &map.apply(&a, &top_v)?)?;
            // Gap between the enclosing intervals; |L_V − L_U| when both are exact.
            let dev = (lv.lower - lu.upper).max(lu.lower - lv.upper).max(0.0);
            witnesses.push(witness(i, "|L_V(phi a) - L_U(a)| <= 0", dev, 0.0));
        }
    }
    let inputs = format!("isometry;u:{};v:{};map:{:?};n={n_samples}", spec_fingerprint(spec_u), spec_fingerprint(spec_v), map);
    Ok(MetricCertificate::assemble("isometry", BoundLabel::Certified, 0.0, Some("0".into()), seed, LIP_TOL, &inputs, checks, witnesses))
}

/// Relabels the blocks of every level of `tower` by `level_perms` and
/// returns the relabeled tower with the isomorphism onto it. The top
/// unitaries are the permutation matrices that carry each Bratteli path of
/// the source to the corresponding path of the target.
pub fn relabel_tower(tower: &Tower, level_perms: &[Vec<usize>]) -> Result<(Tower, IsometryMap)> {
    if level_perms.len() != tower.depth() + 1 {
        return Err(Error::Structural(format!("{} permutations for {} levels", level_perms.len(), tower.depth() + 1)));
    }
    for (n, p) in level_perms.iter().enumerate() {
        if p.len() != tower.levels()[n].num_blocks() || !is_permutation(p) {
            return Err(Error::Structural(format!("level {n}: {p:?} is not a permutation")));
        }
    }
    let mut levels = Vec::with_capacity(tower.depth() + 1);
    for (s, p) in tower.levels().iter().zip(level_perms) {
        let mut dims = vec![0; s.num_blocks()];
        for (i, &t) in p.iter().enumerate() {
            dims[t] = s.block(i);
        }
        levels.push(AlgebraShape::new(dims)?);
    }
    let mut mults = Vec::with_capacity(tower.depth());
    for (n, step) in tower.steps().iter().enumerate() {
        let (pin, pout) = (&level_perms[n], &level_perms[n + 1]);
        let mut m = vec![vec![0; pin.len()]; pout.len()];
        for (j, row) in step.mult().iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                m[pout[j]][pin[i]] = v;
            }
        }
        mults.push(m);
    }
    let target = Tower::new(levels, mults, format!("{} relabeled", tower.label()))?;

    // paths[b][d]: index in target block perm(b) of source diagonal index d.
    let mut paths: Vec<Vec<usize>> = vec![vec![0]];
    for (n, step) in tower.steps().iter().enumerate() {
        let (pin, pout) = (&level_perms[n], &level_perms[n + 1]);
        let src_in = &tower.levels()[n];
        let tgt_in = &target.levels()[n];
        let tgt_mult = target.steps()[n].mult();
        let mut next = Vec::with_capacity(step.mult().len());
        for (j, row) in step.mult().iter().enumerate() {
            let jj = pout[j];
            let mut map_j = Vec::new();
            for (i, &copies) in row.iter().enumerate() {
                let ii = pin[i];
                let offset: usize = (0..ii).map(|k| tgt_mult[jj][k] * tgt_in.block(k)).sum();
                for c in 0..copies {
                    for r in 0..src_in.block(i) {
                        map_j.push(offset + c * src_in.block(i) + paths[i][r]);
                    }
                }
            }
            next.push(map_j);
        }
        paths = next;
    }
    let unitaries = paths
        .iter()
        .map(|p| {
            let mut w = CMatrix::zeros(p.len());
            for (d, &t) in p.iter().enumerate() {
                w[(t, d)] = C64::new(1.0, 0.0);
            }
            w
        })
        .collect();
    Ok((target, IsometryMap { level_perms: level_perms.to_vec(), top_unitaries: Some(unitaries) }))
}
