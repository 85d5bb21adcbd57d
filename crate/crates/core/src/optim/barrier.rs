//! Log-barrier interior-point method for
//!
//! ```text
//! minimize c·z  subject to  F_b(z) = F_b0 + Σ_i z_i F_bi ⪰ 0  for every b,
//! ```
//!
//! with Hermitian `F_bi` stored sparsely. Each outer step centers
//! `t c·z − Σ_b log det F_b(z)` by damped Newton, then raises `t`. After
//! exact centering the duality gap is `Σ_b dim F_b / t`.

use super::solve_spd;
use crate::algebra::matrix::{cholesky, inverse_from_cholesky, log_det_from_cholesky};
use crate::algebra::{CMatrix, C64};
use crate::error::{Error, Result};

/// Hermitian matrix given by its nonzero entries (both triangles).
#[derive(Debug, Clone, Default)]
pub struct SparseHerm {
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseHerm {
    pub fn identity(n: usize) -> Self {
        SparseHerm { entries: (0..n).map(|i| (i, i, C64::new(1.0, 0.0))).collect() }
    }

    pub fn scaled(&self, s: f64) -> Self {
        SparseHerm { entries: self.entries.iter().map(|&(r, c, v)| (r, c, v * s)).collect() }
    }

    fn add_to(&self, m: &mut CMatrix, s: f64) {
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v * s;
        }
    }

    /// `tr(A · self)` for dense `A`.
    fn trace_with(&self, a: &CMatrix) -> C64 {
        self.entries.iter().map(|&(r, c, v)| v * a[(c, r)]).sum()
    }
}

/// One linear matrix inequality `F0 + Σ z_i F_i ⪰ 0`.
#[derive(Debug, Clone)]
pub struct Lmi {
    pub f0: CMatrix,
    /// One entry per variable; empty when the variable does not appear.
    pub fi: Vec<SparseHerm>,
}

impl Lmi {
    pub fn eval(&self, z: &[f64]) -> CMatrix {
        let mut m = self.f0.clone();
        for (f, &zi) in self.fi.iter().zip(z) {
            if zi != 0.0 {
                f.add_to(&mut m, zi);
            }
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub c: Vec<f64>,
    pub lmis: Vec<Lmi>,
}

#[derive(Debug, Clone, Copy)]
pub struct BarrierOptions {
    pub t0: f64,
    pub mu: f64,
    /// Stop once `Σ dim F_b / t` falls below this.
    pub gap_tol: f64,
    pub max_newton: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        BarrierOptions { t0: 1.0, mu: 16.0, gap_tol: 1e-10, max_newton: 400 }
    }
}

#[derive(Debug, Clone)]
pub struct BarrierResult {
    pub z: Vec<f64>,
    pub objective: f64,
    /// Dual estimates `F_b(z)^{-1} / t`.
    pub duals: Vec<CMatrix>,
    /// Dual estimates after each completed centering, in order of
    /// increasing `t`. Late stages are closer to optimal but their inverses
    /// are less accurate, so callers may evaluate every stage.
    pub stage_duals: Vec<Vec<CMatrix>>,
    pub gap_bound: f64,
    pub converged: bool,
    pub newton_steps: usize,
}

struct Factored {
    inverses: Vec<CMatrix>,
    log_det: f64,
}

fn factor(p: &SdpProblem, z: &[f64]) -> Option<Factored> {
    let mut inverses = Vec::with_capacity(p.lmis.len());
    let mut log_det = 0.0;
    for lmi in &p.lmis {
        let l = cholesky(&lmi.eval(z))?;
        log_det += log_det_from_cholesky(&l);
        inverses.push(inverse_from_cholesky(&l));
    }
    Some(Factored { inverses, log_det })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gradient and Hessian of `t c·z − Σ log det F_b(z)`.
fn newton_system(p: &SdpProblem, f: &Factored, t: f64) -> (Vec<f64>, Vec<f64>) {
    let k = p.c.len();
    let mut g: Vec<f64> = p.c.iter().map(|ci| t * ci).collect();
    let mut h = vec![0.0; k * k];
    for (lmi, inv) in p.lmis.iter().zip(&f.inverses) {
        let n = inv.dim();
        let active: Vec<usize> = (0..k).filter(|&i| !lmi.fi[i].entries.is_empty()).collect();
        // B_i = F^{-1} F_i F^{-1}
        let mut b_mats = Vec::with_capacity(active.len());
        for &i in &active {
            g[i] -= lmi.fi[i].trace_with(inv).re;
            let mut b = CMatrix::zeros(n);
            for &(r, c, v) in &lmi.fi[i].entries {
                for a in 0..n {
                    let left = inv[(a, r)] * v;
                    if left == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for d in 0..n {
                        b[(a, d)] += left * inv[(c, d)];
                    }
                }
            }
            b_mats.push(b);
        }
        for (ai, &i) in active.iter().enumerate() {
            for &j in &active[ai..] {
                let v = lmi.fi[j].trace_with(&b_mats[ai]).re;
                h[i * k + j] += v;
                if i != j {
                    h[j * k + i] += v;
                }
            }
        }
    }
    (g, h)
}

/// Runs the barrier method from a strictly feasible `z0`.
pub fn solve(p: &SdpProblem, z0: Vec<f64>, opts: BarrierOptions) -> Result<BarrierResult> {
    let k = p.c.len();
    if p.lmis.iter().any(|l| l.fi.len() != k) || z0.len() != k {
        return Err(Error::Solver("inconsistent problem dimensions".into()));
    }
    let total_dim: f64 = p.lmis.iter().map(|l| l.f0.dim() as f64).sum();
    let mut z = z0;
    let mut fz = factor(p, &z).ok_or_else(|| Error::Solver("starting point is not strictly feasible".into()))?;
    let mut t = opts.t0;
    let mut steps = 0usize;
    let mut centered: bool;
    let mut stage_duals = Vec::new();

    'outer: loop {
        // Damped Newton centering at the current t.
        centered = false;
        while steps < opts.max_newton {
            let (g, h) = newton_system(p, &fz, t);
            let Some(dz) = solve_spd(&h, &g.iter().map(|v| -v).collect::<Vec<_>>()) else {
                break 'outer;
            };
            let decrement_sq = -dot(&g, &dz);
            steps += 1;
            if !(decrement_sq.is_finite()) {
                break 'outer;
            }
            if decrement_sq / 2.0 <= 1e-10 {
                centered = true;
                break;
            }
            let phi0 = t * dot(&p.c, &z) - fz.log_det;
            let mut s = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let trial: Vec<f64> = z.iter().zip(&dz).map(|(a, d)| a + s * d).collect();
                if let Some(ft) = factor(p, &trial) {
                    let phi = t * dot(&p.c, &trial) - ft.log_det;
                    if phi <= phi0 - 0.01 * s * decrement_sq {
                        accepted = Some((trial, ft));
                        break;
                    }
                }
                s *= 0.5;
            }
            match accepted {
                Some((trial, ft)) => {
                    z = trial;
                    fz = ft;
                }
                None => {
                    // No progress possible at double precision.
                    centered = decrement_sq / 2.0 <= 1e-6;
                    break;
                }
            }
        }
        if centered {
            stage_duals.push(fz.inverses.iter().map(|inv| inv.scale_re(1.0 / t)).collect());
        }
        if !centered || total_dim / t <= opts.gap_tol {
            break;
        }
        t *= opts.mu;
    }

    let duals = fz.inverses.iter().map(|inv| inv.scale_re(1.0 / t)).collect();
    let gap_bound = total_dim / t;
    Ok(BarrierResult {
        objective: dot(&p.c, &z),
        z,
        duals,
        stage_duals,
        gap_bound,
        converged: centered && gap_bound <= opts.gap_tol,
        newton_steps: steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// minimize s subject to s ± x ≥ 0 on 1x1 blocks: optimum |x|.
    #[test]
    fn scalar_absolute_value() {
        let x = -2.5;
        let lmi = |sign: f64| Lmi { f0: CMatrix::scalar(1, C64::new(sign * x, 0.0)), fi: vec![SparseHerm::identity(1)] };
        let p = SdpProblem { c: vec![1.0], lmis: vec![lmi(1.0), lmi(-1.0)] };
        let r = solve(&p, vec![10.0], BarrierOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.objective - 2.5).abs() < 1e-9);
    }

    /// Spectral norm of a Hermitian 2x2 matrix as an SDP.
    #[test]
    fn spectral_norm_sdp() {
        let a = CMatrix::from_vec(
            2,
            vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(0.0, -2.0), C64::new(-1.0, 0.0)],
        )
        .unwrap();
        let lmis = vec![
            Lmi { f0: a.scale_re(-1.0), fi: vec![SparseHerm::identity(2)] },
            Lmi { f0: a.clone(), fi: vec![SparseHerm::identity(2)] },
        ];
        let p = SdpProblem { c: vec![1.0], lmis };
        let r = solve(&p, vec![5.0], BarrierOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.objective - 5f64.sqrt()).abs() < 1e-9);
        assert!(solve(&p, vec![0.0], BarrierOptions::default()).is_err());
    }
}
