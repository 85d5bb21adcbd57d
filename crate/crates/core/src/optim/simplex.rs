//! Dense tableau simplex with Bland's rule for
//! `maximize c·x subject to A x ≤ b, x ≥ 0` with `b ≥ 0`.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
    pub pivots: usize,
}

pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = b.len();
    if a.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(Error::Solver("constraint matrix has the wrong shape".into()));
    }
    if b.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::Solver("right-hand side must be nonnegative (origin feasible)".into()));
    }
    let width = n + m + 1;
    // Rows 0..m: [A | I | b]; last row: reduced costs [-c | 0 | value].
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        t[i * width..i * width + n].copy_from_slice(&a[i]);
        t[i * width + n + i] = 1.0;
        t[i * width + width - 1] = b[i];
    }
    for j in 0..n {
        t[m * width + j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut pivots = 0usize;
    let max_pivots = 50_000;

    loop {
        // Bland: smallest index with negative reduced cost.
        let Some(enter) = (0..n + m).find(|&j| t[m * width + j] < -PIVOT_TOL) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let col = t[i * width + enter];
            if col > PIVOT_TOL {
                let ratio = t[i * width + width - 1] / col;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && basis[i] < basis[li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::Solver("linear program is unbounded".into()));
        };
        pivot(&mut t, width, m, row, enter);
        basis[row] = enter;
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::Solver("simplex pivot limit reached".into()));
        }
    }

    let mut x = vec![0.0; n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[i * width + width - 1];
        }
    }
    Ok(LpSolution { value: t[m * width + width - 1], x, pivots })
}

fn pivot(t: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for v in &mut t[row * width..(row + 1) * width] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = t[row * width..(row + 1) * width].to_vec();
    for i in 0..=m {
        if i == row {
            continue;
        }
        let f = t[i * width + col];
        if f == 0.0 {
            continue;
        }
        for (v, pr) in t[i * width..(i + 1) * width].iter_mut().zip(&pivot_row) {
            *v -= f * pr;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_instance() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → 36 at (2, 6).
        let s = maximize(&[3.0, 5.0], &[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]], &[4.0, 12.0, 18.0]).unwrap();
        assert!((s.value - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn detects_unbounded() {
        assert!(maximize(&[1.0, 0.0], &[vec![-1.0, 1.0]], &[1.0]).is_err());
    }

    #[test]
    fn degenerate_instance_terminates() {
        let s = maximize(
            &[10.0, -57.0, -9.0, -24.0],
            &[vec![0.5, -5.5, -2.5, 9.0], vec![0.5, -1.5, -0.5, 1.0], vec![1.0, 0.0, 0.0, 0.0]],
            &[0.0, 0.0, 1.0],
        )
        .unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
    }
}
