//! Solvers: a log-barrier interior-point method for small complex
//! semidefinite programs and a dense simplex method for linear programs.

pub mod barrier;
pub mod simplex;

/// Solves `H x = g` for symmetric positive definite `H` (row-major, `n×n`)
/// by Cholesky. A diagonal ridge is added when the factorization fails.
pub fn solve_spd(h: &[f64], g: &[f64]) -> Option<Vec<f64>> {
    let n = g.len();
    let max_diag = (0..n).map(|i| h[i * n + i].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut ridge = 0.0;
    for _ in 0..8 {
        if let Some(l) = cholesky_real(h, n, ridge) {
            return Some(cholesky_solve(&l, n, g));
        }
        ridge = if ridge == 0.0 { 1e-14 * max_diag } else { ridge * 100.0 };
    }
    None
}

fn cholesky_real(h: &[f64], n: usize, ridge: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = h[j * n + j] + ridge;
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = h[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[f64], n: usize, g: &[f64]) -> Vec<f64> {
    let mut y = g.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let h = [4.0, 1.0, 1.0, 3.0];
        let x = solve_spd(&h, &[1.0, 2.0]).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
    }
}
