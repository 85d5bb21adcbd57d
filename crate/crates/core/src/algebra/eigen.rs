//! Cyclic Jacobi eigensolver for Hermitian matrices.
//!
//! Each rotation is a complex Givens rotation `J` that zeroes the pivot
//! `(p, q)` of `J* A J`. Sweeps visit pivots in row-major order `p < q`,
//! so the result is bitwise reproducible for a given input.

use super::matrix::{CMatrix, C64, ZERO};

/// Sweep stops once the off-diagonal Frobenius mass falls below this
/// fraction of the total Frobenius mass.
pub const OFF_DIAGONAL_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 64;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]` (only when requested).
    pub vectors: Option<CMatrix>,
}

fn off_diagonal_mass(a: &CMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                s += a[(r, c)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Diagonalizes a Hermitian matrix. Only the upper triangle's Hermitian
/// part matters; the input is symmetrized first.
pub fn jacobi_hermitian(a: &CMatrix, want_vectors: bool) -> HermitianEigen {
    let n = a.dim();
    let mut m = CMatrix::from_fn(n, |r, c| (a[(r, c)] + a[(c, r)].conj()) * 0.5);
    let mut v = want_vectors.then(|| CMatrix::identity(n));
    let total = m.frobenius();

    if total > 0.0 {
        for _ in 0..MAX_SWEEPS {
            if off_diagonal_mass(&m) <= OFF_DIAGONAL_TOL * total {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let g = m[(p, q)];
                    let g_abs = g.norm();
                    if g_abs == 0.0 {
                        continue;
                    }
                    let phase = g / g_abs;
                    let app = m[(p, p)].re;
                    let aqq = m[(q, q)].re;
                    let theta = (aqq - app) / (2.0 * g_abs);
                    let t = if theta.is_infinite() {
                        0.0
                    } else {
                        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                    };
                    if t == 0.0 {
                        continue;
                    }
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    rotate(&mut m, v.as_mut(), p, q, c, s, phase);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = v.map(|v| CMatrix::from_fn(n, |r, k| v[(r, order[k])]));
    HermitianEigen { values, vectors }
}

/// Applies `A <- J* A J`, `V <- V J` with
/// `J_pp = c, J_pq = s e, J_qp = -s conj(e), J_qq = c`.
fn rotate(m: &mut CMatrix, v: Option<&mut CMatrix>, p: usize, q: usize, c: f64, s: f64, e: C64) {
    let n = m.dim();
    let se = e * s;
    let se_conj = e.conj() * s;
    // Columns: B = A J.
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * c - akq * se_conj;
        m[(k, q)] = akp * se + akq * c;
    }
    // Rows: A' = J* B.
    for k in 0..n {
        let bpk = m[(p, k)];
        let bqk = m[(q, k)];
        m[(p, k)] = bpk * c - bqk * se;
        m[(q, k)] = bpk * se_conj + bqk * c;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
    if let Some(v) = v {
        for k in 0..n {
            let vkp = v[(k, p)];
            let vkq = v[(k, q)];
            v[(k, p)] = vkp * c - vkq * se_conj;
            v[(k, q)] = vkp * se + vkq * c;
        }
    }
}

/// Largest singular value of a square matrix: the square root of the top
/// eigenvalue of `x* x`.
pub fn spectral_norm(x: &CMatrix) -> f64 {
    if x.dim() == 0 {
        return 0.0;
    }
    if x.dim() == 1 {
        return x[(0, 0)].norm();
    }
    let eig = jacobi_hermitian(&x.gram(), false);
    eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Sum of absolute eigenvalues of a Hermitian matrix (its trace norm).
pub fn hermitian_trace_norm(x: &CMatrix) -> f64 {
    jacobi_hermitian(x, false).values.iter().map(|v| v.abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonalizes_complex_hermitian() {
        let a = CMatrix::from_vec(
            3,
            vec![
                c(2.0, 0.0), c(1.0, -1.0), c(0.0, 0.5),
                c(1.0, 1.0), c(-1.0, 0.0), c(0.3, 0.0),
                c(0.0, -0.5), c(0.3, 0.0), c(0.5, 0.0),
            ],
        )
        .unwrap();
        let eig = jacobi_hermitian(&a, true);
        let v = eig.vectors.unwrap();
        let d = CMatrix::from_fn(3, |r, k| if r == k { c(eig.values[r], 0.0) } else { ZERO });
        let rebuilt = v.matmul(&d).matmul(&v.adjoint());
        assert!(rebuilt.sub(&a).max_abs() < 1e-13);
        let trace: f64 = eig.values.iter().sum();
        assert!((trace - 1.5).abs() < 1e-13);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn nilpotent_norm() {
        let x = CMatrix::from_vec(2, vec![ZERO, c(2.0, 0.0), ZERO, ZERO]).unwrap();
        assert!((spectral_norm(&x) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(spectral_norm(&CMatrix::zeros(3)), 0.0);
        assert_eq!(jacobi_hermitian(&CMatrix::zeros(2), false).values, vec![0.0, 0.0]);
        assert_eq!(spectral_norm(&CMatrix::identity(2)), 1.0);
    }
}
