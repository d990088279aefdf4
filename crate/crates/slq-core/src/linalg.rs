//! Small dense linear-algebra kernels: a cyclic Jacobi eigensolver for
//! hermitian matrices and Hilbert-Schmidt helpers.
//!
//! Everything here targets the desk-scale dimensions of this crate
//! (eigenproblems up to a few hundred), where a dependency-free Jacobi
//! sweep is plenty.

use ndarray::Array2;
use num_complex::Complex64 as C64;

/// Frobenius norm.
pub fn fro_norm(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hilbert-Schmidt inner product `tr(a^dag b)`.
pub fn hs_dot(a: &Array2<C64>, b: &Array2<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Hermiticity defect `max |a - a^dag|`.
pub fn hermiticity_defect(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut d = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            d = d.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    d
}

/// Eigenvalues of a hermitian matrix by cyclic Jacobi rotations, ascending.
///
/// The input is hermitized (`(a + a^dag)/2`) before sweeping so that tiny
/// asymmetries from upstream arithmetic do not stall convergence.
pub fn hermitian_eigenvalues(a: &Array2<C64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "hermitian_eigenvalues needs a square matrix");
    if n == 0 {
        return vec![];
    }
    if n == 1 {
        return vec![a[(0, 0)].re];
    }

    let mut m = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = 0.5 * (a[(i, j)] + a[(j, i)].conj());
        }
    }

    let scale = fro_norm(&m).max(1e-300);
    let tol = 1e-15 * scale;
    let max_sweeps = 60;

    for _ in 0..max_sweeps {
        let mut off = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }

        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.norm() <= tol / (n as f64) {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                // Phase that makes the pivot real, then a standard 2x2
                // symmetric Jacobi rotation.
                let abs = apq.norm();
                let phase = apq / abs; // e^{i phi}
                let tau = (aqq - app) / (2.0 * abs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Columns: [v_p, v_q] <- [c v_p - s* conj(phase) v_q,
                //                         s phase v_p + c v_q]
                for i in 0..n {
                    let aip = m[(i, p)];
                    let aiq = m[(i, q)];
                    m[(i, p)] = c * aip - s * phase.conj() * aiq;
                    m[(i, q)] = s * phase * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = m[(p, j)];
                    let aqj = m[(q, j)];
                    m[(p, j)] = c * apj - s * phase * aqj;
                    m[(q, j)] = s * phase.conj() * apj + c * aqj;
                }
            }
        }
    }

    let mut eigs: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

/// Minimum eigenvalue of a hermitian matrix.
pub fn hermitian_min_eigenvalue(a: &Array2<C64>) -> f64 {
    hermitian_eigenvalues(a)
        .first()
        .copied()
        .unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_matrix_returns_its_diagonal() {
        let a = array![
            [c(3.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(-1.0, 0.0)]
        ];
        let e = hermitian_eigenvalues(&a);
        assert!((e[0] + 1.0).abs() < 1e-14);
        assert!((e[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_x_and_y_have_unit_spectrum() {
        let x = array![[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]];
        let y = array![[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]];
        for m in [x, y] {
            let e = hermitian_eigenvalues(&m);
            assert!((e[0] + 1.0).abs() < 1e-14);
            assert!((e[1] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn trace_and_frobenius_are_preserved() {
        // Deterministic pseudo-random hermitian matrix.
        let n = 24;
        let mut state = 0x2545f4914f6cdd1d_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let z = c(next(), if i == j { 0.0 } else { next() });
                a[(i, j)] = z;
                a[(j, i)] = z.conj();
            }
        }
        let e = hermitian_eigenvalues(&a);
        let tr: f64 = (0..n).map(|i| a[(i, i)].re).sum();
        let fro2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        let sum: f64 = e.iter().sum();
        let sum2: f64 = e.iter().map(|x| x * x).sum();
        assert!((sum - tr).abs() < 1e-10 * tr.abs().max(1.0));
        assert!((sum2 - fro2).abs() < 1e-10 * fro2);
    }

    #[test]
    fn known_complex_two_by_two() {
        // [[2, i],[-i, 2]] has eigenvalues 1 and 3.
        let a = array![[c(2.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(2.0, 0.0)]];
        let e = hermitian_eigenvalues(&a);
        assert!((e[0] - 1.0).abs() < 1e-14);
        assert!((e[1] - 3.0).abs() < 1e-14);
    }
}
