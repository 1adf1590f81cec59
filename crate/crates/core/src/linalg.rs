//! Small dense kernels.
//!
//! The matrices in this crate stay tiny (g x g with g <= 8 on the real side,
//! 2^g x 2^g with g <= 5 on the complex side), so cyclic Jacobi iterations
//! give fully accurate eigen- and singular values without an external
//! solver. All routines take row-major slices.

use num_complex::Complex;

use crate::scalar::Real;

/// Lower-triangular Cholesky factor of a symmetric matrix, or `None` if a
/// pivot fails to be strictly positive.
pub fn cholesky<R: Real>(a: &[R], n: usize) -> Option<Vec<R>> {
    assert_eq!(a.len(), n * n);
    let mut l = vec![R::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= R::zero() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solve `L L^T x = b` given the lower Cholesky factor.
pub fn cholesky_solve<R: Real>(l: &[R], n: usize, b: &[R]) -> Vec<R> {
    assert_eq!(b.len(), n);
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] = x[i] - l[i * n + k] * x[k];
        }
        x[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            x[i] = x[i] - l[k * n + i] * x[k];
        }
        x[i] /= l[i * n + i];
    }
    x
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi, ascending.
pub fn symmetric_eigenvalues<R: Real>(a: &[R], n: usize) -> Vec<R> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![a[0]];
    }
    let mut m = a.to_vec();
    let scale = m.iter().fold(R::zero(), |acc, &v| acc.max(v.abs()));
    let stop = scale * R::epsilon() * R::of(1e-2);
    for _sweep in 0..60 {
        let mut off = R::zero();
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(m[p * n + q].abs());
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() <= stop {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let zeta = (aqq - app) / (R::of(2.0) * apq);
                let t = zeta.signum() / (zeta.abs() + (R::one() + zeta * zeta).sqrt());
                let c = R::one() / (R::one() + t * t).sqrt();
                let s = t * c;
                // Rotate columns p,q then rows p,q of the full matrix.
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<R> = (0..n).map(|i| m[i * n + i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    eigs
}

/// Singular values of a complex `rows x cols` matrix, descending, by
/// one-sided Jacobi orthogonalization of the columns.
pub fn singular_values<R: Real>(m: &[Complex<R>], rows: usize, cols: usize) -> Vec<R> {
    assert_eq!(m.len(), rows * cols);
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    if rows < cols {
        // Singular values are transpose-invariant; keep columns short-side.
        let mut t = vec![Complex::new(R::zero(), R::zero()); rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                t[j * rows + i] = m[i * cols + j];
            }
        }
        return singular_values(&t, cols, rows);
    }
    // Column-major working copy.
    let mut a = vec![Complex::new(R::zero(), R::zero()); rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            a[j * rows + i] = m[i * cols + j];
        }
    }
    let tol = R::epsilon() * R::of(64.0);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (cp, cq) = (p * rows, q * rows);
                let mut alpha = R::zero();
                let mut beta = R::zero();
                let mut gamma = Complex::new(R::zero(), R::zero());
                for i in 0..rows {
                    let u = a[cp + i];
                    let v = a[cq + i];
                    alpha += u.norm_sqr();
                    beta += v.norm_sqr();
                    gamma += u.conj() * v;
                }
                let r = gamma.norm();
                if r * r <= tol * tol * alpha * beta {
                    continue;
                }
                rotated = true;
                // Phase out gamma, then a real Jacobi rotation on the pair.
                let phase = gamma / r;
                let zeta = (beta - alpha) / (R::of(2.0) * r);
                let t = zeta.signum() / (zeta.abs() + (R::one() + zeta * zeta).sqrt());
                let c = R::one() / (R::one() + t * t).sqrt();
                let s = t * c;
                for i in 0..rows {
                    let u = a[cp + i];
                    let v = a[cq + i] * phase.conj();
                    a[cp + i] = u * c - v * s;
                    a[cq + i] = u * s + v * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<R> = (0..cols)
        .map(|j| {
            let mut s = R::zero();
            for i in 0..rows {
                s += a[j * rows + i].norm_sqr();
            }
            s.sqrt()
        })
        .collect();
    sv.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));
    sv
}

/// Numerical rank: singular values above `rel_threshold` times the largest.
pub fn numerical_rank<R: Real>(singular: &[R], rel_threshold: R) -> usize {
    match singular.first() {
        None => 0,
        Some(&smax) if smax <= R::zero() => 0,
        Some(&smax) => singular
            .iter()
            .filter(|&&s| s > rel_threshold * smax)
            .count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    type C = Complex<f64>;

    #[test]
    fn cholesky_identity_and_spd() {
        let a: Vec<f64> = vec![4.0, 2.0, 2.0, 3.0];
        let l = cholesky(&a, 2).unwrap();
        // L = [[2, 0], [1, sqrt(2)]]
        assert!((l[0] - 2.0).abs() < 1e-15);
        assert!((l[2] - 1.0).abs() < 1e-15);
        assert!((l[3] - 2.0f64.sqrt()).abs() < 1e-15);
        let x = cholesky_solve(&l, 2, &[8.0, 7.0]);
        // A x = b with x = (1.25, 1.5)
        assert!((x[0] - 1.25).abs() < 1e-12);
        assert!((x[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = vec![1.0, 2.0, 2.0, 1.0];
        assert!(cholesky(&a, 2).is_none());
    }

    #[test]
    fn eigenvalues_of_known_matrix() {
        // eig([[2,1],[1,2]]) = {1, 3}
        let e = symmetric_eigenvalues(&[2.0f64, 1.0, 1.0, 2.0], 2);
        assert!((e[0] - 1.0).abs() < 1e-12);
        assert!((e[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_match_trace_and_det() {
        let a = vec![3.0, 1.0, 0.5, 1.0, 2.0, -0.25, 0.5, -0.25, 1.5];
        let e = symmetric_eigenvalues(&a, 3);
        let trace: f64 = e.iter().sum();
        assert!((trace - 6.5).abs() < 1e-10);
        let det = e.iter().product::<f64>();
        // det by cofactor expansion
        let d = 3.0 * (2.0 * 1.5 - 0.0625) - 1.0 * (1.5 + 0.125) + 0.5 * (-0.25 - 1.0);
        assert!((det - d).abs() < 1e-10);
    }

    #[test]
    fn singular_values_of_diagonal() {
        let m = vec![
            C::new(3.0, 0.0),
            C::new(0.0, 0.0),
            C::new(0.0, 0.0),
            C::new(0.0, -2.0),
        ];
        let sv = singular_values(&m, 2, 2);
        assert!((sv[0] - 3.0).abs() < 1e-12);
        assert!((sv[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn singular_values_cross_checked_against_gram_eigenvalues() {
        // sigma_i(M)^2 are the eigenvalues of M^H M; compute the latter through
        // the real 2n x 2n embedding of the Hermitian Gram matrix.
        let m: Vec<C> = (0..12)
            .map(|k| {
                C::new(
                    ((k * 7 + 3) % 11) as f64 - 5.0,
                    ((k * 5 + 1) % 13) as f64 - 6.0,
                )
            })
            .collect();
        let (rows, cols) = (4, 3);
        let mut gram = vec![C::new(0.0, 0.0); cols * cols];
        for i in 0..cols {
            for j in 0..cols {
                let mut s = C::new(0.0, 0.0);
                for k in 0..rows {
                    s += m[k * cols + i].conj() * m[k * cols + j];
                }
                gram[i * cols + j] = s;
            }
        }
        let n2 = 2 * cols;
        let mut emb = vec![0.0f64; n2 * n2];
        for i in 0..cols {
            for j in 0..cols {
                emb[i * n2 + j] = gram[i * cols + j].re;
                emb[i * n2 + (j + cols)] = -gram[i * cols + j].im;
                emb[(i + cols) * n2 + j] = gram[i * cols + j].im;
                emb[(i + cols) * n2 + (j + cols)] = gram[i * cols + j].re;
            }
        }
        let mut gram_eigs = symmetric_eigenvalues(&emb, n2);
        gram_eigs.reverse();
        let sv = singular_values(&m, rows, cols);
        for (k, s) in sv.iter().enumerate() {
            // embedding doubles each eigenvalue
            let lam = gram_eigs[2 * k];
            assert!(
                (s * s - lam).abs() <= 1e-9 * lam.max(1.0),
                "sigma^2 {} vs gram eig {}",
                s * s,
                lam
            );
        }
    }

    #[test]
    fn rank_is_scale_invariant() {
        let m = [
            C::new(1.0, 0.0),
            C::new(2.0, 0.0),
            C::new(2.0, 0.0),
            C::new(4.0, 0.0),
        ];
        for scale in [1e-9, 1.0, 1e9] {
            let ms: Vec<C> = m.iter().map(|v| v * scale).collect();
            let sv = singular_values(&ms, 2, 2);
            assert_eq!(numerical_rank(&sv, 1e-8), 1, "scale {scale}");
        }
    }

    #[test]
    fn rank_of_empty_is_zero() {
        assert_eq!(numerical_rank::<f64>(&[], 1e-8), 0);
        assert_eq!(numerical_rank(&[0.0f64], 1e-8), 0);
    }
}
