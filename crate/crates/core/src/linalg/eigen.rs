//! Jacobi-type eigensolvers.
//!
//! Everything here works on dense matrices and is deterministic: the sweep
//! order is fixed, so the same input always yields bit-identical output.

use crate::error::{Error, Result};
use crate::linalg::matrix::{ComplexMatrix, RealMatrix, RealSymmetricMatrix, C64, ZERO};

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Clone, Debug)]
pub struct EigenPair {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthogonal matrix whose columns are the eigenvectors; determinant +1.
    pub basis: RealMatrix,
    /// Off-diagonal Frobenius mass left after the last sweep.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct JacobiOptions {
    /// Required bound on the off-diagonal mass, relative to `||m||_F`.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for JacobiOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_sweeps: 64,
        }
    }
}

// Sweeps keep going until the off-diagonal mass reaches this relative level
// or stops shrinking; `tol` only decides success.
const TARGET: f64 = 1e-15;

fn off_norm_real(a: &[f64], n: usize) -> f64 {
    let mut acc = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            acc += 2.0 * a[p * n + q] * a[p * n + q];
        }
    }
    acc.sqrt()
}

/// Cyclic Jacobi eigensolver for real symmetric matrices.
pub fn jacobi_eigh(m: &RealSymmetricMatrix) -> Result<EigenPair> {
    jacobi_eigh_with(m, JacobiOptions::default())
}

pub fn jacobi_eigh_with(m: &RealSymmetricMatrix, opts: JacobiOptions) -> Result<EigenPair> {
    if !m.is_finite() {
        return Err(Error::Precondition("matrix has non-finite entries".into()));
    }
    let n = m.dim();
    let mut a = m.to_dense().as_slice().to_vec();
    // rows of `vt` are the eigenvectors
    let mut vt = RealMatrix::identity(n).as_slice().to_vec();
    let norm = m.frobenius_norm();

    let mut off = off_norm_real(&a, n);
    let mut sweeps = 0;
    while off > TARGET * norm && sweeps < opts.max_sweeps {
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate_real(&mut a, n, p, q, c, s);
                a[p * n + p] -= t * apq;
                a[q * n + q] += t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                rotate_rows(&mut vt, n, p, q, c, s);
            }
        }
        sweeps += 1;
        let next = off_norm_real(&a, n);
        let stalled = next > 0.5 * off;
        off = next;
        if stalled && off <= opts.tol * norm {
            break;
        }
    }
    if off > opts.tol * norm.max(f64::MIN_POSITIVE) && off > 0.0 {
        return Err(Error::Convergence {
            sweeps,
            residual: off,
        });
    }

    let diag: Vec<f64> = (0..n).map(|j| a[j * n + j]).collect();
    Ok(sorted_pair(diag, &vt, n, off))
}

// Applies the symmetric update A <- J^T A J for the Givens rotation in the
// (p, q) plane, leaving the (p, q) block to the caller.
fn rotate_real(a: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        let np = c * apk - s * aqk;
        let nq = s * apk + c * aqk;
        a[p * n + k] = np;
        a[q * n + k] = nq;
        a[k * n + p] = np;
        a[k * n + q] = nq;
    }
}

fn rotate_rows(vt: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..n {
        let vp = vt[p * n + k];
        let vq = vt[q * n + k];
        vt[p * n + k] = c * vp - s * vq;
        vt[q * n + k] = s * vp + c * vq;
    }
}

fn sorted_pair(diag: Vec<f64>, vt: &[f64], n: usize, residual: f64) -> EigenPair {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut basis = RealMatrix::from_fn(n, n, |r, c| vt[order[c] * n + r]);
    // rotations have determinant one, so only the permutation parity matters
    if n > 0 && permutation_is_odd(&order) {
        basis.negate_column(n - 1);
    }
    EigenPair {
        values,
        basis,
        residual,
    }
}

fn permutation_is_odd(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    let mut odd = false;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = perm[j];
            len += 1;
        }
        if len % 2 == 0 {
            odd = !odd;
        }
    }
    odd
}

/// Eigen-decomposition of a complex Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub vectors: ComplexMatrix,
    pub residual: f64,
}

/// Complex Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot entry with a diagonal
/// unitary and then applies a real Givens rotation.
pub fn hermitian_eigh(m: &ComplexMatrix) -> Result<HermitianEigen> {
    hermitian_eigh_with(m, JacobiOptions::default())
}

pub fn hermitian_eigh_with(m: &ComplexMatrix, opts: JacobiOptions) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::shape(
            "square matrix",
            format!("{}x{}", m.rows(), m.cols()),
        ));
    }
    if !m.is_finite() {
        return Err(Error::Precondition("matrix has non-finite entries".into()));
    }
    let n = m.rows();
    let norm = m.frobenius_norm();
    let herm = m.hermitian_residual();
    if herm > 1e-8 * (1.0 + norm) {
        return Err(Error::Precondition(format!(
            "matrix is not Hermitian (||m - m^dagger||_F = {herm:e})"
        )));
    }
    // work on the exactly Hermitian part
    let mut a: Vec<C64> = ComplexMatrix::from_fn(n, n, |r, c| 0.5 * (m[(r, c)] + m[(c, r)].conj()))
        .as_slice()
        .to_vec();
    for j in 0..n {
        a[j * n + j] = C64::new(a[j * n + j].re, 0.0);
    }
    let mut vt: Vec<C64> = ComplexMatrix::identity(n).as_slice().to_vec();

    let off_norm = |a: &[C64]| {
        let mut acc = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                acc += 2.0 * a[p * n + q].norm_sqr();
            }
        }
        acc.sqrt()
    };

    let mut off = off_norm(&a);
    let mut sweeps = 0;
    while off > TARGET * norm && sweeps < opts.max_sweeps {
        for p in 0..n {
            for q in p + 1..n {
                let beta = a[p * n + q];
                let mag = beta.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = beta / mag;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let apk = a[p * n + k];
                    let aqk = phase * a[q * n + k];
                    let np = c * apk - s * aqk;
                    let nq = s * apk + c * aqk;
                    a[p * n + k] = np;
                    a[q * n + k] = nq;
                    a[k * n + p] = np.conj();
                    a[k * n + q] = nq.conj();
                }
                a[p * n + p] = C64::new(app - t * mag, 0.0);
                a[q * n + q] = C64::new(aqq + t * mag, 0.0);
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                let phase_c = phase.conj();
                for k in 0..n {
                    let vp = vt[p * n + k];
                    let vq = phase_c * vt[q * n + k];
                    vt[p * n + k] = c * vp - s * vq;
                    vt[q * n + k] = s * vp + c * vq;
                }
            }
        }
        sweeps += 1;
        let next = off_norm(&a);
        let stalled = next > 0.5 * off;
        off = next;
        if stalled && off <= opts.tol * norm {
            break;
        }
    }
    if off > opts.tol * norm && off > 0.0 {
        return Err(Error::Convergence {
            sweeps,
            residual: off,
        });
    }

    let diag: Vec<f64> = (0..n).map(|j| a[j * n + j].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| vt[order[c] * n + r]);
    Ok(HermitianEigen {
        values,
        vectors,
        residual: off,
    })
}

/// Singular values of a complex matrix by one-sided (Hestenes) Jacobi, in
/// non-increasing order.
///
/// Small singular values come out with absolute accuracy near
/// `eps * ||m||_F`, unlike square roots of eigenvalues of `m^dagger m`.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_finite() {
        return Err(Error::Precondition("matrix has non-finite entries".into()));
    }
    let rows = m.rows();
    let cols = m.cols();
    // column-major copy so each column is contiguous
    let mut cm: Vec<Vec<C64>> = (0..cols).map(|c| m.column(c)).collect();
    let max_sweeps = 80;
    let mut converged = cols < 2;
    for _ in 0..max_sweeps {
        if converged {
            break;
        }
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let alpha: f64 = cm[i].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cm[j].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cm[i].iter().zip(&cm[j]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase_c = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cm.split_at_mut(j);
                let ci = &mut left[i];
                let cj = &mut right[0];
                for r in 0..rows {
                    let x = ci[r];
                    let y = phase_c * cj[r];
                    ci[r] = c * x - s * y;
                    cj[r] = s * x + c * y;
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::Convergence {
            sweeps: max_sweeps,
            residual: f64::NAN,
        });
    }
    let mut sv: Vec<f64> = cm
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// `exp(x)` for an anti-Hermitian `x`, through the eigen-decomposition of
/// the Hermitian matrix `-i x`.
pub fn expm_anti_hermitian(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let res = x.anti_hermitian_residual();
    if res > 1e-8 * (1.0 + x.frobenius_norm()) {
        return Err(Error::Precondition(format!(
            "matrix is not anti-Hermitian (||x + x^dagger||_F = {res:e})"
        )));
    }
    let h = x.scale(C64::new(0.0, -1.0));
    let eig = hermitian_eigh(&h)?;
    let n = x.rows();
    let u = &eig.vectors;
    let phases: Vec<C64> = eig.values.iter().map(|&w| C64::new(0.0, w).exp()).collect();
    let scaled = ComplexMatrix::from_fn(n, n, |r, c| u[(r, c)] * phases[c]);
    Ok(&scaled * &u.adjoint())
}

/// Simultaneously diagonalizes two commuting real symmetric matrices that
/// are already close to diagonal, by Jacobi rotations minimizing the summed
/// off-diagonal mass of both. `basis` accumulates the rotations (columns).
///
/// Returns the remaining off-diagonal mass.
pub(crate) fn joint_jacobi_polish(
    a: &mut RealMatrix,
    b: &mut RealMatrix,
    basis: &mut RealMatrix,
    max_sweeps: usize,
) -> f64 {
    let n = a.rows();
    let scale = (a.frobenius_norm().powi(2) + b.frobenius_norm().powi(2)).sqrt();
    let off = |a: &RealMatrix, b: &RealMatrix| {
        let mut acc = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                acc += 2.0 * (a[(p, q)].powi(2) + b[(p, q)].powi(2));
            }
        }
        acc.sqrt()
    };
    let mut av = a.as_slice().to_vec();
    let mut bv = b.as_slice().to_vec();
    let mut bt = basis.transpose().as_slice().to_vec();
    let mut current = off(a, b);
    for _ in 0..max_sweeps {
        if current <= TARGET * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let (ba, bb) = (av[p * n + q], bv[p * n + q]);
                if ba == 0.0 && bb == 0.0 {
                    continue;
                }
                let da = 0.5 * (av[p * n + p] - av[q * n + q]);
                let db = 0.5 * (bv[p * n + p] - bv[q * n + q]);
                // new off-diagonal entry is beta*cos(2t) + delta*sin(2t);
                // pick the direction minimizing the summed squares
                let g11 = ba * ba + bb * bb;
                let g22 = da * da + db * db;
                let g12 = ba * da + bb * db;
                let minor = 0.5 * (2.0 * g12).atan2(g11 - g22) + std::f64::consts::FRAC_PI_2;
                let (mut y, mut x) = minor.sin_cos();
                if x < 0.0 {
                    x = -x;
                    y = -y;
                }
                let (s, c) = (0.5 * y.atan2(x)).sin_cos();
                if s == 0.0 {
                    continue;
                }
                for (mat, beta, delta) in [(&mut av, ba, da), (&mut bv, bb, db)] {
                    let app = mat[p * n + p];
                    let aqq = mat[q * n + q];
                    let npq = beta * (c * c - s * s) + 2.0 * delta * c * s;
                    rotate_real(mat, n, p, q, c, s);
                    mat[p * n + p] = c * c * app - 2.0 * c * s * beta + s * s * aqq;
                    mat[q * n + q] = s * s * app + 2.0 * c * s * beta + c * c * aqq;
                    mat[p * n + q] = npq;
                    mat[q * n + p] = npq;
                }
                rotate_rows(&mut bt, n, p, q, c, s);
            }
        }
        *a = RealMatrix::from_vec(n, n, av.clone());
        *b = RealMatrix::from_vec(n, n, bv.clone());
        let next = off(a, b);
        let stalled = next > 0.5 * current;
        current = next;
        if stalled {
            break;
        }
    }
    *basis = RealMatrix::from_vec(n, n, bt).transpose();
    current
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_special_orthogonal, seeded_rng};
    use rand::Rng;

    fn sym(m: &RealMatrix) -> RealSymmetricMatrix {
        RealSymmetricMatrix::from_matrix(m, 1e-12).unwrap()
    }

    #[test]
    fn identity_has_trivial_decomposition() {
        let e = jacobi_eigh(&sym(&RealMatrix::identity(5))).unwrap();
        assert!(e.values.iter().all(|&v| v == 1.0));
        assert_eq!(e.basis, RealMatrix::identity(5));
    }

    #[test]
    fn diag_3_1_swaps_columns_with_sign_fix() {
        let m = RealMatrix::from_fn(2, 2, |i, j| {
            if i != j {
                0.0
            } else if i == 0 {
                3.0
            } else {
                1.0
            }
        });
        let e = jacobi_eigh(&sym(&m)).unwrap();
        assert_eq!(e.values, vec![1.0, 3.0]);
        // column swap has determinant -1, so one column is negated
        assert_eq!(e.basis[(1, 0)].abs(), 1.0);
        assert_eq!(e.basis[(0, 1)].abs(), 1.0);
        assert!((e.basis.determinant().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constructed_spectrum_is_recovered() {
        let mut rng = seeded_rng(11, 0);
        for dim in [2usize, 5, 16, 33] {
            let o = random_special_orthogonal(dim, &mut rng);
            let w: Vec<f64> = (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect();
            let m = RealMatrix::from_fn(dim, dim, |i, j| {
                (0..dim).map(|k| o[(i, k)] * w[k] * o[(j, k)]).sum()
            });
            let e = jacobi_eigh(&sym(&m)).unwrap();
            let mut sorted = w.clone();
            sorted.sort_by(f64::total_cmp);
            for (a, b) in e.values.iter().zip(&sorted) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
            assert!(e.basis.orthogonality_residual() < 1e-12);
            assert!((e.basis.determinant().unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn hermitian_eigh_reconstructs() {
        let mut rng = seeded_rng(5, 1);
        let n = 12;
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let h = &g + &g.adjoint();
        let e = hermitian_eigh(&h).unwrap();
        let u = &e.vectors;
        let rebuilt = &ComplexMatrix::from_fn(n, n, |r, c| u[(r, c)] * e.values[c]) * &u.adjoint();
        assert!(rebuilt.frobenius_distance(&h).unwrap() < 1e-11 * h.frobenius_norm());
        assert!(u.unitarity_residual().unwrap() < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn hermitian_rejects_non_hermitian() {
        let m =
            ComplexMatrix::from_rows(&[vec![ZERO, C64::new(1.0, 0.0)], vec![ZERO, ZERO]]).unwrap();
        assert!(matches!(hermitian_eigh(&m), Err(Error::Precondition(_))));
    }

    #[test]
    fn singular_values_match_known_factorization() {
        let mut rng = seeded_rng(9, 2);
        let u = crate::linalg::random::haar_unitary(6, &mut rng);
        let v = crate::linalg::random::haar_unitary(6, &mut rng);
        let s = [3.0, 2.0, 1.0, 1e-3, 1e-9, 0.0];
        let m = &(&u * &ComplexMatrix::from_diagonal(&s.map(|x| C64::new(x, 0.0)))) * &v;
        let sv = singular_values(&m).unwrap();
        for (a, b) in sv.iter().zip(s) {
            assert!((a - b).abs() < 1e-14 * 10.0, "{a} vs {b}");
        }
    }

    #[test]
    fn expm_of_diagonal_generator() {
        let x = ComplexMatrix::from_diagonal(&[C64::new(0.0, 0.3), C64::new(0.0, -0.3)]);
        let e = expm_anti_hermitian(&x).unwrap();
        assert!((e[(0, 0)] - C64::new(0.0, 0.3).exp()).norm() < 1e-15);
        assert!(e[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn expm_matches_taylor_series() {
        // independent route: scaled Taylor series squared back up
        let mut rng = seeded_rng(3, 3);
        let n = 4;
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let x = &g - &g.adjoint();
        let scaled = x.scale(C64::new(1.0 / 1024.0, 0.0));
        let mut term = ComplexMatrix::identity(n);
        let mut sum = ComplexMatrix::identity(n);
        for k in 1..20 {
            term = (&term * &scaled).scale(C64::new(1.0 / k as f64, 0.0));
            sum = &sum + &term;
        }
        for _ in 0..10 {
            sum = &sum * &sum;
        }
        let e = expm_anti_hermitian(&x).unwrap();
        assert!(e.frobenius_distance(&sum).unwrap() < 1e-11);
    }
}
