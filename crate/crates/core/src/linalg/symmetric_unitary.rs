//! Real orthogonal diagonalization of complex symmetric unitaries.
//!
//! For a symmetric unitary `p = a + i b` the real parts `a` and `b` are
//! symmetric and commute, so a single real orthogonal `o` diagonalizes both.

use crate::error::{Error, Result};
use crate::linalg::eigen::{jacobi_eigh, joint_jacobi_polish};
use crate::linalg::matrix::{ComplexMatrix, RealMatrix, RealSymmetricMatrix, C64};

/// `p = o diag(d) o^T` with `o` real orthogonal of determinant one.
#[derive(Clone, Debug)]
pub struct SymmetricUnitaryFactors {
    pub o: RealMatrix,
    pub d: Vec<C64>,
    /// `||p - o diag(d) o^T||_F`
    pub residual: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SymmetricUnitaryOptions {
    /// Accepted unitarity and symmetry defect of the input, per `sqrt(N)`.
    pub input_tol: f64,
    /// Eigenvalues of `b` closer than `cluster_tol * (1 + ||b||_F)` are
    /// treated as one cluster.
    pub cluster_tol: f64,
}

impl Default for SymmetricUnitaryOptions {
    fn default() -> Self {
        Self {
            input_tol: 1e-9,
            cluster_tol: 1e-8,
        }
    }
}

pub fn diagonalize_symmetric_unitary(p: &ComplexMatrix) -> Result<SymmetricUnitaryFactors> {
    diagonalize_symmetric_unitary_with(p, SymmetricUnitaryOptions::default())
}

pub fn diagonalize_symmetric_unitary_with(
    p: &ComplexMatrix,
    opts: SymmetricUnitaryOptions,
) -> Result<SymmetricUnitaryFactors> {
    let unit = p
        .unitarity_residual()
        .ok_or_else(|| Error::shape("square matrix", format!("{}x{}", p.rows(), p.cols())))?;
    if !p.is_finite() {
        return Err(Error::Precondition("matrix has non-finite entries".into()));
    }
    let n = p.rows();
    let allowed = opts.input_tol * (n as f64).sqrt().max(1.0);
    if unit > allowed {
        return Err(Error::Precondition(format!(
            "matrix is not unitary (||p^dagger p - I||_F = {unit:e})"
        )));
    }
    let symm = p.symmetry_residual();
    if symm > allowed {
        return Err(Error::Precondition(format!(
            "matrix is not symmetric (||p - p^T||_F = {symm:e})"
        )));
    }

    let re = p.real_part();
    let im = p.imag_part();
    let a = RealSymmetricMatrix::from_matrix(&re, f64::INFINITY)?;
    let b = RealSymmetricMatrix::from_matrix(&im, f64::INFINITY)?;
    let (a_dense, b_dense) = (a.to_dense(), b.to_dense());

    let comm = a_dense
        .matmul(&b_dense)?
        .frobenius_distance(&b_dense.matmul(&a_dense)?);
    if comm > 1e-8 * (1.0 + p.frobenius_norm()) {
        return Err(Error::NumericalInconsistency {
            what: "real and imaginary parts do not commute".into(),
            residual: comm,
        });
    }

    let eb = jacobi_eigh(&b)?;
    let mut o = eb.basis;
    let threshold = opts.cluster_tol * (1.0 + b.frobenius_norm());

    // a in the eigenbasis of b; it is block diagonal over the clusters
    let mut a_rot = o.transpose().matmul(&a_dense)?.matmul(&o)?;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eb.values[end] - eb.values[end - 1] <= threshold {
            end += 1;
        }
        if end - start > 1 {
            let m = end - start;
            let block = RealSymmetricMatrix::from_fn(m, |i, j| {
                0.5 * (a_rot[(start + i, start + j)] + a_rot[(start + j, start + i)])
            });
            let w = jacobi_eigh(&block)?.basis;
            let cols: Vec<Vec<f64>> = (0..n)
                .map(|r| {
                    (0..m)
                        .map(|c| (0..m).map(|k| o[(r, start + k)] * w[(k, c)]).sum())
                        .collect()
                })
                .collect();
            for (r, row) in cols.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    o[(r, start + c)] = *v;
                }
            }
        }
        start = end;
    }

    a_rot = o.transpose().matmul(&a_dense)?.matmul(&o)?;
    let mut b_rot = o.transpose().matmul(&b_dense)?.matmul(&o)?;
    joint_jacobi_polish(&mut a_rot, &mut b_rot, &mut o, 30);

    let d: Vec<C64> = (0..n)
        .map(|j| {
            let z = C64::new(a_rot[(j, j)], b_rot[(j, j)]);
            z / z.norm()
        })
        .collect();

    let rebuilt = ComplexMatrix::from_fn(n, n, |r, c| {
        (0..n).map(|k| d[k] * (o[(r, k)] * o[(c, k)])).sum()
    });
    let residual = rebuilt.frobenius_distance(p)?;
    Ok(SymmetricUnitaryFactors { o, d, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{haar_unitary, random_special_orthogonal, seeded_rng};
    use rand::Rng;

    fn build(o: &RealMatrix, d: &[C64]) -> ComplexMatrix {
        let n = d.len();
        ComplexMatrix::from_fn(n, n, |r, c| {
            (0..n).map(|k| d[k] * (o[(r, k)] * o[(c, k)])).sum()
        })
    }

    #[test]
    fn recovers_random_factorization() {
        let mut rng = seeded_rng(1, 0);
        for n in [2usize, 4, 8, 16, 32] {
            let o = random_special_orthogonal(n, &mut rng);
            let d: Vec<C64> = (0..n)
                .map(|_| C64::from_polar(1.0, rng.random_range(-3.1..3.1)))
                .collect();
            let p = build(&o, &d);
            let f = diagonalize_symmetric_unitary(&p).unwrap();
            assert!(f.residual < 1e-10, "n={n} residual {}", f.residual);
            assert!(f.o.orthogonality_residual() < 1e-10);
            assert!((f.o.determinant().unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn handles_degenerate_and_mirror_eigenvalues() {
        // sin(t) = sin(pi - t) puts distinct eigenvalues into one b-cluster
        let mut rng = seeded_rng(2, 0);
        let n = 8;
        let o = random_special_orthogonal(n, &mut rng);
        let t = 0.7f64;
        let d = vec![
            C64::from_polar(1.0, t),
            C64::from_polar(1.0, std::f64::consts::PI - t),
            C64::from_polar(1.0, t),
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::from_polar(1.0, std::f64::consts::PI - t + 1e-7),
            C64::from_polar(1.0, -2.0),
        ];
        let p = build(&o, &d);
        let f = diagonalize_symmetric_unitary(&p).unwrap();
        assert!(f.residual < 1e-10, "residual {}", f.residual);
    }

    #[test]
    fn product_v_vt_of_haar_unitary() {
        let mut rng = seeded_rng(3, 0);
        for _ in 0..5 {
            let v = haar_unitary(32, &mut rng);
            let p = &v * &v.transpose();
            let f = diagonalize_symmetric_unitary(&p).unwrap();
            assert!(f.residual < 1e-10);
        }
    }

    #[test]
    fn rejects_non_symmetric() {
        let mut rng = seeded_rng(4, 0);
        let v = haar_unitary(4, &mut rng);
        assert!(matches!(
            diagonalize_symmetric_unitary(&v),
            Err(Error::Precondition(_))
        ));
    }
}
