//! Unitary SVD over SO(N) and the concurrence canonical decomposition.

use crate::cartan::k_membership_residual;
use crate::error::{Error, Result};
use crate::intertwiners::build_standard_entangler;
use crate::linalg::matrix::{ComplexMatrix, RealMatrix, C64, ONE};
use crate::linalg::symmetric_unitary::diagonalize_symmetric_unitary;

/// Accepted defect of the special-unitary input.
pub const INPUT_TOL: f64 = 1e-8;
/// Largest imaginary mass tolerated in `o3 = p^dagger v`.
pub const REALNESS_TOL: f64 = 1e-8;
const MAX_PATTERN_BITS: usize = 16;

/// `v = o1 diag(d) o2` with `o1`, `o2` in SO(N).
#[derive(Clone, Debug)]
pub struct UnitarySvd {
    pub o1: RealMatrix,
    pub d: Vec<C64>,
    pub o2: RealMatrix,
    pub residual: f64,
    /// Number of root signs changed away from the principal branch.
    pub branch_flips: usize,
}

#[derive(Clone, Debug)]
pub struct CcdFactors {
    pub k1: ComplexMatrix,
    pub a: ComplexMatrix,
    pub k2: ComplexMatrix,
    /// `a = E0 diag(d) E0^dagger`
    pub d: Vec<C64>,
    pub residual: f64,
    pub branch_flips: usize,
}

fn check_special_unitary(v: &ComplexMatrix) -> Result<()> {
    let unit = v
        .unitarity_residual()
        .ok_or_else(|| Error::shape("square matrix", format!("{}x{}", v.rows(), v.cols())))?;
    if !v.is_finite() {
        return Err(Error::Precondition("matrix has non-finite entries".into()));
    }
    let scale = (v.rows() as f64).sqrt().max(1.0);
    if unit > INPUT_TOL * scale {
        return Err(Error::Precondition(format!(
            "matrix is not unitary (||v^dagger v - I||_F = {unit:e})"
        )));
    }
    let det = v.determinant()?;
    if (det - ONE).norm() > INPUT_TOL {
        return Err(Error::Precondition(format!("determinant is {det}, not 1")));
    }
    Ok(())
}

fn rotate_real(o: &RealMatrix, d: &[C64]) -> ComplexMatrix {
    let n = d.len();
    ComplexMatrix::from_fn(n, n, |r, c| o[(r, c)] * d[c])
}

// o diag(d) o^T
fn conjugate_diag(o: &RealMatrix, d: &[C64]) -> ComplexMatrix {
    let n = d.len();
    ComplexMatrix::from_fn(n, n, |r, c| {
        (0..n).map(|k| d[k] * (o[(r, k)] * o[(c, k)])).sum()
    })
}

// Principal square roots of the unit-modulus `d2`, with the largest-angle
// root negated when needed to make the product +1.
fn principal_roots(d2: &[C64]) -> (Vec<C64>, usize) {
    let angles: Vec<f64> = d2.iter().map(|z| z.arg()).collect();
    let mut d: Vec<C64> = angles
        .iter()
        .map(|&t| C64::from_polar(1.0, 0.5 * t))
        .collect();
    let product: C64 = d.iter().product();
    if product.re < 0.0 {
        let mut idx = 0;
        for (j, t) in angles.iter().enumerate() {
            if t.abs() > angles[idx].abs() {
                idx = j;
            }
        }
        d[idx] = -d[idx];
        return (d, 1);
    }
    (d, 0)
}

// Index sets of numerically equal d^2 values.
fn clusters(d2: &[C64]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    'outer: for (j, z) in d2.iter().enumerate() {
        for g in groups.iter_mut() {
            if (d2[g[0]] - z).norm() <= 1e-8 {
                g.push(j);
                continue 'outer;
            }
        }
        groups.push(vec![j]);
    }
    groups
}

pub fn unitary_svd(v: &ComplexMatrix) -> Result<UnitarySvd> {
    check_special_unitary(v)?;
    let p2 = v.matmul(&v.transpose())?;
    // v v^T is symmetric in exact arithmetic
    let dim = v.rows();
    let p2 = ComplexMatrix::from_fn(dim, dim, |r, c| 0.5 * (p2[(r, c)] + p2[(c, r)]));
    let sym = diagonalize_symmetric_unitary(&p2)?;
    let o1 = sym.o;
    let (d0, base_flips) = principal_roots(&sym.d);

    let attempt = |d: &[C64]| -> Result<(ComplexMatrix, f64)> {
        let p = conjugate_diag(&o1, d);
        let o3 = p.adjoint().matmul(v)?;
        let mass = o3.imaginary_mass();
        Ok((o3, mass))
    };

    let (mut o3, mut mass) = attempt(&d0)?;
    let mut d = d0.clone();
    let mut flips = base_flips;
    if mass > REALNESS_TOL {
        let groups = clusters(&sym.d);
        let bits = groups.len().min(MAX_PATTERN_BITS);
        let mut best = mass;
        let mut found = false;
        for pattern in 1u64..(1u64 << bits) {
            let flipped: usize = (0..bits)
                .filter(|b| pattern >> b & 1 == 1)
                .map(|b| groups[b].len())
                .sum();
            if flipped % 2 == 1 {
                continue;
            }
            let mut cand = d0.clone();
            for b in (0..bits).filter(|b| pattern >> b & 1 == 1) {
                for &j in &groups[b] {
                    cand[j] = -cand[j];
                }
            }
            let (o3c, m) = attempt(&cand)?;
            best = best.min(m);
            if m <= REALNESS_TOL {
                o3 = o3c;
                mass = m;
                d = cand;
                flips = base_flips + flipped;
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::BranchSelection {
                imaginary_mass: best,
            });
        }
    }
    debug_assert!(mass <= REALNESS_TOL);

    let o2 = o1.transpose().matmul(&o3.real_part())?;
    let rebuilt = rotate_real(&o1, &d).matmul(&ComplexMatrix::from_real(&o2))?;
    let residual = rebuilt.frobenius_distance(v)?;
    Ok(UnitarySvd {
        o1,
        d,
        o2,
        residual,
        branch_flips: flips,
    })
}

/// `v = k1 a k2` with `k1`, `k2` in K and `a` in A; even `n` only.
pub fn ccd(v: &ComplexMatrix, n_qubits: usize) -> Result<CcdFactors> {
    if n_qubits % 2 == 1 {
        return Err(Error::UnsupportedParity { n: n_qubits });
    }
    let found = v.require_qubits()?;
    if found != n_qubits {
        return Err(Error::shape(
            format!("{0}x{0}", 1usize << n_qubits),
            format!("{}x{}", v.rows(), v.cols()),
        ));
    }
    let e = build_standard_entangler(n_qubits)?.matrix;
    let e_dag = e.adjoint();
    let m = e_dag.matmul(v)?.matmul(&e)?;
    let svd = unitary_svd(&m)?;

    let conj = |x: &ComplexMatrix| -> Result<ComplexMatrix> { e.matmul(x)?.matmul(&e_dag) };
    let k1 = conj(&ComplexMatrix::from_real(&svd.o1))?;
    let a = conj(&ComplexMatrix::from_diagonal(&svd.d))?;
    let k2 = conj(&ComplexMatrix::from_real(&svd.o2))?;

    let residual = k1.matmul(&a)?.matmul(&k2)?.frobenius_distance(v)?;
    let dim = v.rows() as f64;
    if residual > 1e-8 * dim {
        return Err(Error::NumericalInconsistency {
            what: "reconstruction k1 a k2 differs from v".into(),
            residual,
        });
    }
    for (name, k) in [("k1", &k1), ("k2", &k2)] {
        let r = k_membership_residual(k)?;
        if r > 1e-8 {
            return Err(Error::NumericalInconsistency {
                what: format!("{name} is not in K"),
                residual: r,
            });
        }
    }
    let det_d: C64 = svd.d.iter().product();
    if (det_d - ONE).norm() > 1e-8 {
        return Err(Error::NumericalInconsistency {
            what: "product of the diagonal core is not 1".into(),
            residual: (det_d - ONE).norm(),
        });
    }
    Ok(CcdFactors {
        k1,
        a,
        k2,
        d: svd.d,
        residual,
        branch_flips: svd.branch_flips,
    })
}

/// Off-diagonal mass of `E0^dagger a E0`; zero exactly on the torus A.
pub fn a_membership_residual(a: &ComplexMatrix) -> Result<f64> {
    let n = a.require_qubits()?;
    if n % 2 == 1 {
        return Err(Error::UnsupportedParity { n });
    }
    let e = build_standard_entangler(n)?.matrix;
    Ok(e.adjoint().matmul(a)?.matmul(&e)?.off_diagonal_norm())
}
