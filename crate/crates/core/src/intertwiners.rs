//! Standard entangler and finagler, and certificates for candidate ones.
//!
//! An entangler `E` satisfies `E E^T = xi S`; a finagler `F` satisfies
//! `F Sigma^T F^T = xi S` with `Sigma = (-i sigma^y) (x) I_{N/2}`.

use crate::error::{Error, Result};
use crate::forms::{parity_sign, SpinFlip};
use crate::linalg::matrix::{ComplexMatrix, C64, ONE};
use crate::MAX_QUBITS;

/// Acceptance bound for certificate residuals.
pub const CERTIFY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntertwinerKind {
    Entangler,
    Finagler,
}

#[derive(Clone, Debug)]
pub struct Intertwiner {
    pub kind: IntertwinerKind,
    pub n_qubits: usize,
    pub matrix: ComplexMatrix,
    pub phase_xi: C64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certificate {
    pub ok: bool,
    pub xi: C64,
    pub residual: f64,
}

/// `Sigma = (-i sigma^y) (x) I_{N/2}` as a dense matrix.
pub fn sigma(n_qubits: usize) -> Result<ComplexMatrix> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::Size {
            n: n_qubits,
            cap: MAX_QUBITS,
        });
    }
    let dim = 1usize << n_qubits;
    let half = dim / 2;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for j in 0..half {
        m[(half + j, j)] = ONE;
        m[(j, half + j)] = -ONE;
    }
    Ok(m)
}

pub fn build_standard_entangler(n_qubits: usize) -> Result<Intertwiner> {
    if n_qubits % 2 == 1 {
        return Err(Error::EntanglerNonexistent { n: n_qubits });
    }
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::Size {
            n: n_qubits,
            cap: MAX_QUBITS,
        });
    }
    let dim = 1usize << n_qubits;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut e = ComplexMatrix::zeros(dim, dim);
    for j in 0..dim / 2 {
        let eps = parity_sign(j);
        e[(j, 2 * j)] = C64::new(h, 0.0);
        e[(j, 2 * j + 1)] = C64::new(0.0, h);
        e[(dim - 1 - j, 2 * j)] = C64::new(eps * h, 0.0);
        e[(dim - 1 - j, 2 * j + 1)] = C64::new(0.0, -eps * h);
    }
    finish(IntertwinerKind::Entangler, n_qubits, e)
}

/// The real standard finagler; `n` must be odd and at least 3.
pub fn build_standard_finagler(n_qubits: usize) -> Result<Intertwiner> {
    if n_qubits % 2 == 0 || n_qubits < 3 {
        return Err(Error::FinaglerArgument { n: n_qubits });
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::Size {
            n: n_qubits,
            cap: MAX_QUBITS,
        });
    }
    let dim = 1usize << n_qubits;
    let half = dim / 2;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut f = ComplexMatrix::zeros(dim, dim);
    for j in 0..half {
        let iota = parity_sign(j);
        f[(j, j)] = C64::new(h, 0.0);
        f[(dim - 1 - j, j)] = C64::new(h, 0.0);
        f[(j, half + j)] = C64::new(iota * h, 0.0);
        f[(dim - 1 - j, half + j)] = C64::new(-iota * h, 0.0);
    }
    finish(IntertwinerKind::Finagler, n_qubits, f)
}

fn finish(kind: IntertwinerKind, n_qubits: usize, matrix: ComplexMatrix) -> Result<Intertwiner> {
    let det = matrix.determinant()?;
    if (det - ONE).norm() > 1e-9 {
        return Err(Error::Structure(format!(
            "standard intertwiner has determinant {det}"
        )));
    }
    let cert = certify(&matrix, kind)?;
    if !cert.ok {
        return Err(Error::Structure(format!(
            "standard intertwiner fails its certificate (residual {:e})",
            cert.residual
        )));
    }
    Ok(Intertwiner {
        kind,
        n_qubits,
        matrix,
        phase_xi: cert.xi,
    })
}

/// Fits `m m^T` (entangler) or `m Sigma^T m^T` (finagler) against `xi S`.
pub fn certify(m: &ComplexMatrix, kind: IntertwinerKind) -> Result<Certificate> {
    let n_qubits = m.require_qubits()?;
    if n_qubits == 0 {
        return Err(Error::shape("dimension >= 2", m.rows()));
    }
    let product = match kind {
        IntertwinerKind::Entangler => m.matmul(&m.transpose())?,
        IntertwinerKind::Finagler => m
            .matmul(&sigma(n_qubits)?.transpose())?
            .matmul(&m.transpose())?,
    };
    let s = SpinFlip::new(n_qubits)?;
    let dim = m.rows();
    // least squares over the nonzero entries of S, projected onto |xi| = 1
    let fit: C64 = (0..dim)
        .map(|j| product[(dim - 1 - j, j)] * s.signs()[j])
        .sum::<C64>()
        / dim as f64;
    let xi = if fit.norm() > 0.0 {
        fit / fit.norm()
    } else {
        ONE
    };
    let residual = product.frobenius_distance(&s.dense().scale(xi))?;
    let root_defect = (xi.powu(dim as u32) - ONE).norm();
    Ok(Certificate {
        ok: residual <= CERTIFY_TOL && root_defect <= CERTIFY_TOL,
        xi,
        residual,
    })
}
