//! Transport between kets with the same concurrence by an element of K.

use crate::error::{Error, Result};
use crate::forms::{concurrence_form, Ket, NORMALIZATION_TOL};
use crate::intertwiners::build_standard_entangler;
use crate::linalg::matrix::{ComplexMatrix, RealMatrix, C64};

/// Accepted mismatch between `|Q(psi)|` and `|Q(phi)|`.
pub const Q_TOL: f64 = 1e-8;
const DEGENERATE: f64 = 1e-14;

/// `k psi = e^{i theta} phi` with `k` in K.
#[derive(Clone, Debug)]
pub struct Transport {
    pub k: ComplexMatrix,
    pub theta: f64,
    pub residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// Orthonormal basis whose leading columns span `lead` (in order), completed
// from the standard basis by twice-iterated Gram-Schmidt.
fn complete_basis(lead: &[Vec<f64>], dim: usize) -> Result<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim);
    let candidates = lead.iter().cloned().chain((0..dim).map(|j| {
        let mut e = vec![0.0; dim];
        e[j] = 1.0;
        e
    }));
    for mut v in candidates {
        if basis.len() == dim {
            break;
        }
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            basis.push(v);
        } else if basis.len() < lead.len() {
            return Err(Error::Degeneracy("leading vectors are dependent".into()));
        }
    }
    if basis.len() != dim {
        return Err(Error::Degeneracy("basis completion fell short".into()));
    }
    Ok(basis)
}

fn as_columns(basis: &[Vec<f64>]) -> RealMatrix {
    let dim = basis.len();
    RealMatrix::from_fn(dim, dim, |r, c| basis[c][r])
}

/// Finds `k` in K and a phase `theta` with `k psi = e^{i theta} phi`.
///
/// Needs `|Q(psi)| = |Q(phi)|`; the phase absorbs any difference in the
/// argument of `Q`, and is zero when the values agree.
pub fn orbit_transport(psi: &Ket, phi: &Ket, n_qubits: usize) -> Result<Transport> {
    if n_qubits % 2 == 1 {
        return Err(Error::UnsupportedParity { n: n_qubits });
    }
    if psi.n_qubits() != n_qubits || phi.n_qubits() != n_qubits {
        return Err(Error::shape(
            1usize << n_qubits,
            format!("{} and {}", psi.dim(), phi.dim()),
        ));
    }
    for k in [psi, phi] {
        if !k.is_normalized(NORMALIZATION_TOL) {
            return Err(Error::Normalization { norm: k.norm() });
        }
    }
    let q_psi = concurrence_form(psi, psi)?;
    let q_phi = concurrence_form(phi, phi)?;
    if (q_psi.norm() - q_phi.norm()).abs() > Q_TOL {
        return Err(Error::Precondition(format!(
            "concurrences differ: |Q(psi)| = {}, |Q(phi)| = {}",
            q_psi.norm(),
            q_phi.norm()
        )));
    }
    let theta = if q_psi.norm() > Q_TOL && q_phi.norm() > Q_TOL {
        0.5 * (q_psi.arg() - q_phi.arg())
    } else {
        0.0
    };
    let phase = C64::from_polar(1.0, theta);
    let dephase = if q_psi.norm() > 0.0 {
        C64::from_polar(1.0, -0.5 * q_psi.arg())
    } else {
        C64::new(1.0, 0.0)
    };
    let target = phi.scaled(phase * dephase);
    let source = psi.scaled(dephase);

    let e = build_standard_entangler(n_qubits)?.matrix;
    let e_dag = e.adjoint();
    let x = e_dag.mul_vec(source.amplitudes())?;
    let y = e_dag.mul_vec(target.amplitudes())?;
    let dim = x.len();

    let split = |z: &[C64]| -> (Vec<f64>, Vec<f64>) {
        (
            z.iter().map(|c| c.re).collect(),
            z.iter().map(|c| c.im).collect(),
        )
    };
    let (v1, v2) = split(&x);
    let (w1, w2) = split(&y);
    let unit = |v: &[f64]| {
        let nv = norm(v);
        v.iter().map(|x| x / nv).collect::<Vec<f64>>()
    };
    let degenerate = norm(&v2) < DEGENERATE || norm(&w2) < DEGENERATE;
    let (lead_x, lead_y) = if degenerate {
        (vec![unit(&v1)], vec![unit(&w1)])
    } else {
        (vec![unit(&v1), unit(&v2)], vec![unit(&w1), unit(&w2)])
    };
    let qx = as_columns(&complete_basis(&lead_x, dim)?);
    let mut qy = as_columns(&complete_basis(&lead_y, dim)?);
    let sign = qx.determinant()? * qy.determinant()?;
    if sign < 0.0 {
        if dim <= lead_y.len() {
            return Err(Error::Degeneracy("no room to fix the determinant".into()));
        }
        qy.negate_column(dim - 1);
    }
    let o = qy.matmul(&qx.transpose())?;
    let k = e.matmul(&ComplexMatrix::from_real(&o))?.matmul(&e_dag)?;

    let moved = psi.apply(&k)?;
    let residual = moved.distance(&phi.scaled(phase))?;
    Ok(Transport { k, theta, residual })
}
