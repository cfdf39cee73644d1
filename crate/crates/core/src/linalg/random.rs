//! Seeded random matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::matrix::{ComplexMatrix, RealMatrix, C64, ONE, ZERO};
use crate::MAX_QUBITS;

/// Generator for `(seed, stream)`. Distinct streams give independent
/// sequences, which lets trials be evaluated in any order.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

// Householder QR of a square matrix; returns Q with the phases of R's
// diagonal folded in, which is what makes Q Haar distributed.
fn haar_q(mut a: Vec<C64>, n: usize) -> ComplexMatrix {
    let mut reflectors: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut phases = vec![ONE; n];
    for k in 0..n {
        let norm = (k..n).map(|r| a[r * n + k].norm_sqr()).sum::<f64>().sqrt();
        let x0 = a[k * n + k];
        let ph = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -ph * norm;
        let mut v: Vec<C64> = (k..n).map(|r| a[r * n + k]).collect();
        v[0] -= alpha;
        let vn2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vn2 > 0.0 {
            for c in k..n {
                let dot: C64 = (k..n).map(|r| v[r - k].conj() * a[r * n + c]).sum();
                let f = dot * (2.0 / vn2);
                for r in k..n {
                    a[r * n + c] -= f * v[r - k];
                }
            }
        }
        let rkk = a[k * n + k];
        phases[k] = if rkk.norm() > 0.0 {
            rkk / rkk.norm()
        } else {
            ONE
        };
        reflectors.push(if vn2 > 0.0 { v } else { Vec::new() });
    }
    // Q = H_0 H_1 ... H_{n-1}, built by applying reflectors to the identity
    let mut q = ComplexMatrix::identity(n).as_slice().to_vec();
    for k in (0..n).rev() {
        let v = &reflectors[k];
        if v.is_empty() {
            continue;
        }
        let vn2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        for c in 0..n {
            let dot: C64 = (k..n).map(|r| v[r - k].conj() * q[r * n + c]).sum();
            if dot == ZERO {
                continue;
            }
            let f = dot * (2.0 / vn2);
            for r in k..n {
                q[r * n + c] -= f * v[r - k];
            }
        }
    }
    ComplexMatrix::from_fn(n, n, |r, c| q[r * n + c] * phases[c])
}

/// Haar-random unitary of dimension `dim`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let a: Vec<C64> = (0..dim * dim).map(|_| complex_gaussian(rng)).collect();
    haar_q(a, dim)
}

/// Haar-random element of SU(dim).
pub fn haar_special_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let u = haar_unitary(dim, rng);
    let det = u.determinant().unwrap_or(ONE);
    let fix = C64::from_polar(1.0, -det.arg() / dim as f64);
    u.scale(fix)
}

/// Haar-random element of SU(2^n) from a seed.
pub fn random_special_unitary(n: usize, seed: u64) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::Argument("need at least one qubit".into()));
    }
    if n > MAX_QUBITS {
        return Err(Error::Size { n, cap: MAX_QUBITS });
    }
    let mut rng = seeded_rng(seed, 0);
    Ok(haar_special_unitary(1 << n, &mut rng))
}

/// Haar-random element of SO(dim).
pub fn random_special_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> RealMatrix {
    let a: Vec<C64> = (0..dim * dim)
        .map(|_| C64::new(rng.sample(StandardNormal), 0.0))
        .collect();
    let q = haar_q(a, dim);
    let mut o = q.real_part();
    if dim > 0 && o.determinant().unwrap_or(1.0) < 0.0 {
        o.negate_column(0);
    }
    o
}

/// Uniformly random unit vector in C^dim.
pub fn random_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}
