//! Spin flip, the concurrence form, and reference states.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::matrix::{qubits_for_dim, ComplexMatrix, C64, ONE, ZERO};
use crate::linalg::random::{complex_gaussian, seeded_rng};
use crate::MAX_QUBITS;

/// Tolerance on `| ||psi|| - 1 |` accepted by [`concurrence`].
pub const NORMALIZATION_TOL: f64 = 1e-8;

#[inline]
pub fn parity_sign(j: usize) -> f64 {
    if j.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Argument("need at least one qubit".into()));
    }
    if n > MAX_QUBITS {
        return Err(Error::Size { n, cap: MAX_QUBITS });
    }
    Ok(())
}

/// `S = (-i sigma^y)^{(x) n}` stored as the map `|j> -> s_j |N-1-j>`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinFlip {
    n_qubits: usize,
    signs: Vec<f64>,
}

impl SpinFlip {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let signs = (0..1usize << n_qubits).map(parity_sign).collect();
        Ok(Self { n_qubits, signs })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::shape(self.dim(), found));
        }
        Ok(())
    }

    pub fn apply_slice(&self, psi: &[C64]) -> Result<Vec<C64>> {
        self.check_dim(psi.len())?;
        let n = self.dim();
        let mut out = vec![ZERO; n];
        for (j, &amp) in psi.iter().enumerate() {
            out[n - 1 - j] = amp * self.signs[j];
        }
        Ok(out)
    }

    pub fn dense(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            m[(n - 1 - j, j)] = C64::new(self.signs[j], 0.0);
        }
        m
    }

    /// `S x`
    pub fn left(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(x.rows())?;
        let n = self.dim();
        Ok(ComplexMatrix::from_fn(n, x.cols(), |a, b| {
            x[(n - 1 - a, b)] * self.signs[n - 1 - a]
        }))
    }

    /// `x S`
    pub fn right(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(x.cols())?;
        let n = self.dim();
        Ok(ComplexMatrix::from_fn(x.rows(), n, |a, b| {
            x[(a, n - 1 - b)] * self.signs[b]
        }))
    }

    /// `S x S`
    pub fn sandwich(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.right(&self.left(x)?)
    }

    /// `S x S^T`
    pub fn sandwich_transpose(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(x.rows())?;
        self.check_dim(x.cols())?;
        let n = self.dim();
        Ok(ComplexMatrix::from_fn(n, n, |a, b| {
            let (ra, rb) = (n - 1 - a, n - 1 - b);
            x[(ra, rb)] * (self.signs[ra] * self.signs[rb])
        }))
    }
}

/// State vector on `n` qubits. Qubit 1 is the most significant bit of the
/// basis index.
#[derive(Clone, PartialEq)]
pub struct Ket {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl Ket {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_dim(amplitudes.len())
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::shape("power-of-two length >= 2", amplitudes.len()))?;
        if n_qubits > MAX_QUBITS {
            return Err(Error::Size {
                n: n_qubits,
                cap: MAX_QUBITS,
            });
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Precondition("ket has non-finite amplitudes".into()));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Index(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self {
            n_qubits,
            amplitudes: amps,
        })
    }

    pub fn ghz(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut amps = vec![ZERO; dim];
        amps[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[dim - 1] = amps[0];
        Ok(Self {
            n_qubits,
            amplitudes: amps,
        })
    }

    pub fn w(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        let amp = C64::new(1.0 / (n_qubits as f64).sqrt(), 0.0);
        let mut amps = vec![ZERO; dim];
        for q in 0..n_qubits {
            amps[1 << q] = amp;
        }
        Ok(Self {
            n_qubits,
            amplitudes: amps,
        })
    }

    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<Self> {
        check_qubits(n_qubits)?;
        let amps = (0..1usize << n_qubits)
            .map(|_| complex_gaussian(rng))
            .collect();
        let mut k = Self {
            n_qubits,
            amplitudes: amps,
        };
        k.renormalize()?;
        Ok(k)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn renormalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::Normalization { norm });
        }
        for z in &mut self.amplitudes {
            *z /= norm;
        }
        Ok(())
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            amplitudes: self.amplitudes.iter().map(|z| z * s).collect(),
        }
    }

    /// `self (x) other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &Ket) -> Result<Self> {
        let amps = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ket::new(amps)
    }

    pub fn inner(&self, other: &Ket) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::shape(self.dim(), other.dim()));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn distance(&self, other: &Ket) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::shape(self.dim(), other.dim()));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn apply(&self, u: &ComplexMatrix) -> Result<Ket> {
        Ok(Ket {
            n_qubits: self.n_qubits,
            amplitudes: u.mul_vec(&self.amplitudes)?,
        })
    }

    /// Applies a 2x2 operator to qubit `qubit` (1-based, qubit 1 most
    /// significant).
    pub fn apply_single_qubit(&self, qubit: usize, u: &ComplexMatrix) -> Result<Ket> {
        if u.rows() != 2 || u.cols() != 2 {
            return Err(Error::shape("2x2", format!("{}x{}", u.rows(), u.cols())));
        }
        let bit = self.bit_of(qubit)?;
        let mut out = self.amplitudes.clone();
        for j in 0..self.dim() {
            if j & bit == 0 {
                let (a0, a1) = (self.amplitudes[j], self.amplitudes[j | bit]);
                out[j] = u[(0, 0)] * a0 + u[(0, 1)] * a1;
                out[j | bit] = u[(1, 0)] * a0 + u[(1, 1)] * a1;
            }
        }
        Ok(Ket {
            n_qubits: self.n_qubits,
            amplitudes: out,
        })
    }

    /// Exchanges qubits `a` and `b` (1-based).
    pub fn swap_qubits(&self, a: usize, b: usize) -> Result<Ket> {
        let (ba, bb) = (self.bit_of(a)?, self.bit_of(b)?);
        let mut out = self.amplitudes.clone();
        for j in 0..self.dim() {
            let (xa, xb) = (j & ba != 0, j & bb != 0);
            if xa != xb {
                out[j ^ ba ^ bb] = self.amplitudes[j];
            }
        }
        Ok(Ket {
            n_qubits: self.n_qubits,
            amplitudes: out,
        })
    }

    pub(crate) fn bit_of(&self, qubit: usize) -> Result<usize> {
        if qubit == 0 || qubit > self.n_qubits {
            return Err(Error::Index(format!(
                "qubit {qubit} outside 1..={}",
                self.n_qubits
            )));
        }
        Ok(1 << (self.n_qubits - qubit))
    }
}

impl fmt::Debug for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ket")
            .field("n_qubits", &self.n_qubits)
            .field("amplitudes", &self.amplitudes)
            .finish()
    }
}

pub fn spin_flip_apply(s: &SpinFlip, psi: &Ket) -> Result<Ket> {
    Ok(Ket {
        n_qubits: psi.n_qubits,
        amplitudes: s.apply_slice(&psi.amplitudes)?,
    })
}

/// `phi^T S psi` on raw amplitude slices.
pub fn concurrence_form_slices(phi: &[C64], psi: &[C64]) -> Result<C64> {
    if phi.len() != psi.len() {
        return Err(Error::shape(phi.len(), psi.len()));
    }
    let n = psi.len();
    if qubits_for_dim(n).is_none() {
        return Err(Error::shape("power-of-two length", n));
    }
    Ok((0..n)
        .map(|j| phi[n - 1 - j] * psi[j] * parity_sign(j))
        .sum())
}

/// The bilinear concurrence form `phi^T S psi` (transpose, not adjoint).
pub fn concurrence_form(phi: &Ket, psi: &Ket) -> Result<C64> {
    concurrence_form_slices(&phi.amplitudes, &psi.amplitudes)
}

pub fn concurrence(psi: &Ket) -> Result<f64> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Normalization { norm });
    }
    Ok(concurrence_form(psi, psi)?.norm())
}

pub fn tangle(psi: &Ket) -> Result<f64> {
    concurrence(psi).map(|c| c * c)
}

/// Reference states accepted by [`make_state`].
///
/// Parses from `ghz`, `w`, `basis:<index>` and `random:<seed>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    Ghz,
    W,
    Basis(usize),
    Random(u64),
}

impl FromStr for StateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (head, arg) = match lower.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (lower.as_str(), None),
        };
        let bad = || Error::Argument(format!("unknown state kind '{s}'"));
        match (head, arg) {
            ("ghz", None) => Ok(StateKind::Ghz),
            ("w", None) => Ok(StateKind::W),
            ("basis", Some(a)) => a.parse().map(StateKind::Basis).map_err(|_| bad()),
            ("random", Some(a)) => a.parse().map(StateKind::Random).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

pub fn make_state(kind: StateKind, n_qubits: usize) -> Result<Ket> {
    match kind {
        StateKind::Ghz => Ket::ghz(n_qubits),
        StateKind::W => Ket::w(n_qubits),
        StateKind::Basis(j) => Ket::basis(n_qubits, j),
        StateKind::Random(seed) => Ket::random(n_qubits, &mut seeded_rng(seed, 0)),
    }
}

/// Haar-random element of SU(2).
pub fn random_su2<R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix {
    let (a, b) = loop {
        let a = complex_gaussian(rng);
        let b = complex_gaussian(rng);
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if norm > 0.0 {
            break (a / norm, b / norm);
        }
    };
    ComplexMatrix::from_rows(&[vec![a, -b.conj()], vec![b, a.conj()]]).expect("2x2 rows")
}

/// `v_1 (x) ... (x) v_n` for independent Haar-random `v_j` in SU(2).
pub fn random_local_unitary<R: Rng + ?Sized>(
    n_qubits: usize,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    check_qubits(n_qubits)?;
    let factors: Vec<ComplexMatrix> = (0..n_qubits).map(|_| random_su2(rng)).collect();
    ComplexMatrix::kron_all(&factors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn spin_flip_on_basis_states() {
        let s1 = SpinFlip::new(1).unwrap();
        let out = spin_flip_apply(&s1, &Ket::basis(1, 0).unwrap()).unwrap();
        assert_eq!(out, Ket::basis(1, 1).unwrap());

        let s2 = SpinFlip::new(2).unwrap();
        let out = spin_flip_apply(&s2, &Ket::basis(2, 1).unwrap()).unwrap();
        assert_eq!(out.amplitudes()[2], c(-1.0));

        let s3 = SpinFlip::new(3).unwrap();
        let out = spin_flip_apply(&s3, &Ket::basis(3, 5).unwrap()).unwrap();
        assert_eq!(out, Ket::basis(3, 2).unwrap());
    }

    #[test]
    fn dense_spin_flip_is_kron_of_single_qubit_factors() {
        let f = ComplexMatrix::from_rows(&[vec![ZERO, c(-1.0)], vec![ONE, ZERO]]).unwrap();
        for n in 1..=4 {
            let expected = ComplexMatrix::kron_all(&vec![f.clone(); n]).unwrap();
            assert_eq!(SpinFlip::new(n).unwrap().dense(), expected);
        }
    }

    #[test]
    fn matrix_helpers_agree_with_dense_products() {
        let mut rng = seeded_rng(8, 0);
        let s = SpinFlip::new(3).unwrap();
        let d = s.dense();
        let x = ComplexMatrix::from_fn(8, 8, |_, _| complex_gaussian(&mut rng));
        assert_eq!(s.left(&x).unwrap(), &d * &x);
        assert_eq!(s.right(&x).unwrap(), &x * &d);
        assert!(
            s.sandwich_transpose(&x)
                .unwrap()
                .frobenius_distance(&(&(&d * &x) * &d.transpose()))
                .unwrap()
                < 1e-14
        );
    }

    #[test]
    fn form_on_00_and_11() {
        let v = concurrence_form(&Ket::basis(2, 0).unwrap(), &Ket::basis(2, 3).unwrap()).unwrap();
        assert_eq!(v, ONE);
    }

    #[test]
    fn reference_state_concurrences() {
        for n in [2usize, 4, 6, 8] {
            assert!((concurrence(&Ket::ghz(n).unwrap()).unwrap() - 1.0).abs() < 1e-14);
            // the form factorizes over the halves, so odd halves give zero
            let half = Ket::ghz(n / 2).unwrap();
            let prod = half.tensor(&half).unwrap();
            let expected = if (n / 2) % 2 == 0 { 1.0 } else { 0.0 };
            assert!((concurrence(&prod).unwrap() - expected).abs() < 1e-14);
        }
        // on two qubits the W state is a Bell state
        assert!((concurrence(&Ket::w(2).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        for n in 3..=6 {
            assert!(concurrence(&Ket::w(n).unwrap()).unwrap() < 1e-15);
        }
        for n in 2..=6 {
            let g = Ket::ghz(n - 1)
                .unwrap()
                .tensor(&Ket::basis(1, 0).unwrap())
                .unwrap();
            assert!(concurrence(&g).unwrap() < 1e-15);
        }
    }

    #[test]
    fn make_state_examples() {
        let g = make_state("ghz".parse().unwrap(), 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(g.amplitudes(), &[c(h), ZERO, ZERO, c(h)]);
        let w = make_state(StateKind::W, 3).unwrap();
        let t = 1.0 / 3f64.sqrt();
        assert_eq!(
            w.amplitudes(),
            &[ZERO, c(t), c(t), ZERO, c(t), ZERO, ZERO, ZERO]
        );
        assert_eq!(
            make_state("basis:5".parse().unwrap(), 3).unwrap(),
            Ket::basis(3, 5).unwrap()
        );
        assert!(matches!(
            "bell".parse::<StateKind>(),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let k = Ket::ghz(2).unwrap().scaled(c(1.1));
        assert!(matches!(concurrence(&k), Err(Error::Normalization { .. })));
    }

    #[test]
    fn single_qubit_gate_matches_kron() {
        let mut rng = seeded_rng(3, 0);
        let k = Ket::random(3, &mut rng).unwrap();
        let u = random_su2(&mut rng);
        let full = ComplexMatrix::kron_all(&[
            ComplexMatrix::identity(2),
            u.clone(),
            ComplexMatrix::identity(2),
        ])
        .unwrap();
        let d = k
            .apply_single_qubit(2, &u)
            .unwrap()
            .distance(&k.apply(&full).unwrap())
            .unwrap();
        assert!(d < 1e-14);
    }
}
