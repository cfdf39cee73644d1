//! Mixed-state concurrence and the monotonicity checks.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{concurrence, concurrence_form, random_su2, Ket, SpinFlip};
use crate::linalg::eigen::{hermitian_eigh, singular_values};
use crate::linalg::matrix::{qubits_for_dim, ComplexMatrix, C64, ONE};
use crate::linalg::random::seeded_rng;
use crate::MAX_QUBITS;

pub const DENSITY_TOL: f64 = 1e-10;
/// Outcome probabilities below this count as impossible branches.
pub const BRANCH_TOL: f64 = 1e-12;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n_qubits = matrix.require_qubits()?;
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Size {
                n: n_qubits,
                cap: MAX_QUBITS,
            });
        }
        if !matrix.is_finite() {
            return Err(Error::Precondition(
                "density matrix has non-finite entries".into(),
            ));
        }
        let herm = matrix.hermitian_residual();
        if herm > DENSITY_TOL {
            return Err(Error::Precondition(format!(
                "density matrix is not Hermitian (residual {herm:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > DENSITY_TOL {
            return Err(Error::Precondition(format!("trace is {tr}, not 1")));
        }
        let lowest = hermitian_eigh(&matrix)?
            .values
            .first()
            .copied()
            .unwrap_or(0.0);
        if lowest < -DENSITY_TOL {
            return Err(Error::Precondition(format!(
                "density matrix has eigenvalue {lowest:e}"
            )));
        }
        Ok(Self { n_qubits, matrix })
    }

    pub fn pure(psi: &Ket) -> Result<Self> {
        let a = psi.amplitudes();
        let dim = a.len();
        Self::new(ComplexMatrix::from_fn(dim, dim, |r, c| a[r] * a[c].conj()))
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let dim = 1usize << n_qubits.min(MAX_QUBITS + 1);
        Self::new(ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)))
    }

    /// `sum_i weights[i] |psi_i><psi_i|`; weights must sum to one.
    pub fn from_ensemble(weights: &[f64], kets: &[Ket]) -> Result<Self> {
        if weights.len() != kets.len() || kets.is_empty() {
            return Err(Error::shape(weights.len(), kets.len()));
        }
        let dim = kets[0].dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (w, k) in weights.iter().zip(kets) {
            if k.dim() != dim {
                return Err(Error::shape(dim, k.dim()));
            }
            let a = k.amplitudes();
            for r in 0..dim {
                for c in 0..dim {
                    m[(r, c)] += a[r] * a[c].conj() * *w;
                }
            }
        }
        Self::new(m)
    }

    /// `p a + (1 - p) b`
    pub fn mix(p: f64, a: &DensityMatrix, b: &DensityMatrix) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Argument(format!("mixing weight {p} outside [0, 1]")));
        }
        let m = &a.matrix.scale(C64::new(p, 0.0)) + &b.matrix.scale(C64::new(1.0 - p, 0.0));
        Self::new(m)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `u rho u^dagger`
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        Self::new(u.matmul(&self.matrix)?.matmul(&u.adjoint())?)
    }
}

/// Mixed-state concurrence `max(0, l_0 - l_1 - ... - l_{N-1})`, with `l_j`
/// the square roots of the eigenvalues of `rho rho~` in non-increasing order.
///
/// With `rho = V V^dagger` those roots are the singular values of the
/// symmetric matrix `V^T S V`, which is what is computed here.
pub fn mixed_concurrence(rho: &DensityMatrix) -> Result<f64> {
    let lambdas = concurrence_spectrum_values(rho)?;
    let lead = lambdas.first().copied().unwrap_or(0.0);
    let rest: f64 = lambdas.iter().skip(1).sum();
    Ok((lead - rest).max(0.0))
}

/// Square roots of the eigenvalues of `rho rho~`, non-increasing; only the
/// nonzero part of the spectrum (at most `rank rho` values) is returned.
pub fn concurrence_spectrum_values(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let n = rho.n_qubits;
    if n % 2 == 1 {
        return Err(Error::UnsupportedParity { n });
    }
    let eig = hermitian_eigh(&rho.matrix)?;
    let dim = rho.matrix.rows();
    let cols: Vec<usize> = (0..dim).filter(|&j| eig.values[j] > 1e-13).collect();
    if cols.is_empty() {
        return Ok(vec![]);
    }
    let v = ComplexMatrix::from_fn(dim, cols.len(), |r, c| {
        eig.vectors[(r, cols[c])] * eig.values[cols[c]].sqrt()
    });
    let s = SpinFlip::new(n)?;
    let t = v.transpose().matmul(&s.left(&v)?)?;
    singular_values(&t)
}

/// Permutation matrix exchanging qubits `j < k` (1-based).
pub fn swap_operator(j: usize, k: usize, n_qubits: usize) -> Result<ComplexMatrix> {
    if !(1 <= j && j < k && k <= n_qubits) {
        return Err(Error::Index(format!(
            "need 1 <= j < k <= {n_qubits}, got j = {j}, k = {k}"
        )));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::Size {
            n: n_qubits,
            cap: MAX_QUBITS,
        });
    }
    let dim = 1usize << n_qubits;
    let (bj, bk) = (1 << (n_qubits - j), 1 << (n_qubits - k));
    let mut m = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let row = if (col & bj != 0) != (col & bk != 0) {
            col ^ bj ^ bk
        } else {
            col
        };
        m[(row, col)] = ONE;
    }
    Ok(m)
}

/// Two-outcome POVM on one qubit: `A0 = u0 diag(q, r) v`,
/// `A1 = u1 diag(sqrt(1-q^2), sqrt(1-r^2)) v`.
#[derive(Clone, Debug)]
pub struct PovmPair {
    pub q: f64,
    pub r: f64,
    pub u0: ComplexMatrix,
    pub u1: ComplexMatrix,
    pub v: ComplexMatrix,
    /// 1-based, qubit 1 most significant.
    pub acting_qubit: usize,
}

fn check_su2(name: &str, u: &ComplexMatrix) -> Result<()> {
    if u.rows() != 2 || u.cols() != 2 {
        return Err(Error::shape("2x2", format!("{}x{}", u.rows(), u.cols())));
    }
    let unit = u.unitarity_residual().unwrap_or(f64::INFINITY);
    let det = u.determinant()?;
    if unit > 1e-10 || (det - ONE).norm() > 1e-10 {
        return Err(Error::Precondition(format!("{name} is not in SU(2)")));
    }
    Ok(())
}

impl PovmPair {
    pub fn new(
        q: f64,
        r: f64,
        u0: ComplexMatrix,
        u1: ComplexMatrix,
        v: ComplexMatrix,
        acting_qubit: usize,
    ) -> Result<Self> {
        for (name, x) in [("q", q), ("r", r)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Argument(format!("{name} = {x} outside [0, 1]")));
            }
        }
        check_su2("u0", &u0)?;
        check_su2("u1", &u1)?;
        check_su2("v", &v)?;
        if acting_qubit == 0 {
            return Err(Error::Index("qubits are numbered from 1".into()));
        }
        Ok(Self {
            q,
            r,
            u0,
            u1,
            v,
            acting_qubit,
        })
    }

    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let q = rng.random::<f64>();
        let r = rng.random::<f64>();
        let u0 = random_su2(rng);
        let u1 = random_su2(rng);
        let v = random_su2(rng);
        let acting_qubit = rng.random_range(1..=n_qubits.max(1));
        Self {
            q,
            r,
            u0,
            u1,
            v,
            acting_qubit,
        }
    }

    fn diag(a: f64, b: f64) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&[C64::new(a, 0.0), C64::new(b, 0.0)])
    }

    pub fn a0(&self) -> ComplexMatrix {
        &(&self.u0 * &Self::diag(self.q, self.r)) * &self.v
    }

    pub fn a1(&self) -> ComplexMatrix {
        let c = |x: f64| (1.0 - x * x).max(0.0).sqrt();
        &(&self.u1 * &Self::diag(c(self.q), c(self.r))) * &self.v
    }

    /// `||A0^dagger A0 + A1^dagger A1 - I||_F`
    pub fn completeness_residual(&self) -> f64 {
        let (a0, a1) = (self.a0(), self.a1());
        let sum = &(&a0.adjoint() * &a0) + &(&a1.adjoint() * &a1);
        sum.frobenius_distance(&ComplexMatrix::identity(2))
            .unwrap_or(f64::INFINITY)
    }

    /// `qr + sqrt((1-q^2)(1-r^2))`
    pub fn factor(&self) -> f64 {
        self.q * self.r
            + ((1.0 - self.q * self.q) * (1.0 - self.r * self.r))
                .max(0.0)
                .sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PovmOutcome {
    pub c_before: f64,
    pub avg_after: f64,
    pub p0: f64,
    pub p1: f64,
    /// `qr + sqrt((1-q^2)(1-r^2))`
    pub factor: f64,
    /// Set when some branch had probability below [`BRANCH_TOL`].
    pub zero_branch: bool,
}

pub fn povm_trial(psi: &Ket, povm: &PovmPair) -> Result<PovmOutcome> {
    let c_before = concurrence(psi)?;
    if povm.acting_qubit > psi.n_qubits() {
        return Err(Error::Index(format!(
            "qubit {} outside 1..={}",
            povm.acting_qubit,
            psi.n_qubits()
        )));
    }
    let mut avg_after = 0.0;
    let mut probs = [0.0; 2];
    let mut zero_branch = false;
    for (i, a) in [povm.a0(), povm.a1()].iter().enumerate() {
        let branch = psi.apply_single_qubit(povm.acting_qubit, a)?;
        let p = branch.norm().powi(2);
        probs[i] = p;
        if p < BRANCH_TOL {
            zero_branch = true;
            continue;
        }
        // p * C(branch / sqrt(p)) = |Q(branch)|
        avg_after += concurrence_form(&branch, &branch)?.norm();
    }
    Ok(PovmOutcome {
        c_before,
        avg_after,
        p0: probs[0],
        p1: probs[1],
        factor: povm.factor(),
        zero_branch,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvexityOutcome {
    /// `C(p rho1 + (1-p) rho2)`
    pub lhs: f64,
    /// `p C(rho1) + (1-p) C(rho2)`
    pub rhs: f64,
    pub holds: bool,
}

pub fn convexity_check(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    p: f64,
) -> Result<ConvexityOutcome> {
    let mixed = DensityMatrix::mix(p, rho1, rho2)?;
    let lhs = mixed_concurrence(&mixed)?;
    let rhs = p * mixed_concurrence(rho1)? + (1.0 - p) * mixed_concurrence(rho2)?;
    Ok(ConvexityOutcome {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-8,
    })
}

/// Random rank-`rank` density matrix from Haar-random kets and uniform
/// weights.
pub fn random_density<R: Rng + ?Sized>(
    n_qubits: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let kets: Vec<Ket> = (0..rank.max(1))
        .map(|_| Ket::random(n_qubits, rng))
        .collect::<Result<_>>()?;
    let raw: Vec<f64> = (0..kets.len())
        .map(|_| rng.random::<f64>() + 1e-3)
        .collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    DensityMatrix::from_ensemble(&weights, &kets)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub check: String,
    pub trial: u64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneReport {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub povm_violations: u64,
    /// Largest `avg_after - c_before` seen.
    pub povm_max_excess: f64,
    /// Largest `|avg_after - factor * c_before|` seen.
    pub povm_max_factor_error: f64,
    pub zero_branches: u64,
    pub convexity_violations: u64,
    pub convexity_max_excess: f64,
    pub witnesses: Vec<Witness>,
    pub pass: bool,
}

/// Runs `trials` POVM trials and `trials` convexity trials on random inputs.
/// Trial `t` draws from stream `t` (POVM) and `trials + t` (convexity).
pub fn monotone_sweep(n_qubits: usize, trials: u64, seed: u64) -> Result<MonotoneReport> {
    if n_qubits % 2 == 1 {
        return Err(Error::UnsupportedParity { n: n_qubits });
    }
    if trials == 0 {
        return Err(Error::Argument("trials must be positive".into()));
    }
    if qubits_for_dim(1usize << n_qubits).is_none() || n_qubits > MAX_QUBITS {
        return Err(Error::Size {
            n: n_qubits,
            cap: MAX_QUBITS,
        });
    }
    let povm: Vec<(u64, PovmOutcome)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeded_rng(seed, t);
            let psi = Ket::random(n_qubits, &mut rng)?;
            let pair = PovmPair::random(n_qubits, &mut rng);
            povm_trial(&psi, &pair).map(|o| (t, o))
        })
        .collect::<Result<_>>()?;
    let convex: Vec<(u64, ConvexityOutcome)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeded_rng(seed, trials + t);
            let r1 = random_density(n_qubits, 2, &mut rng)?;
            let r2 = random_density(n_qubits, 2, &mut rng)?;
            let p = rng.random::<f64>();
            convexity_check(&r1, &r2, p).map(|o| (t, o))
        })
        .collect::<Result<_>>()?;

    let mut report = MonotoneReport {
        n: n_qubits,
        trials,
        seed,
        povm_violations: 0,
        povm_max_excess: f64::NEG_INFINITY,
        povm_max_factor_error: 0.0,
        zero_branches: 0,
        convexity_violations: 0,
        convexity_max_excess: f64::NEG_INFINITY,
        witnesses: Vec::new(),
        pass: true,
    };
    for (t, o) in povm {
        let excess = o.avg_after - o.c_before;
        report.povm_max_excess = report.povm_max_excess.max(excess);
        report.povm_max_factor_error = report
            .povm_max_factor_error
            .max((o.avg_after - o.factor * o.c_before).abs());
        report.zero_branches += u64::from(o.zero_branch);
        if excess > 1e-9 {
            report.povm_violations += 1;
            report.witnesses.push(Witness {
                check: "povm".into(),
                trial: t,
                lhs: o.avg_after,
                rhs: o.c_before,
            });
        }
    }
    for (t, o) in convex {
        report.convexity_max_excess = report.convexity_max_excess.max(o.lhs - o.rhs);
        if !o.holds {
            report.convexity_violations += 1;
            report.witnesses.push(Witness {
                check: "convexity".into(),
                trial: t,
                lhs: o.lhs,
                rhs: o.rhs,
            });
        }
    }
    report.pass = report.povm_violations == 0
        && report.convexity_violations == 0
        && report.povm_max_factor_error <= 1e-8;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghz_density_has_unit_concurrence() {
        for n in [2usize, 4] {
            let rho = DensityMatrix::pure(&Ket::ghz(n).unwrap()).unwrap();
            assert!((mixed_concurrence(&rho).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn maximally_mixed_has_zero_concurrence() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let l = concurrence_spectrum_values(&rho).unwrap();
        assert!(l.iter().all(|x| (x - 0.25).abs() < 1e-12));
        assert_eq!(mixed_concurrence(&rho).unwrap(), 0.0);
    }

    #[test]
    fn w_density_has_zero_concurrence_for_four_qubits() {
        let rho = DensityMatrix::pure(&Ket::w(4).unwrap()).unwrap();
        assert!(mixed_concurrence(&rho).unwrap() < 1e-12);
    }

    #[test]
    fn invalid_density_is_rejected() {
        let m = ComplexMatrix::identity(4);
        assert!(matches!(DensityMatrix::new(m), Err(Error::Precondition(_))));
        let m = ComplexMatrix::from_diagonal(&[C64::new(1.5, 0.0), C64::new(-0.5, 0.0)]);
        assert!(matches!(DensityMatrix::new(m), Err(Error::Precondition(_))));
    }

    #[test]
    fn odd_qubits_are_unsupported() {
        let rho = DensityMatrix::maximally_mixed(3).unwrap();
        assert!(matches!(
            mixed_concurrence(&rho),
            Err(Error::UnsupportedParity { n: 3 })
        ));
    }

    #[test]
    fn swap_operator_examples() {
        let s = swap_operator(1, 2, 2).unwrap();
        let k = Ket::basis(2, 1).unwrap().apply(&s).unwrap();
        assert_eq!(k, Ket::basis(2, 2).unwrap());
        assert_eq!(&s * &s, ComplexMatrix::identity(4));
        assert!(matches!(swap_operator(2, 2, 3), Err(Error::Index(_))));
        assert!(matches!(swap_operator(1, 4, 3), Err(Error::Index(_))));
    }

    #[test]
    fn swap_operator_matches_ket_swap() {
        let mut rng = seeded_rng(2, 0);
        let k = Ket::random(3, &mut rng).unwrap();
        let p = swap_operator(1, 3, 3).unwrap();
        assert_eq!(k.swap_qubits(1, 3).unwrap(), k.apply(&p).unwrap());
    }

    #[test]
    fn projective_measurement_on_ghz() {
        let id = ComplexMatrix::identity(2);
        let povm = PovmPair::new(1.0, 0.0, id.clone(), id.clone(), id, 1).unwrap();
        let o = povm_trial(&Ket::ghz(2).unwrap(), &povm).unwrap();
        assert!(o.avg_after.abs() < 1e-15);
        assert!((o.p0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn povm_completeness() {
        let mut rng = seeded_rng(4, 0);
        for _ in 0..20 {
            assert!(PovmPair::random(4, &mut rng).completeness_residual() < 1e-12);
        }
    }

    #[test]
    fn small_sweep_passes() {
        let r = monotone_sweep(2, 50, 7).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
