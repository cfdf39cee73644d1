//! Cartan involution, the k/p splitting, and coordinate bases for `a` and `k`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::forms::{parity_sign, SpinFlip};
use crate::intertwiners::sigma;
use crate::linalg::matrix::{ComplexMatrix, C64, I, ZERO};
use crate::MAX_QUBITS;

/// Tolerance for the anti-Hermitian/traceless precondition of [`theta`].
pub const ALGEBRA_TOL: f64 = 1e-8;
/// Pivot threshold of the rank-revealing elimination.
pub const PIVOT_TOL: f64 = 1e-10;

fn check_algebra_qubits(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Argument(format!("need n >= 2 qubits, got {n}")));
    }
    if n > MAX_QUBITS {
        return Err(Error::Size { n, cap: MAX_QUBITS });
    }
    Ok(())
}

/// A matrix given by its nonzero entries `(row, col, value)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseGenerator {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseGenerator {
    // merges repeated positions and drops cancelled entries
    fn from_terms(dim: usize, terms: &[(usize, usize, C64)]) -> Self {
        let mut acc: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for &(r, c, v) in terms {
            *acc.entry((r, c)).or_insert(ZERO) += v;
        }
        let entries = acc
            .into_iter()
            .filter(|(_, v)| v.norm() > 0.0)
            .map(|((r, c), v)| (r, c, v))
            .collect();
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }
}

/// `x = k_part + p_part` with `theta(k_part) = k_part`, `theta(p_part) = -p_part`.
#[derive(Clone, Debug)]
pub struct CartanSplit {
    pub k_part: ComplexMatrix,
    pub p_part: ComplexMatrix,
}

fn check_su(x: &ComplexMatrix) -> Result<usize> {
    let n = x.require_qubits()?;
    if n == 0 {
        return Err(Error::shape("dimension >= 2", x.rows()));
    }
    let scale = 1.0 + x.frobenius_norm();
    let ah = x.anti_hermitian_residual();
    if ah > ALGEBRA_TOL * scale {
        return Err(Error::Precondition(format!(
            "matrix is not anti-Hermitian (||x + x^dagger||_F = {ah:e})"
        )));
    }
    let tr = x.trace().norm();
    if tr > ALGEBRA_TOL * scale {
        return Err(Error::Precondition(format!(
            "matrix is not traceless (|tr x| = {tr:e})"
        )));
    }
    Ok(n)
}

/// `theta(x) = (-1)^n S conj(x) S`.
pub fn theta(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = check_su(x)?;
    let s = SpinFlip::new(n)?;
    let out = s.sandwich(&x.conj())?;
    Ok(if n % 2 == 1 {
        out.scale(C64::new(-1.0, 0.0))
    } else {
        out
    })
}

pub fn split(x: &ComplexMatrix) -> Result<CartanSplit> {
    let t = theta(x)?;
    let half = C64::new(0.5, 0.0);
    Ok(CartanSplit {
        k_part: (x + &t).scale(half),
        p_part: (x - &t).scale(half),
    })
}

/// `||v^T S v - S||_F`; zero exactly on the group K.
pub fn k_membership_residual(v: &ComplexMatrix) -> Result<f64> {
    let n = v.require_qubits()?;
    let s = SpinFlip::new(n.max(1))?;
    let svs = v.transpose().matmul(&s.left(v)?)?;
    svs.frobenius_distance(&s.dense())
}

#[allow(non_snake_case)]
pub fn is_in_K(v: &ComplexMatrix, tol: f64) -> Result<bool> {
    let unit = v
        .unitarity_residual()
        .ok_or_else(|| Error::shape("square matrix", format!("{}x{}", v.rows(), v.cols())))?;
    if unit > tol.max(1e-8) {
        return Err(Error::Precondition(format!(
            "matrix is not unitary (||v^dagger v - I||_F = {unit:e})"
        )));
    }
    Ok(k_membership_residual(v)? <= tol)
}

/// `||w^T Sigma w - Sigma||_F`, the symplectic defect used for odd `n`.
pub fn symplectic_residual(w: &ComplexMatrix) -> Result<f64> {
    let n = w.require_qubits()?;
    let sig = sigma(n)?;
    w.transpose()
        .matmul(&sig)?
        .matmul(w)?
        .frobenius_distance(&sig)
}

/// Commuting generators spanning the abelian subalgebra `a` of `p`.
#[derive(Clone, Debug)]
pub struct ABasis {
    pub n_qubits: usize,
    pub generators: Vec<SparseGenerator>,
}

impl ABasis {
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// `sum_j coeffs[j] * H_j` as a dense matrix.
    pub fn combine(&self, coeffs: &[f64]) -> Result<ComplexMatrix> {
        if coeffs.len() != self.generators.len() {
            return Err(Error::shape(self.generators.len(), coeffs.len()));
        }
        let dim = 1usize << self.n_qubits;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (g, &c) in self.generators.iter().zip(coeffs) {
            for &(r, col, v) in g.entries() {
                m[(r, col)] += v * c;
            }
        }
        Ok(m)
    }
}

pub fn build_a_basis(n_qubits: usize) -> Result<ABasis> {
    check_algebra_qubits(n_qubits)?;
    let dim = 1usize << n_qubits;
    let half = dim / 2;
    let mut generators = Vec::new();
    for j in 0..half - 1 {
        generators.push(SparseGenerator::from_terms(
            dim,
            &[
                (j, j, I),
                (dim - j - 1, dim - j - 1, I),
                (j + 1, j + 1, -I),
                (dim - j - 2, dim - j - 2, -I),
            ],
        ));
    }
    if n_qubits % 2 == 0 {
        for j in 0..half {
            generators.push(SparseGenerator::from_terms(
                dim,
                &[(j, dim - j - 1, I), (dim - j - 1, j, I)],
            ));
        }
    }
    Ok(ABasis {
        n_qubits,
        generators,
    })
}

/// A maximal linearly independent set of `k` generators in coordinates.
#[derive(Clone, Debug)]
pub struct KBasis {
    pub n_qubits: usize,
    pub generators: Vec<SparseGenerator>,
    /// `separation_counts[d]` is the number of basis elements built from
    /// index pairs with `|k - j| = d`.
    pub separation_counts: Vec<usize>,
}

impl KBasis {
    pub fn dimension(&self) -> usize {
        self.generators.len()
    }
}

// All coordinate generators attached to the index-pair orbit of {j, k}.
fn orbit_generators(dim: usize, j: usize, k: usize) -> Vec<SparseGenerator> {
    let bar = |x: usize| dim - 1 - x;
    let mut pairs = vec![(j, k), (k, j), (bar(k), bar(j)), (bar(j), bar(k))];
    pairs.sort_unstable();
    pairs.dedup();
    let mut out = Vec::new();
    for (j, k) in pairs {
        let s = parity_sign(j) * parity_sign(k);
        let (jb, kb) = (bar(j), bar(k));
        let one = C64::new(1.0, 0.0);
        out.push(SparseGenerator::from_terms(
            dim,
            &[
                (k, j, one),
                (j, k, -one),
                (kb, jb, one * s),
                (jb, kb, -one * s),
            ],
        ));
        out.push(SparseGenerator::from_terms(
            dim,
            &[(k, j, I), (j, k, I), (jb, kb, -I * s), (kb, jb, -I * s)],
        ));
        if j == k {
            out.push(SparseGenerator::from_terms(dim, &[(j, j, I), (jb, jb, -I)]));
        }
    }
    out.retain(|g| !g.is_zero());
    let mut unique: Vec<SparseGenerator> = Vec::with_capacity(out.len());
    for g in out {
        if !unique.contains(&g) {
            unique.push(g);
        }
    }
    unique
}

// Indices of a maximal independent subset, by reduced row echelon elimination
// over the real coordinates.
fn independent_subset(gens: &[SparseGenerator]) -> Vec<usize> {
    let mut positions: Vec<(usize, usize)> = gens
        .iter()
        .flat_map(|g| g.entries().iter().map(|&(r, c, _)| (r, c)))
        .collect();
    positions.sort_unstable();
    positions.dedup();
    let width = 2 * positions.len();
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut chosen = Vec::new();
    for (idx, g) in gens.iter().enumerate() {
        let mut v = vec![0.0; width];
        for &(r, c, z) in g.entries() {
            let p = positions.binary_search(&(r, c)).expect("known position");
            v[2 * p] = z.re;
            v[2 * p + 1] = z.im;
        }
        for (piv, row) in &rows {
            let f = v[*piv];
            if f != 0.0 {
                v.iter_mut().zip(row).for_each(|(a, b)| *a -= f * b);
            }
        }
        let (piv, mag) = v
            .iter()
            .enumerate()
            .map(|(i, x)| (i, x.abs()))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= PIVOT_TOL {
            continue;
        }
        let p = v[piv];
        v.iter_mut().for_each(|x| *x /= p);
        for (_, row) in rows.iter_mut() {
            let f = row[piv];
            if f != 0.0 {
                row.iter_mut().zip(&v).for_each(|(a, b)| *a -= f * b);
            }
        }
        rows.push((piv, v));
        chosen.push(idx);
    }
    chosen
}

// Canonical unordered pairs, one per orbit under (j, k) -> (N-1-k, N-1-j).
fn canonical_pairs(dim: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..dim).flat_map(move |j| {
        (j..dim).filter_map(move |k| {
            let mirrored = (dim - 1 - k, dim - 1 - j);
            ((j, k) <= mirrored).then_some((j, k))
        })
    })
}

/// Generates the three coordinate families over all index pairs and keeps a
/// maximal independent subset.
///
/// Generators from different pair orbits have disjoint supports, so rank is
/// decided orbit by orbit.
pub fn enumerate_k_basis(n_qubits: usize) -> Result<KBasis> {
    check_algebra_qubits(n_qubits)?;
    let dim = 1usize << n_qubits;
    let mut generators = Vec::new();
    let mut separation_counts = vec![0; dim];
    for (j, k) in canonical_pairs(dim) {
        let gens = orbit_generators(dim, j, k);
        let keep = independent_subset(&gens);
        separation_counts[k - j] += keep.len();
        let mut gens: Vec<Option<SparseGenerator>> = gens.into_iter().map(Some).collect();
        generators.extend(
            keep.into_iter()
                .map(|i| gens[i].take().expect("chosen once")),
        );
    }
    Ok(KBasis {
        n_qubits,
        generators,
        separation_counts,
    })
}

/// Outcome of comparing the coordinate basis against the classification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionReport {
    pub n_qubits: usize,
    pub k_dimension: usize,
    pub expected_k_dimension: usize,
    pub a_rank: usize,
    pub expected_a_rank: usize,
    pub separation_counts: Vec<usize>,
}

pub fn dimension_check(n_qubits: usize) -> Result<DimensionReport> {
    check_algebra_qubits(n_qubits)?;
    let dim = 1usize << n_qubits;
    let (expected_k_dimension, expected_a_rank) = if n_qubits % 2 == 0 {
        (dim * (dim - 1) / 2, dim - 1)
    } else {
        ((dim / 2) * (dim + 1), dim / 2 - 1)
    };
    let k = enumerate_k_basis(n_qubits)?;
    let a_rank = build_a_basis(n_qubits)?.len();
    let report = DimensionReport {
        n_qubits,
        k_dimension: k.dimension(),
        expected_k_dimension,
        a_rank,
        expected_a_rank,
        separation_counts: k.separation_counts,
    };
    if report.k_dimension != expected_k_dimension || a_rank != expected_a_rank {
        return Err(Error::Structure(format!(
            "n = {n_qubits}: dim k = {} (expected {expected_k_dimension}), rank a = {a_rank} (expected {expected_a_rank})",
            report.k_dimension
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_qubit_a_basis_matches_display() {
        let a = build_a_basis(2).unwrap();
        assert_eq!(a.len(), 3);
        let d = a.generators[0].dense();
        assert_eq!(d.diagonal(), vec![I, -I, -I, I]);
        assert_eq!(a.generators[1].entries(), &[(0, 3, I), (3, 0, I)]);
        assert_eq!(a.generators[2].entries(), &[(1, 2, I), (2, 1, I)]);
    }

    #[test]
    fn small_k_dimensions() {
        assert_eq!(enumerate_k_basis(2).unwrap().dimension(), 6);
        let k3 = enumerate_k_basis(3).unwrap();
        assert_eq!(k3.dimension(), 36);
        assert_eq!(k3.separation_counts, vec![4, 8, 6, 6, 4, 4, 2, 2]);
    }

    #[test]
    fn dimension_reports() {
        let r = dimension_check(2).unwrap();
        assert_eq!((r.k_dimension, r.a_rank), (6, 3));
        let r = dimension_check(3).unwrap();
        assert_eq!((r.k_dimension, r.a_rank), (36, 3));
        let r = dimension_check(4).unwrap();
        assert_eq!((r.k_dimension, r.a_rank), (120, 15));
    }

    #[test]
    fn theta_rejects_hermitian_input() {
        let h = ComplexMatrix::from_diagonal(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]);
        assert!(matches!(theta(&h), Err(Error::Precondition(_))));
    }
}
