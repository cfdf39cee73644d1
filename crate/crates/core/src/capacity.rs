//! Concurrence spectrum, the convex-hull criterion and concurrence capacity.
//!
//! For spectrum points `p_j` on the unit circle the capacity is
//! `max |sum w_j p_j|` over complex weights with `sum |w_j| = 1` and
//! `sum w_j = 0`. By LP duality this equals the radius of the smallest disc
//! containing every `p_j`, which is computed exactly from the largest
//! angular gap.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intertwiners::build_standard_entangler;
use crate::linalg::matrix::{ComplexMatrix, C64};
use crate::linalg::random::seeded_rng;
use crate::linalg::symmetric_unitary::diagonalize_symmetric_unitary;

/// Default angular tolerance of [`hull_contains_zero`].
pub const ANGLE_TOL: f64 = 1e-9;
/// Largest qubit count accepted by the spectrum-only sampler.
pub const SAMPLER_MAX_QUBITS: usize = 20;
/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, PartialEq)]
pub struct ConcurrenceSpectrum {
    n_qubits: usize,
    points: Vec<C64>,
}

impl ConcurrenceSpectrum {
    /// Validates unit modulus (1e-8) and unit product (1e-6).
    pub fn new(n_qubits: usize, points: Vec<C64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Argument("empty spectrum".into()));
        }
        if let Some(z) = points.iter().find(|z| (z.norm() - 1.0).abs() > 1e-8) {
            return Err(Error::Precondition(format!(
                "spectrum point {z} is not on the unit circle"
            )));
        }
        let product: C64 = points.iter().product();
        if (product - C64::new(1.0, 0.0)).norm() > 1e-6 {
            return Err(Error::Precondition(format!(
                "spectrum product is {product}, not 1"
            )));
        }
        Ok(Self { n_qubits, points })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Arguments in `[0, 2pi)`, in input order.
    pub fn angles(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|z| z.arg().rem_euclid(TAU))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HullVerdict {
    Inside,
    Boundary,
    Outside,
}

/// Largest cyclic gap between sorted angles, with the indices (into the
/// input) of the points just before and after the gap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxGap {
    pub gap: f64,
    pub before: usize,
    pub after: usize,
}

pub fn max_angular_gap(angles: &[f64]) -> Result<MaxGap> {
    if angles.is_empty() {
        return Err(Error::Argument("empty spectrum".into()));
    }
    let mut order: Vec<usize> = (0..angles.len()).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]));
    let last = *order.last().expect("nonempty");
    let mut best = MaxGap {
        gap: angles[order[0]] + TAU - angles[last],
        before: last,
        after: order[0],
    };
    for w in order.windows(2) {
        let gap = angles[w[1]] - angles[w[0]];
        if gap > best.gap {
            best = MaxGap {
                gap,
                before: w[0],
                after: w[1],
            };
        }
    }
    Ok(best)
}

fn verdict_from_gap(gap: f64, tol: f64) -> HullVerdict {
    if gap > PI + tol {
        HullVerdict::Outside
    } else if gap < PI - tol {
        HullVerdict::Inside
    } else {
        HullVerdict::Boundary
    }
}

/// Whether 0 lies in the convex hull of the spectrum points.
pub fn hull_contains_zero(spec: &ConcurrenceSpectrum, tol: f64) -> Result<HullVerdict> {
    hull_verdict_for_points(spec.points(), tol)
}

/// Hull verdict for arbitrary unit-modulus points, without the unit-product
/// requirement of a spectrum.
pub fn hull_verdict_for_points(points: &[C64], tol: f64) -> Result<HullVerdict> {
    let angles: Vec<f64> = points.iter().map(|z| z.arg().rem_euclid(TAU)).collect();
    Ok(verdict_from_gap(max_angular_gap(&angles)?.gap, tol))
}

/// `(E0^dagger v E0)(E0^dagger v E0)^T` for even `n`.
pub fn concurrence_matrix(v: &ComplexMatrix, n_qubits: usize) -> Result<ComplexMatrix> {
    if n_qubits % 2 == 1 {
        return Err(Error::UnsupportedParity { n: n_qubits });
    }
    let found = v.require_qubits()?;
    if found != n_qubits {
        return Err(Error::shape(1usize << n_qubits, v.rows()));
    }
    let e = build_standard_entangler(n_qubits)?.matrix;
    let m = e.adjoint().matmul(v)?.matmul(&e)?;
    let mm = m.matmul(&m.transpose())?;
    let dim = mm.rows();
    Ok(ComplexMatrix::from_fn(dim, dim, |r, c| {
        0.5 * (mm[(r, c)] + mm[(c, r)])
    }))
}

pub fn concurrence_spectrum(v: &ComplexMatrix, n_qubits: usize) -> Result<ConcurrenceSpectrum> {
    let mm = concurrence_matrix(v, n_qubits)?;
    let f = diagonalize_symmetric_unitary(&mm)?;
    ConcurrenceSpectrum::new(n_qubits, f.d)
}

#[derive(Clone, Debug, PartialEq)]
pub struct KappaResult {
    pub kappa: f64,
    /// Feasible weights attaining `kappa`.
    pub witness: Vec<C64>,
}

fn cross(u: C64, v: C64) -> f64 {
    u.re * v.im - u.im * v.re
}

// Weights t >= 0 summing to one with sum t_j p_j = 0, supported on at most
// three points. Requires max gap <= pi.
fn hull_coefficients(points: &[C64], angles: &[f64]) -> Vec<f64> {
    let n = points.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]));
    let i0 = order[0];
    let target = angles[i0] + PI;
    // last point at or before the antipode of p0, and first one after it
    let split = order.partition_point(|&j| angles[j] <= target);
    let ib = order[split - 1];
    let ic = order[split % n];
    let mut t = vec![0.0; n];

    let (p0, pb, pc) = (points[i0], points[ib], points[ic]);
    let (t0, tb, tc) = (cross(pb, pc), cross(pc, p0), cross(p0, pb));
    let sum = t0 + tb + tc;
    if ib != i0 && ic != i0 && sum > 1e-12 && t0 >= -1e-15 && tb >= -1e-15 && tc >= -1e-15 {
        t[i0] += t0.max(0.0) / sum;
        t[ib] += tb.max(0.0) / sum;
        t[ic] += tc.max(0.0) / sum;
        return t;
    }
    // degenerate triangle: fall back to the most nearly antipodal pair
    let mut best = (i0, ib, f64::INFINITY);
    for &j in &[ib, ic] {
        let s = (points[i0] + points[j]).norm();
        if s < best.2 {
            best = (i0, j, s);
        }
    }
    t[best.0] += 0.5;
    t[best.1] += 0.5;
    t
}

/// Concurrence capacity of the spectrum and a maximizing weight vector.
pub fn kappa_value(spec: &ConcurrenceSpectrum) -> Result<KappaResult> {
    let points = spec.points();
    let n = points.len();
    if n < 2 {
        return Ok(KappaResult {
            kappa: 0.0,
            witness: vec![C64::new(0.0, 0.0); n],
        });
    }
    let angles = spec.angles();
    let gap = max_angular_gap(&angles)?;
    let mut witness = vec![C64::new(0.0, 0.0); n];
    let kappa = if gap.gap <= PI {
        let t = hull_coefficients(points, &angles);
        for j in 0..n {
            witness[j] = points[j].conj() * t[j];
        }
        1.0
    } else {
        let chord = points[gap.after] - points[gap.before];
        let len = chord.norm();
        if len == 0.0 {
            return Ok(KappaResult {
                kappa: 0.0,
                witness,
            });
        }
        let phase = chord.conj() / len;
        witness[gap.after] += phase * 0.5;
        witness[gap.before] -= phase * 0.5;
        (0.5 * gap.gap).sin()
    };

    let total: C64 = witness.iter().sum();
    let l1: f64 = witness.iter().map(|w| w.norm()).sum();
    if total.norm() > 1e-8 || (l1 - 1.0).abs() > 1e-8 {
        return Err(Error::Optimization(format!(
            "witness violates constraints (|sum w| = {:e}, sum |w| = {l1})",
            total.norm()
        )));
    }
    Ok(KappaResult { kappa, witness })
}

/// `max_{j,k} |p_j - p_k| / 2`, the value of the best two-point witness.
pub fn kappa_pairwise_lower(spec: &ConcurrenceSpectrum) -> f64 {
    let mut angles = spec.angles();
    angles.sort_by(f64::total_cmp);
    let n = angles.len();
    if n < 2 {
        return 0.0;
    }
    let mut best: f64 = 0.0;
    for &a in &angles {
        let target = (a + PI).rem_euclid(TAU);
        let k = angles.partition_point(|&x| x < target);
        for idx in [k % n, (k + n - 1) % n] {
            let d = (angles[idx] - a).abs();
            let d = d.min(TAU - d);
            best = best.max((0.5 * d).sin());
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct CapacityReport {
    pub spectrum: ConcurrenceSpectrum,
    pub zero_in_hull: HullVerdict,
    pub max_gap: f64,
    pub kappa: f64,
    pub kappa_pairwise_lower: f64,
    pub argmax_witness: Vec<C64>,
}

pub fn capacity_report_from_spectrum(spectrum: ConcurrenceSpectrum) -> Result<CapacityReport> {
    let gap = max_angular_gap(&spectrum.angles())?.gap;
    let k = kappa_value(&spectrum)?;
    Ok(CapacityReport {
        zero_in_hull: verdict_from_gap(gap, ANGLE_TOL),
        max_gap: gap,
        kappa: k.kappa,
        kappa_pairwise_lower: kappa_pairwise_lower(&spectrum),
        argmax_witness: k.witness,
        spectrum,
    })
}

pub fn capacity_report(v: &ComplexMatrix, n_qubits: usize) -> Result<CapacityReport> {
    capacity_report_from_spectrum(concurrence_spectrum(v, n_qubits)?)
}

fn check_sampler_qubits(n: usize) -> Result<()> {
    if n % 2 == 1 {
        return Err(Error::UnsupportedParity { n });
    }
    if n == 0 {
        return Err(Error::Argument("need at least two qubits".into()));
    }
    if n > SAMPLER_MAX_QUBITS {
        return Err(Error::Size {
            n,
            cap: SAMPLER_MAX_QUBITS,
        });
    }
    Ok(())
}

// Angles of d_j^2 for the chained torus coordinates, drawn lazily so callers
// can stop early.
struct ChainSampler<R> {
    rng: R,
    remaining: usize,
    prev: f64,
}

impl<R: Rng> Iterator for ChainSampler<R> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        match self.remaining {
            0 => None,
            1 => {
                self.remaining = 0;
                Some((-2.0 * self.prev).rem_euclid(TAU))
            }
            _ => {
                self.remaining -= 1;
                let t = self.rng.random::<f64>() * TAU;
                let angle = (2.0 * (t - self.prev)).rem_euclid(TAU);
                self.prev = t;
                Some(angle)
            }
        }
    }
}

fn chain(n_qubits: usize, seed: u64, trial: u64) -> ChainSampler<rand_chacha::ChaCha8Rng> {
    ChainSampler {
        rng: seeded_rng(seed, trial),
        remaining: 1usize << n_qubits,
        prev: 0.0,
    }
}

/// Arguments of the spectrum of a Haar-random element of A, in `[0, 2pi)`.
pub fn haar_sample_a_angles(n_qubits: usize, seed: u64, trial_index: u64) -> Result<Vec<f64>> {
    check_sampler_qubits(n_qubits)?;
    Ok(chain(n_qubits, seed, trial_index).collect())
}

pub fn haar_sample_a_spectrum(
    n_qubits: usize,
    seed: u64,
    trial_index: u64,
) -> Result<ConcurrenceSpectrum> {
    let points = haar_sample_a_angles(n_qubits, seed, trial_index)?
        .into_iter()
        .map(|t| C64::from_polar(1.0, t))
        .collect();
    ConcurrenceSpectrum::new(n_qubits, points)
}

const SECTORS: usize = 8;

// Verdict for a stream of angles. Once every eighth of the circle holds a
// point the largest gap is below pi/2, so the rest of the stream is skipped.
fn stream_verdict(angles: impl Iterator<Item = f64>, tol: f64) -> HullVerdict {
    let mut occupied = 0u32;
    let mut seen = Vec::new();
    for a in angles {
        let s = ((a * (SECTORS as f64 / TAU)) as usize).min(SECTORS - 1);
        occupied |= 1 << s;
        if occupied == (1 << SECTORS) - 1 {
            return HullVerdict::Inside;
        }
        seen.push(a);
    }
    verdict_from_gap(max_angular_gap(&seen).map(|g| g.gap).unwrap_or(TAU), tol)
}

/// Hull verdict for one sampled trial without materializing the spectrum
/// unless needed.
pub fn sample_verdict(n_qubits: usize, seed: u64, trial_index: u64) -> Result<HullVerdict> {
    check_sampler_qubits(n_qubits)?;
    Ok(stream_verdict(
        chain(n_qubits, seed, trial_index),
        ANGLE_TOL,
    ))
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityEstimate {
    pub n: usize,
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub stderr: f64,
    pub seed: u64,
}

/// Fraction of Haar-sampled elements of A whose spectrum surrounds 0
/// (boundary verdicts count as surrounding).
pub fn capacity_probability(n_qubits: usize, trials: u64, seed: u64) -> Result<CapacityEstimate> {
    check_sampler_qubits(n_qubits)?;
    if trials == 0 {
        return Err(Error::Argument("trials must be positive".into()));
    }
    let successes: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let v = stream_verdict(chain(n_qubits, seed, t), ANGLE_TOL);
            u64::from(v != HullVerdict::Outside)
        })
        .sum();
    let p_hat = successes as f64 / trials as f64;
    let (ci_lo, ci_hi) = wilson_interval(successes, trials);
    Ok(CapacityEstimate {
        n: n_qubits,
        trials,
        successes,
        p_hat,
        ci_lo,
        ci_hi,
        stderr: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
        seed,
    })
}

/// Closed form `m 2^{1-m}` for the chance that `m` independent uniform
/// points on the circle leave 0 outside their hull.
pub fn wendel_probability(m: usize) -> f64 {
    m as f64 * 2f64.powi(1 - m as i32)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WendelEstimate {
    pub m: usize,
    pub trials: u64,
    pub p_fail: f64,
    pub stderr: f64,
    pub closed_form: f64,
}

pub fn wendel_oracle(m: usize, trials: u64, seed: u64) -> Result<WendelEstimate> {
    if m < 2 {
        return Err(Error::Argument(format!("need m >= 2 points, got {m}")));
    }
    if trials == 0 {
        return Err(Error::Argument("trials must be positive".into()));
    }
    let fails: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeded_rng(seed, t);
            let angles: Vec<f64> = (0..m).map(|_| rng.random::<f64>() * TAU).collect();
            let gap = max_angular_gap(&angles).expect("m >= 2").gap;
            u64::from(gap > PI)
        })
        .sum();
    let p = fails as f64 / trials as f64;
    Ok(WendelEstimate {
        m,
        trials,
        p_fail: p,
        stderr: (p * (1.0 - p) / trials as f64).sqrt(),
        closed_form: wendel_probability(m),
    })
}

/// Failure bounds from the quadrant argument with `ell + 1` independent
/// points: the value `(1/2)^ell` as printed in the proof, and the value
/// `2 (3/4)^ell - (1/2)^ell` obtained by evaluating the two quadrant events
/// directly. Only the second is a valid bound in general.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadrantBounds {
    pub ell: usize,
    pub printed: f64,
    pub direct: f64,
}

pub fn quadrant_bounds(n_qubits: usize) -> QuadrantBounds {
    let ell = (1usize << n_qubits) / 2 - 1;
    let half = 0.5f64.powi(ell as i32);
    QuadrantBounds {
        ell,
        printed: half,
        direct: 2.0 * 0.75f64.powi(ell as i32) - half,
    }
}

/// Largest distance between greedily matched points of two multisets.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (idx, dist) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, c| {
                if c.1 < acc.1 {
                    c
                } else {
                    acc
                }
            });
        if idx == usize::MAX {
            return f64::INFINITY;
        }
        used[idx] = true;
        worst = worst.max(dist);
    }
    worst
}
