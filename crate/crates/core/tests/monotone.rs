use ccd_core::cartan::{is_in_K, k_membership_residual};
use ccd_core::forms::{concurrence, random_su2, Ket, SpinFlip};
use ccd_core::intertwiners::build_standard_entangler;
use ccd_core::linalg::{hermitian_eigh, random_special_orthogonal, seeded_rng, ComplexMatrix, C64};
use ccd_core::monotone::{
    convexity_check, mixed_concurrence, monotone_sweep, povm_trial, random_density, swap_operator,
    DensityMatrix, PovmPair,
};
use ccd_core::orbits::orbit_transport;
use proptest::prelude::*;
use rand::Rng;

// sqrt(rho) rho~ sqrt(rho) route: eigenvalues of a Hermitian PSD matrix.
fn uhlmann_oracle(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let n = rho.n_qubits();
    let s = SpinFlip::new(n).unwrap().dense();
    let tilde = s.matmul(&m.conj()).unwrap().matmul(&s.transpose()).unwrap();
    let eig = hermitian_eigh(m).unwrap();
    let dim = m.rows();
    let roots: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let sqrt_rho = ComplexMatrix::from_fn(dim, dim, |r, c| {
        (0..dim)
            .map(|k| eig.vectors[(r, k)] * roots[k] * eig.vectors[(c, k)].conj())
            .sum()
    });
    let inner = sqrt_rho.matmul(&tilde).unwrap().matmul(&sqrt_rho).unwrap();
    let inner = ComplexMatrix::from_fn(dim, dim, |r, c| {
        0.5 * (inner[(r, c)] + inner[(c, r)].conj())
    });
    let mut lambdas: Vec<f64> = hermitian_eigh(&inner)
        .unwrap()
        .values
        .iter()
        .map(|&x| x.max(0.0).sqrt())
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    (lambdas[0] - lambdas[1..].iter().sum::<f64>()).max(0.0)
}

fn random_k(n: usize, seed: u64) -> ComplexMatrix {
    let e = build_standard_entangler(n).unwrap().matrix;
    let mut rng = seeded_rng(seed, 99);
    let o = ComplexMatrix::from_real(&random_special_orthogonal(1 << n, &mut rng));
    e.matmul(&o).unwrap().matmul(&e.adjoint()).unwrap()
}

#[test]
fn werner_type_mixture_has_known_concurrence() {
    // p |GHZ><GHZ| + (1-p) I/4 has concurrence max(0, (3p-1)/2)
    let ghz = DensityMatrix::pure(&Ket::ghz(2).unwrap()).unwrap();
    let mixed = DensityMatrix::maximally_mixed(2).unwrap();
    let out = convexity_check(&ghz, &mixed, 0.5).unwrap();
    assert!((out.lhs - 0.25).abs() < 1e-10);
    assert!((out.rhs - 0.5).abs() < 1e-10);
    assert!(out.holds);
}

#[test]
fn equal_mixture_is_an_equality() {
    let mut rng = seeded_rng(30, 0);
    let rho = random_density(2, 2, &mut rng).unwrap();
    let out = convexity_check(&rho, &rho, 0.3).unwrap();
    assert!((out.lhs - out.rhs).abs() < 1e-10);
}

#[test]
fn ghz_projective_measurement_destroys_concurrence() {
    let id = ComplexMatrix::identity(2);
    for n in [2usize, 4, 6] {
        let povm = PovmPair::new(1.0, 0.0, id.clone(), id.clone(), id.clone(), n).unwrap();
        let out = povm_trial(&Ket::ghz(n).unwrap(), &povm).unwrap();
        assert!(out.avg_after < 1e-12);
        assert!((out.c_before - 1.0).abs() < 1e-12);
    }
}

#[test]
fn zero_probability_branch_is_flagged() {
    let id = ComplexMatrix::identity(2);
    let povm = PovmPair::new(1.0, 0.0, id.clone(), id.clone(), id, 1).unwrap();
    let out = povm_trial(&Ket::basis(2, 0).unwrap(), &povm).unwrap();
    assert!(out.zero_branch);
    assert_eq!(out.avg_after, 0.0);
}

#[test]
fn povm_pair_validation() {
    let id = ComplexMatrix::identity(2);
    assert!(PovmPair::new(1.5, 0.0, id.clone(), id.clone(), id.clone(), 1).is_err());
    let not_special = id.scale(C64::new(0.0, 1.0));
    assert!(PovmPair::new(0.5, 0.5, not_special, id.clone(), id, 1).is_err());
}

#[test]
fn default_sweep_has_no_violations() {
    let r = monotone_sweep(2, 1000, 2024).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(r.witnesses.is_empty());
    let again = monotone_sweep(2, 1000, 2024).unwrap();
    assert_eq!(r, again);
}

#[test]
fn swap_products_and_k() {
    let n = 4;
    let s12 = swap_operator(1, 2, n).unwrap();
    let s34 = swap_operator(3, 4, n).unwrap();
    assert!(is_in_K(&s12.matmul(&s34).unwrap(), 1e-12).unwrap());
    let mut rng = seeded_rng(31, 0);
    for (j, k) in [(1, 2), (1, 4), (2, 3)] {
        let p = swap_operator(j, k, n).unwrap();
        assert_eq!(p, p.transpose());
        let psi = Ket::random(n, &mut rng).unwrap();
        let moved = psi.apply(&p).unwrap();
        assert!((concurrence(&psi).unwrap() - concurrence(&moved).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn ghz_is_transported_to_the_split_ghz_pair() {
    let n = 4;
    let psi = Ket::ghz(n).unwrap();
    let phi = Ket::ghz(2).unwrap().tensor(&Ket::ghz(2).unwrap()).unwrap();
    let t = orbit_transport(&psi, &phi, n).unwrap();
    assert!(t.residual <= 1e-7);
    assert!(is_in_K(&t.k, 1e-8).unwrap());
}

#[test]
fn transport_rejects_odd_n() {
    let k = Ket::ghz(3).unwrap();
    assert!(orbit_transport(&k, &k, 3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_form_matches_root_route(n in prop::sample::select(vec![2usize, 4]), rank in 1usize..=4, seed in any::<u64>()) {
        let mut rng = seeded_rng(seed, 0);
        let rho = random_density(n, rank, &mut rng).unwrap();
        let fast = mixed_concurrence(&rho).unwrap();
        prop_assert!((fast - uhlmann_oracle(&rho)).abs() < 1e-6);
    }

    #[test]
    fn pure_states_agree(n in prop::sample::select(vec![2usize, 4]), seed in any::<u64>()) {
        let mut rng = seeded_rng(seed, 1);
        let psi = Ket::random(n, &mut rng).unwrap();
        let rho = DensityMatrix::pure(&psi).unwrap();
        prop_assert!((mixed_concurrence(&rho).unwrap() - concurrence(&psi).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn k_conjugation_preserves_mixed_concurrence(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed, 2);
        let rho = random_density(2, 2, &mut rng).unwrap();
        let moved = rho.conjugate(&random_k(2, seed)).unwrap();
        let (a, b) = (mixed_concurrence(&rho).unwrap(), mixed_concurrence(&moved).unwrap());
        prop_assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn povm_matches_the_closed_factor(n in prop::sample::select(vec![2usize, 4]), seed in any::<u64>()) {
        let mut rng = seeded_rng(seed, 3);
        let psi = Ket::random(n, &mut rng).unwrap();
        let pair = PovmPair::random(n, &mut rng);
        let o = povm_trial(&psi, &pair).unwrap();
        prop_assert!(o.avg_after <= o.c_before + 1e-9);
        prop_assert!((o.avg_after - o.factor * o.c_before).abs() < 1e-8);
        prop_assert!((o.p0 + o.p1 - 1.0).abs() < 1e-10);
        let q = rng.random::<f64>();
        let equal = PovmPair::new(q, q, random_su2(&mut rng), random_su2(&mut rng), random_su2(&mut rng), 1).unwrap();
        let o = povm_trial(&psi, &equal).unwrap();
        prop_assert!((o.avg_after - o.c_before).abs() < 1e-8);
    }

    #[test]
    fn equal_q_pairs_are_transported(n in prop::sample::select(vec![2usize, 4]), seed in any::<u64>(), alpha in 0.0f64..std::f64::consts::TAU) {
        let mut rng = seeded_rng(seed, 4);
        let psi = Ket::random(n, &mut rng).unwrap();
        let phi = psi.apply(&random_k(n, seed)).unwrap().scaled(C64::from_polar(1.0, alpha));
        let t = orbit_transport(&psi, &phi, n).unwrap();
        prop_assert!(t.residual <= 1e-7);
        prop_assert!(k_membership_residual(&t.k).unwrap() <= 1e-8);
    }
}
