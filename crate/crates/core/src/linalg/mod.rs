pub mod eigen;
pub mod matrix;
pub mod random;
pub mod symmetric_unitary;

pub use eigen::{
    expm_anti_hermitian, hermitian_eigh, jacobi_eigh, jacobi_eigh_with, singular_values, EigenPair,
    HermitianEigen, JacobiOptions,
};
pub use matrix::{qubits_for_dim, ComplexMatrix, RealMatrix, RealSymmetricMatrix, C64};
pub use random::{random_special_orthogonal, random_special_unitary, seeded_rng};
pub use symmetric_unitary::{
    diagonalize_symmetric_unitary, diagonalize_symmetric_unitary_with, SymmetricUnitaryFactors,
    SymmetricUnitaryOptions,
};
