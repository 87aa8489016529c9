//! Exact finite-dimensional quantum/classical information kernel.
//!
//! Conventions (deliberate, and relied on everywhere):
//! - all logarithms are base 2 (quantities are in bits/qubits);
//! - trace distance is the *unnormalized* ℓ₁ norm ‖ρ−σ‖₁ ∈ [0,2];
//! - fidelity F(ρ,σ) = ‖√ρ√σ‖₁, Hellinger h = √(1−F);
//! - eigenvalues within ±1e−12 of zero are clipped before logs/square roots;
//! - matrices are Hermitized as (M+M†)/2 before any spectral decomposition.

pub mod invariants;
pub mod linalg;
pub mod measures;
pub mod prob;
pub mod random;
pub mod state;
pub mod system;
pub mod uhlmann;

pub use measures::{
    conditional_mutual_information, fidelity, hellinger, mutual_information, pure_entropy,
    pure_overlap, relative_entropy, trace_distance, vn_entropy, RelativeEntropy,
};
pub use prob::{canonical_purification, classical_measures, ProbTable, Query, Variable};
pub use random::{random_isometry, random_mixed, random_pure, random_unitary};
pub use state::{tensor, DensityMatrix, PureState};
pub use system::{Register, RegisterSystem};
pub use uhlmann::{controlled_uhlmann, uhlmann_isometry, UhlmannIsometry};

/// Eigenvalues with |λ| ≤ CLIP are treated as exact zeros.
pub const CLIP: f64 = 1e-12;
