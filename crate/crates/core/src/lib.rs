//! Finite-section model of the twisted Koszul complex (B*(D), ∂f∧) of
//! Toeplitz operators on Bergman spaces, with an exact Jacobian-ring oracle
//! and pointwise checks of the cutoff-homotopy operator identities.
//!
//! - [`poly`]: exact polynomials over Q(i)
//! - [`oracle`]: Gröbner bases, Milnor numbers, critical-point localization
//! - [`bergman`]: domains, monomial norms, compressed Toeplitz matrices
//! - [`koszul`]: truncated complexes, Hodge Laplacians, cohomology sweeps
//! - [`homotopy`]: fiberwise exterior algebra, V_f, T_ρ, R_ρ and Δ_f checks
//! - [`cli`]: run configuration, orchestration and reports

pub mod bergman;
pub mod cli;
pub mod homotopy;
pub mod koszul;
pub mod oracle;
pub mod poly;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;
