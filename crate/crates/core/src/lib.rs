//! Exact arithmetic for the Bockstein homomorphism of a linear map between
//! free `Z/p^2`-modules.
//!
//! A matrix `phi` over `Z/p^2` reduces entrywise to a matrix `psi` over
//! `Z/p` and induces a connecting homomorphism `beta` from `ker psi` to
//! `coker psi`: lift a kernel vector, apply `phi`, divide by `p`, project
//! to the cokernel. This crate computes `beta` in canonical frame
//! coordinates, inverts the construction (producing a lift of `psi` with
//! any prescribed `beta`), enumerates the coset of all lifts exhaustively,
//! and checks — exactly at small scale, statistically at larger scale —
//! that conditioned on the reduction the induced homomorphisms are
//! uniformly distributed over the hom-space.
//!
//! The modules follow the pipeline:
//!
//! - [`prime`], [`field_linalg`]: exact linear algebra over `Z/p`
//!   (reduced echelon forms, canonical kernel bases, cokernel coordinates).
//! - [`module_linalg`]: matrices over `Z/p^2`, reduction and lifting, and
//!   the coset `L_psi = phi0 + L0` of all lifts of a fixed `psi`.
//! - [`bockstein`]: the connecting-map construction and its right inverse.
//! - [`stats`]: chi-square scoring with a self-contained p-value routine.
//! - [`distribution`]: closed-form counts, exhaustive fiber censuses,
//!   seeded conditional/joint samplers, and JSON/CSV report emission.

pub mod bockstein;
pub mod distribution;
pub mod error;
pub mod field_linalg;
pub mod module_linalg;
pub mod prime;
pub mod stats;

pub use bockstein::{
    b_map, bockstein_of, bockstein_of_with_kernel_lifts, construct_phi_for, enumerate_hom,
    BocksteinMatrix, GammaContext, HomEnumeration, PsiDigest,
};
pub use distribution::{
    count_report, exhaustive_census, joint_census, sample_conditional, sample_unconditional,
    CensusCheck, CountReport, FiberCensus, JointReport, PsiBin, SampleReport,
};
pub use error::{Error, Result};
pub use field_linalg::{KernelCokernelFrame, MatrixModP, RrefResult};
pub use module_linalg::{
    build_phi0, canonical_lift, enumerate_l0, enumerate_l_psi, enumerate_l_psi_with, L0Enumeration,
    LPsiEnumeration, LiftedFrame, MatrixModP2, Phi0,
};
pub use prime::Prime;

/// Default cap on exhaustive enumerations (element count). Sweeps beyond
/// this refuse loudly instead of hanging; callers can raise it explicitly.
pub const DEFAULT_BUDGET: u64 = 1 << 24;
