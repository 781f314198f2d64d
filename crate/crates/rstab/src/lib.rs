//! rstab: Newton tensors, r-mean curvature stability operators, and principal
//! eigenvalues of discrete hypersurfaces in the three model ambient spaces.
//!
//! The crate is organized along the pipeline:
//!
//! - [`newton`]: elementary symmetric functions S_r, Newton tensors P_r,
//!   definiteness classification and admissibility.
//! - [`geometry`]: model ambients (Euclidean, round-sphere, hyperboloid),
//!   catalog immersions, discretization, curvature estimation, variations.
//! - [`assembly`]: finite element assembly of L_r, T_r, the symmetrized
//!   operator, adjoints, and the variational consistency checks.
//! - [`spectral`]: principal eigenvalues of self-adjoint and non-self-adjoint
//!   discrete operators, Collatz-Wielandt bounds, stability certificates.
//! - [`bounds`]: geodesic-ball domains, the pinching hypothesis, and the
//!   principal-eigenvalue lower bound.
//! - [`config`], [`report`], [`runner`], [`checks`]: run configuration,
//!   reports, the analyze/verify/sweep entry points, and named check suites.
//!
//! See the crate examples for end-to-end usage of each capability.
//!
//! Concurrency: surfaces, operators, and results are immutable after
//! construction and safe to share across threads; all operations are pure
//! functions of their inputs. Solvers are internally sequential per solve;
//! distinct solves may run concurrently (the sweep runner does, governed by
//! `RSTAB_WORKERS`). Single-threaded runs are bit-reproducible.

pub mod error;
pub mod linalg;
pub mod newton;
pub mod rng;

pub mod geometry;

pub mod assembly;
pub mod spectral;
pub mod bounds;

pub mod checks;
pub mod config;
pub mod report;
pub mod runner;

pub use error::{Error, Result};

pub use assembly::{assemble_lr, assemble_tr, symmetrize, AssemblyOptions, DiscreteOperator};
pub use geometry::{discretize, discretize_with, CatalogSurface, DiscreteSurface};
pub use spectral::{
    principal_eigen_nonselfadjoint, principal_eigen_selfadjoint, stability_certificate,
    SpectralResult, StabilityCertificate, Verdict,
};
