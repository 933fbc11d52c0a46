//! Spectral toolkit for the kinematic MHD α²-dynamo.
//!
//! The spherically symmetric α²-dynamo couples the poloidal and toroidal
//! field modes through a 2×2 operator matrix built from the helical
//! turbulence profile α(r). This crate discretizes that operator on a
//! radial grid, computes its full complex spectrum with an in-repo QR
//! eigensolver, tracks eigenvalue branches over the profile scaling
//! parameter C, locates real-to-complex transitions (exceptional points)
//! and the dynamo threshold, and provides the equivalent quadratic
//! operator pencil together with Jordan-Keldysh chain diagnostics.
//!
//! A closed-form companion module ([`toy2x2`]) implements the ℤ₂-graded
//! pseudo-Hermitian 2×2 model that captures the level-crossing mechanics
//! exactly: discriminant cone, η-switching under diagonalization, Krein
//! types of eigenvectors, and the Jordan block on the exceptional cone.
//!
//! Each major capability has a runnable example under `examples/`; the
//! `dynamo` binary exposes the same pipelines as CSV-emitting
//! subcommands (`toy`, `spectrum`, `sweep`, `critical`).

pub mod bessel;
pub mod branch;
pub mod cli;
pub mod eig;
pub mod krein;
pub mod operator;
pub mod pencil;
pub mod toy2x2;

pub use branch::{AffineOperator, Branch, CriticalPoint, SweepResult, TransitionEvent};
pub use eig::{Eigen, Spectrum};
pub use krein::{GradingProjectors, Involution, VectorType};
pub use operator::{AlphaProfile, BoundaryCondition, DiscreteOperator, RadialGrid, Scheme};
pub use pencil::{KeldyshChain, QuadraticPencil};
pub use toy2x2::{EigenDecomposition, Regime, ToyClassification, ToyPoint};
