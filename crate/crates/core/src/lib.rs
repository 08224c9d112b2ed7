//! Exponentiated gradient as Riemannian gradient descent on the positive
//! orthant, with a Poisson tomography test problem.
//!
//! The Poisson (Fisher–Rao) metric `diag(1/x)` turns the multiplicative
//! update `x exp(-tau grad f)` into a geodesic gradient step. This crate
//! provides that geometry, the divergences and line searches built on it,
//! four solvers (EG, PoiCG, IPgRGD, IPeMD) and a regularized Poisson
//! reconstruction problem to compare them on.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod divergence;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod linesearch;
pub mod objective;
pub mod problems;
pub mod solvers;
pub mod trace;
#[doc(hidden)]
pub mod verification;

pub use error::{Error, Result};
pub use geometry::{GeometryKind, Point, Tangent};
pub use linesearch::{ArmijoParams, StepPolicy};
pub use objective::{FnObjective, Objective};
pub use problems::{ProblemInstance, TomographySpec};
pub use solvers::{solve, IterationRecord, Method, RunTrace, SolverConfig, TerminalStatus};
