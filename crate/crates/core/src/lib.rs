//! Numerical toolkit for area-preserving maps of the disc: action functions,
//! Calabi invariants, mean actions of periodic orbits, and the boundary
//! extension of a map through generating functions.
//!
//! Points are handled in lifted polar coordinates `(r, theta)`, on which the
//! deck transformation `T(r, theta) = (r, theta + 2 pi)` acts. The area form
//! is `omega = r dr ^ dtheta` with primitive `beta = (r^2/2) dtheta`.

// `!(x <= tol)` is used so that NaN fails tolerance checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod action;
pub mod calabi;
pub mod disc_map;
pub mod error;
pub mod extension;
pub mod fields;
pub mod generating;
pub mod numerics;
pub mod orbits;

pub use action::{normalize, normalize_with, ActionFunction, ActionOptions, BoundaryMean, BoundaryMethod, CovectorSample};
pub use calabi::{calabi_invariant, calabi_of_action, CalabiResult, LawReport};
pub use disc_map::{DiscMap, Hamiltonian, MapKind, PolarPoint, Scheme};
pub use error::{Error, Result};
pub use extension::{ExtensionStage, PipelineOptions, PipelineReport};
pub use fields::{RadialPolynomial, Trig, TrigTerm};
pub use generating::{GeneratingAction, GeneratingFunction};
pub use orbits::{PeriodicOrbit, SearchOptions, VerifyOptions};
