//! Maximal regularity in `H` for non-autonomous sesquilinear forms, at matrix scale.
//!
//! The crate is organised bottom-up:
//!
//! * [`triple`]: the discrete Gelfand triple `V ↪ H ↪ V'` with spectral
//!   interpolation norms `V_ℓ` and operator norms between scales.
//! * [`form`]: time-dependent forms `a(t; u, v) = v* S(t) u` with their
//!   boundedness, coercivity and modulus-of-continuity data.
//! * [`sectorial`]: the frozen operator at one time, resolvents, the contour
//!   integral for the analytic semigroup and the inverse square root.
//! * [`sqrt_property`]: refinement diagnostics for `D(A^{1/2}) = V`.
//! * [`solver`]: time stepping and the Volterra representation solver.
//! * [`robin`] and [`nonlinear`]: the 1D heat equation with time-dependent
//!   Robin boundary conditions and its semilinear extension.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod form;
pub mod linalg;
pub mod nonlinear;
pub mod quadrature;
pub mod robin;
pub mod sectorial;
pub mod solver;
pub mod sqrt_property;
pub mod triple;

pub use error::{Error, Result};
pub use form::{certify_constants, CertifyReport, ModulusKind, ModulusOfContinuity, NonAutonomousForm};
pub use linalg::{CMatrix, CVector, C64};
pub use sectorial::{QuadratureConfig, SectorialSnapshot};
pub use solver::{GridFunction, Scheme, SolveReport, TimeGrid};

pub use triple::{build_triple, HilbertTriple};
