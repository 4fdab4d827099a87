//! Variable-exponent function spaces and a time-stepping solver for the
//! nonlocal degenerate parabolic problem
//!
//! ```text
//! u_t - sum_i D_i(|u|^{p0-2} D_i u) + a(x,t,u) + g(x,t) ||u||_{L^p}^s = h   in Omega x (0,T)
//! u(x,0) = 0,   u = 0 on the lateral boundary
//! ```
//!
//! The crate is organized bottom-up:
//!
//! * [`mesh`]: uniform tensor meshes, nodal fields and space-time stacks.
//! * [`exponent_spaces`]: modulars, Luxemburg norms and derived exponents.
//! * [`pn_spaces`]: pseudo-norms, the homeomorphism `|t|^{a/b} t` and embeddings.
//! * [`model`]: problem data, nonlinearities and hypothesis validators.
//! * [`solver`]: finite-volume assembly and backward-Euler time stepping.
//! * [`diagnostics`]: energy, coercivity and decay monitors.
//! * [`cli`]: configuration files and result emission used by the `varexp` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod exponent_spaces;
pub mod mesh;
pub mod model;
pub mod numfmt;
pub mod pn_spaces;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use exponent_spaces::ExponentField;
pub use mesh::{GridFunction, Mesh, Sampled, SpaceTimeField};
