//! Spectral engine for the Dirichlet-to-Neumann operator on coclosed
//! differential `p`-forms of warped products `[0, R] x S^{n-1}` with metric
//! `dr^2 + h(r)^2 g_sphere`.
//!
//! Separation of variables reduces every eigenform to a radial profile times
//! a coclosed Hodge eigenform on the sphere, so the whole spectrum is built
//! from one linear ODE per sphere mode:
//!
//! ```text
//! psi'' + (n - 2p - 1) (h'/h) psi' - lambda psi / h^2 = 0
//! ```
//!
//! Modules:
//!
//! * [`sphere_modes`] - coclosed Hodge eigenvalues of the round sphere.
//! * [`warp`] - warping functions, presets and geometric predicates.
//! * [`ode`] - adaptive Dormand-Prince integrator used by the shooting code.
//! * [`radial`] - Frobenius-started shooting and two-boundary solves.
//! * [`spectrum`] - DtN blocks, spectrum assembly, Rayleigh quotients and
//!   the finite-element oracle.
//! * [`bounds`] - checkers producing [`bounds::BoundReport`] verdicts.
//! * [`output`] - stable CSV/JSON encodings.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds;
pub mod error;
pub mod ode;
pub mod output;
pub mod radial;
pub mod sphere_modes;
pub mod spectrum;
pub mod warp;

pub use error::{Error, Result};
pub use sphere_modes::ModeIndex;
pub use warp::{Topology, WarpSpec};
