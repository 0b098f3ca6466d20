//! Radial Sobolev functionals on rotationally symmetric Cartan-Hadamard
//! model manifolds.
//!
//! The library works with metrics of the form `dr^2 + psi(r)^2 dtheta^2` on
//! `(0, infinity) x S^{n-1}`, where the warping function `psi` is convex,
//! vanishes at the origin, and has unit slope there. For such manifolds it
//! provides:
//!
//! - warped-geometry primitives (area density, Laplacian of the distance,
//!   radial sectional curvature) and validity checks ([`manifold`]);
//! - radial trial functions and their Sobolev functionals ([`profiles`]);
//! - the weighted change of variables that turns a radial function on the
//!   manifold into a weighted-norm function on Euclidean space, preserving
//!   the gradient norm ([`transform`]);
//! - decreasing rearrangement onto the Euclidean ball with exact volume
//!   correspondence, plus isoperimetric profile comparisons
//!   ([`transform::symmetrize`]);
//! - the radial Euler-Lagrange shooting problem, energy bookkeeping, and a
//!   heat-kernel supersolution check ([`variational`]);
//! - a name-keyed registry of warp and profile builders so new geometries
//!   plug in without touching the core ([`registry`]).
//!
//! Everything downstream of quadrature reports a value together with an
//! error estimate; nothing silently truncates an integral.

pub mod error;
pub mod manifold;
pub mod numerics;
pub mod profiles;
pub mod registry;
pub mod report;
pub mod transform;
pub mod variational;

pub use error::{Error, Result};
pub use manifold::ModelManifold;
