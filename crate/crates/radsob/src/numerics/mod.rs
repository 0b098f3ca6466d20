//! Shared numerical machinery: adaptive quadrature, root bracketing,
//! monotone cubic interpolation, and an adaptive ODE solver.

pub mod interp;
pub mod ode;
pub mod quad;
pub mod root;

pub use interp::CubicHermite;
pub use ode::{solve_ivp, DenseSolution, HaltReason, OdeConfig};
pub use quad::{integrate, integrate_with_breaks, Domain, QuadResult, QuadratureConfig};
pub use root::find_root;
