//! Numerical laboratory for the Dirichlet problem `-Δ_p u = f(u)` on discs,
//! strictly convex polygons and (radially) on balls of any dimension.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: domains, P1 triangulations, nodal functions, radial profiles.
//! * [`nonlinearity`]: the source term `f`, its primitive, critical exponents and
//!   the asymptotic hypothesis classifier.
//! * [`fem`]: regularised energy minimisation for `-Δ_p v + Λ|v|^{p-2}v = g`.
//! * [`radial`]: shooting solvers and closed forms on balls (the independent oracle).
//! * [`eigen`]: first eigenpair by nonlinear inverse iteration.
//! * [`identities`]: Pohozaev, Picone, energy, comparison, Hopf and boundary checks.
//! * [`existence`]: the compact map `K`, its homotopy, fixed-point solves and
//!   threshold detection.

pub mod eigen;
pub mod error;
pub mod existence;
pub mod fem;
pub mod geometry;
pub mod identities;
mod linalg;
pub mod nonlinearity;
mod quadrature;
pub mod radial;

pub use error::{Error, Result};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
