//! Domains, triangulations and nodal functions.

mod domain;
mod function;
mod io;
mod mesh;

pub use domain::{unit_ball_volume, unit_sphere_area, Domain};
pub use function::{interpolate_radial, FeFunction, RadialProfile};
pub use io::{read_mesh, write_mesh, write_nodal_csv, write_radial_csv};
pub use mesh::{mesh_disc, mesh_polygon, refine, BoundaryEdge, Mesh};

pub(crate) use domain::{dot, norm, sub};
