//! Surface meshes, sphere quadrature and Cartesian volume grids.

mod mesh;
mod off;
pub mod quadrature;
mod sphere;
pub mod triangle;
mod volume;

pub use mesh::{make_sphere_mesh, SurfaceMesh, Topology};
pub use off::{load_mesh, parse_off, to_off_string, write_off, MeshWarning};
pub use sphere::{
    angles_of, direction_from_angles, equiangular_directions, make_sphere_grid, DirectionRule,
    SphereGrid,
};
pub use volume::{make_volume_grid, BoundingBox, VolumeGrid};

pub type Vec3 = nalgebra::Vector3<f64>;
