//! Axisymmetric finite-element heat conduction for dish-mounted cavity
//! receivers.
//!
//! The solid of revolution is described by its (r, z) half-section, meshed
//! with linear triangles, and solved for the steady temperature field under
//! Robin (film + imposed flux) conditions on every surface. The cylindrical
//! `(1/r) dT/dr` term of the conduction equation can be treated three ways,
//! selected per run:
//!
//! * [`CylMethod::ExactIntegral`]: closed-form integration of `N_i / r`
//!   over each axis-aligned right triangle;
//! * [`CylMethod::MassCenter`]: `1/r` frozen at each element centroid,
//!   valid for arbitrary triangles;
//! * [`CylMethod::ModifiedConductivity`]: the planar operator scaled by the
//!   centroid radius, which keeps the system symmetric.
//!
//! The crate is organised as a pipeline: [`mesh`] builds and renumbers the
//! grid, [`elements`] produces local matrices, [`assembly`] forms and
//! solves the banded global system, [`receiver`] wraps the physics and the
//! energy audit, and [`verify`] holds the independent references (analytic
//! profiles, adaptive quadrature) the rest of the crate is tested against.

// Index loops mirror the i-j matrix algebra they implement, and negated
// comparisons (`!(x > 0.0)`) are NaN-rejecting validation guards.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod elements;
pub mod error;
pub mod mesh;
pub mod receiver;
pub mod verify;

pub use assembly::{
    assemble, solve, solve_dense, solve_with_tolerance, BandedMatrix, GlobalSystem, RobinBc,
    Solution, RESIDUAL_TOLERANCE,
};
pub use elements::CylMethod;
pub use error::{Error, Result};
pub use mesh::{
    generate_mesh, rectangle_mesh, renumber_bandwidth, validate_mesh, Mesh, MeshReport, Node,
    ReceiverGeometry, RectTags, SurfaceTag, TriElement,
};
pub use receiver::{
    element_heat_flux, energy_balance, representative_receiver, solve_receiver,
    solve_receiver_with_loads, EnergyBalance, ReceiverSolution, SurfaceLoad, SurfacePhysics,
    TemperatureField,
};
pub use verify::{
    compare_fields, edge_quadrature, triangle_quadrature, AnalyticProfile, AxialProfile,
    QuadratureSpec, RadialProfile, DIRICHLET_PENALTY,
};
