//! Shared case setup for the solver benchmarks.

use std::collections::BTreeMap;

use axitherm::{
    generate_mesh, renumber_bandwidth, representative_receiver, Mesh, RobinBc, SurfaceTag,
};

/// Demonstration receiver meshed at the given resolution, with its Robin
/// map and conductivity, ready for assembly.
pub fn receiver_case(nr: usize, nz: usize) -> (Mesh, BTreeMap<SurfaceTag, RobinBc>, f64) {
    let (geometry, physics, lambda) = representative_receiver();
    let mesh = renumber_bandwidth(generate_mesh(&geometry, nr, nz).expect("valid geometry"));
    (mesh, physics.robin_map(), lambda)
}
