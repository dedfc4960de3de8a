//! Global system assembly and linear solvers.
//!
//! The global matrix is stored in banded form sized by the mesh half
//! bandwidth. Because the ExactIntegral and MassCenter treatments of the
//! cylindrical term are non-symmetric, both solve paths are plain LU, never
//! Cholesky. The primary path factorises the band without pivoting (valid
//! for these diagonally dominant systems) and is cross-checked against a
//! dense partially pivoted LU; a residual test guards the unpivoted
//! factorisation and falls back to the dense route if it ever degrades.

use std::collections::BTreeMap;

use crate::elements::{
    cyl_correction_exact, cyl_correction_masscenter, edge_robin, modified_stiffness,
    planar_stiffness, shape_coefficients, CylMethod,
};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, SurfaceTag};

/// Default bound on `max|K T - F| / max|F|` before the banded solution is
/// rejected in favour of the dense fallback.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Square matrix stored by diagonals: row `i` holds columns
/// `i - hb ..= i + hb` contiguously.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    half_bandwidth: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn new(n: usize, half_bandwidth: usize) -> Self {
        let width = 2 * half_bandwidth + 1;
        BandedMatrix {
            n,
            half_bandwidth,
            data: vec![0.0; n * width],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.half_bandwidth
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let hb = self.half_bandwidth as isize;
        let off = j as isize - i as isize;
        if i >= self.n || j >= self.n || off.abs() > hb {
            return None;
        }
        Some(i * (2 * self.half_bandwidth + 1) + (off + hb) as usize)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.slot(i, j) {
            Some(s) => self.data[s],
            None => 0.0,
        }
    }

    /// Adds `v` at `(i, j)`. The pair must lie inside the band; assembly
    /// sizes the band from the same mesh that produces the index pairs, so
    /// an out-of-band pair is a caller bug.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).unwrap_or_else(|| {
            panic!(
                "entry ({i}, {j}) outside band of width {}",
                self.half_bandwidth
            )
        });
        self.data[s] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let hb = self.half_bandwidth;
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(hb);
            let hi = (i + hb).min(self.n - 1);
            let mut acc = 0.0;
            for j in lo..=hi {
                acc += self.get(i, j) * x[j];
            }
            y[i] = acc;
        }
        y
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Unpivoted banded LU solve. Fails on a vanishing pivot; the caller is
    /// expected to verify the residual of any returned solution.
    pub fn lu_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(rhs.len(), self.n);
        let hb = self.half_bandwidth;
        let mut a = self.clone();
        let mut b = rhs.to_vec();
        let scale = self
            .data
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        for k in 0..self.n {
            let pivot = a.get(k, k);
            if pivot.abs() <= 1e-14 * scale {
                return Err(Error::Solver(format!(
                    "vanishing pivot at row {k} in the banded factorisation"
                )));
            }
            let hi = (k + hb).min(self.n - 1);
            for i in (k + 1)..=hi {
                let m = a.get(i, k) / pivot;
                if m == 0.0 {
                    continue;
                }
                for j in k..=hi {
                    let v = a.get(k, j);
                    if v != 0.0 {
                        a.add(i, j, -m * v);
                    }
                }
                b[i] -= m * b[k];
            }
        }
        for i in (0..self.n).rev() {
            let hi = (i + hb).min(self.n - 1);
            let mut acc = b[i];
            for j in (i + 1)..=hi {
                acc -= a.get(i, j) * b[j];
            }
            b[i] = acc / a.get(i, i);
        }
        Ok(b)
    }
}

/// Robin data for one surface: `-lambda dT/dn = h T - c` along the edge,
/// with `c` already combining the film and any imposed flux
/// (`c = h T_inf + q`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinBc {
    pub h: f64,
    pub c: f64,
}

/// Assembled linear system `K T = F` for one mesh and method.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub matrix: BandedMatrix,
    pub rhs: Vec<f64>,
    pub method: CylMethod,
}

/// Builds the global system. Every surface tag present on the mesh boundary
/// must have an entry in `bcs`; `conductivities` is indexed by element
/// material id.
pub fn assemble(
    mesh: &Mesh,
    method: CylMethod,
    conductivities: &[f64],
    bcs: &BTreeMap<SurfaceTag, RobinBc>,
) -> Result<GlobalSystem> {
    let mut any_film = false;
    for edge in &mesh.boundary {
        match bcs.get(&edge.tag) {
            None => {
                return Err(Error::Config(format!(
                    "no boundary condition given for surface {}",
                    edge.tag
                )))
            }
            Some(bc) => any_film |= bc.h > 0.0,
        }
    }
    if !any_film {
        return Err(Error::Config(
            "every surface has zero film coefficient, so the system is \
             singular: adding any constant to the temperature field leaves \
             it a solution"
                .into(),
        ));
    }
    let n = mesh.node_count();
    let mut matrix = BandedMatrix::new(n, mesh.half_bandwidth);
    let mut rhs = vec![0.0; n];

    for (eid, element) in mesh.elements.iter().enumerate() {
        let lambda = *conductivities.get(element.material_id).ok_or_else(|| {
            Error::Material(format!(
                "element {eid} references material {} but only {} conductivities were given",
                element.material_id,
                conductivities.len()
            ))
        })?;
        let p = mesh.element_points(element);
        let coeffs =
            shape_coefficients(&p).map_err(|e| Error::Geometry(format!("element {eid}: {e}")))?;
        let local = match method {
            CylMethod::ExactIntegral => {
                let planar = planar_stiffness(&coeffs, lambda)?;
                let corr = cyl_correction_exact(&coeffs, &p, lambda)
                    .map_err(|e| Error::UnsupportedElement(format!("element {eid}: {e}")))?;
                let mut k = planar.k;
                for i in 0..3 {
                    for j in 0..3 {
                        k[i][j] -= corr.k[i][j];
                    }
                }
                k
            }
            CylMethod::MassCenter => {
                let planar = planar_stiffness(&coeffs, lambda)?;
                let corr = cyl_correction_masscenter(&coeffs, &p, lambda)?;
                let mut k = planar.k;
                for i in 0..3 {
                    for j in 0..3 {
                        k[i][j] -= corr.k[i][j];
                    }
                }
                k
            }
            CylMethod::ModifiedConductivity => modified_stiffness(&coeffs, &p, lambda)?.k,
        };
        for i in 0..3 {
            for j in 0..3 {
                matrix.add(element.nodes[i], element.nodes[j], local[i][j]);
            }
        }
    }

    for edge in &mesh.boundary {
        let bc = bcs[&edge.tag];
        let contrib = edge_robin(edge.length, bc.h, bc.c)?;
        let [n0, n1] = edge.nodes;
        matrix.add(n0, n0, contrib.g[0][0]);
        matrix.add(n0, n1, contrib.g[0][1]);
        matrix.add(n1, n0, contrib.g[1][0]);
        matrix.add(n1, n1, contrib.g[1][1]);
        rhs[n0] += contrib.f[0];
        rhs[n1] += contrib.f[1];
    }

    Ok(GlobalSystem {
        matrix,
        rhs,
        method,
    })
}

/// Solved temperatures in mesh node order.
#[derive(Debug, Clone)]
pub struct Solution {
    pub temperatures: Vec<f64>,
    /// `max|K T - F|` over `max|F|` (absolute when `F` is zero).
    pub residual: f64,
    pub used_dense_fallback: bool,
}

fn residual_of(system: &GlobalSystem, x: &[f64]) -> f64 {
    let kx = system.matrix.matvec(x);
    let mut worst = 0.0f64;
    let mut fmax = 0.0f64;
    for i in 0..x.len() {
        worst = worst.max((kx[i] - system.rhs[i]).abs());
        fmax = fmax.max(system.rhs[i].abs());
    }
    if fmax > 0.0 {
        worst / fmax
    } else {
        worst
    }
}

fn singular_hint() -> Error {
    Error::Solver(
        "linear system is singular or numerically unstable; a mesh whose \
         surfaces all have zero film coefficient admits an arbitrary \
         constant temperature shift"
            .into(),
    )
}

/// Dense partially pivoted LU on the expanded band. Serves both as the
/// fallback for [`solve`] and as an independent route for checking the
/// banded solver.
pub fn solve_dense(system: &GlobalSystem) -> Result<Solution> {
    let dense = system.matrix.to_dense();
    let b = nalgebra::DVector::from_column_slice(&system.rhs);
    let lu = dense.lu();
    let x = lu.solve(&b).ok_or_else(singular_hint)?;
    let temperatures: Vec<f64> = x.iter().copied().collect();
    let residual = residual_of(system, &temperatures);
    if !residual.is_finite() || residual > 1e-6 {
        return Err(singular_hint());
    }
    Ok(Solution {
        temperatures,
        residual,
        used_dense_fallback: true,
    })
}

/// Banded LU with a residual guard and dense fallback at the given bound.
pub fn solve_with_tolerance(system: &GlobalSystem, residual_tol: f64) -> Result<Solution> {
    match system.matrix.lu_solve(&system.rhs) {
        Ok(x) => {
            let residual = residual_of(system, &x);
            if residual.is_finite() && residual < residual_tol {
                return Ok(Solution {
                    temperatures: x,
                    residual,
                    used_dense_fallback: false,
                });
            }
            solve_dense(system)
        }
        Err(_) => solve_dense(system),
    }
}

/// Solves `K T = F` with the default residual bound.
pub fn solve(system: &GlobalSystem) -> Result<Solution> {
    solve_with_tolerance(system, RESIDUAL_TOLERANCE)
}
