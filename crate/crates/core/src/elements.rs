//! Element-level matrices for linear triangles in the (r, z) half-plane.
//!
//! Shape functions are `N_i = a_i + b_i r + c_i z`. The conduction operator
//! keeps the cylindrical `(1/r) dT/dr` term of the governing equation as a
//! first-order term alongside the planar Laplacian instead of weighting the
//! whole weak form by radius, so an element contributes
//!
//! ```text
//! k_local = k_planar - k_cyl        (ExactIntegral, MassCenter)
//! k_local = k_modified              (ModifiedConductivity)
//! ```
//!
//! where `k_cyl[i][j] = lambda * b_j * int(N_i / r)` is the Galerkin matrix
//! of the cylindrical term (it enters the balance with the opposite sign to
//! the diffusion terms). `k_cyl` is not symmetric, so neither are the
//! assembled ExactIntegral and MassCenter systems.

use crate::error::{Error, Result};
use crate::mesh::signed_area;

/// Direction-cosine tolerance for recognising axis-aligned right triangles.
const AXIS_ALIGN_TOL: f64 = 1e-9;

/// How an element treats the cylindrical term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CylMethod {
    /// Closed-form integration of `N_i / r` (axis-aligned right triangles only).
    ExactIntegral,
    /// `1/r` frozen at the element centroid.
    MassCenter,
    /// Symmetric planar stiffness scaled by the centroid radius; no
    /// separate cylindrical term.
    ModifiedConductivity,
}

impl std::fmt::Display for CylMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CylMethod::ExactIntegral => "exact",
            CylMethod::MassCenter => "masscenter",
            CylMethod::ModifiedConductivity => "modified",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for CylMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(CylMethod::ExactIntegral),
            "masscenter" => Ok(CylMethod::MassCenter),
            "modified" => Ok(CylMethod::ModifiedConductivity),
            other => Err(Error::Config(format!(
                "unknown method '{other}' (expected exact, masscenter or modified)"
            ))),
        }
    }
}

/// Coefficients of the three linear shape functions of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct ShapeCoeffs {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
    /// Triangle area (positive).
    pub area: f64,
}

/// 3x3 element matrix.
#[derive(Debug, Clone, Copy)]
pub struct LocalMatrix {
    pub k: [[f64; 3]; 3],
    pub symmetric: bool,
}

/// 2x2 Robin matrix and load vector of one boundary edge.
#[derive(Debug, Clone, Copy)]
pub struct EdgeContribution {
    pub g: [[f64; 2]; 2],
    pub f: [f64; 2],
}

/// Shape-function coefficients from CCW vertex coordinates:
/// `a_i = (r_j z_k - r_k z_j) / 2S`, `b_i = (z_j - z_k) / 2S`,
/// `c_i = (r_k - r_j) / 2S`, indices cyclic.
pub fn shape_coefficients(p: &[[f64; 2]; 3]) -> Result<ShapeCoeffs> {
    let area = signed_area(p);
    if area <= 1e-14 {
        return Err(Error::Geometry(format!(
            "triangle ({:?}, {:?}, {:?}) is degenerate or clockwise (signed area {area:.3e})",
            p[0], p[1], p[2]
        )));
    }
    let two_s = 2.0 * area;
    let mut a = [0.0; 3];
    let mut b = [0.0; 3];
    let mut c = [0.0; 3];
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        a[i] = (p[j][0] * p[k][1] - p[k][0] * p[j][1]) / two_s;
        b[i] = (p[j][1] - p[k][1]) / two_s;
        c[i] = (p[k][0] - p[j][0]) / two_s;
    }
    Ok(ShapeCoeffs { a, b, c, area })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) {
        return Err(Error::Material(format!(
            "conductivity must be positive (got {lambda})"
        )));
    }
    Ok(())
}

/// Planar stiffness `k_ij = lambda * S * (b_i b_j + c_i c_j)`.
pub fn planar_stiffness(coeffs: &ShapeCoeffs, lambda: f64) -> Result<LocalMatrix> {
    check_lambda(lambda)?;
    let s = coeffs.area;
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = lambda * s * (coeffs.b[i] * coeffs.b[j] + coeffs.c[i] * coeffs.c[j]);
        }
    }
    Ok(LocalMatrix { k, symmetric: true })
}

fn min_radius(p: &[[f64; 2]; 3]) -> f64 {
    p[0][0].min(p[1][0]).min(p[2][0])
}

/// True when one vertex joins a radial leg and an axial leg.
fn is_axis_aligned_right(p: &[[f64; 2]; 3]) -> bool {
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        let e1 = [p[j][0] - p[i][0], p[j][1] - p[i][1]];
        let e2 = [p[k][0] - p[i][0], p[k][1] - p[i][1]];
        let along_r = |e: [f64; 2]| {
            let len = (e[0] * e[0] + e[1] * e[1]).sqrt();
            e[1].abs() <= AXIS_ALIGN_TOL * len
        };
        let along_z = |e: [f64; 2]| {
            let len = (e[0] * e[0] + e[1] * e[1]).sqrt();
            e[0].abs() <= AXIS_ALIGN_TOL * len
        };
        if (along_r(e1) && along_z(e2)) || (along_z(e1) && along_r(e2)) {
            return true;
        }
    }
    false
}

// Closed forms below integrate F(r, z(r)) dr along each directed edge of the
// CCW triangle (Green's theorem with d/dz primitives), which stays exact for
// every edge slope; vertical edges contribute nothing.

fn green_sum(p: &[[f64; 2]; 3], term: impl Fn(f64, f64, f64, f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        let [ra, za] = p[i];
        let [rb, zb] = p[(i + 1) % 3];
        if ra == rb {
            continue;
        }
        let m = (zb - za) / (rb - ra);
        let alpha = za - m * ra;
        acc += term(ra, rb, m, alpha);
    }
    -acc
}

/// Exact `int 1/r` over a CCW triangle with all radii positive.
pub fn integral_inv_r(p: &[[f64; 2]; 3]) -> Result<f64> {
    if min_radius(p) <= 0.0 {
        return Err(Error::UnsupportedElement(format!(
            "triangle touches or crosses the axis (min r = {}); 1/r is singular there",
            min_radius(p)
        )));
    }
    // d/dz primitive of 1/r is z/r; int (alpha + m r)/r dr.
    Ok(green_sum(p, |ra, rb, m, alpha| {
        alpha * (rb / ra).ln() + m * (rb - ra)
    }))
}

/// Exact `int z/r` over a CCW triangle with all radii positive.
pub fn integral_z_over_r(p: &[[f64; 2]; 3]) -> Result<f64> {
    if min_radius(p) <= 0.0 {
        return Err(Error::UnsupportedElement(format!(
            "triangle touches or crosses the axis (min r = {}); z/r is singular there",
            min_radius(p)
        )));
    }
    // d/dz primitive of z/r is z^2/(2r); int (alpha + m r)^2 / (2r) dr.
    Ok(green_sum(p, |ra, rb, m, alpha| {
        0.5 * (alpha * alpha * (rb / ra).ln()
            + 2.0 * alpha * m * (rb - ra)
            + m * m * (rb * rb - ra * ra) * 0.5)
    }))
}

/// Cylindrical-term matrix `k_ij = lambda * b_j * int(N_i / r)` with the
/// integral evaluated in closed form. Restricted to axis-aligned right
/// triangles away from the axis; the assembled operator subtracts this
/// matrix from the planar stiffness.
pub fn cyl_correction_exact(
    coeffs: &ShapeCoeffs,
    p: &[[f64; 2]; 3],
    lambda: f64,
) -> Result<LocalMatrix> {
    check_lambda(lambda)?;
    if min_radius(p) <= 0.0 {
        return Err(Error::UnsupportedElement(format!(
            "element touches the axis (min r = {}); the 1/r integral is singular",
            min_radius(p)
        )));
    }
    if !is_axis_aligned_right(p) {
        return Err(Error::UnsupportedElement(
            "exact cylindrical integration supports only right triangles with \
             legs parallel to the r and z axes; use the mass-center method for \
             general triangles"
                .into(),
        ));
    }
    let i1 = integral_inv_r(p)?;
    let i3 = integral_z_over_r(p)?;
    let s = coeffs.area;
    // int N_i / r = a_i * int 1/r + b_i * S + c_i * int z/r.
    let n_over_r: [f64; 3] =
        std::array::from_fn(|i| coeffs.a[i] * i1 + coeffs.b[i] * s + coeffs.c[i] * i3);
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = lambda * coeffs.b[j] * n_over_r[i];
        }
    }
    Ok(LocalMatrix {
        k,
        symmetric: false,
    })
}

/// Cylindrical-term matrix with `1/r` frozen at the centroid:
/// `k_ij = lambda * b_j * S * (a_i / r_m + b_i + c_i z_m / r_m)`, which
/// collapses to `lambda * b_j * S / (3 r_m)` because `N_i`(centroid) = 1/3.
/// All three rows are therefore identical. Valid for any triangle whose
/// centroid radius is positive.
pub fn cyl_correction_masscenter(
    coeffs: &ShapeCoeffs,
    p: &[[f64; 2]; 3],
    lambda: f64,
) -> Result<LocalMatrix> {
    check_lambda(lambda)?;
    let rm = (p[0][0] + p[1][0] + p[2][0]) / 3.0;
    if !(rm > 0.0) {
        return Err(Error::UnsupportedElement(format!(
            "centroid radius must be positive (got {rm})"
        )));
    }
    let row: [f64; 3] = std::array::from_fn(|j| lambda * coeffs.b[j] * coeffs.area / (3.0 * rm));
    Ok(LocalMatrix {
        k: [row, row, row],
        symmetric: false,
    })
}

/// Symmetric alternative: the whole planar stiffness scaled by the centroid
/// radius, `k_ij = lambda * r_m * S * (b_i b_j + c_i c_j)`. Discretises the
/// radius-weighted form of the same balance, so no separate cylindrical
/// term is added.
pub fn modified_stiffness(
    coeffs: &ShapeCoeffs,
    p: &[[f64; 2]; 3],
    lambda: f64,
) -> Result<LocalMatrix> {
    check_lambda(lambda)?;
    let rm = (p[0][0] + p[1][0] + p[2][0]) / 3.0;
    if !(rm > 0.0) {
        return Err(Error::UnsupportedElement(format!(
            "centroid radius must be positive (got {rm})"
        )));
    }
    let planar = planar_stiffness(coeffs, lambda)?;
    let mut k = planar.k;
    for row in &mut k {
        for v in row {
            *v *= rm;
        }
    }
    Ok(LocalMatrix { k, symmetric: true })
}

/// Robin contribution of a straight boundary edge of the given length with
/// film coefficient `h` and constant load `c`:
/// `g = (h L / 6) [[2, 1], [1, 2]]`, `f_i = c L / 2`.
pub fn edge_robin(length: f64, h: f64, c: f64) -> Result<EdgeContribution> {
    if !(length > 0.0) {
        return Err(Error::Geometry(format!(
            "boundary edge length must be positive (got {length})"
        )));
    }
    if h < 0.0 {
        return Err(Error::Config(format!(
            "film coefficient must be non-negative (got {h})"
        )));
    }
    let off = h * length / 6.0;
    let diag = 2.0 * off; // keeps g_ii == 2 g_ij exact in floating point
    let load = 0.5 * c * length;
    Ok(EdgeContribution {
        g: [[diag, off], [off, diag]],
        f: [load, load],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{edge_quadrature, triangle_quadrature, QuadratureSpec};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    const UNIT_TRI: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    const REF_TRI: [[f64; 2]; 3] = [[1.0, 0.0], [2.0, 0.0], [2.0, 1.0]];

    fn random_triangle(rng: &mut StdRng) -> [[f64; 2]; 3] {
        loop {
            let p: [[f64; 2]; 3] =
                std::array::from_fn(|_| [rng.gen_range(0.05..2.0), rng.gen_range(-1.0..1.0)]);
            let area = signed_area(&p);
            if area > 1e-3 {
                return p;
            }
            if area < -1e-3 {
                return [p[0], p[2], p[1]];
            }
        }
    }

    /// Axis-aligned right triangle in one of the four corner orientations,
    /// kept away from the axis.
    fn random_right_triangle(rng: &mut StdRng) -> [[f64; 2]; 3] {
        right_triangle_with_clearance(rng, 0.05)
    }

    /// Like [`random_right_triangle`] but with min r well off the axis, so
    /// adaptive quadrature over 1/r converges quickly.
    fn tame_right_triangle(rng: &mut StdRng) -> [[f64; 2]; 3] {
        right_triangle_with_clearance(rng, 0.5)
    }

    fn right_triangle_with_clearance(rng: &mut StdRng, clearance: f64) -> [[f64; 2]; 3] {
        let lr = rng.gen_range(0.05..1.5);
        let lz = rng.gen_range(0.05..1.5);
        let r0 = rng.gen_range(lr + clearance..lr + 3.0);
        let z0 = rng.gen_range(-1.0..1.0);
        let sr: f64 = if rng.gen() { 1.0 } else { -1.0 };
        let sz: f64 = if rng.gen() { 1.0 } else { -1.0 };
        let corner = [r0, z0];
        let pr = [r0 + sr * lr, z0];
        let pz = [r0, z0 + sz * lz];
        let tri = [corner, pr, pz];
        if signed_area(&tri) > 0.0 {
            tri
        } else {
            [corner, pz, pr]
        }
    }

    #[test]
    fn unit_triangle_coefficients() {
        let c = shape_coefficients(&UNIT_TRI).unwrap();
        assert_eq!(c.area, 0.5);
        assert_eq!(c.a, [1.0, 0.0, 0.0]);
        assert_eq!(c.b, [-1.0, 1.0, 0.0]);
        assert_eq!(c.c, [-1.0, 0.0, 1.0]);
    }

    #[test]
    fn reference_triangle_coefficients() {
        // N_1 = 2 - r on [(1,0),(2,0),(2,1)].
        let c = shape_coefficients(&REF_TRI).unwrap();
        assert_eq!(c.area, 0.5);
        assert_relative_eq!(c.a[0], 2.0, max_relative = 1e-14);
        assert_relative_eq!(c.b[0], -1.0, max_relative = 1e-14);
        assert_abs_diff_eq!(c.c[0], 0.0, epsilon = 1e-14);
        assert_eq!(c.b[1], 1.0);
        assert_eq!(c.b[2], 0.0);
    }

    #[test]
    fn degenerate_and_clockwise_rejected() {
        let flat = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(matches!(
            shape_coefficients(&flat).unwrap_err(),
            Error::Geometry(_)
        ));
        let cw = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]];
        assert!(shape_coefficients(&cw).is_err());
    }

    #[test]
    fn delta_property_and_partition_of_unity() {
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..1000 {
            let p = random_triangle(&mut rng);
            let c = shape_coefficients(&p).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let n = c.a[i] + c.b[i] * p[j][0] + c.c[i] * p[j][1];
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(n, expect, epsilon = 1e-12);
                }
            }
            assert_abs_diff_eq!(c.a.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            let scale = c.b.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert_abs_diff_eq!(
                c.b.iter().sum::<f64>(),
                0.0,
                epsilon = 1e-12 * scale.max(1.0)
            );
            let scale = c.c.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert_abs_diff_eq!(
                c.c.iter().sum::<f64>(),
                0.0,
                epsilon = 1e-12 * scale.max(1.0)
            );
        }
    }

    #[test]
    fn planar_stiffness_unit_triangle() {
        let c = shape_coefficients(&UNIT_TRI).unwrap();
        let m = planar_stiffness(&c, 1.0).unwrap();
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(m.k[i][j], expect[i][j], max_relative = 1e-14);
            }
        }
        assert!(m.symmetric);
    }

    #[test]
    fn planar_stiffness_matches_quadrature() {
        let mut rng = StdRng::seed_from_u64(7);
        let spec = QuadratureSpec::default();
        for _ in 0..20 {
            let p = random_triangle(&mut rng);
            let c = shape_coefficients(&p).unwrap();
            let m = planar_stiffness(&c, 2.5).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let integrand =
                        move |_r: f64, _z: f64| 2.5 * (c.b[i] * c.b[j] + c.c[i] * c.c[j]);
                    let q = triangle_quadrature(integrand, &p, &spec).unwrap();
                    assert_relative_eq!(m.k[i][j], q.value, max_relative = 1e-12, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn planar_stiffness_scales_linearly_and_is_psd() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let p = random_triangle(&mut rng);
            let c = shape_coefficients(&p).unwrap();
            let m1 = planar_stiffness(&c, 1.7).unwrap();
            let m2 = planar_stiffness(&c, 3.4).unwrap();
            let mat = nalgebra::Matrix3::from_fn(|i, j| m1.k[i][j]);
            let eig = nalgebra::SymmetricEigen::new(mat);
            let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            let scale = ev[2].abs();
            // One zero eigenvalue (constant mode), the rest positive.
            assert!(ev[0].abs() <= 1e-12 * scale);
            assert!(ev[1] > 1e-12 * scale);
            for i in 0..3 {
                for j in 0..3 {
                    assert_relative_eq!(2.0 * m1.k[i][j], m2.k[i][j], max_relative = 1e-15);
                }
            }
        }
        assert!(planar_stiffness(&shape_coefficients(&UNIT_TRI).unwrap(), 0.0).is_err());
        assert!(planar_stiffness(&shape_coefficients(&UNIT_TRI).unwrap(), -1.0).is_err());
    }

    #[test]
    fn closed_form_integrals_reference_triangle() {
        // Frozen closed forms on [(1,0),(2,0),(2,1)].
        assert_relative_eq!(
            integral_inv_r(&REF_TRI).unwrap(),
            1.0 - 2f64.ln(),
            max_relative = 1e-13
        );
        assert_relative_eq!(
            integral_z_over_r(&REF_TRI).unwrap(),
            (2f64.ln() - 0.5) / 2.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn closed_form_integrals_match_quadrature() {
        let mut rng = StdRng::seed_from_u64(1234);
        let spec = QuadratureSpec {
            tolerance: 1e-11,
            max_depth: 24,
        };
        for _ in 0..10 {
            let p = tame_right_triangle(&mut rng);
            let q1 = triangle_quadrature(|r, _| 1.0 / r, &p, &spec).unwrap();
            assert_relative_eq!(integral_inv_r(&p).unwrap(), q1.value, max_relative = 1e-9);
            let q3 = triangle_quadrature(|r, z| z / r, &p, &spec).unwrap();
            assert_relative_eq!(
                integral_z_over_r(&p).unwrap(),
                q3.value,
                max_relative = 1e-8,
                epsilon = 1e-11
            );
        }
    }

    #[test]
    fn exact_correction_diagonal_entry() {
        // Row for N_1 = 2 - r with b_1 = -1:
        // entry (1,1) = b_1 * (2*(1 - ln 2) - S) = -(2(1 - ln 2) - 0.5).
        let c = shape_coefficients(&REF_TRI).unwrap();
        let m = cyl_correction_exact(&c, &REF_TRI, 1.0).unwrap();
        let expect = -(2.0 * (1.0 - 2f64.ln()) - 0.5);
        assert_relative_eq!(m.k[0][0], expect, max_relative = 1e-12);
        assert!(!m.symmetric);
    }

    #[test]
    fn exact_correction_columns_condense_to_inv_r() {
        // Sum over i of int(N_i/r) is int(1/r), so each column sums to
        // lambda * b_j * int(1/r).
        let mut rng = StdRng::seed_from_u64(99);
        for _ in 0..100 {
            let p = random_right_triangle(&mut rng);
            let c = shape_coefficients(&p).unwrap();
            let m = cyl_correction_exact(&c, &p, 3.0).unwrap();
            let i1 = integral_inv_r(&p).unwrap();
            for j in 0..3 {
                let col: f64 = (0..3).map(|i| m.k[i][j]).sum();
                assert_relative_eq!(
                    col,
                    3.0 * c.b[j] * i1,
                    max_relative = 1e-10,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn exact_correction_matches_quadrature() {
        let mut rng = StdRng::seed_from_u64(4321);
        let spec = QuadratureSpec {
            tolerance: 1e-11,
            max_depth: 24,
        };
        for _ in 0..5 {
            let p = tame_right_triangle(&mut rng);
            let c = shape_coefficients(&p).unwrap();
            let m = cyl_correction_exact(&c, &p, 1.0).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let q = triangle_quadrature(
                        move |r, z| c.b[j] * (c.a[i] + c.b[i] * r + c.c[i] * z) / r,
                        &p,
                        &spec,
                    )
                    .unwrap();
                    assert_relative_eq!(m.k[i][j], q.value, max_relative = 1e-8, epsilon = 1e-11);
                }
            }
        }
    }

    #[test]
    fn exact_correction_rejects_unsupported_elements() {
        let skewed = [[1.0, 0.0], [2.0, 0.1], [1.5, 1.0]];
        let c = shape_coefficients(&skewed).unwrap();
        let err = cyl_correction_exact(&c, &skewed, 1.0).unwrap_err();
        match err {
            Error::UnsupportedElement(msg) => assert!(msg.contains("mass-center")),
            other => panic!("expected UnsupportedElement, got {other:?}"),
        }
        let on_axis = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]];
        let c = shape_coefficients(&on_axis).unwrap();
        assert!(cyl_correction_exact(&c, &on_axis, 1.0).is_err());
    }

    #[test]
    fn masscenter_rows_for_reference_triangle() {
        // b = (-1, 1, 0), S = 0.5, r_m = 5/3: every row is
        // lambda * b_j * S / (3 r_m) = (-0.1, 0.1, 0).
        let c = shape_coefficients(&REF_TRI).unwrap();
        let m = cyl_correction_masscenter(&c, &REF_TRI, 1.0).unwrap();
        for i in 0..3 {
            assert_relative_eq!(m.k[i][0], -0.1, max_relative = 1e-14);
            assert_relative_eq!(m.k[i][1], 0.1, max_relative = 1e-14);
            assert_abs_diff_eq!(m.k[i][2], 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn masscenter_equals_literal_bracket_form() {
        // The implementation uses the condensed S/(3 r_m); check it against
        // the unsimplified b_j * S * (a_i/r_m + b_i + c_i z_m/r_m) rows.
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..200 {
            let p = random_triangle(&mut rng);
            let c = shape_coefficients(&p).unwrap();
            let m = cyl_correction_masscenter(&c, &p, 2.0).unwrap();
            let rm = (p[0][0] + p[1][0] + p[2][0]) / 3.0;
            let zm = (p[0][1] + p[1][1] + p[2][1]) / 3.0;
            for i in 0..3 {
                let bracket = c.a[i] / rm + c.b[i] + c.c[i] * zm / rm;
                for j in 0..3 {
                    let literal = 2.0 * c.b[j] * c.area * bracket;
                    assert_relative_eq!(m.k[i][j], literal, max_relative = 1e-9, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn masscenter_rows_are_bitwise_identical() {
        let mut rng = StdRng::seed_from_u64(6);
        for _ in 0..1000 {
            let p = random_triangle(&mut rng);
            let c = shape_coefficients(&p).unwrap();
            let m = cyl_correction_masscenter(&c, &p, 1.3).unwrap();
            assert_eq!(m.k[0], m.k[1]);
            assert_eq!(m.k[0], m.k[2]);
        }
    }

    #[test]
    fn masscenter_gap_to_exact_integral() {
        // S / r_m = 0.3 vs int 1/r = 1 - ln 2: about 2.2% off on the
        // reference triangle.
        let c = shape_coefficients(&REF_TRI).unwrap();
        let rm = 5.0 / 3.0;
        let approx_i1 = c.area / rm;
        let exact_i1 = integral_inv_r(&REF_TRI).unwrap();
        assert_relative_eq!(approx_i1, 0.3, max_relative = 1e-14);
        let gap = (approx_i1 - exact_i1).abs() / exact_i1;
        assert!((gap - 0.0223).abs() < 0.0005, "gap = {gap}");

        // Far from the axis 1/r is nearly constant over the element.
        let far = [[10.0, 0.0], [11.0, 0.0], [11.0, 1.0]];
        let cf = shape_coefficients(&far).unwrap();
        let rm_far = 32.0 / 3.0;
        let gap_far = (cf.area / rm_far - integral_inv_r(&far).unwrap()).abs()
            / integral_inv_r(&far).unwrap();
        assert!(gap_far < 1e-3, "gap_far = {gap_far}");
    }

    #[test]
    fn masscenter_gap_shrinks_with_element_size() {
        // Shrinking the element about its centroid at least halves the
        // entrywise gap to the exact matrix (it quarters in the limit).
        let c = shape_coefficients(&REF_TRI).unwrap();
        let exact = cyl_correction_exact(&c, &REF_TRI, 1.0).unwrap();
        let mc = cyl_correction_masscenter(&c, &REF_TRI, 1.0).unwrap();
        let gap = |a: &LocalMatrix, b: &LocalMatrix| {
            let mut g = 0.0f64;
            for i in 0..3 {
                for j in 0..3 {
                    g = g.max((a.k[i][j] - b.k[i][j]).abs());
                }
            }
            g
        };
        let g1 = gap(&exact, &mc);

        let centroid = [5.0 / 3.0, 1.0 / 3.0];
        let half: [[f64; 2]; 3] = std::array::from_fn(|i| {
            [
                centroid[0] + 0.5 * (REF_TRI[i][0] - centroid[0]),
                centroid[1] + 0.5 * (REF_TRI[i][1] - centroid[1]),
            ]
        });
        let ch = shape_coefficients(&half).unwrap();
        let exact_h = cyl_correction_exact(&ch, &half, 1.0).unwrap();
        let mc_h = cyl_correction_masscenter(&ch, &half, 1.0).unwrap();
        let g2 = gap(&exact_h, &mc_h);
        assert!(g2 <= 0.5 * g1, "g1 = {g1}, g2 = {g2}");
    }

    #[test]
    fn modified_stiffness_scales_planar_by_centroid_radius() {
        // Unit-shaped triangle translated so its centroid radius is 3.
        let shift = 3.0 - 1.0 / 3.0;
        let tri: [[f64; 2]; 3] = std::array::from_fn(|i| [UNIT_TRI[i][0] + shift, UNIT_TRI[i][1]]);
        let c = shape_coefficients(&tri).unwrap();
        let modified = modified_stiffness(&c, &tri, 1.0).unwrap();
        let planar = planar_stiffness(&c, 1.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(
                    modified.k[i][j],
                    3.0 * planar.k[i][j],
                    max_relative = 1e-13,
                    epsilon = 1e-15
                );
            }
        }
        assert!(modified.symmetric);
    }

    #[test]
    fn local_row_sums_vanish_for_all_methods() {
        let mut rng = StdRng::seed_from_u64(2024);
        for _ in 0..1000 {
            let p = random_right_triangle(&mut rng);
            let c = shape_coefficients(&p).unwrap();
            let planar = planar_stiffness(&c, 7.0).unwrap();
            let exact = cyl_correction_exact(&c, &p, 7.0).unwrap();
            let mc = cyl_correction_masscenter(&c, &p, 7.0).unwrap();
            let modified = modified_stiffness(&c, &p, 7.0).unwrap();
            let combos: [[[f64; 3]; 3]; 3] = [
                std::array::from_fn(|i| std::array::from_fn(|j| planar.k[i][j] - exact.k[i][j])),
                std::array::from_fn(|i| std::array::from_fn(|j| planar.k[i][j] - mc.k[i][j])),
                modified.k,
            ];
            for k in &combos {
                let scale = k
                    .iter()
                    .flatten()
                    .map(|v| v.abs())
                    .fold(f64::MIN_POSITIVE, f64::max);
                for row in k {
                    let sum: f64 = row.iter().sum();
                    assert!(sum.abs() <= 1e-12 * scale, "row sum {sum} vs scale {scale}");
                }
            }
        }
    }

    #[test]
    fn edge_robin_examples() {
        let e = edge_robin(0.1, 10.0, 0.0).unwrap();
        assert_relative_eq!(e.g[0][0], 1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(e.g[0][1], 1.0 / 6.0, max_relative = 1e-14);
        assert_eq!(e.f, [0.0, 0.0]);

        let e = edge_robin(0.1, 0.0, 1000.0).unwrap();
        assert_eq!(e.g[0][0], 0.0);
        assert_eq!(e.f, [50.0, 50.0]);

        assert!(edge_robin(0.1, -1.0, 0.0).is_err());
        assert!(edge_robin(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn edge_robin_diagonal_ratio_exact() {
        let mut rng = StdRng::seed_from_u64(77);
        for _ in 0..1000 {
            let len = rng.gen_range(1e-6..10.0);
            let h = rng.gen_range(0.0..1e9);
            let e = edge_robin(len, h, 0.0).unwrap();
            assert_eq!(e.g[0][0], 2.0 * e.g[0][1]);
            assert_eq!(e.g[1][1], e.g[0][0]);
            assert_eq!(e.g[1][0], e.g[0][1]);
        }
    }

    #[test]
    fn edge_robin_matches_quadrature() {
        // g entries are int h N_i N_j ds over the edge.
        let spec = QuadratureSpec::default();
        let len = 0.37;
        let h = 12.5;
        let e = edge_robin(len, h, 0.0).unwrap();
        let a = [1.2, 0.4];
        let b = [1.2, 0.4 + len];
        let n0 = move |_r: f64, z: f64| 1.0 - (z - 0.4) / len;
        let q00 = edge_quadrature(|r, z| h * n0(r, z) * n0(r, z), a, b, &spec).unwrap();
        let q01 = edge_quadrature(|r, z| h * n0(r, z) * (1.0 - n0(r, z)), a, b, &spec).unwrap();
        assert_relative_eq!(e.g[0][0], q00.value, max_relative = 1e-13);
        assert_relative_eq!(e.g[0][1], q01.value, max_relative = 1e-13);
    }
}
