//! Independent references used to check the solver: analytic temperature
//! profiles with closed-form solutions and an adaptive quadrature that knows
//! nothing about the element formulas it is used to verify.

use crate::error::{Error, Result};
use crate::receiver::TemperatureField;

/// Robin coefficient large enough to emulate a fixed-temperature boundary.
/// With conductivities of order 1..1e2 and metre-scale domains the boundary
/// temperature error is of order `flux / PENALTY`, far below the
/// verification tolerances, while the system stays well conditioned in f64.
pub const DIRICHLET_PENALTY: f64 = 1e8;

/// Temperature profile with a closed form, evaluable at any mesh node.
pub trait AnalyticProfile {
    fn temperature_at(&self, r: f64, z: f64) -> Result<f64>;
}

/// Steady conduction through a hollow cylinder with fixed surface
/// temperatures: `T(r) = t1 + (t2 - t1) ln(r/r1) / ln(r2/r1)`.
#[derive(Debug, Clone, Copy)]
pub struct RadialProfile {
    pub r1: f64,
    pub r2: f64,
    pub t1: f64,
    pub t2: f64,
}

impl RadialProfile {
    pub fn new(r1: f64, r2: f64, t1: f64, t2: f64) -> Result<Self> {
        if !(0.0 < r1 && r1 < r2) {
            return Err(Error::Domain(format!(
                "radial profile needs 0 < r1 < r2 (got {r1}, {r2})"
            )));
        }
        Ok(Self { r1, r2, t1, t2 })
    }

    pub fn temperature(&self, r: f64) -> Result<f64> {
        // Tiny slack so nodes that sit on the surfaces up to roundoff pass.
        let eps = 1e-12 * (self.r2 - self.r1);
        if r < self.r1 - eps || r > self.r2 + eps {
            return Err(Error::Domain(format!(
                "radius {r} outside [{}, {}]",
                self.r1, self.r2
            )));
        }
        let r = r.clamp(self.r1, self.r2);
        Ok(self.t1 + (self.t2 - self.t1) * (r / self.r1).ln() / (self.r2 / self.r1).ln())
    }

    /// Heat flow through any cylindrical shell of the given height,
    /// positive from the inner surface towards the outer:
    /// `Q = 2 pi lambda (t1 - t2) H / ln(r2/r1)`.
    pub fn heat_flow(&self, lambda: f64, height: f64) -> f64 {
        2.0 * std::f64::consts::PI * lambda * (self.t1 - self.t2) * height
            / (self.r2 / self.r1).ln()
    }
}

impl AnalyticProfile for RadialProfile {
    fn temperature_at(&self, r: f64, _z: f64) -> Result<f64> {
        self.temperature(r)
    }
}

/// Linear axial profile `T(z) = t0 + (t1 - t0) (z - z0) / (z1 - z0)`.
#[derive(Debug, Clone, Copy)]
pub struct AxialProfile {
    pub z0: f64,
    pub z1: f64,
    pub t0: f64,
    pub t1: f64,
}

impl AxialProfile {
    pub fn new(z0: f64, z1: f64, t0: f64, t1: f64) -> Result<Self> {
        if !(z1 > z0) {
            return Err(Error::Domain(format!(
                "axial profile needs z0 < z1 (got {z0}, {z1})"
            )));
        }
        Ok(Self { z0, z1, t0, t1 })
    }

    pub fn temperature(&self, z: f64) -> Result<f64> {
        let eps = 1e-12 * (self.z1 - self.z0);
        if z < self.z0 - eps || z > self.z1 + eps {
            return Err(Error::Domain(format!(
                "height {z} outside [{}, {}]",
                self.z0, self.z1
            )));
        }
        Ok(self.t0 + (self.t1 - self.t0) * (z - self.z0) / (self.z1 - self.z0))
    }

    /// Gradient dT/dz.
    pub fn gradient(&self) -> f64 {
        (self.t1 - self.t0) / (self.z1 - self.z0)
    }
}

impl AnalyticProfile for AxialProfile {
    fn temperature_at(&self, _r: f64, z: f64) -> Result<f64> {
        self.temperature(z)
    }
}

/// Max relative nodal error of a solved field against an analytic profile.
pub fn compare_fields(field: &TemperatureField, oracle: &dyn AnalyticProfile) -> Result<f64> {
    let mut worst = 0.0f64;
    for node in &field.mesh.nodes {
        let exact = oracle.temperature_at(node.r, node.z)?;
        let denom = exact.abs().max(f64::MIN_POSITIVE);
        worst = worst.max((field.temperatures[node.id] - exact).abs() / denom);
    }
    Ok(worst)
}

/// Controls for the adaptive quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Relative tolerance, measured against the L1 size of the integral.
    pub tolerance: f64,
    /// Maximum subdivision depth before giving up.
    pub max_depth: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            tolerance: 1e-13,
            max_depth: 24,
        }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<()> {
        if !(self.tolerance >= 1e-13) {
            return Err(Error::Config(format!(
                "quadrature tolerance must be at least 1e-13 (got {})",
                self.tolerance
            )));
        }
        if self.max_depth == 0 {
            return Err(Error::Config(
                "quadrature max_depth must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
}

// Degree-2 rule: edge midpoints, equal weights.
const TRI_LOW: [([f64; 3], f64); 3] = [
    ([0.5, 0.5, 0.0], 1.0 / 3.0),
    ([0.0, 0.5, 0.5], 1.0 / 3.0),
    ([0.5, 0.0, 0.5], 1.0 / 3.0),
];

// Degree-5 seven-point rule (barycentric points, weights summing to one),
// digits as tabulated even where they exceed f64 resolution.
#[allow(clippy::excessive_precision)]
const TRI_A: f64 = 0.470_142_064_105_115_1;
#[allow(clippy::excessive_precision)]
const TRI_B: f64 = 0.101_286_507_323_456_34;
#[allow(clippy::excessive_precision)]
const TRI_WA: f64 = 0.132_394_152_788_506_18;
#[allow(clippy::excessive_precision)]
const TRI_WB: f64 = 0.125_939_180_544_827_15;
const TRI_HIGH: [([f64; 3], f64); 7] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 9.0 / 40.0),
    ([TRI_A, TRI_A, 1.0 - 2.0 * TRI_A], TRI_WA),
    ([TRI_A, 1.0 - 2.0 * TRI_A, TRI_A], TRI_WA),
    ([1.0 - 2.0 * TRI_A, TRI_A, TRI_A], TRI_WA),
    ([TRI_B, TRI_B, 1.0 - 2.0 * TRI_B], TRI_WB),
    ([TRI_B, 1.0 - 2.0 * TRI_B, TRI_B], TRI_WB),
    ([1.0 - 2.0 * TRI_B, TRI_B, TRI_B], TRI_WB),
];

fn tri_rule<F: Fn(f64, f64) -> f64>(f: &F, tri: &[[f64; 2]; 3], rule: &[([f64; 3], f64)]) -> f64 {
    let area = crate::mesh::signed_area(tri).abs();
    let mut acc = 0.0;
    for (bary, w) in rule {
        let r = bary[0] * tri[0][0] + bary[1] * tri[1][0] + bary[2] * tri[2][0];
        let z = bary[0] * tri[0][1] + bary[1] * tri[1][1] + bary[2] * tri[2][1];
        acc += w * f(r, z);
    }
    acc * area
}

fn tri_adapt<F: Fn(f64, f64) -> f64>(
    f: &F,
    tri: &[[f64; 2]; 3],
    tol_abs: f64,
    depth: usize,
) -> Result<QuadratureResult> {
    let low = tri_rule(f, tri, &TRI_LOW);
    let high = tri_rule(f, tri, &TRI_HIGH);
    let err = (high - low).abs();
    if err <= tol_abs {
        return Ok(QuadratureResult {
            value: high,
            error_estimate: err,
        });
    }
    if depth == 0 {
        return Err(Error::OracleNonConvergence(format!(
            "triangle quadrature exhausted subdivision depth (last error {err:.3e} > {tol_abs:.3e})"
        )));
    }
    // Split at edge midpoints into four congruent children.
    let mid = |a: [f64; 2], b: [f64; 2]| [(a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5];
    let (p0, p1, p2) = (tri[0], tri[1], tri[2]);
    let (m01, m12, m20) = (mid(p0, p1), mid(p1, p2), mid(p2, p0));
    let children = [
        [p0, m01, m20],
        [m01, p1, m12],
        [m20, m12, p2],
        [m01, m12, m20],
    ];
    let mut value = 0.0;
    let mut error = 0.0;
    for child in &children {
        let res = tri_adapt(f, child, tol_abs * 0.25, depth - 1)?;
        value += res.value;
        error += res.error_estimate;
    }
    Ok(QuadratureResult {
        value,
        error_estimate: error,
    })
}

/// Integrate `f(r, z)` over a triangle by adaptive subdivision, refining
/// until the embedded low/high rule pair agrees within the tolerance.
pub fn triangle_quadrature<F: Fn(f64, f64) -> f64>(
    f: F,
    tri: &[[f64; 2]; 3],
    spec: &QuadratureSpec,
) -> Result<QuadratureResult> {
    spec.validate()?;
    if crate::mesh::signed_area(tri).abs() < 1e-300 {
        return Err(Error::Domain(
            "quadrature over a degenerate triangle".into(),
        ));
    }
    // Scale the tolerance by the L1 size so cancellation cannot mask error.
    let l1 = tri_rule(&|r, z| f(r, z).abs(), tri, &TRI_HIGH);
    let tol_abs = spec.tolerance * l1.max(f64::MIN_POSITIVE);
    tri_adapt(&f, tri, tol_abs, spec.max_depth)
}

// Gauss-Legendre nodes/weights on [-1, 1].
const GL2: [(f64, f64); 2] = [
    (-0.577_350_269_189_625_8, 1.0),
    (0.577_350_269_189_625_8, 1.0),
];
const GL4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_86),
    (-0.339_981_043_584_856_26, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_26, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_86),
];

fn seg_rule<F: Fn(f64, f64) -> f64>(f: &F, a: [f64; 2], b: [f64; 2], rule: &[(f64, f64)]) -> f64 {
    let half = [(b[0] - a[0]) * 0.5, (b[1] - a[1]) * 0.5];
    let midp = [(b[0] + a[0]) * 0.5, (b[1] + a[1]) * 0.5];
    let jac = (half[0] * half[0] + half[1] * half[1]).sqrt();
    rule.iter()
        .map(|&(x, w)| w * f(midp[0] + x * half[0], midp[1] + x * half[1]))
        .sum::<f64>()
        * jac
}

fn seg_adapt<F: Fn(f64, f64) -> f64>(
    f: &F,
    a: [f64; 2],
    b: [f64; 2],
    tol_abs: f64,
    depth: usize,
) -> Result<QuadratureResult> {
    let low = seg_rule(f, a, b, &GL2);
    let high = seg_rule(f, a, b, &GL4);
    let err = (high - low).abs();
    if err <= tol_abs {
        return Ok(QuadratureResult {
            value: high,
            error_estimate: err,
        });
    }
    if depth == 0 {
        return Err(Error::OracleNonConvergence(format!(
            "edge quadrature exhausted subdivision depth (last error {err:.3e} > {tol_abs:.3e})"
        )));
    }
    let mid = [(a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5];
    let left = seg_adapt(f, a, mid, tol_abs * 0.5, depth - 1)?;
    let right = seg_adapt(f, mid, b, tol_abs * 0.5, depth - 1)?;
    Ok(QuadratureResult {
        value: left.value + right.value,
        error_estimate: left.error_estimate + right.error_estimate,
    })
}

/// Integrate `f(r, z)` along the straight segment from `a` to `b`
/// (arclength measure) with an adaptive Gauss pair.
pub fn edge_quadrature<F: Fn(f64, f64) -> f64>(
    f: F,
    a: [f64; 2],
    b: [f64; 2],
    spec: &QuadratureSpec,
) -> Result<QuadratureResult> {
    spec.validate()?;
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    if len < 1e-300 {
        return Err(Error::Domain("quadrature over a degenerate edge".into()));
    }
    let l1 = seg_rule(&|r, z| f(r, z).abs(), a, b, &GL4);
    let tol_abs = spec.tolerance * l1.max(f64::MIN_POSITIVE);
    seg_adapt(&f, a, b, tol_abs, spec.max_depth)
}
