//! Structured triangular meshes for the axisymmetric receiver section.
//!
//! The solved domain is an L-shaped meridional section: a bottom plate
//! `[r_min, r_outer] x [0, t_b]` joined to a cylindrical wall
//! `[r_inner, r_outer] x [t_b, t_b + H]`. Meshes are built on a tensor grid
//! of radial and axial lines; every rectangular cell is split into two
//! right triangles with the hypotenuse running from the lower-left to the
//! upper-right corner, so all elements are axis-aligned right triangles.
//!
//! Boundary faces carry surface tags:
//!
//! * `A` - inner wall surface facing the cavity (`r = r_inner`, above the plate)
//! * `B` - aperture-adjacent faces: top annulus and the plate rim at `r = r_min`
//! * `C` - plate top inside the cavity (`z = t_b`, `r <= r_inner`)
//! * `D` - outer surface (`r = r_outer`)
//! * `E` - plate bottom carrying the working-gas exchanger (`z = 0`)

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Degenerate-area threshold for triangle validity checks.
const DEGENERATE_AREA: f64 = 1e-14;

/// Dimensions of the receiver section. All lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverGeometry {
    /// Innermost radius of the bottom plate. Must be positive: the
    /// formulation carries 1/r terms that are singular on the axis.
    pub r_min: f64,
    /// Inner radius of the cylindrical wall (cavity radius).
    pub r_inner: f64,
    /// Outer radius of plate and wall.
    pub r_outer: f64,
    /// Plate thickness.
    pub bottom_thickness: f64,
    /// Wall height above the plate.
    pub wall_height: f64,
}

impl ReceiverGeometry {
    pub fn validate(&self) -> Result<()> {
        let g = self;
        if !(g.r_min > 0.0) {
            return Err(Error::Geometry(format!(
                "r_min must be positive (got {}); the domain may not touch the axis",
                g.r_min
            )));
        }
        if !(g.r_min < g.r_inner && g.r_inner < g.r_outer) {
            return Err(Error::Geometry(format!(
                "radii must satisfy 0 < r_min < r_inner < r_outer (got {}, {}, {})",
                g.r_min, g.r_inner, g.r_outer
            )));
        }
        if !(g.bottom_thickness > 0.0) {
            return Err(Error::Geometry(format!(
                "bottom_thickness must be positive (got {})",
                g.bottom_thickness
            )));
        }
        if !(g.wall_height > 0.0) {
            return Err(Error::Geometry(format!(
                "wall_height must be positive (got {})",
                g.wall_height
            )));
        }
        Ok(())
    }

    /// Area of the L-shaped section in the (r, z) plane.
    pub fn section_area(&self) -> f64 {
        (self.r_outer - self.r_min) * self.bottom_thickness
            + (self.r_outer - self.r_inner) * self.wall_height
    }

    /// Total boundary length of the section.
    pub fn section_perimeter(&self) -> f64 {
        let plate_w = self.r_outer - self.r_min;
        let wall_w = self.r_outer - self.r_inner;
        let lip = self.r_inner - self.r_min;
        plate_w                                  // E: plate bottom
            + (self.bottom_thickness + self.wall_height) // D: outer surface
            + wall_w                             // B: top annulus
            + self.wall_height                   // A: inner wall
            + lip                                // C: plate top in the cavity
            + self.bottom_thickness // B: plate rim at r_min
    }
}

/// Boundary surface label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SurfaceTag {
    A,
    B,
    C,
    D,
    E,
}

impl SurfaceTag {
    pub const ALL: [SurfaceTag; 5] = [
        SurfaceTag::A,
        SurfaceTag::B,
        SurfaceTag::C,
        SurfaceTag::D,
        SurfaceTag::E,
    ];
}

impl fmt::Display for SurfaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SurfaceTag::A => "A",
            SurfaceTag::B => "B",
            SurfaceTag::C => "C",
            SurfaceTag::D => "D",
            SurfaceTag::E => "E",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for SurfaceTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(SurfaceTag::A),
            "B" | "b" => Ok(SurfaceTag::B),
            "C" | "c" => Ok(SurfaceTag::C),
            "D" | "d" => Ok(SurfaceTag::D),
            "E" | "e" => Ok(SurfaceTag::E),
            other => Err(Error::Config(format!("unknown surface tag '{other}'"))),
        }
    }
}

/// Whether a boundary edge runs along the radial or the axial direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeOrientation {
    Radial,
    Axial,
}

/// Mesh node. `id` always equals the node's index in `Mesh::nodes`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub id: usize,
    pub r: f64,
    pub z: f64,
}

/// Linear triangle, node ids in counter-clockwise order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TriElement {
    pub nodes: [usize; 3],
    pub material_id: usize,
}

/// Tagged boundary face of one cell side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: SurfaceTag,
    pub length: f64,
    pub orientation: EdgeOrientation,
}

/// Tensor-grid lines the mesh was generated from; kept for raster export.
#[derive(Debug, Clone, PartialEq)]
pub struct GridInfo {
    pub r_lines: Vec<f64>,
    pub z_lines: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub nodes: Vec<Node>,
    pub elements: Vec<TriElement>,
    pub boundary: Vec<BoundaryEdge>,
    /// Max |i - j| over node-id pairs sharing an element.
    pub half_bandwidth: usize,
    /// `permutation[current_id] = id in the originally generated mesh`.
    /// `None` means the original ordering.
    pub permutation: Option<Vec<usize>>,
    pub grid: Option<GridInfo>,
}

impl Mesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn element_points(&self, e: &TriElement) -> [[f64; 2]; 3] {
        let p = |i: usize| [self.nodes[e.nodes[i]].r, self.nodes[e.nodes[i]].z];
        [p(0), p(1), p(2)]
    }

    /// Sum of signed element areas. Positive for a valid CCW mesh.
    pub fn total_area(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| signed_area(&self.element_points(e)))
            .sum()
    }

    /// Total tagged boundary length per surface.
    pub fn boundary_length_by_tag(&self) -> BTreeMap<SurfaceTag, f64> {
        let mut m = BTreeMap::new();
        for e in &self.boundary {
            *m.entry(e.tag).or_insert(0.0) += e.length;
        }
        m
    }
}

pub(crate) fn signed_area(p: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

fn half_bandwidth_of(elements: &[TriElement]) -> usize {
    let mut hb = 0usize;
    for e in elements {
        for i in 0..3 {
            for j in (i + 1)..3 {
                let d = e.nodes[i].abs_diff(e.nodes[j]);
                hb = hb.max(d);
            }
        }
    }
    hb
}

fn linspace(a: f64, b: f64, n_cells: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(n_cells + 1);
    for i in 0..=n_cells {
        // Exact endpoints; interior points shared bit-for-bit by all users.
        let t = i as f64 / n_cells as f64;
        v.push(if i == 0 {
            a
        } else if i == n_cells {
            b
        } else {
            a + t * (b - a)
        });
    }
    v
}

/// Split `n` cells across two spans proportionally, at least one cell each.
fn split_cells(n: usize, left_span: f64, right_span: f64) -> (usize, usize) {
    let frac = left_span / (left_span + right_span);
    let mut n_left = ((n as f64) * frac).round() as usize;
    n_left = n_left.clamp(1, n.saturating_sub(1).max(1));
    let n_right = n.saturating_sub(n_left).max(1);
    (n_left, n_right)
}

/// Which side of a grid cell a boundary face lies on.
#[derive(Clone, Copy)]
enum Side {
    Bottom,
    Top,
    Left,
    Right,
}

struct GridSpec {
    r_lines: Vec<f64>,
    z_lines: Vec<f64>,
    /// Cells with `ir < hole_ir_end && iz >= hole_iz_start` are outside the
    /// domain (the cavity volume of the L-shape). `hole_ir_end = 0` means no hole.
    hole_ir_end: usize,
    hole_iz_start: usize,
    tags: TagRule,
}

enum TagRule {
    Rectangle(RectTags),
    Receiver,
}

/// Surface tags to attach to the four sides of a rectangular verification mesh.
#[derive(Debug, Clone, Copy)]
pub struct RectTags {
    pub left: SurfaceTag,
    pub right: SurfaceTag,
    pub bottom: SurfaceTag,
    pub top: SurfaceTag,
}

impl GridSpec {
    fn cell_present(&self, ir: usize, iz: usize) -> bool {
        !(ir < self.hole_ir_end && iz >= self.hole_iz_start)
    }

    fn node_present(&self, ir: usize, iz: usize) -> bool {
        // A node exists iff it touches at least one present cell; for this
        // hole shape that reduces to not lying strictly inside the hole.
        !(ir < self.hole_ir_end && iz > self.hole_iz_start)
    }

    fn tag_for(&self, side: Side, ir: usize, iz: usize) -> SurfaceTag {
        match &self.tags {
            TagRule::Rectangle(t) => match side {
                Side::Bottom => t.bottom,
                Side::Top => t.top,
                Side::Left => t.left,
                Side::Right => t.right,
            },
            TagRule::Receiver => {
                let nr = self.r_lines.len() - 1;
                let nz = self.z_lines.len() - 1;
                match side {
                    Side::Bottom => SurfaceTag::E,
                    Side::Top => {
                        if iz + 1 == nz {
                            SurfaceTag::B // top annulus
                        } else {
                            SurfaceTag::C // plate top facing the cavity
                        }
                    }
                    Side::Left => {
                        if ir == 0 {
                            SurfaceTag::B // plate rim at r_min
                        } else {
                            SurfaceTag::A // inner wall surface
                        }
                    }
                    Side::Right => {
                        debug_assert_eq!(ir + 1, nr);
                        SurfaceTag::D
                    }
                }
            }
        }
    }

    fn build(self) -> Mesh {
        let nr = self.r_lines.len() - 1;
        let nz = self.z_lines.len() - 1;

        // Number nodes sweeping each constant-z row with r varying fastest.
        let mut node_id = vec![vec![None; nr + 1]; nz + 1];
        let mut nodes = Vec::new();
        for iz in 0..=nz {
            for ir in 0..=nr {
                if self.node_present(ir, iz) {
                    let id = nodes.len();
                    node_id[iz][ir] = Some(id);
                    nodes.push(Node {
                        id,
                        r: self.r_lines[ir],
                        z: self.z_lines[iz],
                    });
                }
            }
        }

        let mut elements = Vec::new();
        let mut boundary = Vec::new();
        for iz in 0..nz {
            for ir in 0..nr {
                if !self.cell_present(ir, iz) {
                    continue;
                }
                let ll = node_id[iz][ir].unwrap();
                let lr = node_id[iz][ir + 1].unwrap();
                let ur = node_id[iz + 1][ir + 1].unwrap();
                let ul = node_id[iz + 1][ir].unwrap();
                // Hypotenuse from lower-left to upper-right; both CCW.
                elements.push(TriElement {
                    nodes: [ll, lr, ur],
                    material_id: 0,
                });
                elements.push(TriElement {
                    nodes: [ll, ur, ul],
                    material_id: 0,
                });

                let dr = self.r_lines[ir + 1] - self.r_lines[ir];
                let dz = self.z_lines[iz + 1] - self.z_lines[iz];
                let mut side = |s: Side, n0: usize, n1: usize, len: f64, o: EdgeOrientation| {
                    boundary.push(BoundaryEdge {
                        nodes: [n0, n1],
                        tag: self.tag_for(s, ir, iz),
                        length: len,
                        orientation: o,
                    });
                };
                if iz == 0 || !self.cell_present(ir, iz - 1) {
                    side(Side::Bottom, ll, lr, dr, EdgeOrientation::Radial);
                }
                if iz + 1 == nz || !self.cell_present(ir, iz + 1) {
                    side(Side::Top, ul, ur, dr, EdgeOrientation::Radial);
                }
                if ir == 0 || !self.cell_present(ir - 1, iz) {
                    side(Side::Left, ll, ul, dz, EdgeOrientation::Axial);
                }
                if ir + 1 == nr || !self.cell_present(ir + 1, iz) {
                    side(Side::Right, lr, ur, dz, EdgeOrientation::Axial);
                }
            }
        }

        let half_bandwidth = half_bandwidth_of(&elements);
        Mesh {
            nodes,
            elements,
            boundary,
            half_bandwidth,
            permutation: None,
            grid: Some(GridInfo {
                r_lines: self.r_lines,
                z_lines: self.z_lines,
            }),
        }
    }
}

/// Generate the structured L-shaped receiver mesh.
///
/// `nr` and `nz` are the requested cell counts across the full radial and
/// axial extents. The interface lines `r = r_inner` and `z = t_b` must fall
/// on grid lines for the plate and wall to share nodes, so the counts are
/// split proportionally between the two sub-spans (at least one cell each);
/// very small requests are rounded up accordingly.
pub fn generate_mesh(geometry: &ReceiverGeometry, nr: usize, nz: usize) -> Result<Mesh> {
    geometry.validate()?;
    if nr == 0 || nz == 0 {
        return Err(Error::Geometry(format!(
            "cell counts must be at least 1 (got nr={nr}, nz={nz})"
        )));
    }
    let g = geometry;
    let (nr1, nr2) = split_cells(nr, g.r_inner - g.r_min, g.r_outer - g.r_inner);
    let (nz1, nz2) = split_cells(nz, g.bottom_thickness, g.wall_height);

    let mut r_lines = linspace(g.r_min, g.r_inner, nr1);
    r_lines.extend_from_slice(&linspace(g.r_inner, g.r_outer, nr2)[1..]);
    let mut z_lines = linspace(0.0, g.bottom_thickness, nz1);
    z_lines.extend_from_slice(
        &linspace(g.bottom_thickness, g.bottom_thickness + g.wall_height, nz2)[1..],
    );

    Ok(GridSpec {
        r_lines,
        z_lines,
        hole_ir_end: nr1,
        hole_iz_start: nz1,
        tags: TagRule::Receiver,
    }
    .build())
}

/// Structured mesh of the rectangle `[r0, r1] x [z0, z1]`, used by the
/// verification problems. `r0` must be positive.
pub fn rectangle_mesh(
    r0: f64,
    r1: f64,
    z0: f64,
    z1: f64,
    nr: usize,
    nz: usize,
    tags: RectTags,
) -> Result<Mesh> {
    if !(r0 > 0.0) {
        return Err(Error::Geometry(format!(
            "inner radius must be positive (got {r0})"
        )));
    }
    if !(r1 > r0) || !(z1 > z0) {
        return Err(Error::Geometry(format!(
            "rectangle must have positive extents (r: {r0}..{r1}, z: {z0}..{z1})"
        )));
    }
    if nr == 0 || nz == 0 {
        return Err(Error::Geometry(format!(
            "cell counts must be at least 1 (got nr={nr}, nz={nz})"
        )));
    }
    Ok(GridSpec {
        r_lines: linspace(r0, r1, nr),
        z_lines: linspace(z0, z1, nz),
        hole_ir_end: 0,
        hole_iz_start: 0,
        tags: TagRule::Rectangle(tags),
    }
    .build())
}

/// Renumber nodes to reduce the matrix bandwidth.
///
/// Candidate orderings sweep grid rows with r varying fastest and grid
/// columns with z varying fastest; the one with the smaller half-bandwidth
/// wins, and the input ordering is kept when it is already at least as good.
/// The returned mesh records the permutation back to the original ids so
/// results can be reported in the original ordering.
pub fn renumber_bandwidth(mesh: Mesh) -> Mesh {
    let n = mesh.nodes.len();

    let order_by = |key: fn(&Node) -> (f64, f64)| -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| {
            let (p, q) = (key(&mesh.nodes[a]), key(&mesh.nodes[b]));
            p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1))
        });
        idx
    };

    let hb_for = |order: &[usize]| -> usize {
        let mut inv = vec![0usize; n];
        for (new, &old) in order.iter().enumerate() {
            inv[old] = new;
        }
        let remapped: Vec<TriElement> = mesh
            .elements
            .iter()
            .map(|e| TriElement {
                nodes: [inv[e.nodes[0]], inv[e.nodes[1]], inv[e.nodes[2]]],
                material_id: e.material_id,
            })
            .collect();
        half_bandwidth_of(&remapped)
    };

    let row_major = order_by(|nd| (nd.z, nd.r));
    let col_major = order_by(|nd| (nd.r, nd.z));
    let candidates = [
        (mesh.half_bandwidth, None),
        (hb_for(&row_major), Some(&row_major)),
        (hb_for(&col_major), Some(&col_major)),
    ];
    let best = candidates
        .iter()
        .enumerate()
        .min_by_key(|(pos, (hb, _))| (*hb, *pos))
        .map(|(_, c)| c)
        .unwrap();

    let order = match best.1 {
        None => return mesh,
        Some(o) => o.clone(),
    };

    let mut inv = vec![0usize; n];
    for (new, &old) in order.iter().enumerate() {
        inv[old] = new;
    }
    let nodes: Vec<Node> = order
        .iter()
        .enumerate()
        .map(|(new, &old)| Node {
            id: new,
            r: mesh.nodes[old].r,
            z: mesh.nodes[old].z,
        })
        .collect();
    let elements: Vec<TriElement> = mesh
        .elements
        .iter()
        .map(|e| TriElement {
            nodes: [inv[e.nodes[0]], inv[e.nodes[1]], inv[e.nodes[2]]],
            material_id: e.material_id,
        })
        .collect();
    let boundary: Vec<BoundaryEdge> = mesh
        .boundary
        .iter()
        .map(|b| BoundaryEdge {
            nodes: [inv[b.nodes[0]], inv[b.nodes[1]]],
            ..*b
        })
        .collect();
    let permutation: Vec<usize> = order
        .iter()
        .map(|&old| match &mesh.permutation {
            Some(p) => p[old],
            None => old,
        })
        .collect();

    let half_bandwidth = half_bandwidth_of(&elements);
    Mesh {
        nodes,
        elements,
        boundary,
        half_bandwidth,
        permutation: Some(permutation),
        grid: mesh.grid,
    }
}

/// Diagnostics from [`validate_mesh`].
#[derive(Debug, Clone, Default)]
pub struct MeshReport {
    /// Element ids with non-CCW node ordering.
    pub orientation_violations: Vec<usize>,
    /// Element ids with near-zero area.
    pub degenerate_elements: Vec<usize>,
    /// Triangulation boundary edges not covered by any tagged edge.
    pub untagged_boundary_edges: usize,
    /// Tagged edges that are not boundary edges of the triangulation
    /// (or are tagged more than once).
    pub mistagged_edges: usize,
    /// Edges shared by more than two elements.
    pub nonconforming_edges: usize,
}

impl MeshReport {
    pub fn is_valid(&self) -> bool {
        self.orientation_violations.is_empty()
            && self.degenerate_elements.is_empty()
            && self.untagged_boundary_edges == 0
            && self.mistagged_edges == 0
            && self.nonconforming_edges == 0
    }

    pub fn summary(&self) -> String {
        if self.is_valid() {
            return "mesh valid".to_string();
        }
        format!(
            "mesh INVALID: {} orientation, {} degenerate, {} untagged boundary, \
             {} mistagged, {} nonconforming",
            self.orientation_violations.len(),
            self.degenerate_elements.len(),
            self.untagged_boundary_edges,
            self.mistagged_edges,
            self.nonconforming_edges
        )
    }
}

/// Check orientation, degeneracy, boundary-tag coverage and conformity.
pub fn validate_mesh(mesh: &Mesh) -> MeshReport {
    let mut report = MeshReport::default();

    for (id, e) in mesh.elements.iter().enumerate() {
        let area = signed_area(&mesh.element_points(e));
        if area <= 0.0 {
            report.orientation_violations.push(id);
        }
        if area.abs() < DEGENERATE_AREA {
            report.degenerate_elements.push(id);
        }
    }

    // Count element-edge incidences by undirected node pair.
    let mut edge_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for e in &mesh.elements {
        for k in 0..3 {
            let (a, b) = (e.nodes[k], e.nodes[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            *edge_count.entry(key).or_insert(0) += 1;
        }
    }
    report.nonconforming_edges = edge_count.values().filter(|&&c| c > 2).count();

    let mut tagged: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for b in &mesh.boundary {
        let key = (b.nodes[0].min(b.nodes[1]), b.nodes[0].max(b.nodes[1]));
        *tagged.entry(key).or_insert(0) += 1;
    }
    for (key, &count) in &edge_count {
        if count == 1 && !tagged.contains_key(key) {
            report.untagged_boundary_edges += 1;
        }
    }
    for (key, &times) in &tagged {
        let on_boundary = edge_count.get(key).copied() == Some(1);
        if !on_boundary {
            report.mistagged_edges += times;
        } else if times > 1 {
            report.mistagged_edges += times - 1;
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample_geometry() -> ReceiverGeometry {
        ReceiverGeometry {
            r_min: 0.01,
            r_inner: 0.10,
            r_outer: 0.13,
            bottom_thickness: 0.03,
            wall_height: 0.20,
        }
    }

    fn any_rect_tags() -> RectTags {
        RectTags {
            left: SurfaceTag::A,
            right: SurfaceTag::D,
            bottom: SurfaceTag::E,
            top: SurfaceTag::B,
        }
    }

    #[test]
    fn single_cell_rectangle() {
        let m = rectangle_mesh(1.0, 2.0, 0.0, 1.0, 1, 1, any_rect_tags()).unwrap();
        assert_eq!(m.node_count(), 4);
        assert_eq!(m.element_count(), 2);
        assert_eq!(m.boundary.len(), 4);
        assert_relative_eq!(m.total_area(), 1.0, max_relative = 1e-14);
        assert!(m.half_bandwidth <= 3);
        assert!(validate_mesh(&m).is_valid());
    }

    #[test]
    fn receiver_mesh_counts_and_area() {
        let g = sample_geometry();
        // ~5 mm cells: 24 radial across 0.12 m, 46 axial across 0.23 m.
        let m = generate_mesh(&g, 24, 46).unwrap();
        // Proportional split: 18 + 6 radial cells, 6 + 40 axial cells.
        let plate_cells = 24 * 6;
        let wall_cells = 6 * 40;
        assert_eq!(m.element_count(), 2 * (plate_cells + wall_cells));
        assert_relative_eq!(m.total_area(), g.section_area(), max_relative = 1e-12);
        assert!(validate_mesh(&m).is_valid());
    }

    #[test]
    fn receiver_boundary_tags_cover_perimeter() {
        let g = sample_geometry();
        let m = generate_mesh(&g, 12, 16).unwrap();
        let lengths = m.boundary_length_by_tag();
        let total: f64 = lengths.values().sum();
        assert_relative_eq!(total, g.section_perimeter(), max_relative = 1e-12);
        assert_relative_eq!(lengths[&SurfaceTag::A], g.wall_height, max_relative = 1e-12);
        assert_relative_eq!(
            lengths[&SurfaceTag::B],
            (g.r_outer - g.r_inner) + g.bottom_thickness,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            lengths[&SurfaceTag::C],
            g.r_inner - g.r_min,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            lengths[&SurfaceTag::D],
            g.bottom_thickness + g.wall_height,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            lengths[&SurfaceTag::E],
            g.r_outer - g.r_min,
            max_relative = 1e-12
        );
    }

    #[test]
    fn all_elements_ccw_right_triangles() {
        let m = generate_mesh(&sample_geometry(), 9, 11).unwrap();
        for e in &m.elements {
            let p = m.element_points(e);
            assert!(signed_area(&p) > 0.0);
        }
    }

    #[test]
    fn interface_lines_are_shared() {
        // Conformity across the plate/wall joint: nodes on z = t_b with
        // r >= r_inner belong to both plate and wall cells, so every edge is
        // shared by exactly two elements or tagged as boundary.
        let m = generate_mesh(&sample_geometry(), 8, 10).unwrap();
        assert!(validate_mesh(&m).is_valid());
    }

    #[test]
    fn renumber_strip_mesh_bandwidth() {
        let m = rectangle_mesh(0.5, 0.6, 0.0, 5.0, 1, 50, any_rect_tags()).unwrap();
        let m = renumber_bandwidth(m);
        assert!(m.half_bandwidth <= 3, "got {}", m.half_bandwidth);
    }

    #[test]
    fn renumber_never_increases_bandwidth_and_is_permutation() {
        let g = sample_geometry();
        let m0 = generate_mesh(&g, 13, 7).unwrap();
        let hb0 = m0.half_bandwidth;
        let coords0: Vec<(u64, u64)> = {
            let mut v: Vec<(u64, u64)> = m0
                .nodes
                .iter()
                .map(|n| (n.r.to_bits(), n.z.to_bits()))
                .collect();
            v.sort_unstable();
            v
        };
        let m1 = renumber_bandwidth(m0);
        assert!(m1.half_bandwidth <= hb0);
        let coords1: Vec<(u64, u64)> = {
            let mut v: Vec<(u64, u64)> = m1
                .nodes
                .iter()
                .map(|n| (n.r.to_bits(), n.z.to_bits()))
                .collect();
            v.sort_unstable();
            v
        };
        assert_eq!(coords0, coords1);

        // Permutation maps back to original coordinates.
        let g2 = generate_mesh(&g, 13, 7).unwrap();
        let perm = m1.permutation.as_ref().unwrap();
        let mut seen = vec![false; perm.len()];
        for (new_id, &old_id) in perm.iter().enumerate() {
            assert!(!seen[old_id]);
            seen[old_id] = true;
            assert_eq!(m1.nodes[new_id].r, g2.nodes[old_id].r);
            assert_eq!(m1.nodes[new_id].z, g2.nodes[old_id].z);
        }
    }

    #[test]
    fn renumber_bound_for_structured_grids() {
        for (nr, nz) in [(1usize, 1usize), (4, 17), (17, 4), (8, 8)] {
            let m = rectangle_mesh(1.0, 2.0, 0.0, 1.0, nr, nz, any_rect_tags()).unwrap();
            let m = renumber_bandwidth(m);
            assert!(
                m.half_bandwidth <= nr.min(nz) + 2,
                "nr={nr} nz={nz} hb={}",
                m.half_bandwidth
            );
        }
    }

    #[test]
    fn validate_detects_swapped_nodes() {
        let mut m = rectangle_mesh(1.0, 2.0, 0.0, 1.0, 2, 2, any_rect_tags()).unwrap();
        m.elements[0].nodes.swap(0, 1);
        let report = validate_mesh(&m);
        assert_eq!(report.orientation_violations, vec![0]);
        assert!(!report.is_valid());
    }

    #[test]
    fn validate_detects_missing_boundary_tag() {
        let mut m = rectangle_mesh(1.0, 2.0, 0.0, 1.0, 2, 2, any_rect_tags()).unwrap();
        m.boundary.pop();
        let report = validate_mesh(&m);
        assert_eq!(report.untagged_boundary_edges, 1);
        assert!(!report.is_valid());
    }

    #[test]
    fn degenerate_geometry_rejected() {
        let mut g = sample_geometry();
        g.r_min = 0.0;
        assert!(matches!(
            generate_mesh(&g, 4, 4).unwrap_err(),
            Error::Geometry(_)
        ));
        let mut g = sample_geometry();
        g.r_inner = g.r_outer;
        assert!(generate_mesh(&g, 4, 4).is_err());
        assert!(generate_mesh(&sample_geometry(), 0, 4).is_err());
        assert!(rectangle_mesh(0.0, 1.0, 0.0, 1.0, 2, 2, any_rect_tags()).is_err());
    }

    #[test]
    fn tiny_cell_counts_are_snapped_up() {
        // nr=1 cannot honour both sub-spans; the generator widens to one cell
        // per span and the mesh still validates.
        let m = generate_mesh(&sample_geometry(), 1, 1).unwrap();
        assert!(validate_mesh(&m).is_valid());
        assert_relative_eq!(
            m.total_area(),
            sample_geometry().section_area(),
            max_relative = 1e-12
        );
    }
}
