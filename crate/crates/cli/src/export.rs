//! Field exporters and the matching readers.
//!
//! All three formats are deterministic: the same field writes the same
//! bytes. CSV and VTK carry 17 significant digits so a re-read recovers
//! every f64 bit for bit; the readers here exist to keep that round-trip
//! testable. PGM is a lossy 8-bit heatmap on the mesh cell raster.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use axitherm::{TemperatureField, RESIDUAL_TOLERANCE};

/// 17 significant digits: enough to reproduce any f64 exactly on re-parse.
fn full(v: f64) -> String {
    format!("{v:.16e}")
}

fn bad_data(path: &Path, message: String) -> io::Error {
    io::Error::new(
        io::ErrorKind::InvalidData,
        format!("{}: {message}", path.display()),
    )
}

/// One CSV data row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub node_id: usize,
    pub r: f64,
    pub z: f64,
    pub t: f64,
}

/// Writes `node_id,r,z,T`, one row per node, LF endings.
pub fn write_csv(field: &TemperatureField, path: &Path) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(b"node_id,r,z,T\n")?;
    for node in &field.mesh.nodes {
        writeln!(
            w,
            "{},{},{},{}",
            node.id,
            full(node.r),
            full(node.z),
            full(field.temperatures[node.id])
        )?;
    }
    w.flush()
}

pub fn read_csv(path: &Path) -> io::Result<Vec<CsvRow>> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    match lines.next() {
        Some(Ok(header)) if header == "node_id,r,z,T" => {}
        Some(Ok(header)) => {
            return Err(bad_data(path, format!("unexpected CSV header '{header}'")))
        }
        Some(Err(e)) => return Err(e),
        None => return Err(bad_data(path, "empty CSV file".into())),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(bad_data(
                path,
                format!("row {} has {} fields, expected 4", idx + 2, fields.len()),
            ));
        }
        let parse = |s: &str, what: &str| -> io::Result<f64> {
            s.parse()
                .map_err(|_| bad_data(path, format!("row {}: bad {what} '{s}'", idx + 2)))
        };
        rows.push(CsvRow {
            node_id: fields[0].parse().map_err(|_| {
                bad_data(
                    path,
                    format!("row {}: bad node id '{}'", idx + 2, fields[0]),
                )
            })?,
            r: parse(fields[1], "r")?,
            z: parse(fields[2], "z")?,
            t: parse(fields[3], "T")?,
        });
    }
    Ok(rows)
}

/// Field data recovered from a VTK file.
#[derive(Debug, Clone, PartialEq)]
pub struct VtkField {
    /// `(r, z)` per point; the third VTK coordinate is always zero.
    pub points: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub temperatures: Vec<f64>,
    /// `(q_r, q_z)` per cell.
    pub flux: Vec<[f64; 2]>,
}

/// Writes a legacy ASCII VTK unstructured grid: points are `(r, z, 0)`,
/// cells are triangles (type 5), nodal temperature as point data and the
/// recovered flux as cell data.
pub fn write_vtk(field: &TemperatureField, path: &Path) -> io::Result<()> {
    let mesh = &field.mesh;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "axisymmetric temperature field")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;

    writeln!(w, "POINTS {} double", mesh.node_count())?;
    for node in &mesh.nodes {
        writeln!(w, "{} {} 0", full(node.r), full(node.z))?;
    }

    writeln!(
        w,
        "CELLS {} {}",
        mesh.element_count(),
        4 * mesh.element_count()
    )?;
    for e in &mesh.elements {
        writeln!(w, "3 {} {} {}", e.nodes[0], e.nodes[1], e.nodes[2])?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.element_count())?;
    for _ in &mesh.elements {
        writeln!(w, "5")?;
    }

    writeln!(w, "POINT_DATA {}", mesh.node_count())?;
    writeln!(w, "SCALARS temperature double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for &t in &field.temperatures {
        writeln!(w, "{}", full(t))?;
    }

    writeln!(w, "CELL_DATA {}", mesh.element_count())?;
    writeln!(w, "VECTORS heat_flux double")?;
    for q in &field.element_flux {
        writeln!(w, "{} {} 0", full(q[0]), full(q[1]))?;
    }
    w.flush()
}

pub fn read_vtk(path: &Path) -> io::Result<VtkField> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();
    let mut next = || -> io::Result<(usize, String)> {
        match lines.next() {
            Some((idx, Ok(line))) => Ok((idx + 1, line)),
            Some((_, Err(e))) => Err(e),
            None => Err(io::Error::new(
                io::ErrorKind::UnexpectedEof,
                format!("{}: truncated VTK file", path.display()),
            )),
        }
    };
    let expect = |got: (usize, String), want: &str| -> io::Result<()> {
        if got.1 == want {
            Ok(())
        } else {
            Err(bad_data(
                path,
                format!("line {}: expected '{want}', got '{}'", got.0, got.1),
            ))
        }
    };

    expect(next()?, "# vtk DataFile Version 3.0")?;
    next()?; // title, free text
    expect(next()?, "ASCII")?;
    expect(next()?, "DATASET UNSTRUCTURED_GRID")?;

    let header = |line: (usize, String), word: &str| -> io::Result<usize> {
        let parts: Vec<&str> = line.1.split_whitespace().collect();
        if parts.first() != Some(&word) || parts.len() < 2 {
            return Err(bad_data(
                path,
                format!(
                    "line {}: expected '{word} <n> ...', got '{}'",
                    line.0, line.1
                ),
            ));
        }
        parts[1]
            .parse()
            .map_err(|_| bad_data(path, format!("line {}: bad count '{}'", line.0, parts[1])))
    };
    let floats = |line: (usize, String), want: usize| -> io::Result<Vec<f64>> {
        let vals: Result<Vec<f64>, _> = line.1.split_whitespace().map(str::parse::<f64>).collect();
        match vals {
            Ok(v) if v.len() == want => Ok(v),
            _ => Err(bad_data(
                path,
                format!("line {}: expected {want} numbers, got '{}'", line.0, line.1),
            )),
        }
    };

    let n_points = header(next()?, "POINTS")?;
    let mut points = Vec::with_capacity(n_points);
    for _ in 0..n_points {
        let v = floats(next()?, 3)?;
        points.push([v[0], v[1]]);
    }

    let n_cells = header(next()?, "CELLS")?;
    let mut triangles = Vec::with_capacity(n_cells);
    for _ in 0..n_cells {
        let line = next()?;
        let ids: Result<Vec<usize>, _> =
            line.1.split_whitespace().map(str::parse::<usize>).collect();
        match ids {
            Ok(v) if v.len() == 4 && v[0] == 3 => triangles.push([v[1], v[2], v[3]]),
            _ => {
                return Err(bad_data(
                    path,
                    format!("line {}: expected '3 i j k', got '{}'", line.0, line.1),
                ))
            }
        }
    }
    let n_types = header(next()?, "CELL_TYPES")?;
    for _ in 0..n_types {
        expect(next()?, "5")?;
    }

    let n_data = header(next()?, "POINT_DATA")?;
    expect(next()?, "SCALARS temperature double 1")?;
    expect(next()?, "LOOKUP_TABLE default")?;
    let mut temperatures = Vec::with_capacity(n_data);
    for _ in 0..n_data {
        temperatures.push(floats(next()?, 1)?[0]);
    }

    let n_flux = header(next()?, "CELL_DATA")?;
    expect(next()?, "VECTORS heat_flux double")?;
    let mut flux = Vec::with_capacity(n_flux);
    for _ in 0..n_flux {
        let v = floats(next()?, 3)?;
        flux.push([v[0], v[1]]);
    }

    Ok(VtkField {
        points,
        triangles,
        temperatures,
        flux,
    })
}

/// Writes a plain-PGM heatmap: one pixel per mesh grid cell, rows top down,
/// temperature mapped linearly from `[min T, max T]` onto `[0, 255]`.
/// Grid cells outside the section (the cavity cut-out) are 0. A field
/// whose span is below the solver's accuracy floor is rendered flat at
/// 255: stretching pure roundoff across 256 levels would draw noise.
pub fn write_pgm(field: &TemperatureField, path: &Path) -> io::Result<()> {
    let grid = field.mesh.grid.as_ref().ok_or_else(|| {
        io::Error::new(
            io::ErrorKind::InvalidInput,
            "mesh carries no raster grid, cannot rasterize to PGM",
        )
    })?;
    let width = grid.r_lines.len() - 1;
    let height = grid.z_lines.len() - 1;

    // Average element temperatures into the grid cell holding each centroid.
    let mut sums = vec![0.0f64; width * height];
    let mut counts = vec![0u32; width * height];
    for e in &field.mesh.elements {
        let p = field.mesh.element_points(e);
        let rc = (p[0][0] + p[1][0] + p[2][0]) / 3.0;
        let zc = (p[0][1] + p[1][1] + p[2][1]) / 3.0;
        let cell = |lines: &[f64], x: f64| -> usize {
            lines[1..lines.len() - 1].partition_point(|&l| l <= x)
        };
        let (ir, iz) = (cell(&grid.r_lines, rc), cell(&grid.z_lines, zc));
        let mean = e.nodes.iter().map(|&n| field.temperatures[n]).sum::<f64>() / 3.0;
        sums[iz * width + ir] += mean;
        counts[iz * width + ir] += 1;
    }

    let (lo, hi) = (field.min_temperature(), field.max_temperature());
    let span = hi - lo;
    let flat = span <= RESIDUAL_TOLERANCE * lo.abs().max(hi.abs());
    let shade = |t: f64| -> u8 {
        if flat {
            return 255;
        }
        (((t - lo) / span * 255.0).round() as i64).clamp(0, 255) as u8
    };

    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "P2")?;
    writeln!(w, "{width} {height}")?;
    writeln!(w, "255")?;
    for iz in (0..height).rev() {
        // Plain PGM caps lines at 70 characters; 17 values of "255 " fit.
        for chunk in (0..width).collect::<Vec<_>>().chunks(17) {
            let row: Vec<String> = chunk
                .iter()
                .map(|&ir| {
                    let i = iz * width + ir;
                    if counts[i] == 0 {
                        "0".to_string()
                    } else {
                        shade(sums[i] / counts[i] as f64).to_string()
                    }
                })
                .collect();
            writeln!(w, "{}", row.join(" "))?;
        }
    }
    w.flush()
}

/// Raster recovered from a plain PGM file, row 0 at the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

pub fn read_pgm(path: &Path) -> io::Result<PgmImage> {
    let text = std::fs::read_to_string(path)?;
    let mut tokens = text.lines().flat_map(|l| match l.find('#') {
        Some(pos) => l[..pos].split_whitespace(),
        None => l.split_whitespace(),
    });
    let mut next = |what: &str| -> io::Result<String> {
        tokens
            .next()
            .map(str::to_string)
            .ok_or_else(|| bad_data(path, format!("missing {what}")))
    };
    let magic = next("magic number")?;
    if magic != "P2" {
        return Err(bad_data(path, format!("expected P2, got '{magic}'")));
    }
    let number = |s: String, what: &str| -> io::Result<usize> {
        s.parse()
            .map_err(|_| bad_data(path, format!("bad {what} '{s}'")))
    };
    let width = number(next("width")?, "width")?;
    let height = number(next("height")?, "height")?;
    let maxval = number(next("maxval")?, "maxval")?;
    if maxval != 255 {
        return Err(bad_data(path, format!("expected maxval 255, got {maxval}")));
    }
    let mut pixels = Vec::with_capacity(width * height);
    for _ in 0..width * height {
        let v = number(next("pixel")?, "pixel")?;
        if v > 255 {
            return Err(bad_data(path, format!("pixel value {v} exceeds 255")));
        }
        pixels.push(v as u8);
    }
    if tokens.next().is_some() {
        return Err(bad_data(path, "trailing data after raster".into()));
    }
    Ok(PgmImage {
        width,
        height,
        pixels,
    })
}
