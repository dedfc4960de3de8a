//! Run description parsed from a sectioned `key = value` text file.
//!
//! The format is line oriented: `[section]` headers, one `key = value`
//! pair per line, `#` starts a comment. Sections are `geometry`, `mesh`,
//! `material`, one `surface.<tag>` block per boundary surface, and the
//! optional `solver` and `output` blocks. Unknown sections, unknown keys,
//! duplicates and malformed lines are rejected with the line number named.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use axitherm::{
    CylMethod, Error, ReceiverGeometry, Result, SurfaceLoad, SurfaceTag, RESIDUAL_TOLERANCE,
};

/// Output file format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Vtk,
    Pgm,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Vtk => "vtk",
            Format::Pgm => "pgm",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "vtk" => Ok(Format::Vtk),
            "pgm" => Ok(Format::Pgm),
            other => Err(Error::Config(format!(
                "unknown output format '{other}' (expected csv, vtk or pgm)"
            ))),
        }
    }
}

/// Parses a comma-separated format list, dropping repeats but keeping
/// first-seen order.
pub fn parse_format_list(s: &str) -> Result<Vec<Format>> {
    let mut formats = Vec::new();
    for item in s.split(',') {
        let f: Format = item.trim().parse()?;
        if !formats.contains(&f) {
            formats.push(f);
        }
    }
    Ok(formats)
}

/// Everything a solve run needs, value-checked no further than parsing;
/// physical validation happens when meshing and assembling.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub geometry: ReceiverGeometry,
    pub nr: usize,
    pub nz: usize,
    pub conductivity: f64,
    pub loads: BTreeMap<SurfaceTag, SurfaceLoad>,
    pub method: CylMethod,
    pub residual_tolerance: f64,
    pub formats: Vec<Format>,
    pub prefix: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Geometry,
    Mesh,
    Material,
    Surface(SurfaceTag),
    Solver,
    Output,
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Section::Geometry => write!(f, "[geometry]"),
            Section::Mesh => write!(f, "[mesh]"),
            Section::Material => write!(f, "[material]"),
            Section::Surface(tag) => write!(f, "[surface.{tag}]"),
            Section::Solver => write!(f, "[solver]"),
            Section::Output => write!(f, "[output]"),
        }
    }
}

impl Section {
    fn parse(name: &str, line: usize) -> Result<Self> {
        match name {
            "geometry" => Ok(Section::Geometry),
            "mesh" => Ok(Section::Mesh),
            "material" => Ok(Section::Material),
            "solver" => Ok(Section::Solver),
            "output" => Ok(Section::Output),
            _ => match name.strip_prefix("surface.") {
                Some(tag) => Ok(Section::Surface(tag.parse().map_err(|_| {
                    Error::Config(format!(
                        "unknown surface '{tag}' in section header at line {line} \
                         (expected one of A, B, C, D, E)"
                    ))
                })?)),
                None => Err(Error::Config(format!(
                    "unknown section '[{name}]' at line {line}"
                ))),
            },
        }
    }

    fn allowed_keys(self) -> &'static [&'static str] {
        match self {
            Section::Geometry => &[
                "r_min",
                "r_inner",
                "r_outer",
                "bottom_thickness",
                "wall_height",
            ],
            Section::Mesh => &["nr", "nz"],
            Section::Material => &["conductivity"],
            Section::Surface(_) => &["h", "t_inf", "q"],
            Section::Solver => &["method", "residual_tolerance"],
            Section::Output => &["formats", "prefix"],
        }
    }
}

/// Raw `key = value` strings with the line each came from.
struct RawConfig {
    values: BTreeMap<(Section, String), (String, usize)>,
    sections: BTreeSet<Section>,
}

impl RawConfig {
    fn scan(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut sections = BTreeSet::new();
        let mut current: Option<Section> = None;

        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            let content = content.trim();
            if content.is_empty() {
                continue;
            }

            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| {
                    Error::Config(format!("malformed section header at line {line}"))
                })?;
                let section = Section::parse(name.trim(), line)?;
                if !sections.insert(section) {
                    return Err(Error::Config(format!(
                        "section {section} declared twice (second time at line {line})"
                    )));
                }
                current = Some(section);
                continue;
            }

            let section = current.ok_or_else(|| {
                Error::Config(format!("key before any section header at line {line}"))
            })?;
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected 'key = value' at line {line}")))?;
            let key = key.trim();
            let value = value.trim();
            if !section.allowed_keys().contains(&key) {
                return Err(Error::Config(format!(
                    "unknown key '{key}' in {section} at line {line}"
                )));
            }
            if values
                .insert((section, key.to_string()), (value.to_string(), line))
                .is_some()
            {
                return Err(Error::Config(format!(
                    "duplicate key '{key}' in {section} (second time at line {line})"
                )));
            }
        }
        Ok(RawConfig { values, sections })
    }

    fn get(&self, section: Section, key: &str) -> Option<&(String, usize)> {
        self.values.get(&(section, key.to_string()))
    }

    fn require<T: FromStr>(&self, section: Section, key: &str, kind: &str) -> Result<T> {
        match self.get(section, key) {
            None => Err(Error::Config(format!(
                "missing required key '{key}' in {section}"
            ))),
            Some((value, line)) => value.parse().map_err(|_| {
                Error::Config(format!(
                    "value of '{key}' in {section} at line {line} is not {kind} (got '{value}')"
                ))
            }),
        }
    }

    fn optional<T: FromStr>(&self, section: Section, key: &str, kind: &str) -> Result<Option<T>> {
        match self.get(section, key) {
            None => Ok(None),
            Some((value, line)) => value.parse().map(Some).map_err(|_| {
                Error::Config(format!(
                    "value of '{key}' in {section} at line {line} is not {kind} (got '{value}')"
                ))
            }),
        }
    }
}

/// Parses the full config text into a [`RunConfig`].
///
/// Defaults: method `exact`, residual tolerance [`RESIDUAL_TOLERANCE`],
/// formats `csv`, prefix `receiver`. Everything else is required.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw = RawConfig::scan(text)?;

    let mut required: Vec<Section> = vec![Section::Geometry, Section::Mesh, Section::Material];
    required.extend(SurfaceTag::ALL.iter().map(|&t| Section::Surface(t)));
    for section in required {
        if !raw.sections.contains(&section) {
            return Err(Error::Config(format!("missing required section {section}")));
        }
    }

    let g = Section::Geometry;
    let geometry = ReceiverGeometry {
        r_min: raw.require(g, "r_min", "a number")?,
        r_inner: raw.require(g, "r_inner", "a number")?,
        r_outer: raw.require(g, "r_outer", "a number")?,
        bottom_thickness: raw.require(g, "bottom_thickness", "a number")?,
        wall_height: raw.require(g, "wall_height", "a number")?,
    };

    let nr = raw.require(Section::Mesh, "nr", "a positive integer")?;
    let nz = raw.require(Section::Mesh, "nz", "a positive integer")?;
    let conductivity = raw.require(Section::Material, "conductivity", "a number")?;

    let mut loads = BTreeMap::new();
    for tag in SurfaceTag::ALL {
        let s = Section::Surface(tag);
        loads.insert(
            tag,
            SurfaceLoad {
                h: raw.require(s, "h", "a number")?,
                t_inf: raw.require(s, "t_inf", "a number")?,
                q: raw.optional(s, "q", "a number")?.unwrap_or(0.0),
            },
        );
    }

    let method = match raw.get(Section::Solver, "method") {
        None => CylMethod::ExactIntegral,
        Some((value, line)) => value
            .parse()
            .map_err(|e: Error| Error::Config(format!("in [solver] at line {line}: {e}")))?,
    };
    let residual_tolerance = raw
        .optional(Section::Solver, "residual_tolerance", "a number")?
        .unwrap_or(RESIDUAL_TOLERANCE);

    let formats = match raw.get(Section::Output, "formats") {
        None => vec![Format::Csv],
        Some((value, line)) => parse_format_list(value)
            .map_err(|e| Error::Config(format!("in [output] at line {line}: {e}")))?,
    };
    let prefix = raw
        .optional::<String>(Section::Output, "prefix", "a path")?
        .filter(|p| !p.is_empty())
        .unwrap_or_else(|| "receiver".to_string());

    Ok(RunConfig {
        geometry,
        nr,
        nz,
        conductivity,
        loads,
        method,
        residual_tolerance,
        formats,
        prefix,
    })
}
