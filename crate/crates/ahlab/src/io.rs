//! JSON file formats for metrics and flow fields.
//!
//! The metric file format is deliberately close to the usual mathematical
//! notation rather than to the internal structs:
//!
//! ```json
//! {
//!   "n": 3,
//!   "grid": { "t_min": 0.0, "t_max": 10.0, "count": 1001 },
//!   "origin_closure": true,
//!   "profiles": [ { "expr": "sinh(t)", "multiplicity": 3 } ],
//!   "structure": { "lie": { "dim": 3, "entries": [[1, 2, 3, 2.0]] } }
//! }
//! ```
//!
//! Structure-constant indices are 1-based in files (matching coframe
//! labels) and 0-based internally. An omitted `structure` means the round
//! sphere of dimension `n`; an omitted `origin_closure` defaults to true
//! exactly when `t_min` is zero. Grids are either uniform (`count`),
//! graded toward the pole (`count` + `grade`), or explicit (`points`).
//! Sampled profiles carry `samples` (and optionally `derivatives`) on the
//! grid nodes instead of `expr`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::expr::Expr;
use crate::gauge_flow::FlowField;
use crate::geometry::{
    BoundaryStructure, Profile, ProfileBacking, StructureConstants, WarpedMetric,
};
use crate::grid::RadialGrid;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// File schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradeFile {
    /// Extra points inserted near the pole.
    pub extra: usize,
    /// Successive-spacing ratio of the graded region (> 1).
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grade: Option<GradeFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivatives: Option<Vec<f64>>,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LieFile {
    pub dim: usize,
    /// `[i, j, k, c]` meaning `c^k_{ij} = c`, indices 1-based.
    pub entries: Vec<(usize, usize, usize, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StructureFile {
    Round(usize),
    Lie(LieFile),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricFile {
    pub n: usize,
    pub grid: GridFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin_closure: Option<bool>,
    pub profiles: Vec<ProfileFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowFieldFile {
    pub coordinates: Vec<String>,
    pub components: Vec<String>,
}

// ---------------------------------------------------------------------------
// Conversion
// ---------------------------------------------------------------------------

fn grid_from_file(g: &GridFile) -> Result<RadialGrid> {
    if let Some(points) = &g.points {
        if g.t_min.is_some() || g.t_max.is_some() || g.count.is_some() || g.grade.is_some() {
            return Err(Error::invalid(
                "grid: `points` excludes t_min/t_max/count/grade",
            ));
        }
        return RadialGrid::from_points(points.clone());
    }
    let (t_min, t_max, count) = match (g.t_min, g.t_max, g.count) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Error::invalid("grid: need t_min, t_max and count")),
    };
    match &g.grade {
        None => RadialGrid::uniform(t_min, t_max, count),
        Some(gr) => RadialGrid::graded(t_min, t_max, count, gr.extra, gr.ratio),
    }
}

fn profile_from_file(p: &ProfileFile, grid_len: usize) -> Result<Profile> {
    match (&p.expr, &p.samples) {
        (Some(src), None) => {
            if p.derivatives.is_some() {
                return Err(Error::invalid(
                    "profile: closed-form profiles carry no sample derivatives",
                ));
            }
            Profile::expr(src, p.multiplicity)
        }
        (None, Some(values)) => {
            if values.len() != grid_len {
                return Err(Error::invalid(format!(
                    "profile: {} samples on a {grid_len}-point grid",
                    values.len()
                )));
            }
            if let Some(d) = &p.derivatives {
                if d.len() != grid_len {
                    return Err(Error::invalid("profile: derivative sample count mismatch"));
                }
            }
            Ok(Profile {
                backing: ProfileBacking::Samples {
                    values: values.clone(),
                    derivs: p.derivatives.clone(),
                },
                multiplicity: p.multiplicity,
            })
        }
        _ => Err(Error::invalid(
            "profile: exactly one of `expr` or `samples` is required",
        )),
    }
}

fn structure_from_file(s: &Option<StructureFile>, n: usize) -> Result<BoundaryStructure> {
    match s {
        None => Ok(BoundaryStructure::Round { dim: n }),
        Some(StructureFile::Round(dim)) => Ok(BoundaryStructure::Round { dim: *dim }),
        Some(StructureFile::Lie(l)) => {
            let mut entries = Vec::with_capacity(l.entries.len());
            for &(i, j, k, c) in &l.entries {
                if i == 0 || j == 0 || k == 0 || i > l.dim || j > l.dim || k > l.dim {
                    return Err(Error::invalid(format!(
                        "structure entry ({i},{j},{k}): indices are 1..={}",
                        l.dim
                    )));
                }
                entries.push((i - 1, j - 1, k - 1, c));
            }
            Ok(BoundaryStructure::Lie(StructureConstants {
                dim: l.dim,
                entries,
            }))
        }
    }
}

pub fn metric_from_file(file: &MetricFile) -> Result<WarpedMetric> {
    let grid = grid_from_file(&file.grid)?;
    let origin_closure = file.origin_closure.unwrap_or(grid.t_min == 0.0);
    let profiles = file
        .profiles
        .iter()
        .map(|p| profile_from_file(p, grid.len()))
        .collect::<Result<Vec<_>>>()?;
    let structure = structure_from_file(&file.structure, file.n)?;
    WarpedMetric::new(file.n, grid, profiles, origin_closure, structure)
}

pub fn metric_to_file(m: &WarpedMetric) -> MetricFile {
    let grid = GridFile {
        t_min: None,
        t_max: None,
        count: None,
        grade: None,
        points: Some(m.grid.points.clone()),
    };
    let profiles = m
        .profiles
        .iter()
        .map(|p| match &p.backing {
            ProfileBacking::Expr(e) => ProfileFile {
                expr: Some(e.to_string()),
                samples: None,
                derivatives: None,
                multiplicity: p.multiplicity,
            },
            ProfileBacking::Samples { values, derivs } => ProfileFile {
                expr: None,
                samples: Some(values.clone()),
                derivatives: derivs.clone(),
                multiplicity: p.multiplicity,
            },
        })
        .collect();
    let structure = match &m.structure {
        BoundaryStructure::Round { dim } => Some(StructureFile::Round(*dim)),
        BoundaryStructure::Lie(sc) => Some(StructureFile::Lie(LieFile {
            dim: sc.dim,
            entries: sc
                .entries
                .iter()
                .map(|&(i, j, k, c)| (i + 1, j + 1, k + 1, c))
                .collect(),
        })),
    };
    MetricFile {
        n: m.n,
        grid,
        origin_closure: Some(m.origin_closure),
        profiles,
        structure,
    }
}

pub fn metric_from_json(s: &str) -> Result<WarpedMetric> {
    let file: MetricFile =
        serde_json::from_str(s).map_err(|e| Error::invalid(format!("metric file: {e}")))?;
    metric_from_file(&file)
}

pub fn metric_to_json(m: &WarpedMetric) -> String {
    serde_json::to_string_pretty(&metric_to_file(m)).expect("metric file serializes")
}

pub fn read_metric(path: impl AsRef<Path>) -> Result<WarpedMetric> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    metric_from_json(&text)
}

pub fn write_metric(path: impl AsRef<Path>, m: &WarpedMetric) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, metric_to_json(m) + "\n")
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

pub fn flow_field_from_json(s: &str) -> Result<FlowField> {
    let file: FlowFieldFile =
        serde_json::from_str(s).map_err(|e| Error::invalid(format!("flow field file: {e}")))?;
    let comps = file
        .components
        .iter()
        .map(|c| Expr::parse(c))
        .collect::<Result<Vec<_>>>()?;
    FlowField::new(file.coordinates, comps)
}

pub fn read_flow_field(path: impl AsRef<Path>) -> Result<FlowField> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    flow_field_from_json(&text)
}
