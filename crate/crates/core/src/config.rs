//! Run configuration: the JSON document the command-line tools consume.
//!
//! A [`RunConfig`] is pure data with an exact serde round trip; building the
//! discrete problem (reading nodal files, replicating edge constants,
//! validating placement) happens in [`RunConfig::build`]. Unknown fields are
//! rejected everywhere so a typo in a config file fails loudly instead of
//! silently running the defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::discretization::{
    BoundarySpec, DeformationField, Edge, EdgeTag, Grid2D, LoadSpec, ProblemSpec,
};
use crate::energy::MaterialParams;
use crate::error::Error;
use crate::kinematics::Tensor32;
use crate::solver::SolveConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub material: MaterialParams,
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub loads: LoadsConfig,
    #[serde(default)]
    pub solver: SolveConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

/// Rectangular parameter domain (0,Lx) x (0,Ly) and its nodal resolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(rename = "Lx")]
    pub lx: f64,
    #[serde(rename = "Ly")]
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub south: EdgeTag,
    pub east: EdgeTag,
    pub north: EdgeTag,
    pub west: EdgeTag,
    /// Boundary placement the constrained nodes are held at.
    #[serde(default)]
    pub f_o: PlacementPreset,
}

/// Named boundary placements.
///
/// `custom` points at a JSON file holding one `[x, y, z]` triple per node in
/// row-major grid order; only the constrained rows are used but the file must
/// cover the whole grid so it can double as an initial guess.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlacementPreset {
    Identity,
    Stretch { lambda_x: f64, lambda_y: f64 },
    Custom { path: PathBuf },
}

impl Default for PlacementPreset {
    fn default() -> Self {
        PlacementPreset::Identity
    }
}

/// Dead loads. Body densities accept either a constant or a per-node file;
/// edge tractions are constant along each free edge.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoadsConfig {
    /// Body force density, work-conjugate to the placement.
    pub b: Option<VectorSource>,
    /// Generalized body force density (3x2, row-major), work-conjugate to
    /// the placement gradient.
    #[serde(rename = "B")]
    pub b_grad: Option<TensorSource>,
    /// Traction per free edge.
    pub tau: Option<EdgeVectors>,
    /// Hypertraction per free edge, work-conjugate to the normal derivative.
    pub mu: Option<EdgeVectors>,
}

/// A constant vector, or a JSON file with one `[x, y, z]` per node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorSource {
    Constant([f64; 3]),
    File { path: PathBuf },
}

/// A constant 3x2 tensor (three rows of two), or a JSON file with one such
/// tensor per node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TensorSource {
    Constant([[f64; 2]; 3]),
    File { path: PathBuf },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EdgeVectors {
    pub south: Option<[f64; 3]>,
    pub east: Option<[f64; 3]>,
    pub north: Option<[f64; 3]>,
    pub west: Option<[f64; 3]>,
}

impl EdgeVectors {
    fn get(&self, edge: Edge) -> Option<[f64; 3]> {
        match edge {
            Edge::South => self.south,
            Edge::East => self.east,
            Edge::North => self.north,
            Edge::West => self.west,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("out"),
            formats: vec![OutputFormat::Vtk, OutputFormat::Csv, OutputFormat::Json],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Vtk,
    Csv,
    Json,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Assemble the discrete problem. Relative file paths inside the config
    /// resolve against `base`, normally the config file's directory.
    pub fn build(&self, base: &Path) -> Result<(ProblemSpec, SolveConfig), Error> {
        let grid = Grid2D::new(self.domain.nx, self.domain.ny, self.domain.lx, self.domain.ly)?;
        let n = grid.node_count();

        let f_o = match &self.boundary.f_o {
            PlacementPreset::Identity => DeformationField::identity(&grid),
            PlacementPreset::Stretch { lambda_x, lambda_y } => {
                let (lx, ly) = (*lambda_x, *lambda_y);
                DeformationField::from_fn(&grid, |x, y| [lx * x, ly * y, 0.0])
            }
            PlacementPreset::Custom { path } => DeformationField {
                values: read_nodal_vectors(&base.join(path), n, "boundary.f_o")?,
            },
        };
        let boundary = BoundarySpec {
            south: self.boundary.south,
            east: self.boundary.east,
            north: self.boundary.north,
            west: self.boundary.west,
            f_o,
        };

        let body_force = match &self.loads.b {
            None => None,
            Some(VectorSource::Constant(v)) => Some(vec![*v; n]),
            Some(VectorSource::File { path }) => {
                Some(read_nodal_vectors(&base.join(path), n, "loads.b")?)
            }
        };
        let body_couple = match &self.loads.b_grad {
            None => None,
            Some(TensorSource::Constant(rows)) => Some(vec![Tensor32(*rows); n]),
            Some(TensorSource::File { path }) => Some(
                read_nodal_tensors(&base.join(path), n, "loads.B")?
                    .into_iter()
                    .map(Tensor32)
                    .collect(),
            ),
        };
        let mut loads = LoadSpec {
            body_force,
            body_couple,
            ..LoadSpec::none()
        };
        for edge in Edge::ALL {
            let m = edge.node_count(&grid);
            if let Some(v) = self.loads.tau.as_ref().and_then(|t| t.get(edge)) {
                loads.traction[edge.index()] = Some(vec![v; m]);
            }
            if let Some(v) = self.loads.mu.as_ref().and_then(|t| t.get(edge)) {
                loads.hypertraction[edge.index()] = Some(vec![v; m]);
            }
        }

        let spec = ProblemSpec::new(grid, self.material, boundary, loads)?;
        self.solver.validate()?;
        Ok((spec, self.solver))
    }

    /// Overwrite one numeric field addressed by a dotted path into the JSON
    /// document, e.g. `material.c_b` or `loads.b.2`. The mutation round-trips
    /// through the schema, so a path that does not exist, or a value the
    /// field cannot hold, is an error rather than a silent no-op.
    pub fn set_path(&mut self, path: &str, value: f64) -> Result<(), Error> {
        if !value.is_finite() {
            return Err(Error::config(path, "value must be finite"));
        }
        let mut root = serde_json::to_value(&self).expect("config serializes");
        let mut cursor = &mut root;
        for seg in path.split('.') {
            cursor = match cursor {
                Value::Object(map) => map
                    .get_mut(seg)
                    .ok_or_else(|| Error::config(path, format!("no field `{seg}` here")))?,
                Value::Array(items) => {
                    let i: usize = seg
                        .parse()
                        .map_err(|_| Error::config(path, format!("`{seg}` is not an index")))?;
                    let len = items.len();
                    items.get_mut(i).ok_or_else(|| {
                        Error::config(path, format!("index {i} out of range (length {len})"))
                    })?
                }
                _ => return Err(Error::config(path, format!("`{seg}` descends into a scalar"))),
            };
        }
        *cursor = match cursor {
            // Keep integer-typed fields integers so they deserialize again.
            Value::Number(old) if old.is_u64() || old.is_i64() => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(Error::config(
                        path,
                        format!("field is an integer, got {value}"),
                    ));
                }
                Value::from(value as u64)
            }
            Value::Number(_) => Value::from(value),
            Value::Null => {
                return Err(Error::config(
                    path,
                    "field is unset; give it a value in the base config first",
                ))
            }
            _ => return Err(Error::config(path, "path does not name a number")),
        };
        *self = serde_json::from_value(root).map_err(|e| Error::config(path, e.to_string()))?;
        Ok(())
    }
}

fn read_json_file<T: serde::de::DeserializeOwned>(path: &Path, field: &str) -> Result<T, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::config(field, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::config(field, format!("{}: {e}", path.display())))
}

fn read_nodal_vectors(path: &Path, n: usize, field: &str) -> Result<Vec<[f64; 3]>, Error> {
    let rows: Vec<[f64; 3]> = read_json_file(path, field)?;
    expect_rows(rows, n, path, field)
}

fn read_nodal_tensors(path: &Path, n: usize, field: &str) -> Result<Vec<[[f64; 2]; 3]>, Error> {
    let rows: Vec<[[f64; 2]; 3]> = read_json_file(path, field)?;
    expect_rows(rows, n, path, field)
}

fn expect_rows<T>(rows: Vec<T>, n: usize, path: &Path, field: &str) -> Result<Vec<T>, Error> {
    if rows.len() != n {
        return Err(Error::config(
            field,
            format!("{}: {} rows, grid has {n} nodes", path.display(), rows.len()),
        ));
    }
    Ok(rows)
}
