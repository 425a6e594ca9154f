use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Instance, LocId, Location, Matrix, MatrixError, Meta, Request, Vehicle, Violation};

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("instance schema error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{0}")]
    Matrix(#[from] MatrixError),
    #[error("invalid instance: {}", ViolationList(.0))]
    Invalid(Vec<Violation>),
}

struct ViolationList<'a>(&'a [Violation]);

impl fmt::Display for ViolationList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    meta: Meta,
    locations: Vec<Location>,
    requests: Vec<Request>,
    vehicles: Vec<Vehicle>,
    transfers: Vec<LocId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrices: Option<MatrixFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    travel: Vec<Vec<f64>>,
    distance: Vec<Vec<f64>>,
}

/// Parses and validates an instance document.
pub fn instance_from_json(text: &str) -> Result<Instance, InstanceError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let matrices = match file.matrices {
        Some(m) => Some((Matrix::from_rows(m.travel)?, Matrix::from_rows(m.distance)?)),
        None => None,
    };
    let inst = Instance::assemble(
        file.meta,
        file.locations,
        file.requests,
        file.vehicles,
        file.transfers,
        matrices,
    )?;
    let report = super::validate_instance(&inst);
    if report.is_empty() {
        Ok(inst)
    } else {
        Err(InstanceError::Invalid(report))
    }
}

/// Serializes an instance. Matrices are written only when they were supplied
/// explicitly; otherwise they are rebuilt from coordinates on load.
pub fn instance_to_json(inst: &Instance) -> String {
    let file = InstanceFile {
        meta: inst.meta.clone(),
        locations: inst.locations.clone(),
        requests: inst.requests.clone(),
        vehicles: inst.vehicles.clone(),
        transfers: inst.transfers.clone(),
        matrices: inst.has_explicit_matrices().then(|| MatrixFile {
            travel: inst.travel().to_rows(),
            distance: inst.distance().to_rows(),
        }),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("instance serializes");
    text.push('\n');
    text
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| InstanceError::Io { path: path.to_path_buf(), source })?;
    instance_from_json(&text)
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    std::fs::write(path, instance_to_json(inst))
        .map_err(|source| InstanceError::Io { path: path.to_path_buf(), source })
}
