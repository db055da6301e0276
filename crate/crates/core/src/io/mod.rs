//! Instance files, change orders and synthetic instances.

use std::fs;
use std::path::{Path, PathBuf};

use crate::model::{IndexError, InstanceIndex, ProblemInstance};

pub mod example;
pub mod generator;
pub mod json;
pub mod orders;
pub mod tables;

pub use example::example_instance;
pub use generator::{generate_instance, DisruptionMix, GeneratorConfig, GeneratorError};
pub use orders::{apply_orders, write_plan, ChangeOrder, OrderError, OrderKind, PlanDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// One JSON document.
    Json,
    /// A directory of CSV tables with a `manifest.csv`.
    Tables,
}

impl Format {
    /// `.json` files are JSON; directories and `.csv` paths are tables.
    pub fn detect(path: &Path) -> Option<Format> {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Some(Format::Json),
            Some(e) if e.eq_ignore_ascii_case("csv") => Some(Format::Tables),
            _ if path.is_dir() => Some(Format::Tables),
            _ => None,
        }
    }

    pub fn parse(s: &str) -> Option<Format> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Some(Format::Json),
            "csv" | "tables" => Some(Format::Tables),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Fs {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot tell the format of {0}; pass it explicitly")]
    UnknownFormat(PathBuf),
    #[error("{file}: {message}")]
    Syntax { file: String, message: String },
    #[error("{file} {at}: {entity} {id:?} is missing field {field}")]
    MissingField {
        file: String,
        /// `line N` for tables, a JSON path otherwise.
        at: String,
        entity: String,
        id: String,
        field: String,
    },
    #[error("{file} {at}: {entity} {id:?} field {field}: cannot parse {value:?}")]
    BadValue {
        file: String,
        at: String,
        entity: String,
        id: String,
        field: String,
        value: String,
    },
    #[error(transparent)]
    Reference(#[from] IndexError),
}

pub(crate) fn fs_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Fs {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads an instance and checks that its ids are unique and resolve.
pub fn read_instance(path: &Path, format: Option<Format>) -> Result<ProblemInstance, IoError> {
    let format = format
        .or_else(|| Format::detect(path))
        .ok_or_else(|| IoError::UnknownFormat(path.to_path_buf()))?;
    let inst = match format {
        Format::Json => {
            let text = fs::read_to_string(path).map_err(fs_err(path))?;
            json::from_str(&text, &path.display().to_string())?
        }
        Format::Tables => {
            let dir = if path.is_dir() {
                path
            } else {
                path.parent().unwrap_or(Path::new("."))
            };
            tables::read_dir(dir)?
        }
    };
    InstanceIndex::build(&inst)?;
    Ok(inst)
}

pub fn write_instance(inst: &ProblemInstance, path: &Path, format: Option<Format>) -> Result<(), IoError> {
    let format = format
        .or_else(|| Format::detect(path))
        .or_else(|| path.extension().is_none().then_some(Format::Tables))
        .ok_or_else(|| IoError::UnknownFormat(path.to_path_buf()))?;
    match format {
        Format::Json => fs::write(path, json::to_string(inst)).map_err(fs_err(path)),
        Format::Tables => {
            let dir = if path.extension().is_some() {
                path.parent().unwrap_or(Path::new("."))
            } else {
                path
            };
            tables::write_dir(inst, dir)
        }
    }
}
