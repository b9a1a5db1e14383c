//! Building timetables: GTFS subset, the native binary and text formats,
//! transfer-graph construction (footpaths, bounded transitive closure),
//! edge sorting, and seeded synthetic networks.

mod builder;
mod graph_ops;
mod gtfs;
pub mod native;
mod synthetic;
pub mod text;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{Duration, ModelError, Timetable};

pub use builder::{TimetableBuilder, TripInput};
pub use graph_ops::{footpaths, haversine_m, sort_edges, transitive_closure};
pub use gtfs::{load_gtfs, parse_gtfs, write_gtfs, GtfsSources};
pub use synthetic::{generate_synthetic, SyntheticSpec};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("required file {0} is missing")]
    MissingFile(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{file}:{line}: {message}")]
    Parse { file: String, line: u64, message: String },
    #[error("{file}:{line}: stop {stop:?} is referenced but never defined")]
    UnknownStop { file: String, line: u64, stop: String },
    #[error("stop {0:?} has no coordinates but footpaths must be derived")]
    MissingCoordinates(String),
    #[error("trip {trip:?}: {reason}")]
    InvalidTrip { trip: String, reason: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("native format, offset {offset}: {message}")]
    Decode { offset: usize, message: String },
    #[error("synthetic network: {0}")]
    Synthetic(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> IngestError {
        IngestError::Io { path: path.to_owned(), source }
    }
}

/// Ingestion parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct IngestConfig {
    /// Meters per second. 1.25 m/s is 4.5 km/h.
    pub walking_speed: f64,
    /// Straight-line radius for derived footpaths, meters.
    pub footpath_radius: f64,
    pub closure_threshold: Duration,
    pub collapse_parallel_edges: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            walking_speed: 1.25,
            footpath_radius: 500.0,
            closure_threshold: Duration(240),
            collapse_parallel_edges: true,
        }
    }
}

impl IngestConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        if !(self.walking_speed.is_finite() && self.walking_speed > 0.0) {
            return Err(IngestError::Config(format!("walking speed must be positive, got {}", self.walking_speed)));
        }
        if !(self.footpath_radius.is_finite() && self.footpath_radius >= 0.0) {
            return Err(IngestError::Config(format!("footpath radius must be >= 0, got {}", self.footpath_radius)));
        }
        if self.closure_threshold == Duration::ZERO {
            return Err(IngestError::Config("closure threshold must be positive".into()));
        }
        Ok(())
    }
}

/// Reads a network file in either native format, picking by magic bytes.
pub fn load_native(path: &Path) -> Result<Timetable, IngestError> {
    let bytes = std::fs::read(path).map_err(|e| IngestError::io(path, e))?;
    if bytes.starts_with(native::MAGIC) {
        native::decode(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|e| IngestError::Decode {
            offset: e.utf8_error().valid_up_to(),
            message: "neither a binary network nor UTF-8 text".into(),
        })?;
        text::parse(&text)
    }
}

/// Writes the binary native format.
pub fn save_native(tt: &Timetable, path: &Path) -> Result<(), IngestError> {
    std::fs::write(path, native::encode(tt)).map_err(|e| IngestError::io(path, e))
}
