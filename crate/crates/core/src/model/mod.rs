//! Network data model: times, identifiers, the transfer graph, the
//! timetable, and journeys.
//!
//! Everything here is immutable once built and `Sync`, so one timetable
//! can serve any number of concurrent queries.

mod graph;
mod ids;
mod journey;
mod time;
mod timetable;

use thiserror::Error;

pub use graph::{density, path_duration, TransferEdge, TransferGraph};
pub use ids::{RouteId, StopId, TripId, VertexId};
pub use journey::{Journey, Leg};
pub use time::{Duration, Time, TIME_LIMIT};
pub use timetable::{validate, Route, Stop, StopEvent, Timetable, Trip, Violation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("time {0}s is outside the supported range")]
    TimeOutOfRange(u64),
    #[error("malformed time {0:?}, expected HH:MM:SS")]
    BadTimeFormat(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("edge {from}->{to} references a vertex outside 0..{vertex_count}")]
    VertexOutOfRange { from: VertexId, to: VertexId, vertex_count: usize },
    #[error("self-loop at {0}")]
    SelfLoop(VertexId),
    #[error("zero-duration transfer {from}->{to}")]
    ZeroDuration { from: VertexId, to: VertexId },
    #[error("adjacency claimed sorted but is not")]
    NotSorted,
    #[error("not a path: no edge {from}->{to}")]
    NotAPath { from: VertexId, to: VertexId },
    #[error("timetable invalid: {}", summarize(.0))]
    Invalid(Vec<Violation>),
    #[error("journey broken at leg {leg}: {reason}")]
    BrokenJourney { leg: usize, reason: String },
}

fn summarize(v: &[Violation]) -> String {
    let mut s = v.iter().take(3).map(ToString::to_string).collect::<Vec<_>>().join("; ");
    if v.len() > 3 {
        s.push_str(&format!("; and {} more", v.len() - 3));
    }
    s
}
