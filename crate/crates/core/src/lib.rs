//! Timetable routing for public transit: RAPTOR and three-criteria
//! McRAPTOR, both with optional early pruning of transfer relaxation over
//! duration-sorted transfer edges.
//!
//! Modules:
//! - [`model`]: network data model and journeys.
//! - [`ingest`]: GTFS and native formats, transfer graph construction,
//!   edge sorting, synthetic networks.
//! - [`raptor`] / [`mcraptor`]: the two query engines.
//! - [`oracle`]: slow brute-force references used to check the engines.
//! - [`bench`]: paired query benchmarking, network statistics, correlation.

pub mod bench;
pub mod ingest;
pub mod mcraptor;
pub mod model;
pub mod oracle;
pub mod raptor;

pub use model::{Duration, Journey, Leg, StopId, Time, Timetable, TransferGraph};
pub use raptor::{Pruning, Query};
