use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Stop, StopEvent, StopId, Time, Timetable, VertexId};

use super::graph_ops::walk_secs;
use super::{sort_edges, IngestError, TimetableBuilder, TripInput};

const WALK_MPS: f64 = 1.25;
const VEHICLE_MPS: f64 = 8.0;
const STOP_SPACING_M: f64 = 400.0;
const SERVICE_START: u32 = 5 * 3600;
const SERVICE_END: u32 = 23 * 3600;
const ORIGIN: (f64, f64) = (48.0, 11.0);
const METERS_PER_DEG_LAT: f64 = 111_195.0;

/// Parameters for a seeded random network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub stop_count: usize,
    pub route_count: usize,
    pub trips_per_route: usize,
    /// Fraction of ordered stop pairs joined by a transfer edge.
    pub target_density: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), IngestError> {
        let err = |m: String| Err(IngestError::Synthetic(m));
        if self.stop_count == 0 || self.route_count == 0 || self.trips_per_route == 0 {
            return err(format!("counts must be positive: {self:?}"));
        }
        if !(0.0..=1.0).contains(&self.target_density) {
            return err(format!("density {} outside [0, 1]", self.target_density));
        }
        if self.stop_count < 2 {
            return err("routes need at least 2 stops".into());
        }
        Ok(())
    }
}

/// Generates a deterministic network for `spec`.
///
/// Stops are scattered uniformly over a square whose side grows with the
/// square root of the stop count. The transfer graph joins the closest
/// stop pairs in both directions until the requested density is reached,
/// weighted by straight-line walking time; this makes it closed under
/// paths no longer than its longest edge. Routes are nearest-neighbour
/// walks through the stops, and each route's trips share one travel-time
/// profile, so trips never overtake. Transfer edges come out sorted.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Timetable, IngestError> {
    spec.validate()?;
    let n = spec.stop_count;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let side = STOP_SPACING_M * (n as f64).sqrt();

    let points: Vec<(f64, f64)> = (0..n).map(|_| (rng.random_range(0.0..side), rng.random_range(0.0..side))).collect();
    let dist = |a: usize, b: usize| {
        let (dx, dy) = (points[a].0 - points[b].0, points[a].1 - points[b].1);
        (dx * dx + dy * dy).sqrt()
    };

    let stops = points
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            let lat = ORIGIN.0 + y / METERS_PER_DEG_LAT;
            let lon = ORIGIN.1 + x / (METERS_PER_DEG_LAT * ORIGIN.0.to_radians().cos());
            Stop { code: format!("S{i}"), name: format!("Stop {i}"), coord: Some((lat, lon)) }
        })
        .collect();
    let mut builder = TimetableBuilder::new(stops);

    // Transfer graph: the closest unordered pairs, both directions.
    let max_directed = n * (n - 1);
    let pairs_wanted = ((spec.target_density * max_directed as f64) / 2.0).round() as usize;
    let achieved = 2.0 * pairs_wanted as f64 / max_directed as f64;
    if spec.target_density > 0.0 && (achieved - spec.target_density).abs() > 0.1 * spec.target_density {
        return Err(IngestError::Synthetic(format!(
            "density {} is not reachable with {n} stops (closest is {achieved:.4})",
            spec.target_density
        )));
    }
    if pairs_wanted > 0 {
        let mut pairs: Vec<(f64, usize, usize)> =
            (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).map(|(a, b)| (dist(a, b), a, b)).collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        for &(d, a, b) in &pairs[..pairs_wanted] {
            let w = walk_secs(d, WALK_MPS);
            builder.add_transfer(VertexId::from_idx(a), VertexId::from_idx(b), w);
            builder.add_transfer(VertexId::from_idx(b), VertexId::from_idx(a), w);
        }
    }

    // Routes.
    let max_len = (n / 3).clamp(2, 25);
    for r in 0..spec.route_count {
        let len = rng.random_range(2..=max_len);
        let mut seq = vec![rng.random_range(0..n)];
        while seq.len() < len {
            let here = *seq.last().unwrap();
            let mut near: Vec<usize> = (0..n).filter(|s| !seq.contains(s)).collect();
            if near.is_empty() {
                break;
            }
            near.sort_by(|&a, &b| dist(here, a).total_cmp(&dist(here, b)).then(a.cmp(&b)));
            near.truncate(5);
            seq.push(*near.choose(&mut rng).unwrap());
        }

        // (arrival offset, departure offset) per stop.
        let mut profile = Vec::with_capacity(seq.len());
        let mut clock = 0u32;
        for (i, &s) in seq.iter().enumerate() {
            if i > 0 {
                clock += (dist(seq[i - 1], s) / VEHICLE_MPS).ceil() as u32 + 30 + rng.random_range(0..60);
            }
            let arrive = clock;
            if i > 0 && i + 1 < seq.len() {
                clock += rng.random_range(0..=30);
            }
            profile.push((arrive, clock));
        }

        let mut starts: Vec<u32> =
            (0..spec.trips_per_route).map(|_| rng.random_range(SERVICE_START..SERVICE_END)).collect();
        starts.sort_unstable();
        for (k, start) in starts.into_iter().enumerate() {
            let calls = seq
                .iter()
                .zip(&profile)
                .map(|(&s, &(a, d))| {
                    let ev = StopEvent {
                        arrival: Time::from_secs(start + a).expect("synthetic time in range"),
                        departure: Time::from_secs(start + d).expect("synthetic time in range"),
                    };
                    (StopId::from_idx(s), ev)
                })
                .collect();
            builder.add_trip(TripInput { code: format!("R{r}T{k}"), calls });
        }
    }

    let tt = builder.build()?;
    let (graph, _) = sort_edges(tt.transfers().clone());
    Ok(tt.with_transfers(graph)?)
}
