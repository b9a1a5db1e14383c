use std::collections::HashMap;

use crate::model::{
    Duration, Route, RouteId, Stop, StopEvent, StopId, Timetable, TransferGraph, Trip, TripId, VertexId,
};

use super::IngestError;

/// A trip as read from a source file, before grouping into routes.
#[derive(Clone, Debug)]
pub struct TripInput {
    pub code: String,
    pub calls: Vec<(StopId, StopEvent)>,
}

/// Groups raw trips into routes and assembles a validated [`Timetable`].
///
/// Trips sharing a stop sequence form one route, ordered by their event
/// times. Trips that would overtake another trip of the same sequence are
/// moved to an additional route with the same stops. Routes appear in the
/// order their stop sequence was first seen, so building from a
/// timetable's own trip list reproduces it exactly.
#[derive(Clone, Debug, Default)]
pub struct TimetableBuilder {
    stops: Vec<Stop>,
    extra_vertices: Vec<String>,
    trips: Vec<TripInput>,
    transfers: Vec<(VertexId, VertexId, Duration)>,
    keep_parallel: bool,
}

impl TimetableBuilder {
    pub fn new(stops: Vec<Stop>) -> TimetableBuilder {
        TimetableBuilder { stops, ..Default::default() }
    }

    pub fn stops(&self) -> &[Stop] {
        &self.stops
    }

    /// Adds a non-stop transfer vertex and returns its id.
    pub fn add_vertex(&mut self, name: String) -> VertexId {
        self.extra_vertices.push(name);
        VertexId::from_idx(self.stops.len() + self.extra_vertices.len() - 1)
    }

    pub fn vertex_count(&self) -> usize {
        self.stops.len() + self.extra_vertices.len()
    }

    pub fn add_trip(&mut self, trip: TripInput) {
        self.trips.push(trip);
    }

    pub fn add_transfer(&mut self, from: VertexId, to: VertexId, duration: Duration) {
        self.transfers.push((from, to, duration));
    }

    pub fn keep_parallel_edges(&mut self, keep: bool) {
        self.keep_parallel = keep;
    }

    pub fn build(self) -> Result<Timetable, IngestError> {
        let TimetableBuilder { stops, extra_vertices, trips, transfers, keep_parallel } = self;
        let vertex_count = stops.len() + extra_vertices.len();

        for t in &trips {
            check_trip(t, stops.len())?;
        }

        // Group by stop sequence in order of first appearance.
        let mut group_of: HashMap<Vec<StopId>, usize> = HashMap::new();
        let mut groups: Vec<(Vec<StopId>, Vec<TripInput>)> = Vec::new();
        for t in trips {
            let seq: Vec<StopId> = t.calls.iter().map(|c| c.0).collect();
            let g = *group_of.entry(seq.clone()).or_insert_with(|| {
                groups.push((seq, Vec::new()));
                groups.len() - 1
            });
            groups[g].1.push(t);
        }

        let mut routes = Vec::new();
        let mut out_trips = Vec::new();
        for (seq, mut members) in groups {
            members.sort_by(|a, b| {
                let ka = a.calls.iter().map(|c| (c.1.departure, c.1.arrival));
                let kb = b.calls.iter().map(|c| (c.1.departure, c.1.arrival));
                ka.cmp(kb).then_with(|| a.code.cmp(&b.code))
            });
            // Greedy FIFO split: each trip joins the first sub-route whose
            // last trip it does not overtake.
            let mut subroutes: Vec<Vec<TripInput>> = Vec::new();
            for t in members {
                let slot = subroutes.iter().position(|sr| follows(sr.last().unwrap(), &t));
                match slot {
                    Some(i) => subroutes[i].push(t),
                    None => subroutes.push(vec![t]),
                }
            }
            if subroutes.len() > 1 {
                log::debug!("stop sequence of {} stops split into {} FIFO routes", seq.len(), subroutes.len());
            }
            for sr in subroutes {
                let rid = RouteId::from_idx(routes.len());
                let mut ids = Vec::with_capacity(sr.len());
                for t in sr {
                    ids.push(TripId::from_idx(out_trips.len()));
                    out_trips.push(Trip {
                        code: t.code,
                        route: rid,
                        events: t.calls.into_iter().map(|c| c.1).collect(),
                    });
                }
                routes.push(Route { stops: seq.clone(), trips: ids });
            }
        }

        let graph = if keep_parallel {
            TransferGraph::from_edges_keep_parallel(vertex_count, transfers)?
        } else {
            TransferGraph::from_edges(vertex_count, transfers)?
        };
        Ok(Timetable::new(stops, routes, out_trips, graph, extra_vertices)?)
    }
}

/// True when `later` never runs ahead of `earlier` at any call.
fn follows(earlier: &TripInput, later: &TripInput) -> bool {
    earlier.calls.iter().zip(&later.calls).all(|(a, b)| a.1.arrival <= b.1.arrival && a.1.departure <= b.1.departure)
}

fn check_trip(t: &TripInput, stop_count: usize) -> Result<(), IngestError> {
    let bad = |reason: String| IngestError::InvalidTrip { trip: t.code.clone(), reason };
    if t.calls.len() < 2 {
        return Err(bad(format!("{} stop events, need at least 2", t.calls.len())));
    }
    for (i, (stop, ev)) in t.calls.iter().enumerate() {
        if stop.idx() >= stop_count {
            return Err(bad(format!("call {i} references unknown stop {stop}")));
        }
        if !ev.arrival.is_finite() || !ev.departure.is_finite() {
            return Err(bad(format!("call {i} has no time")));
        }
        if ev.arrival > ev.departure {
            return Err(bad(format!("call {i} arrives {} after departing {}", ev.arrival, ev.departure)));
        }
    }
    for (i, w) in t.calls.windows(2).enumerate() {
        if w[0].1.departure > w[1].1.arrival {
            return Err(bad(format!(
                "departs call {i} at {} after reaching call {} at {}",
                w[0].1.departure,
                i + 1,
                w[1].1.arrival
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate, Time};

    fn ev(a: u32, d: u32) -> StopEvent {
        StopEvent { arrival: Time::from_secs(a).unwrap(), departure: Time::from_secs(d).unwrap() }
    }

    fn stops(n: usize) -> Vec<Stop> {
        (0..n).map(|i| Stop { code: format!("S{i}"), name: format!("S{i}"), coord: None }).collect()
    }

    fn trip(code: &str, calls: &[(u32, u32, u32)]) -> TripInput {
        TripInput { code: code.into(), calls: calls.iter().map(|&(s, a, d)| (StopId(s), ev(a, d))).collect() }
    }

    #[test]
    fn overtaking_trips_are_split_into_separate_routes() {
        let mut b = TimetableBuilder::new(stops(3));
        b.add_trip(trip("slow", &[(0, 100, 100), (1, 400, 400), (2, 900, 900)]));
        b.add_trip(trip("fast", &[(0, 200, 200), (1, 300, 300), (2, 350, 350)]));
        let tt = b.build().unwrap();
        assert_eq!(tt.routes().len(), 2);
        assert!(validate(&tt).is_empty());
        // Brute-force check over all trip pairs of each route.
        for r in tt.routes() {
            for (i, &a) in r.trips.iter().enumerate() {
                for &c in &r.trips[i + 1..] {
                    let (ta, tc) = (tt.trip(a), tt.trip(c));
                    assert!(ta
                        .events
                        .iter()
                        .zip(&tc.events)
                        .all(|(x, y)| x.departure <= y.departure && x.arrival <= y.arrival));
                }
            }
        }
    }

    #[test]
    fn same_sequence_fifo_trips_share_a_route_in_time_order() {
        let mut b = TimetableBuilder::new(stops(2));
        b.add_trip(trip("late", &[(0, 500, 500), (1, 600, 600)]));
        b.add_trip(trip("early", &[(0, 100, 100), (1, 200, 200)]));
        let tt = b.build().unwrap();
        assert_eq!(tt.routes().len(), 1);
        assert_eq!(tt.trip(tt.routes()[0].trips[0]).code, "early");
    }

    #[test]
    fn rejects_short_and_backwards_trips() {
        let mut b = TimetableBuilder::new(stops(2));
        b.add_trip(trip("one", &[(0, 5, 5)]));
        assert!(matches!(b.build(), Err(IngestError::InvalidTrip { .. })));
        let mut b = TimetableBuilder::new(stops(2));
        b.add_trip(trip("back", &[(0, 50, 50), (1, 40, 40)]));
        assert!(matches!(b.build(), Err(IngestError::InvalidTrip { .. })));
    }
}
