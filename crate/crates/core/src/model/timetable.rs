use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ModelError, RouteId, StopId, Time, TransferGraph, TripId, VertexId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    /// External identifier (GTFS `stop_id` or fixture code).
    pub code: String,
    pub name: String,
    /// (latitude, longitude) in degrees.
    pub coord: Option<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StopEvent {
    pub arrival: Time,
    pub departure: Time,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Route {
    pub stops: Vec<StopId>,
    pub trips: Vec<TripId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trip {
    /// External identifier.
    pub code: String,
    pub route: RouteId,
    pub events: Vec<StopEvent>,
}

/// Immutable network: stops, routes, trips and the transfer graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Timetable {
    stops: Vec<Stop>,
    routes: Vec<Route>,
    trips: Vec<Trip>,
    transfers: TransferGraph,
    /// Names of transfer-graph vertices that are not stops.
    extra_vertices: Vec<String>,
    routes_by_stop: Vec<Vec<(RouteId, usize)>>,
    stop_index: HashMap<String, StopId>,
}

impl Timetable {
    /// Assembles and validates a timetable.
    pub fn new(
        stops: Vec<Stop>,
        routes: Vec<Route>,
        trips: Vec<Trip>,
        transfers: TransferGraph,
        extra_vertices: Vec<String>,
    ) -> Result<Timetable, ModelError> {
        let tt = Timetable::new_unchecked(stops, routes, trips, transfers, extra_vertices);
        let violations = validate(&tt);
        if violations.is_empty() {
            Ok(tt)
        } else {
            Err(ModelError::Invalid(violations))
        }
    }

    /// Assembles a timetable without checking invariants. Routing on an
    /// unvalidated timetable may panic; run [`validate`] first.
    pub fn new_unchecked(
        stops: Vec<Stop>,
        routes: Vec<Route>,
        trips: Vec<Trip>,
        transfers: TransferGraph,
        mut extra_vertices: Vec<String>,
    ) -> Timetable {
        let mut routes_by_stop = vec![Vec::new(); stops.len()];
        for (r, route) in routes.iter().enumerate() {
            for (pos, s) in route.stops.iter().enumerate() {
                if let Some(list) = routes_by_stop.get_mut(s.idx()) {
                    list.push((RouteId::from_idx(r), pos));
                }
            }
        }
        let stop_index = stops.iter().enumerate().map(|(i, s)| (s.code.clone(), StopId::from_idx(i))).collect();
        let wanted = transfers.vertex_count().saturating_sub(stops.len());
        if extra_vertices.len() < wanted {
            let start = stops.len() + extra_vertices.len();
            extra_vertices.extend((start..stops.len() + wanted).map(|i| format!("#{i}")));
        }
        extra_vertices.truncate(wanted);
        Timetable { stops, routes, trips, transfers, extra_vertices, routes_by_stop, stop_index }
    }

    /// Same network with a different transfer graph.
    pub fn with_transfers(self, transfers: TransferGraph) -> Result<Timetable, ModelError> {
        Timetable::new(self.stops, self.routes, self.trips, transfers, self.extra_vertices)
    }

    pub fn stops(&self) -> &[Stop] {
        &self.stops
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn trips(&self) -> &[Trip] {
        &self.trips
    }

    pub fn transfers(&self) -> &TransferGraph {
        &self.transfers
    }

    pub fn extra_vertices(&self) -> &[String] {
        &self.extra_vertices
    }

    pub fn stop_count(&self) -> usize {
        self.stops.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.transfers.vertex_count()
    }

    #[inline]
    pub fn stop(&self, id: StopId) -> &Stop {
        &self.stops[id.idx()]
    }

    #[inline]
    pub fn route(&self, id: RouteId) -> &Route {
        &self.routes[id.idx()]
    }

    #[inline]
    pub fn trip(&self, id: TripId) -> &Trip {
        &self.trips[id.idx()]
    }

    /// (route, position in its stop sequence) pairs serving `stop`.
    #[inline]
    pub fn routes_by_stop(&self, stop: StopId) -> &[(RouteId, usize)] {
        &self.routes_by_stop[stop.idx()]
    }

    pub fn stop_by_code(&self, code: &str) -> Option<StopId> {
        self.stop_index.get(code).copied()
    }

    pub fn is_stop(&self, v: VertexId) -> bool {
        v.idx() < self.stops.len()
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        match self.stops.get(v.idx()) {
            Some(s) => &s.code,
            None => &self.extra_vertices[v.idx() - self.stops.len()],
        }
    }

    pub fn stop_event_count(&self) -> usize {
        self.trips.iter().map(|t| t.events.len()).sum()
    }

    /// Earliest departure and latest arrival over all trips.
    pub fn service_span(&self) -> Option<(Time, Time)> {
        let first = self.trips.iter().filter_map(|t| t.events.first()).map(|e| e.departure).min()?;
        let last = self.trips.iter().filter_map(|t| t.events.last()).map(|e| e.arrival).max()?;
        Some((first, last))
    }
}

/// One broken invariant, with its location.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    BadCoordinate { stop: StopId },
    UnknownStop { route: RouteId, position: usize, stop: StopId },
    RouteTooShort { route: RouteId, len: usize },
    UnknownTrip { route: RouteId, trip: TripId },
    TripRouteMismatch { trip: TripId, route: RouteId },
    TripListedTwice { trip: TripId },
    TripUnlisted { trip: TripId },
    EventCount { trip: TripId, expected: usize, found: usize },
    InfiniteEvent { trip: TripId, position: usize },
    NegativeDwell { trip: TripId, position: usize },
    NegativeTravel { trip: TripId, position: usize },
    TripOrdering { route: RouteId, earlier: TripId, later: TripId, position: usize },
    GraphTooSmall { vertex_count: usize, stop_count: usize },
    SelfLoop { vertex: VertexId },
    NonPositiveDuration { from: VertexId, to: VertexId },
    SortedFlagWrong { vertex: VertexId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            BadCoordinate { stop } => write!(f, "{stop}: coordinates are not a finite latitude/longitude"),
            UnknownStop { route, position, stop } => write!(f, "{route} position {position}: unknown stop {stop}"),
            RouteTooShort { route, len } => write!(f, "{route}: stop sequence has {len} stops, need at least 2"),
            UnknownTrip { route, trip } => write!(f, "{route}: lists unknown trip {trip}"),
            TripRouteMismatch { trip, route } => write!(f, "{trip}: claims {route} but is not listed there"),
            TripListedTwice { trip } => write!(f, "{trip}: listed by more than one route slot"),
            TripUnlisted { trip } => write!(f, "{trip}: not listed by any route"),
            EventCount { trip, expected, found } => {
                write!(f, "{trip}: {found} stop events, route has {expected} stops")
            }
            InfiniteEvent { trip, position } => write!(f, "{trip} position {position}: infinite event time"),
            NegativeDwell { trip, position } => write!(f, "{trip} position {position}: arrival after departure"),
            NegativeTravel { trip, position } => {
                write!(f, "{trip} position {position}: departs after arriving at the next stop")
            }
            TripOrdering { route, earlier, later, position } => {
                write!(f, "{route}: {later} overtakes or precedes {earlier} at position {position}")
            }
            GraphTooSmall { vertex_count, stop_count } => {
                write!(f, "transfer graph has {vertex_count} vertices but there are {stop_count} stops")
            }
            SelfLoop { vertex } => write!(f, "transfer graph self-loop at {vertex}"),
            NonPositiveDuration { from, to } => write!(f, "transfer {from}->{to} has zero duration"),
            SortedFlagWrong { vertex } => write!(f, "transfer graph flagged sorted but {vertex} is not"),
        }
    }
}

/// Reports every violated timetable invariant. Empty iff well-formed.
pub fn validate(tt: &Timetable) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut listed = vec![0usize; tt.trips.len()];

    for (i, stop) in tt.stops.iter().enumerate() {
        if let Some((lat, lon)) = stop.coord {
            if !(lat.abs() <= 90.0 && lon.abs() <= 180.0) {
                out.push(Violation::BadCoordinate { stop: StopId::from_idx(i) });
            }
        }
    }

    for (r, route) in tt.routes.iter().enumerate() {
        let rid = RouteId::from_idx(r);
        if route.stops.len() < 2 {
            out.push(Violation::RouteTooShort { route: rid, len: route.stops.len() });
        }
        for (position, &stop) in route.stops.iter().enumerate() {
            if stop.idx() >= tt.stops.len() {
                out.push(Violation::UnknownStop { route: rid, position, stop });
            }
        }
        let mut prev: Option<TripId> = None;
        for &tid in &route.trips {
            let Some(trip) = tt.trips.get(tid.idx()) else {
                out.push(Violation::UnknownTrip { route: rid, trip: tid });
                continue;
            };
            listed[tid.idx()] += 1;
            if trip.route != rid {
                out.push(Violation::TripRouteMismatch { trip: tid, route: rid });
            }
            if trip.events.len() != route.stops.len() {
                out.push(Violation::EventCount { trip: tid, expected: route.stops.len(), found: trip.events.len() });
                prev = None;
                continue;
            }
            if let Some(p) = prev {
                let earlier = &tt.trips[p.idx()];
                if let Some(position) = (0..trip.events.len()).find(|&i| {
                    trip.events[i].departure < earlier.events[i].departure
                        || trip.events[i].arrival < earlier.events[i].arrival
                }) {
                    out.push(Violation::TripOrdering { route: rid, earlier: p, later: tid, position });
                }
            }
            prev = Some(tid);
        }
    }

    for (t, trip) in tt.trips.iter().enumerate() {
        let tid = TripId::from_idx(t);
        match listed[t] {
            0 => {
                let claimed = tt.routes.get(trip.route.idx());
                if claimed.is_none_or(|r| !r.trips.contains(&tid)) {
                    out.push(Violation::TripUnlisted { trip: tid });
                }
            }
            1 => {}
            _ => out.push(Violation::TripListedTwice { trip: tid }),
        }
        for (i, ev) in trip.events.iter().enumerate() {
            if !ev.arrival.is_finite() || !ev.departure.is_finite() {
                out.push(Violation::InfiniteEvent { trip: tid, position: i });
            } else if ev.arrival > ev.departure {
                out.push(Violation::NegativeDwell { trip: tid, position: i });
            }
        }
        for (i, w) in trip.events.windows(2).enumerate() {
            if w[0].departure > w[1].arrival {
                out.push(Violation::NegativeTravel { trip: tid, position: i });
            }
        }
    }

    let g = &tt.transfers;
    if g.vertex_count() < tt.stops.len() {
        out.push(Violation::GraphTooSmall { vertex_count: g.vertex_count(), stop_count: tt.stops.len() });
    }
    for v in 0..g.vertex_count() {
        let vid = VertexId::from_idx(v);
        let list = g.outgoing(vid);
        for e in list {
            if e.target == vid {
                out.push(Violation::SelfLoop { vertex: vid });
            }
            if e.duration.0 == 0 {
                out.push(Violation::NonPositiveDuration { from: vid, to: e.target });
            }
        }
        if g.is_sorted() && list.windows(2).any(|w| w[0].duration > w[1].duration) {
            out.push(Violation::SortedFlagWrong { vertex: vid });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Duration;

    fn t(s: u32) -> Time {
        Time::from_secs(s).unwrap()
    }

    fn ev(a: u32, d: u32) -> StopEvent {
        StopEvent { arrival: t(a), departure: t(d) }
    }

    fn stops(n: usize) -> Vec<Stop> {
        (0..n).map(|i| Stop { code: format!("S{i}"), name: format!("Stop {i}"), coord: None }).collect()
    }

    fn toy() -> (Vec<Stop>, Vec<Route>, Vec<Trip>, TransferGraph) {
        let routes = vec![Route { stops: vec![StopId(0), StopId(1), StopId(2)], trips: vec![TripId(0), TripId(1)] }];
        let trips = vec![
            Trip { code: "a".into(), route: RouteId(0), events: vec![ev(100, 100), ev(200, 210), ev(300, 300)] },
            Trip { code: "b".into(), route: RouteId(0), events: vec![ev(400, 400), ev(500, 510), ev(600, 600)] },
        ];
        let g = TransferGraph::from_edges(3, [(VertexId(1), VertexId(2), Duration(60))]).unwrap();
        (stops(3), routes, trips, g)
    }

    #[test]
    fn well_formed_toy_has_no_violations() {
        let (s, r, tr, g) = toy();
        let tt = Timetable::new(s, r, tr, g, vec![]).unwrap();
        assert!(validate(&tt).is_empty());
        assert_eq!(tt.routes_by_stop(StopId(1)), &[(RouteId(0), 1)]);
        assert_eq!(tt.service_span(), Some((t(100), t(600))));
    }

    #[test]
    fn planted_dwell_defect_is_reported_once() {
        let (s, r, mut tr, g) = toy();
        tr[0].events[1] = ev(215, 210);
        let tt = Timetable::new_unchecked(s, r, tr, g, vec![]);
        assert_eq!(validate(&tt), vec![Violation::NegativeDwell { trip: TripId(0), position: 1 }]);
    }

    #[test]
    fn planted_overtaking_is_reported_once() {
        let (s, r, mut tr, g) = toy();
        // Second trip departs later but arrives before the first one.
        tr[1].events = vec![ev(150, 150), ev(180, 190), ev(250, 250)];
        let tt = Timetable::new_unchecked(s, r, tr, g, vec![]);
        assert_eq!(
            validate(&tt),
            vec![Violation::TripOrdering { route: RouteId(0), earlier: TripId(0), later: TripId(1), position: 1 }]
        );
    }

    #[test]
    fn routes_by_stop_inverts_stop_sequences() {
        let (s, mut r, mut tr, g) = toy();
        r.push(Route { stops: vec![StopId(2), StopId(0)], trips: vec![TripId(2)] });
        tr.push(Trip { code: "c".into(), route: RouteId(1), events: vec![ev(10, 10), ev(20, 20)] });
        let tt = Timetable::new(s, r, tr, g, vec![]).unwrap();
        for (ri, route) in tt.routes().iter().enumerate() {
            for (pos, &stop) in route.stops.iter().enumerate() {
                assert!(tt.routes_by_stop(stop).contains(&(RouteId::from_idx(ri), pos)));
            }
        }
        let total: usize = (0..3).map(|i| tt.routes_by_stop(StopId(i)).len()).sum();
        assert_eq!(total, 5);
    }

    #[test]
    fn nan_or_out_of_range_coordinates_are_reported() {
        let (mut s, r, tr, g) = toy();
        s[1].coord = Some((f64::NAN, 11.0));
        s[2].coord = Some((48.0, 181.0));
        let tt = Timetable::new_unchecked(s, r, tr, g, vec![]);
        assert_eq!(
            validate(&tt),
            vec![Violation::BadCoordinate { stop: StopId(1) }, Violation::BadCoordinate { stop: StopId(2) }]
        );
    }

    #[test]
    fn graph_smaller_than_stop_set_is_reported() {
        let (s, r, tr, _) = toy();
        let tt = Timetable::new_unchecked(s, r, tr, TransferGraph::empty(2), vec![]);
        assert!(validate(&tt).contains(&Violation::GraphTooSmall { vertex_count: 2, stop_count: 3 }));
    }

    #[test]
    fn structural_mismatches_are_reported() {
        let (s, r, mut tr, g) = toy();
        tr[1].events.pop();
        tr.push(Trip { code: "orphan".into(), route: RouteId(0), events: vec![ev(1, 1), ev(2, 2), ev(3, 3)] });
        let tt = Timetable::new_unchecked(s, r, tr, g, vec![]);
        let v = validate(&tt);
        assert!(v.contains(&Violation::EventCount { trip: TripId(1), expected: 3, found: 2 }));
        assert!(v.contains(&Violation::TripUnlisted { trip: TripId(2) }));
    }
}
