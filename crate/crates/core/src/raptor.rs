//! Round-based earliest-arrival search over (arrival time, number of trips).
//!
//! Journeys alternate trips with at most one transfer-graph edge between
//! consecutive trips, optionally preceded by an edge out of the source and
//! followed by an edge into the target. To keep this exact on graphs that
//! are not transitively closed, each round keeps two labels per vertex:
//! the best arrival by vehicle (the only labels transfers may start from)
//! and the best arrival by any means (what the next round boards from).
//!
//! With [`Pruning::Early`] the transfer loop of a stop stops at the first
//! edge whose candidate arrival is not better than the best known arrival
//! at the target. Edges are sorted by duration, so every later edge is at
//! least as bad and the result is unchanged.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Duration, Journey, Leg, RouteId, StopId, Time, Timetable, TripId, VertexId};

pub const DEFAULT_MAX_ROUNDS: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pruning {
    #[default]
    Off,
    Early,
}

impl std::fmt::Display for Pruning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Pruning::Off => "off",
            Pruning::Early => "early",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Query {
    pub source: StopId,
    pub target: StopId,
    pub departure: Time,
    pub max_rounds: usize,
    pub pruning: Pruning,
}

impl Query {
    pub fn new(source: StopId, target: StopId, departure: Time) -> Query {
        Query { source, target, departure, max_rounds: DEFAULT_MAX_ROUNDS, pruning: Pruning::Off }
    }

    pub fn with_pruning(self, pruning: Pruning) -> Query {
        Query { pruning, ..self }
    }

    pub fn with_max_rounds(self, max_rounds: usize) -> Query {
        Query { max_rounds, ..self }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RoutingError {
    #[error("early pruning needs a transfer graph sorted by duration (run the sort step first)")]
    UnsortedTransferGraph,
    #[error("unknown stop {0}")]
    UnknownStop(StopId),
    #[error("max_rounds must be at least 1")]
    NoRounds,
    #[error("departure time must be finite")]
    InfiniteDeparture,
    #[error("no journey reaches {target} with {round} trips")]
    NoJourney { target: StopId, round: usize },
}

pub(crate) fn check_query(tt: &Timetable, q: &Query) -> Result<(), RoutingError> {
    for s in [q.source, q.target] {
        if s.idx() >= tt.stop_count() {
            return Err(RoutingError::UnknownStop(s));
        }
    }
    if q.max_rounds == 0 {
        return Err(RoutingError::NoRounds);
    }
    if !q.departure.is_finite() {
        return Err(RoutingError::InfiniteDeparture);
    }
    if q.pruning == Pruning::Early && !tt.transfers().is_sorted() {
        return Err(RoutingError::UnsortedTransferGraph);
    }
    Ok(())
}

/// Transfer-phase work counters.
///
/// `edges_examined` counts edges whose candidate was compared against the
/// labels, i.e. `edges_relaxed + edges_skipped`. Edges cut off by early
/// pruning are counted in `edges_pruned` only, so for the same query
/// `examined(Early) + pruned(Early) == examined(Off)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Counters {
    pub edges_examined: u64,
    pub edges_relaxed: u64,
    pub edges_skipped: u64,
    pub edges_pruned: u64,
}

impl AddAssign for Counters {
    fn add_assign(&mut self, o: Counters) {
        self.edges_examined += o.edges_examined;
        self.edges_relaxed += o.edges_relaxed;
        self.edges_skipped += o.edges_skipped;
        self.edges_pruned += o.edges_pruned;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontEntry {
    pub num_trips: usize,
    pub arrival: Time,
    pub journey: Journey,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParetoResult {
    /// Strictly more trips and strictly earlier arrival from one entry to
    /// the next.
    pub entries: Vec<FrontEntry>,
    pub counters: Counters,
    /// Set when labels were still improving after `max_rounds` rounds.
    pub truncated: bool,
    pub rounds: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum AnyParent {
    Source,
    /// The vehicle label of the same round and vertex.
    Vehicle,
    Transfer {
        from: StopId,
        duration: Duration,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TripParent {
    Source,
    /// Boarded at `board` (from the previous round's label at that stop).
    Ride {
        trip: TripId,
        board: usize,
        alight: usize,
    },
}

#[derive(Clone, Debug)]
struct Round {
    any: Vec<Time>,
    vehicle: Vec<Time>,
    any_parent: Vec<Option<AnyParent>>,
    vehicle_parent: Vec<Option<TripParent>>,
}

/// Per-query search state, exposed so tests can drive the phases directly.
#[derive(Clone, Debug)]
pub struct RaptorState {
    query: Query,
    rounds: Vec<Round>,
    best: Vec<Time>,
    best_vehicle: Vec<Time>,
    /// Vertices whose any-label improved in the current round.
    marked: Vec<bool>,
    marked_list: Vec<VertexId>,
    /// Stops whose vehicle label improved in the current round and whose
    /// transfers are still to be relaxed.
    vehicle_marked: Vec<StopId>,
    vehicle_flag: Vec<bool>,
    route_start: Vec<usize>,
    pub counters: Counters,
}

impl RaptorState {
    /// Round 0: the traveller stands at the source at the departure time.
    pub fn new(tt: &Timetable, q: &Query) -> Result<RaptorState, RoutingError> {
        check_query(tt, q)?;
        let n = tt.vertex_count();
        let mut st = RaptorState {
            query: *q,
            rounds: Vec::with_capacity(q.max_rounds + 1),
            best: vec![Time::INFINITY; n],
            best_vehicle: vec![Time::INFINITY; n],
            marked: vec![false; n],
            marked_list: Vec::new(),
            vehicle_marked: Vec::new(),
            vehicle_flag: vec![false; n],
            route_start: vec![usize::MAX; tt.routes().len()],
            counters: Counters::default(),
        };
        st.rounds.push(Round {
            any: vec![Time::INFINITY; n],
            vehicle: vec![Time::INFINITY; n],
            any_parent: vec![None; n],
            vehicle_parent: vec![None; n],
        });
        let s = q.source.idx();
        let r = &mut st.rounds[0];
        r.any[s] = q.departure;
        r.vehicle[s] = q.departure;
        r.any_parent[s] = Some(AnyParent::Source);
        r.vehicle_parent[s] = Some(TripParent::Source);
        st.best[s] = q.departure;
        st.best_vehicle[s] = q.departure;
        st.mark(VertexId::from(q.source));
        st.mark_vehicle(q.source);
        Ok(st)
    }

    pub fn query(&self) -> &Query {
        &self.query
    }

    /// Index of the current round.
    pub fn round(&self) -> usize {
        self.rounds.len() - 1
    }

    /// Arrival at `v` with at most `round` trips.
    pub fn arrival(&self, round: usize, v: VertexId) -> Time {
        self.rounds[round].any[v.idx()]
    }

    /// Best known arrival at `v` over all rounds so far.
    pub fn best(&self, v: VertexId) -> Time {
        self.best[v.idx()]
    }

    pub fn target_bound(&self) -> Time {
        self.best[self.query.target.idx()]
    }

    pub fn has_marked(&self) -> bool {
        !self.marked_list.is_empty()
    }

    /// Plants a vehicle arrival at `stop` in the current round, as if a trip
    /// had just dropped the traveller there. For driving the transfer phase
    /// in isolation; the label has no trip to reconstruct.
    pub fn set_vehicle_arrival(&mut self, stop: StopId, at: Time) {
        let k = self.round();
        let s = stop.idx();
        let r = &mut self.rounds[k];
        r.vehicle[s] = at;
        r.vehicle_parent[s] = Some(TripParent::Source);
        self.best_vehicle[s] = self.best_vehicle[s].min(at);
        if at < r.any[s] {
            r.any[s] = at;
            r.any_parent[s] = Some(AnyParent::Vehicle);
            self.best[s] = self.best[s].min(at);
        }
        self.mark_vehicle(stop);
    }

    /// Plants an arrival at the target, tightening the pruning bound.
    pub fn set_target_bound(&mut self, at: Time) {
        let t = self.query.target.idx();
        let k = self.round();
        self.rounds[k].any[t] = at;
        self.rounds[k].any_parent[t] = Some(AnyParent::Source);
        self.best[t] = at;
    }

    fn mark(&mut self, v: VertexId) {
        if !self.marked[v.idx()] {
            self.marked[v.idx()] = true;
            self.marked_list.push(v);
        }
    }

    fn mark_vehicle(&mut self, s: StopId) {
        if !self.vehicle_flag[s.idx()] {
            self.vehicle_flag[s.idx()] = true;
            self.vehicle_marked.push(s);
        }
    }

    fn take_marked(&mut self) -> Vec<VertexId> {
        let list = std::mem::take(&mut self.marked_list);
        for v in &list {
            self.marked[v.idx()] = false;
        }
        list
    }

    /// Transfer phase of the current round: relaxes the outgoing edges of
    /// every stop whose vehicle label improved, in ascending stop order.
    pub fn relax_transfers(&mut self, tt: &Timetable) {
        let mut sources = std::mem::take(&mut self.vehicle_marked);
        sources.sort_unstable();
        for s in &sources {
            self.vehicle_flag[s.idx()] = false;
        }
        let k = self.round();
        let target = self.query.target.idx();
        let early = self.query.pruning == Pruning::Early;
        for s in sources {
            let from = self.rounds[k].vehicle[s.idx()];
            let edges = tt.transfers().outgoing(s.into());
            for (i, e) in edges.iter().enumerate() {
                let candidate = from + e.duration;
                let bound = self.best[target];
                if early && bound.is_finite() && candidate >= bound {
                    self.counters.edges_pruned += (edges.len() - i) as u64;
                    break;
                }
                self.counters.edges_examined += 1;
                let v = e.target.idx();
                if candidate < self.best[v].min(bound) {
                    let r = &mut self.rounds[k];
                    r.any[v] = candidate;
                    r.any_parent[v] = Some(AnyParent::Transfer { from: s, duration: e.duration });
                    self.best[v] = candidate;
                    self.mark(e.target);
                    self.counters.edges_relaxed += 1;
                } else {
                    self.counters.edges_skipped += 1;
                }
            }
        }
    }

    /// Opens the next round and scans every route through a stop whose
    /// label improved in the previous round. Returns `false` (and opens
    /// nothing) when no stop is marked.
    pub fn scan_routes(&mut self, tt: &Timetable) -> bool {
        let marked = self.take_marked();
        if marked.is_empty() {
            return false;
        }
        let prev = self.rounds.last().expect("round 0 exists");
        let next = Round {
            any: prev.any.clone(),
            vehicle: prev.vehicle.clone(),
            any_parent: vec![None; prev.any.len()],
            vehicle_parent: vec![None; prev.any.len()],
        };
        self.rounds.push(next);
        let k = self.round();

        let mut routes: Vec<RouteId> = Vec::new();
        for v in marked {
            if !tt.is_stop(v) {
                continue;
            }
            for &(r, pos) in tt.routes_by_stop(StopId(v.0)) {
                let start = &mut self.route_start[r.idx()];
                if *start == usize::MAX {
                    routes.push(r);
                }
                *start = (*start).min(pos);
            }
        }
        routes.sort_unstable();

        let target = self.query.target.idx();
        for r in routes {
            let start = std::mem::replace(&mut self.route_start[r.idx()], usize::MAX);
            let route = tt.route(r);
            // (index into route.trips, boarding position)
            let mut current: Option<(usize, usize)> = None;
            for (p, &stop) in route.stops.iter().enumerate().skip(start) {
                let s = stop.idx();
                if let Some((ti, board)) = current {
                    let a = tt.trip(route.trips[ti]).events[p].arrival;
                    if a < self.best_vehicle[s].min(self.best[target]) {
                        let trip = route.trips[ti];
                        let round = &mut self.rounds[k];
                        round.vehicle[s] = a;
                        round.vehicle_parent[s] = Some(TripParent::Ride { trip, board, alight: p });
                        self.best_vehicle[s] = a;
                        if !self.vehicle_flag[s] {
                            self.vehicle_flag[s] = true;
                            self.vehicle_marked.push(stop);
                        }
                        if a < round.any[s] {
                            round.any[s] = a;
                            round.any_parent[s] = Some(AnyParent::Vehicle);
                            self.best[s] = a;
                            self.mark(stop.into());
                        }
                    }
                }
                if p + 1 == route.stops.len() {
                    break;
                }
                let ready = self.rounds[k - 1].any[s];
                if !ready.is_finite() {
                    continue;
                }
                let limit = match current {
                    Some((ti, _)) if ready > tt.trip(route.trips[ti]).events[p].departure => continue,
                    Some((ti, _)) => ti,
                    None => route.trips.len(),
                };
                let first = route.trips[..limit].partition_point(|&t| tt.trip(t).events[p].departure < ready);
                if first < limit {
                    current = Some((first, p));
                }
            }
        }
        true
    }

    /// Rebuilds the journey behind the label of `target` at `round`.
    pub fn reconstruct(&self, tt: &Timetable, round: usize, target: StopId) -> Result<Journey, RoutingError> {
        let no_journey = RoutingError::NoJourney { target, round };
        if round >= self.rounds.len() || !self.rounds[round].any[target.idx()].is_finite() {
            return Err(no_journey);
        }
        let mut legs = Vec::new();
        let mut k = round;
        let mut v = target.idx();
        // Walk any-labels and vehicle-labels alternately back to the source.
        'any: loop {
            let parent = loop {
                match self.rounds[k].any_parent[v] {
                    Some(p) => break p,
                    None if k > 0 => k -= 1,
                    None => return Err(no_journey),
                }
            };
            let stop = match parent {
                AnyParent::Source => break 'any,
                AnyParent::Vehicle => v,
                AnyParent::Transfer { from, duration } => {
                    legs.push(Leg::Transfer { from: from.into(), to: VertexId::from_idx(v), duration });
                    from.idx()
                }
            };
            let ride = loop {
                match self.rounds[k].vehicle_parent[stop] {
                    Some(p) => break p,
                    None if k > 0 => k -= 1,
                    None => return Err(no_journey),
                }
            };
            match ride {
                TripParent::Source => break 'any,
                TripParent::Ride { trip, board, alight } => {
                    legs.push(Leg::Trip { trip, board, alight });
                    v = tt.route(tt.trip(trip).route).stops[board].idx();
                    k -= 1;
                }
            }
        }
        legs.reverse();
        let q = &self.query;
        Journey::from_legs(tt, q.source, target, q.departure, legs).map_err(|_| no_journey)
    }
}

/// Runs a full query and returns the (trips, arrival) Pareto front at the
/// target.
pub fn query(tt: &Timetable, q: &Query) -> Result<ParetoResult, RoutingError> {
    let mut st = RaptorState::new(tt, q)?;
    let target = VertexId::from(q.target);
    st.relax_transfers(tt);
    let mut front_rounds = Vec::new();
    let mut last = Time::INFINITY;
    if st.best(target) < last {
        last = st.best(target);
        front_rounds.push(0);
    }
    while st.round() < q.max_rounds && st.scan_routes(tt) {
        st.relax_transfers(tt);
        if st.best(target) < last {
            last = st.best(target);
            front_rounds.push(st.round());
        }
    }
    let entries = front_rounds
        .into_iter()
        .map(|k| {
            let journey = st.reconstruct(tt, k, q.target)?;
            Ok(FrontEntry { num_trips: k, arrival: journey.arrival, journey })
        })
        .collect::<Result<Vec<_>, RoutingError>>()?;
    Ok(ParetoResult { entries, counters: st.counters, truncated: st.has_marked(), rounds: st.round() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{generate_synthetic, sort_edges, text, SyntheticSpec};
    use crate::model::TransferGraph;
    use proptest::prelude::*;

    fn t(s: u32) -> Time {
        Time::from_secs(s).unwrap()
    }

    const ONE_LEG: &str = "\
tprn-text 1
stop a - -
stop b - -
route a b
trip T1 00:01:40 00:01:40 00:03:20 00:03:20
";

    #[test]
    fn one_leg_network() {
        let tt = text::parse(ONE_LEG).unwrap();
        let r = query(&tt, &Query::new(StopId(0), StopId(1), t(50))).unwrap();
        assert_eq!(r.entries.len(), 1);
        let e = &r.entries[0];
        assert_eq!((e.num_trips, e.arrival), (1, t(200)));
        assert_eq!(e.journey.legs, vec![Leg::Trip { trip: TripId(0), board: 0, alight: 1 }]);
        assert!(!r.truncated);
    }

    #[test]
    fn source_equals_target() {
        let tt = text::parse(ONE_LEG).unwrap();
        let r = query(&tt, &Query::new(StopId(0), StopId(0), t(50))).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert_eq!((r.entries[0].num_trips, r.entries[0].arrival), (0, t(50)));
        assert!(r.entries[0].journey.legs.is_empty());
        assert_eq!(r.entries[0].journey.arrival, t(50));
    }

    #[test]
    fn missed_trip_is_unreachable() {
        let tt = text::parse(ONE_LEG).unwrap();
        let r = query(&tt, &Query::new(StopId(0), StopId(1), t(101))).unwrap();
        assert!(r.entries.is_empty());
        let st = RaptorState::new(&tt, &Query::new(StopId(0), StopId(1), t(101))).unwrap();
        assert_eq!(st.reconstruct(&tt, 0, StopId(1)), Err(RoutingError::NoJourney { target: StopId(1), round: 0 }));
    }

    #[test]
    fn precondition_errors() {
        let unsorted = "tprn-text 1\nstop a - -\nstop b - -\nstop c - -\ntransfer a b 300\ntransfer a c 100\n";
        let tt = text::parse(unsorted).unwrap();
        let q = Query::new(StopId(0), StopId(1), t(0));
        assert_eq!(query(&tt, &q.with_pruning(Pruning::Early)), Err(RoutingError::UnsortedTransferGraph));
        assert!(query(&tt, &q).is_ok());
        assert_eq!(query(&tt, &Query::new(StopId(0), StopId(9), t(0))), Err(RoutingError::UnknownStop(StopId(9))));
        assert_eq!(query(&tt, &q.with_max_rounds(0)), Err(RoutingError::NoRounds));
    }

    /// Two trips joined by a footpath; also a slower direct trip.
    const TRIP_WALK_TRIP: &str = "\
tprn-text 1
stop A - -
stop B - -
stop C - -
stop D - -
route A B
trip T1 08:00:00 08:00:00 08:10:00 08:10:00
route C D
trip T2 08:15:00 08:15:00 08:25:00 08:25:00
route A D
trip T3 08:05:00 08:05:00 09:00:00 09:00:00
transfer B C 240
sorted
";

    #[test]
    fn trip_walk_trip_front() {
        let tt = text::parse(TRIP_WALK_TRIP).unwrap();
        let q = Query::new(StopId(0), StopId(3), Time::from_hms(7, 55, 0).unwrap());
        for pruning in [Pruning::Off, Pruning::Early] {
            let r = query(&tt, &q.with_pruning(pruning)).unwrap();
            let front: Vec<_> = r.entries.iter().map(|e| (e.num_trips, e.arrival)).collect();
            assert_eq!(front, vec![(1, Time::from_hms(9, 0, 0).unwrap()), (2, Time::from_hms(8, 25, 0).unwrap())]);
            let j = &r.entries[1].journey;
            assert_eq!(j.legs.len(), 3);
            assert!(matches!(j.legs[1], Leg::Transfer { duration: Duration(240), .. }));
            assert_eq!(j.replay(&tt).unwrap(), r.entries[1].arrival);
            j.check(&tt).unwrap();
        }
    }

    #[test]
    fn two_walks_in_a_row_are_not_allowed() {
        // A -> B -> C by foot only; no closure edge A -> C.
        let tt =
            text::parse("tprn-text 1\nstop A - -\nstop B - -\nstop C - -\ntransfer A B 60\ntransfer B C 60\n").unwrap();
        let r = query(&tt, &Query::new(StopId(0), StopId(2), t(0))).unwrap();
        assert!(r.entries.is_empty());
        let r = query(&tt, &Query::new(StopId(0), StopId(1), t(0))).unwrap();
        assert_eq!((r.entries[0].num_trips, r.entries[0].arrival), (0, t(60)));
    }

    /// The pruning example: at 13:55 at u, edges of 2, 5 and 9 minutes,
    /// target already reached at 14:00.
    #[test]
    fn pruning_example_stepping() {
        let stops = "tprn-text 1\nstop s - -\nstop u - -\nstop a - -\nstop b - -\nstop c - -\nstop t - -\n";
        let edges = "transfer u c 540\ntransfer u a 120\ntransfer u b 300\n";
        let tt = text::parse(&format!("{stops}{edges}")).unwrap();
        let tt = {
            let g = sort_edges(tt.transfers().clone()).0;
            tt.with_transfers(g).unwrap()
        };
        let q = Query::new(StopId(0), StopId(5), t(0)).with_pruning(Pruning::Early);
        let mut st = RaptorState::new(&tt, &q).unwrap();
        st.relax_transfers(&tt);
        st.set_vehicle_arrival(StopId(1), t(50100));
        st.set_target_bound(t(50400));
        st.relax_transfers(&tt);
        assert_eq!(st.counters, Counters { edges_examined: 1, edges_relaxed: 1, edges_skipped: 0, edges_pruned: 2 });
        assert_eq!(st.best(VertexId(2)), t(50220));
        assert_eq!(st.best(VertexId(3)), Time::INFINITY);

        let mut off = RaptorState::new(&tt, &q.with_pruning(Pruning::Off)).unwrap();
        off.relax_transfers(&tt);
        off.set_vehicle_arrival(StopId(1), t(50100));
        off.set_target_bound(t(50400));
        off.relax_transfers(&tt);
        assert_eq!(off.counters, Counters { edges_examined: 3, edges_relaxed: 1, edges_skipped: 2, edges_pruned: 0 });
    }

    #[test]
    fn unbounded_target_prunes_nothing() {
        let tt = text::parse("tprn-text 1\nstop u - -\nstop a - -\nstop t - -\ntransfer u a 100000\nsorted\n").unwrap();
        let q = Query::new(StopId(0), StopId(2), t(0)).with_pruning(Pruning::Early);
        let mut st = RaptorState::new(&tt, &q).unwrap();
        st.set_vehicle_arrival(StopId(0), Time::from_secs(TIME_NEAR_LIMIT).unwrap());
        st.relax_transfers(&tt);
        assert_eq!(st.counters.edges_pruned, 0);
        assert_eq!(st.counters.edges_examined, 1);
    }

    const TIME_NEAR_LIMIT: u32 = crate::model::TIME_LIMIT - 10;

    fn synthetic(seed: u64, n: usize, d: f64, routes: usize) -> Timetable {
        let spec = SyntheticSpec { stop_count: n, route_count: routes, trips_per_route: 6, target_density: d, seed };
        generate_synthetic(&spec).unwrap()
    }

    #[test]
    fn rounds_are_monotone_and_fronts_are_strict() {
        for seed in 0..20 {
            let tt = synthetic(seed, 25, 0.1, 6);
            for src in 0..5 {
                let q = Query::new(StopId(src), StopId(24 - src), t(6 * 3600));
                let mut st = RaptorState::new(&tt, &q).unwrap();
                st.relax_transfers(&tt);
                while st.round() < q.max_rounds && st.scan_routes(&tt) {
                    st.relax_transfers(&tt);
                }
                for k in 1..=st.round() {
                    for v in 0..tt.vertex_count() {
                        assert!(st.arrival(k, VertexId::from_idx(v)) <= st.arrival(k - 1, VertexId::from_idx(v)));
                    }
                }
                let r = query(&tt, &q).unwrap();
                for w in r.entries.windows(2) {
                    assert!(w[0].num_trips < w[1].num_trips && w[0].arrival > w[1].arrival);
                }
                for e in &r.entries {
                    e.journey.check(&tt).unwrap();
                    assert_eq!(e.journey.num_trips, e.num_trips);
                    assert_eq!(e.journey.arrival, e.arrival);
                }
            }
        }
    }

    /// Steps Off and Early side by side; every transfer phase must leave
    /// identical labels, so no pruned edge could have improved anything.
    fn lockstep(tt: &Timetable, q: Query) {
        let mut off = RaptorState::new(tt, &q.with_pruning(Pruning::Off)).unwrap();
        let mut early = RaptorState::new(tt, &q.with_pruning(Pruning::Early)).unwrap();
        loop {
            // Relaxing everything from Early's state must not change it.
            let mut probe = early.clone();
            probe.query.pruning = Pruning::Off;
            probe.relax_transfers(tt);
            off.relax_transfers(tt);
            early.relax_transfers(tt);
            assert_eq!(off.best, early.best);
            assert_eq!(probe.best, early.best);
            let (a, b) = (
                off.round() < q.max_rounds && off.scan_routes(tt),
                early.round() < q.max_rounds && early.scan_routes(tt),
            );
            assert_eq!(a, b);
            if !a {
                break;
            }
        }
        let (co, ce) = (off.counters, early.counters);
        assert_eq!(ce.edges_examined + ce.edges_pruned, co.edges_examined);
        assert_eq!(co.edges_relaxed, ce.edges_relaxed);
        assert_eq!(co.edges_examined, co.edges_relaxed + co.edges_skipped);
    }

    #[test]
    fn pruned_edges_never_improve_labels() {
        for seed in 0..10 {
            let tt = synthetic(seed, 30, 0.4, 8);
            for src in 0..6u32 {
                lockstep(&tt, Query::new(StopId(src), StopId(29 - src), t(7 * 3600 + 600 * src)));
            }
        }
    }

    #[test]
    fn empty_graph_is_fine() {
        let tt = text::parse(ONE_LEG).unwrap();
        assert_eq!(tt.transfers(), &TransferGraph::empty(2));
        assert!(query(&tt, &Query::new(StopId(0), StopId(1), t(0)).with_pruning(Pruning::Early)).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn early_equals_off(seed in 0u64..1_000_000, n in 20usize..40, d in 0.05f64..0.5, routes in 3usize..10, src in 0usize..20, dst in 0usize..20, dep in 5u32 * 3600..22 * 3600) {
            let tt = synthetic(seed, n, d, routes);
            let q = Query::new(StopId::from_idx(src), StopId::from_idx(dst), t(dep));
            let off = query(&tt, &q).unwrap();
            let early = query(&tt, &q.with_pruning(Pruning::Early)).unwrap();
            prop_assert_eq!(&off.entries, &early.entries);
            prop_assert_eq!(early.counters.edges_examined + early.counters.edges_pruned, off.counters.edges_examined);
        }
    }
}
