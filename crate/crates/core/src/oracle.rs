//! Slow reference answers for checking the routing engines.
//!
//! Both oracles use the same journey model as the engines (trips joined by
//! at most one transfer edge, optionally walking first and last) but share
//! no code with them.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use thiserror::Error;

use crate::mcraptor::McLabel;
use crate::model::{Duration, StopId, Time, Timetable, VertexId};

pub const MAX_ORACLE_STOPS: usize = 50;
pub const MAX_ORACLE_TRIPS: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance too large for the exhaustive oracle: {0}")]
    OracleScale(String),
    #[error("unknown stop {0}")]
    UnknownStop(StopId),
}

/// Node of the time-expanded graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    /// Waiting at a stop, able to board departure `k` of that stop's
    /// chronological departure list or anything later.
    Wait { stop: usize, k: usize },
    /// Seated on `trip` as it leaves position `pos`.
    Dep { trip: usize, pos: usize },
    /// On `trip` as it reaches position `pos`.
    Arr { trip: usize, pos: usize },
}

/// Time-expanded graph: per-stop waiting chains plus trip events.
struct Expanded<'a> {
    tt: &'a Timetable,
    /// For each stop, (departure time, trip, position) sorted by time.
    departures: Vec<Vec<(Time, usize, usize)>>,
}

impl<'a> Expanded<'a> {
    fn new(tt: &'a Timetable) -> Expanded<'a> {
        let mut departures = vec![Vec::new(); tt.stop_count()];
        for (ti, trip) in tt.trips().iter().enumerate() {
            let stops = &tt.route(trip.route).stops;
            for (pos, ev) in trip.events.iter().enumerate().take(stops.len() - 1) {
                departures[stops[pos].idx()].push((ev.departure, ti, pos));
            }
        }
        for d in &mut departures {
            d.sort_unstable();
        }
        Expanded { tt, departures }
    }

    fn time(&self, node: Node) -> Time {
        match node {
            Node::Wait { stop, k } => self.departures[stop][k].0,
            Node::Dep { trip, pos } => self.tt.trips()[trip].events[pos].departure,
            Node::Arr { trip, pos } => self.tt.trips()[trip].events[pos].arrival,
        }
    }

    fn stop_of(&self, trip: usize, pos: usize) -> usize {
        self.tt.route(self.tt.trips()[trip].route).stops[pos].idx()
    }

    /// Waiting node for the first departure at `stop` no earlier than `at`.
    fn wait_from(&self, stop: usize, at: Time) -> Option<Node> {
        if stop >= self.departures.len() {
            return None;
        }
        let k = self.departures[stop].partition_point(|d| d.0 < at);
        (k < self.departures[stop].len()).then_some(Node::Wait { stop, k })
    }

    fn successors(&self, node: Node, out: &mut Vec<Node>) {
        match node {
            Node::Wait { stop, k } => {
                if k + 1 < self.departures[stop].len() {
                    out.push(Node::Wait { stop, k: k + 1 });
                }
                let (_, trip, pos) = self.departures[stop][k];
                out.push(Node::Dep { trip, pos });
            }
            Node::Dep { trip, pos } => out.push(Node::Arr { trip, pos: pos + 1 }),
            Node::Arr { trip, pos } => {
                let len = self.tt.trips()[trip].events.len();
                if pos + 1 < len {
                    out.push(Node::Dep { trip, pos });
                }
                let at = self.time(node);
                let stop = self.stop_of(trip, pos);
                out.extend(self.wait_from(stop, at));
                for e in self.tt.transfers().outgoing(VertexId::from_idx(stop)) {
                    out.extend(self.wait_from(e.target.idx(), at + e.duration));
                }
            }
        }
    }
}

/// Earliest arrival at `target` over all journeys, by Dijkstra on the
/// time-expanded graph. `Time::INFINITY` when unreachable.
pub fn earliest_arrival_oracle(tt: &Timetable, source: StopId, target: StopId, departure: Time) -> Time {
    if source.idx() >= tt.stop_count() || target.idx() >= tt.stop_count() {
        return Time::INFINITY;
    }
    let g = Expanded::new(tt);
    let graph = tt.transfers();
    let walk_to_target = |from: usize| {
        graph.outgoing(VertexId::from_idx(from)).iter().find(|e| e.target == VertexId::from(target)).map(|e| e.duration)
    };

    let mut best = Time::INFINITY;
    if source == target {
        best = departure;
    }
    if let Some(d) = walk_to_target(source.idx()) {
        best = best.min(departure + d);
    }

    let mut heap = BinaryHeap::new();
    let mut seen = BTreeSet::new();
    let mut starts: Vec<Node> = g.wait_from(source.idx(), departure).into_iter().collect();
    for e in graph.outgoing(source.into()) {
        starts.extend(g.wait_from(e.target.idx(), departure + e.duration));
    }
    for n in starts {
        heap.push(Reverse((g.time(n), n)));
    }
    let mut succ = Vec::new();
    while let Some(Reverse((time, node))) = heap.pop() {
        if time >= best || !seen.insert(node) {
            continue;
        }
        if let Node::Arr { trip, pos } = node {
            let stop = g.stop_of(trip, pos);
            if stop == target.idx() {
                best = best.min(time);
            }
            if let Some(d) = walk_to_target(stop) {
                best = best.min(time + d);
            }
        }
        succ.clear();
        g.successors(node, &mut succ);
        for &n in &succ {
            if !seen.contains(&n) {
                heap.push(Reverse((g.time(n), n)));
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug)]
struct State {
    stop: usize,
    arrival: Time,
    walking: Duration,
    can_walk: bool,
}

/// Exact Pareto set over (arrival, walking, trips) among journeys with at
/// most `max_trips` trips, by exhaustive enumeration: every trip that can
/// be boarded, every alighting position, every transfer edge. The only
/// pruning is exact dominance against states already seen at the same
/// stop.
pub fn pareto_oracle(
    tt: &Timetable,
    source: StopId,
    target: StopId,
    departure: Time,
    max_trips: usize,
) -> Result<Vec<McLabel>, OracleError> {
    if tt.stop_count() > MAX_ORACLE_STOPS {
        return Err(OracleError::OracleScale(format!("{} stops, limit {MAX_ORACLE_STOPS}", tt.stop_count())));
    }
    if max_trips > MAX_ORACLE_TRIPS {
        return Err(OracleError::OracleScale(format!("{max_trips} trips, limit {MAX_ORACLE_TRIPS}")));
    }
    for s in [source, target] {
        if s.idx() >= tt.stop_count() {
            return Err(OracleError::UnknownStop(s));
        }
    }

    let n = tt.vertex_count();
    // Seen (arrival, walking, trips) per stop, split by whether the state
    // may still walk. A state that may walk covers one that may not.
    let mut seen_walk: Vec<Vec<McLabel>> = vec![Vec::new(); n];
    let mut seen_ride: Vec<Vec<McLabel>> = vec![Vec::new(); n];
    let mut found: Vec<McLabel> = Vec::new();

    let mut admit = |st: &State, trips: usize, found: &mut Vec<McLabel>| -> bool {
        let label = McLabel { arrival: st.arrival, walking: st.walking, trips };
        if st.stop == target.idx() {
            found.push(label);
            return false;
        }
        let covered = |list: &Vec<McLabel>| {
            list.iter().any(|o| o.arrival <= label.arrival && o.walking <= label.walking && o.trips <= label.trips)
        };
        if covered(&seen_walk[st.stop]) || (!st.can_walk && covered(&seen_ride[st.stop])) {
            return false;
        }
        if st.can_walk {
            seen_walk[st.stop].push(label);
        } else {
            seen_ride[st.stop].push(label);
        }
        true
    };

    let walks = |st: &State| -> Vec<State> {
        tt.transfers()
            .outgoing(VertexId::from_idx(st.stop))
            .iter()
            .map(|e| State {
                stop: e.target.idx(),
                arrival: st.arrival + e.duration,
                walking: st.walking + e.duration,
                can_walk: false,
            })
            .filter(|s| s.arrival.is_finite())
            .collect()
    };

    let start = State { stop: source.idx(), arrival: departure, walking: Duration::ZERO, can_walk: true };
    let mut frontier = Vec::new();
    for st in std::iter::once(start).chain(walks(&start)) {
        if admit(&st, 0, &mut found) {
            frontier.push(st);
        }
    }

    for trips in 1..=max_trips {
        let mut next = Vec::new();
        for st in &frontier {
            if st.stop >= tt.stop_count() {
                continue;
            }
            for &(r, pos) in tt.routes_by_stop(StopId::from_idx(st.stop)) {
                let route = tt.route(r);
                for &trip in &route.trips {
                    let events = &tt.trip(trip).events;
                    if events[pos].departure < st.arrival {
                        continue;
                    }
                    for alight in pos + 1..route.stops.len() {
                        let off = State {
                            stop: route.stops[alight].idx(),
                            arrival: events[alight].arrival,
                            walking: st.walking,
                            can_walk: true,
                        };
                        if admit(&off, trips, &mut found) {
                            next.push(off);
                        }
                        for w in walks(&off) {
                            if admit(&w, trips, &mut found) {
                                next.push(w);
                            }
                        }
                    }
                }
            }
        }
        frontier = next;
    }

    let mut front: Vec<McLabel> = Vec::new();
    found.sort();
    found.dedup();
    for l in &found {
        let dominated =
            found.iter().any(|o| o != l && o.arrival <= l.arrival && o.walking <= l.walking && o.trips <= l.trips);
        if !dominated {
            front.push(*l);
        }
    }
    front.sort_by_key(|l| (l.trips, l.arrival, l.walking));
    Ok(front)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::text;

    fn t(s: u32) -> Time {
        Time::from_secs(s).unwrap()
    }

    const ONE_LEG: &str =
        "tprn-text 1\nstop a - -\nstop b - -\nroute a b\ntrip T1 00:01:40 00:01:40 00:03:20 00:03:20\n";

    #[test]
    fn one_leg() {
        let tt = text::parse(ONE_LEG).unwrap();
        assert_eq!(earliest_arrival_oracle(&tt, StopId(0), StopId(1), t(50)), t(200));
        assert_eq!(earliest_arrival_oracle(&tt, StopId(0), StopId(1), t(101)), Time::INFINITY);
        assert_eq!(earliest_arrival_oracle(&tt, StopId(1), StopId(1), t(7)), t(7));
        let p = pareto_oracle(&tt, StopId(0), StopId(1), t(50), 3).unwrap();
        assert_eq!(p, vec![McLabel { arrival: t(200), walking: Duration(0), trips: 1 }]);
    }

    /// A slow ride and a direct footpath; by hand the walk arrives at
    /// 08:06:40, the ride at 08:20.
    const WALK_WINS: &str = "\
tprn-text 1
stop A - -
stop B - -
stop C - -
stop D - -
route A B D
trip R 08:00:00 08:00:00 08:10:00 08:10:00 08:20:00 08:20:00
route C D
trip Q 08:30:00 08:30:00 08:40:00 08:40:00
transfer A D 400
transfer A C 60
";

    #[test]
    fn walking_beats_riding() {
        let tt = text::parse(WALK_WINS).unwrap();
        let dep = Time::from_hms(8, 0, 0).unwrap();
        assert_eq!(earliest_arrival_oracle(&tt, StopId(0), StopId(3), dep), Time::from_hms(8, 6, 40).unwrap());
        let p = pareto_oracle(&tt, StopId(0), StopId(3), dep, 3).unwrap();
        assert_eq!(
            p,
            vec![
                McLabel { arrival: Time::from_hms(8, 6, 40).unwrap(), walking: Duration(400), trips: 0 },
                McLabel { arrival: Time::from_hms(8, 20, 0).unwrap(), walking: Duration(0), trips: 1 },
            ]
        );
    }

    const TWO_ALTERNATIVES: &str = "\
tprn-text 1
stop S - -
stop X - -
stop Y - -
stop T - -
route S X
trip F 08:00:00 08:00:00 08:05:00 08:05:00
route S Y
trip L 08:00:00 08:00:00 08:20:00 08:20:00
transfer X T 300
transfer Y T 60
sorted
";

    #[test]
    fn two_alternatives_by_hand() {
        let tt = text::parse(TWO_ALTERNATIVES).unwrap();
        let p = pareto_oracle(&tt, StopId(0), StopId(3), Time::from_hms(7, 50, 0).unwrap(), 2).unwrap();
        let got: Vec<_> = p.iter().map(|l| (l.trips, l.arrival.to_string(), l.walking.0)).collect();
        assert_eq!(got, vec![(1, "08:10:00".to_string(), 300), (1, "08:21:00".to_string(), 60)]);
    }

    #[test]
    fn caps_are_enforced() {
        let tt = text::parse(ONE_LEG).unwrap();
        assert!(matches!(pareto_oracle(&tt, StopId(0), StopId(1), t(0), 7), Err(OracleError::OracleScale(_))));
        let stops: String = (0..51).map(|i| format!("stop s{i} - -\n")).collect();
        let big = text::parse(&format!("tprn-text 1\n{stops}")).unwrap();
        assert!(matches!(pareto_oracle(&big, StopId(0), StopId(1), t(0), 2), Err(OracleError::OracleScale(_))));
    }

    #[test]
    fn only_one_walk_between_trips() {
        let tt =
            text::parse("tprn-text 1\nstop A - -\nstop B - -\nstop C - -\ntransfer A B 60\ntransfer B C 60\n").unwrap();
        assert_eq!(earliest_arrival_oracle(&tt, StopId(0), StopId(2), t(0)), Time::INFINITY);
        assert!(pareto_oracle(&tt, StopId(0), StopId(2), t(0), 2).unwrap().is_empty());
    }
}
