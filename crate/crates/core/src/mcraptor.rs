//! Three-criteria search: arrival time, number of trips, and total
//! transfer (walking) duration.
//!
//! Labels live in an arena with parent links. Each round keeps, per
//! vertex, a bag of labels that arrived by vehicle (transfers may start
//! from these) and a bag of labels that arrived on foot (these may only
//! board). A candidate is discarded when a label already known at the same
//! vertex, or any label at the target, weakly dominates it.
//!
//! Early pruning is per starting label: walking from a label along sorted
//! edges only increases arrival and walking, so once one candidate is
//! dominated by the target bag, so are all later ones.

use serde::{Deserialize, Serialize};

use crate::model::{Duration, Journey, Leg, RouteId, StopId, Time, Timetable, TripId, VertexId};
use crate::raptor::{check_query, Counters, Pruning, Query, RoutingError};

/// The three criteria of a label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct McLabel {
    pub arrival: Time,
    pub walking: Duration,
    pub trips: usize,
}

/// Weak dominance: `a` is no worse than `b` in every criterion.
pub fn dominates(a: &McLabel, b: &McLabel) -> bool {
    a.arrival <= b.arrival && a.walking <= b.walking && a.trips <= b.trips
}

/// True iff no label of `bag` dominates another one.
pub fn is_antichain(bag: &[McLabel]) -> bool {
    bag.iter().enumerate().all(|(i, a)| bag.iter().enumerate().all(|(j, b)| i == j || !dominates(a, b)))
}

pub type LabelId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Parent {
    Source,
    Ride { from: LabelId, trip: TripId, board: usize, alight: usize },
    Transfer { from: LabelId, duration: Duration },
}

#[derive(Clone, Copy, Debug)]
struct Node {
    label: McLabel,
    at: VertexId,
    parent: Parent,
}

#[derive(Clone, Copy, Debug)]
struct RouteLabel {
    trip_index: usize,
    walking: Duration,
    from: LabelId,
    board: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McEntry {
    pub trips: usize,
    pub arrival: Time,
    pub walking: Duration,
    pub journey: Journey,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McResult {
    /// Pareto set at the target, ordered by (trips, arrival, walking).
    pub entries: Vec<McEntry>,
    pub counters: Counters,
    pub truncated: bool,
    pub rounds: usize,
}

impl McResult {
    pub fn labels(&self) -> Vec<McLabel> {
        self.entries.iter().map(|e| McLabel { arrival: e.arrival, walking: e.walking, trips: e.trips }).collect()
    }
}

#[derive(Clone, Debug)]
pub struct McState {
    query: Query,
    round: usize,
    nodes: Vec<Node>,
    /// Vehicle labels per vertex over all rounds so far.
    vehicle_archive: Vec<Vec<LabelId>>,
    walk_archive: Vec<Vec<LabelId>>,
    /// Labels created in the current round.
    new_vehicle: Vec<Vec<LabelId>>,
    new_walk: Vec<Vec<LabelId>>,
    /// Labels created in the previous round, the boarding candidates.
    prev_vehicle: Vec<Vec<LabelId>>,
    prev_walk: Vec<Vec<LabelId>>,
    touched: Vec<VertexId>,
    prev_touched: Vec<VertexId>,
    touched_flag: Vec<bool>,
    vehicle_marked: Vec<StopId>,
    vehicle_flag: Vec<bool>,
    target_bag: Vec<LabelId>,
    route_start: Vec<usize>,
    audit: bool,
    audit_failures: u64,
    pub counters: Counters,
}

impl McState {
    pub fn new(tt: &Timetable, q: &Query) -> Result<McState, RoutingError> {
        check_query(tt, q)?;
        let n = tt.vertex_count();
        let mut st = McState {
            query: *q,
            round: 0,
            nodes: Vec::new(),
            vehicle_archive: vec![Vec::new(); n],
            walk_archive: vec![Vec::new(); n],
            new_vehicle: vec![Vec::new(); n],
            new_walk: vec![Vec::new(); n],
            prev_vehicle: vec![Vec::new(); n],
            prev_walk: vec![Vec::new(); n],
            touched: Vec::new(),
            prev_touched: Vec::new(),
            touched_flag: vec![false; n],
            vehicle_marked: Vec::new(),
            vehicle_flag: vec![false; n],
            target_bag: Vec::new(),
            route_start: vec![usize::MAX; tt.routes().len()],
            audit: false,
            audit_failures: 0,
            counters: Counters::default(),
        };
        let label = McLabel { arrival: q.departure, walking: Duration::ZERO, trips: 0 };
        st.insert_vehicle(q.source, label, Parent::Source);
        Ok(st)
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// When enabled, every pruning decision re-checks that all the skipped
    /// candidates are dominated by the target bag and counts violations.
    pub fn set_audit(&mut self, on: bool) {
        self.audit = on;
    }

    pub fn audit_failures(&self) -> u64 {
        self.audit_failures
    }

    pub fn target_bag(&self) -> Vec<McLabel> {
        self.target_bag.iter().map(|&id| self.nodes[id].label).collect()
    }

    /// Labels at `v` that arrived by vehicle, over all rounds so far.
    pub fn vehicle_bag(&self, v: VertexId) -> Vec<McLabel> {
        self.vehicle_archive[v.idx()].iter().map(|&id| self.nodes[id].label).collect()
    }

    /// Labels at `v` that arrived on foot, over all rounds so far.
    pub fn walk_bag(&self, v: VertexId) -> Vec<McLabel> {
        self.walk_archive[v.idx()].iter().map(|&id| self.nodes[id].label).collect()
    }

    pub fn has_marked(&self) -> bool {
        !self.touched.is_empty()
    }

    /// Plants a vehicle label at `stop` in the current round. Returns
    /// whether it survived dominance checks.
    pub fn seed_vehicle_label(&mut self, stop: StopId, arrival: Time, walking: Duration) -> bool {
        let label = McLabel { arrival, walking, trips: self.round };
        self.insert_vehicle(stop, label, Parent::Source)
    }

    /// Plants a label in the target bag in the current round.
    pub fn seed_target_label(&mut self, arrival: Time, walking: Duration) -> bool {
        let label = McLabel { arrival, walking, trips: self.round };
        self.insert_target(label, Parent::Source)
    }

    fn push(&mut self, label: McLabel, at: VertexId, parent: Parent) -> LabelId {
        self.nodes.push(Node { label, at, parent });
        self.nodes.len() - 1
    }

    fn dominated_by(&self, ids: &[LabelId], c: &McLabel) -> bool {
        ids.iter().any(|&id| dominates(&self.nodes[id].label, c))
    }

    fn dominated_by_target(&self, c: &McLabel) -> bool {
        self.dominated_by(&self.target_bag, c)
    }

    fn insert_target(&mut self, c: McLabel, parent: Parent) -> bool {
        if self.dominated_by_target(&c) {
            return false;
        }
        let nodes = &self.nodes;
        self.target_bag.retain(|&id| !dominates(&c, &nodes[id].label));
        let id = self.push(c, self.query.target.into(), parent);
        self.target_bag.push(id);
        true
    }

    fn touch(&mut self, v: VertexId) {
        if !self.touched_flag[v.idx()] {
            self.touched_flag[v.idx()] = true;
            self.touched.push(v);
        }
    }

    fn insert_vehicle(&mut self, stop: StopId, c: McLabel, parent: Parent) -> bool {
        if stop == self.query.target {
            return self.insert_target(c, parent);
        }
        let s = stop.idx();
        if self.dominated_by_target(&c) || self.dominated_by(&self.vehicle_archive[s], &c) {
            return false;
        }
        let nodes = &self.nodes;
        let k = self.round;
        self.vehicle_archive[s].retain(|&id| nodes[id].label.trips != k || !dominates(&c, &nodes[id].label));
        self.new_vehicle[s].retain(|&id| !dominates(&c, &nodes[id].label));
        let id = self.push(c, stop.into(), parent);
        self.vehicle_archive[s].push(id);
        self.new_vehicle[s].push(id);
        self.touch(stop.into());
        if !self.vehicle_flag[s] {
            self.vehicle_flag[s] = true;
            self.vehicle_marked.push(stop);
        }
        true
    }

    fn insert_walk(&mut self, v: VertexId, c: McLabel, parent: Parent) -> bool {
        if v == VertexId::from(self.query.target) {
            return self.insert_target(c, parent);
        }
        let i = v.idx();
        if self.dominated_by_target(&c)
            || self.dominated_by(&self.vehicle_archive[i], &c)
            || self.dominated_by(&self.walk_archive[i], &c)
        {
            return false;
        }
        let nodes = &self.nodes;
        let k = self.round;
        self.walk_archive[i].retain(|&id| nodes[id].label.trips != k || !dominates(&c, &nodes[id].label));
        self.new_walk[i].retain(|&id| !dominates(&c, &nodes[id].label));
        let id = self.push(c, v, parent);
        self.walk_archive[i].push(id);
        self.new_walk[i].push(id);
        self.touch(v);
        true
    }

    /// Transfer phase of the current round: walks from every vehicle label
    /// created in this round, stops in ascending id order, labels in
    /// insertion order, edges in stored order.
    pub fn relax_transfers(&mut self, tt: &Timetable) {
        let mut sources = std::mem::take(&mut self.vehicle_marked);
        sources.sort_unstable();
        let early = self.query.pruning == Pruning::Early;
        for s in sources {
            self.vehicle_flag[s.idx()] = false;
            let labels = self.new_vehicle[s.idx()].clone();
            let edges = tt.transfers().outgoing(s.into());
            for from in labels {
                let base = self.nodes[from].label;
                for (i, e) in edges.iter().enumerate() {
                    let c = McLabel {
                        arrival: base.arrival + e.duration,
                        walking: base.walking + e.duration,
                        trips: base.trips,
                    };
                    if early && self.dominated_by_target(&c) {
                        self.counters.edges_pruned += (edges.len() - i) as u64;
                        if self.audit {
                            self.audit_rest(&base, &edges[i..]);
                        }
                        break;
                    }
                    self.counters.edges_examined += 1;
                    if c.arrival.is_finite()
                        && self.insert_walk(e.target, c, Parent::Transfer { from, duration: e.duration })
                    {
                        self.counters.edges_relaxed += 1;
                    } else {
                        self.counters.edges_skipped += 1;
                    }
                }
            }
        }
    }

    fn audit_rest(&mut self, base: &McLabel, rest: &[crate::model::TransferEdge]) {
        for e in rest {
            let c =
                McLabel { arrival: base.arrival + e.duration, walking: base.walking + e.duration, trips: base.trips };
            if !self.dominated_by_target(&c) {
                self.audit_failures += 1;
            }
        }
    }

    /// Opens the next round and scans the routes through every vertex that
    /// gained a label in the previous round. Returns `false` when none did.
    pub fn scan_routes(&mut self, tt: &Timetable) -> bool {
        if self.touched.is_empty() {
            return false;
        }
        for v in self.prev_touched.drain(..) {
            self.prev_vehicle[v.idx()].clear();
            self.prev_walk[v.idx()].clear();
        }
        std::mem::swap(&mut self.prev_vehicle, &mut self.new_vehicle);
        std::mem::swap(&mut self.prev_walk, &mut self.new_walk);
        std::mem::swap(&mut self.prev_touched, &mut self.touched);
        for v in &self.prev_touched {
            self.touched_flag[v.idx()] = false;
        }
        // Vehicle labels of the previous round were already relaxed.
        for s in self.vehicle_marked.drain(..) {
            self.vehicle_flag[s.idx()] = false;
        }
        self.round += 1;
        let k = self.round;

        let mut routes: Vec<RouteId> = Vec::new();
        for &v in &self.prev_touched {
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

        let mut bag: Vec<RouteLabel> = Vec::new();
        for r in routes {
            let start = std::mem::replace(&mut self.route_start[r.idx()], usize::MAX);
            let route = tt.route(r);
            bag.clear();
            for (p, &stop) in route.stops.iter().enumerate().skip(start) {
                for rl in bag.clone() {
                    if rl.board < p {
                        let trip = route.trips[rl.trip_index];
                        let c = McLabel { arrival: tt.trip(trip).events[p].arrival, walking: rl.walking, trips: k };
                        let parent = Parent::Ride { from: rl.from, trip, board: rl.board, alight: p };
                        self.insert_vehicle(stop, c, parent);
                    }
                }
                if p + 1 == route.stops.len() {
                    break;
                }
                let s = stop.idx();
                let boarding = self.prev_vehicle[s].iter().chain(&self.prev_walk[s]);
                for &from in boarding {
                    let l = self.nodes[from].label;
                    let ti = route.trips.partition_point(|&t| tt.trip(t).events[p].departure < l.arrival);
                    if ti == route.trips.len() {
                        continue;
                    }
                    let cand = RouteLabel { trip_index: ti, walking: l.walking, from, board: p };
                    let dom = |a: &RouteLabel, b: &RouteLabel| a.trip_index <= b.trip_index && a.walking <= b.walking;
                    if bag.iter().any(|x| dom(x, &cand)) {
                        continue;
                    }
                    bag.retain(|x| !dom(&cand, x));
                    bag.push(cand);
                }
            }
        }
        true
    }

    fn journey(&self, tt: &Timetable, id: LabelId) -> Journey {
        let mut legs = Vec::new();
        let mut cur = id;
        loop {
            let node = &self.nodes[cur];
            match node.parent {
                Parent::Source => break,
                Parent::Ride { from, trip, board, alight } => {
                    legs.push(Leg::Trip { trip, board, alight });
                    cur = from;
                }
                Parent::Transfer { from, duration } => {
                    legs.push(Leg::Transfer { from: self.nodes[from].at, to: node.at, duration });
                    cur = from;
                }
            }
        }
        legs.reverse();
        let q = &self.query;
        Journey::from_legs(tt, q.source, q.target, q.departure, legs).expect("label chain replays")
    }

    /// The current target bag with reconstructed journeys.
    pub fn result(&self, tt: &Timetable) -> McResult {
        let mut entries: Vec<McEntry> = self
            .target_bag
            .iter()
            .map(|&id| {
                let l = self.nodes[id].label;
                McEntry { trips: l.trips, arrival: l.arrival, walking: l.walking, journey: self.journey(tt, id) }
            })
            .collect();
        entries.sort_by_key(|e| (e.trips, e.arrival, e.walking));
        McResult { entries, counters: self.counters, truncated: self.has_marked(), rounds: self.round }
    }
}

/// Same as [`McState::relax_transfers`], as a free function.
pub fn mc_relax_transfers(state: &mut McState, tt: &Timetable) {
    state.relax_transfers(tt);
}

/// Full Pareto set over (arrival, trips, walking) with at most
/// `q.max_rounds` trips.
pub fn mc_query(tt: &Timetable, q: &Query) -> Result<McResult, RoutingError> {
    let mut st = McState::new(tt, q)?;
    st.relax_transfers(tt);
    while st.round() < q.max_rounds && st.scan_routes(tt) {
        st.relax_transfers(tt);
    }
    Ok(st.result(tt))
}
