use std::collections::HashMap;

use super::{Duration, ModelError, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TransferEdge {
    pub target: VertexId,
    pub duration: Duration,
}

/// Directed, weighted transfer graph stored as a flat adjacency array.
///
/// Edges of vertex `v` live in `edges[offsets[v]..offsets[v + 1]]`. The
/// `sorted` flag promises that each of those slices is in non-decreasing
/// duration order, which is what early pruning relies on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferGraph {
    offsets: Vec<usize>,
    edges: Vec<TransferEdge>,
    sorted: bool,
}

impl TransferGraph {
    pub fn empty(vertex_count: usize) -> TransferGraph {
        TransferGraph { offsets: vec![0; vertex_count + 1], edges: Vec::new(), sorted: true }
    }

    /// Builds a graph from an edge list. Self-loops and zero durations are
    /// rejected; parallel edges collapse to their minimum duration, keeping
    /// the position of the first occurrence. The result is marked unsorted
    /// unless it has no edges.
    pub fn from_edges(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (VertexId, VertexId, Duration)>,
    ) -> Result<TransferGraph, ModelError> {
        Self::build(vertex_count, edges, true)
    }

    /// Like [`TransferGraph::from_edges`] but keeps parallel edges.
    pub fn from_edges_keep_parallel(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (VertexId, VertexId, Duration)>,
    ) -> Result<TransferGraph, ModelError> {
        Self::build(vertex_count, edges, false)
    }

    fn build(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (VertexId, VertexId, Duration)>,
        collapse: bool,
    ) -> Result<TransferGraph, ModelError> {
        let mut lists: Vec<Vec<TransferEdge>> = vec![Vec::new(); vertex_count];
        let mut seen: HashMap<(VertexId, VertexId), usize> = HashMap::new();
        for (from, to, duration) in edges {
            check_edge(vertex_count, from, to, duration)?;
            if collapse {
                if let Some(&pos) = seen.get(&(from, to)) {
                    let e = &mut lists[from.idx()][pos];
                    e.duration = e.duration.min(duration);
                    continue;
                }
                seen.insert((from, to), lists[from.idx()].len());
            }
            lists[from.idx()].push(TransferEdge { target: to, duration });
        }
        Ok(Self::from_lists(lists, false))
    }

    /// Assembles a graph from per-vertex adjacency lists in the given order.
    /// `claimed_sorted` is verified by a full scan.
    pub fn from_adjacency(lists: Vec<Vec<TransferEdge>>, claimed_sorted: bool) -> Result<TransferGraph, ModelError> {
        let n = lists.len();
        for (v, list) in lists.iter().enumerate() {
            for e in list {
                check_edge(n, VertexId::from_idx(v), e.target, e.duration)?;
            }
        }
        let graph = Self::from_lists(lists, claimed_sorted);
        if claimed_sorted && !graph.scan_sorted() {
            return Err(ModelError::NotSorted);
        }
        Ok(graph)
    }

    fn from_lists(lists: Vec<Vec<TransferEdge>>, sorted: bool) -> TransferGraph {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let total = lists.iter().map(Vec::len).sum();
        let mut edges = Vec::with_capacity(total);
        offsets.push(0);
        for list in lists {
            edges.extend(list);
            offsets.push(edges.len());
        }
        let sorted = sorted || edges.is_empty();
        TransferGraph { offsets, edges, sorted }
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_sorted(&self) -> bool {
        self.sorted
    }

    #[inline]
    pub fn outgoing(&self, v: VertexId) -> &[TransferEdge] {
        &self.edges[self.offsets[v.idx()]..self.offsets[v.idx() + 1]]
    }

    pub fn duration(&self, from: VertexId, to: VertexId) -> Option<Duration> {
        self.outgoing(from).iter().filter(|e| e.target == to).map(|e| e.duration).min()
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, TransferEdge)> + '_ {
        (0..self.vertex_count()).flat_map(move |v| {
            let v = VertexId::from_idx(v);
            self.outgoing(v).iter().map(move |e| (v, *e))
        })
    }

    /// True when every adjacency list is in non-decreasing duration order,
    /// regardless of the stored flag.
    pub fn scan_sorted(&self) -> bool {
        (0..self.vertex_count())
            .all(|v| self.outgoing(VertexId::from_idx(v)).windows(2).all(|w| w[0].duration <= w[1].duration))
    }

    /// Sorts every adjacency list by (duration, target) and sets the flag.
    pub(crate) fn sort_in_place(&mut self) {
        for v in 0..self.vertex_count() {
            let (lo, hi) = (self.offsets[v], self.offsets[v + 1]);
            self.edges[lo..hi].sort_by_key(|e| (e.duration, e.target));
        }
        self.sorted = true;
    }

    /// Per-vertex adjacency lists, copied out.
    pub fn to_adjacency(&self) -> Vec<Vec<TransferEdge>> {
        (0..self.vertex_count()).map(|v| self.outgoing(VertexId::from_idx(v)).to_vec()).collect()
    }

    /// Returns the same graph with a larger vertex set (new vertices isolated).
    pub fn with_vertex_count(mut self, vertex_count: usize) -> TransferGraph {
        let last = *self.offsets.last().unwrap();
        while self.offsets.len() < vertex_count + 1 {
            self.offsets.push(last);
        }
        self
    }
}

fn check_edge(n: usize, from: VertexId, to: VertexId, duration: Duration) -> Result<(), ModelError> {
    if from.idx() >= n || to.idx() >= n {
        return Err(ModelError::VertexOutOfRange { from, to, vertex_count: n });
    }
    if from == to {
        return Err(ModelError::SelfLoop(from));
    }
    if duration == Duration::ZERO {
        return Err(ModelError::ZeroDuration { from, to });
    }
    Ok(())
}

/// Edge density `|E| / (|V| (|V| - 1))`.
pub fn density(graph: &TransferGraph) -> Result<f64, ModelError> {
    let n = graph.vertex_count();
    if n < 2 {
        return Err(ModelError::InvalidGraph(format!("density needs at least 2 vertices, got {n}")));
    }
    Ok(graph.edge_count() as f64 / (n as f64 * (n as f64 - 1.0)))
}

/// Sum of edge durations along `path`. Uses the shortest parallel edge.
pub fn path_duration(graph: &TransferGraph, path: &[VertexId]) -> Result<Duration, ModelError> {
    let mut total = Duration::ZERO;
    for pair in path.windows(2) {
        let (u, v) = (pair[0], pair[1]);
        if u.idx() >= graph.vertex_count() {
            return Err(ModelError::NotAPath { from: u, to: v });
        }
        let d = graph.duration(u, v).ok_or(ModelError::NotAPath { from: u, to: v })?;
        total = total + d;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    #[test]
    fn density_of_complete_and_sparse_graphs() {
        let complete: Vec<_> =
            (0..5).flat_map(|a| (0..5).filter(move |&b| b != a).map(move |b| (v(a), v(b), Duration(1)))).collect();
        let g = TransferGraph::from_edges(5, complete).unwrap();
        assert_eq!(g.edge_count(), 20);
        assert_eq!(density(&g).unwrap(), 1.0);

        let g = TransferGraph::from_edges(
            4,
            [(v(0), v(1), Duration(1)), (v(1), v(2), Duration(1)), (v(2), v(3), Duration(1))],
        )
        .unwrap();
        assert_eq!(density(&g).unwrap(), 0.25);

        assert_eq!(density(&TransferGraph::empty(7)).unwrap(), 0.0);
        assert!(matches!(density(&TransferGraph::empty(1)), Err(ModelError::InvalidGraph(_))));
    }

    #[test]
    fn density_formula_at_table_scale() {
        // Vertex/edge counts of a 25,125-stop transitive transfer graph.
        let n = 25_125f64;
        let e = 3_212_206f64;
        let d = e / (n * (n - 1.0));
        assert!((d - 5.088_719_751e-3).abs() < 1e-12);
    }

    #[test]
    fn path_duration_sums_edges() {
        let g = TransferGraph::from_edges(3, [(v(0), v(1), Duration(120)), (v(1), v(2), Duration(300))]).unwrap();
        assert_eq!(path_duration(&g, &[v(1)]).unwrap(), Duration(0));
        assert_eq!(path_duration(&g, &[]).unwrap(), Duration(0));
        assert_eq!(path_duration(&g, &[v(0), v(1), v(2)]).unwrap(), Duration(420));
        let err = path_duration(&g, &[v(0), v(2)]).unwrap_err();
        assert_eq!(err, ModelError::NotAPath { from: v(0), to: v(2) });
    }

    #[test]
    fn construction_rejects_loops_and_zero_weights() {
        assert_eq!(TransferGraph::from_edges(2, [(v(1), v(1), Duration(3))]).unwrap_err(), ModelError::SelfLoop(v(1)));
        assert!(matches!(
            TransferGraph::from_edges(2, [(v(0), v(1), Duration(0))]),
            Err(ModelError::ZeroDuration { .. })
        ));
        assert!(matches!(
            TransferGraph::from_edges(2, [(v(0), v(2), Duration(4))]),
            Err(ModelError::VertexOutOfRange { .. })
        ));
    }

    #[test]
    fn parallel_edges_collapse_to_minimum() {
        let g = TransferGraph::from_edges(
            3,
            [(v(0), v(2), Duration(50)), (v(0), v(1), Duration(9)), (v(0), v(2), Duration(20))],
        )
        .unwrap();
        assert_eq!(g.outgoing(v(0)).len(), 2);
        assert_eq!(g.duration(v(0), v(2)), Some(Duration(20)));
        assert_eq!(g.outgoing(v(0))[0].target, v(2));
        let kept = TransferGraph::from_edges_keep_parallel(3, [(v(0), v(2), Duration(50)), (v(0), v(2), Duration(20))])
            .unwrap();
        assert_eq!(kept.edge_count(), 2);
    }

    #[test]
    fn claimed_sorted_is_verified() {
        let lists = vec![
            vec![
                TransferEdge { target: v(1), duration: Duration(5) },
                TransferEdge { target: v(2), duration: Duration(3) },
            ],
            vec![],
            vec![],
        ];
        assert_eq!(TransferGraph::from_adjacency(lists.clone(), true).unwrap_err(), ModelError::NotSorted);
        let g = TransferGraph::from_adjacency(lists, false).unwrap();
        assert!(!g.is_sorted());
        assert!(!g.scan_sorted());
    }

    fn random_graph() -> impl Strategy<Value = (usize, Vec<(u32, u32, u32)>)> {
        (2usize..8).prop_flat_map(|n| {
            let edge = (0..n as u32, 0..n as u32, 1u32..500);
            (Just(n), proptest::collection::vec(edge, 0..30))
        })
    }

    fn build((n, raw): &(usize, Vec<(u32, u32, u32)>)) -> TransferGraph {
        let edges = raw.iter().filter(|(a, b, _)| a != b).map(|&(a, b, d)| (v(a), v(b), Duration(d)));
        TransferGraph::from_edges(*n, edges).unwrap()
    }

    proptest! {
        #[test]
        fn density_is_a_fraction(input in random_graph()) {
            let g = build(&input);
            let d = density(&g).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
        }

        #[test]
        fn path_duration_is_additive(input in random_graph(), walk in proptest::collection::vec(0usize..64, 1..6), split in 0usize..6) {
            let g = build(&input);
            // Random walk along existing edges.
            let mut path = vec![v(0)];
            for step in walk {
                let out = g.outgoing(*path.last().unwrap());
                if out.is_empty() { break; }
                path.push(out[step % out.len()].target);
            }
            let split = split.min(path.len() - 1);
            let whole = path_duration(&g, &path).unwrap();
            let left = path_duration(&g, &path[..=split]).unwrap();
            let right = path_duration(&g, &path[split..]).unwrap();
            prop_assert_eq!(whole, left + right);
            // Second pass: re-sum from the edge list directly.
            let resum: u32 = path.windows(2).map(|w| {
                g.edges().filter(|(f, e)| *f == w[0] && e.target == w[1]).map(|(_, e)| e.duration.0).min().unwrap()
            }).sum();
            prop_assert_eq!(whole.0, resum);
        }
    }
}
