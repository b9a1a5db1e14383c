use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use rayon::prelude::*;

use crate::model::{Duration, Stop, TransferEdge, TransferGraph, VertexId};

const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Great-circle distance in meters between two (lat, lon) points in degrees.
pub fn haversine_m(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat1, lon1) = (a.0.to_radians(), a.1.to_radians());
    let (lat2, lon2) = (b.0.to_radians(), b.1.to_radians());
    let h = ((lat2 - lat1) / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * ((lon2 - lon1) / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Walking time rounded up to whole seconds, at least one second.
pub(crate) fn walk_secs(meters: f64, speed: f64) -> Duration {
    let secs = (meters / speed).ceil();
    Duration((secs as u32).max(1))
}

/// Symmetric straight-line footpaths between every pair of stops closer
/// than `radius_m`.
///
/// Stops without coordinates are skipped; callers that need every stop
/// covered check coordinates first.
pub fn footpaths(stops: &[Stop], radius_m: f64, speed_mps: f64) -> Vec<(VertexId, VertexId, Duration)> {
    let located: Vec<(usize, (f64, f64))> =
        stops.iter().enumerate().filter_map(|(i, s)| s.coord.map(|c| (i, c))).collect();
    let mut out = Vec::new();
    for (k, &(i, ci)) in located.iter().enumerate() {
        for &(j, cj) in &located[k + 1..] {
            let d = haversine_m(ci, cj);
            if d <= radius_m {
                let w = walk_secs(d, speed_mps);
                out.push((VertexId::from_idx(i), VertexId::from_idx(j), w));
                out.push((VertexId::from_idx(j), VertexId::from_idx(i), w));
            }
        }
    }
    out
}

/// Bounded transitive closure: an edge (u, v) for every pair whose
/// shortest-path duration is at most `threshold`, weighted by that
/// duration. One bounded Dijkstra per vertex, run in parallel; each
/// adjacency list comes out ordered by target id.
pub fn transitive_closure(graph: &TransferGraph, threshold: Duration) -> TransferGraph {
    let n = graph.vertex_count();
    let lists: Vec<Vec<TransferEdge>> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![u32::MAX; n], Vec::new()),
            |(dist, touched), source| bounded_dijkstra(graph, VertexId::from_idx(source), threshold, dist, touched),
        )
        .collect();
    TransferGraph::from_adjacency(lists, false).expect("closure of a valid graph is valid")
}

fn bounded_dijkstra(
    graph: &TransferGraph,
    source: VertexId,
    threshold: Duration,
    dist: &mut [u32],
    touched: &mut Vec<usize>,
) -> Vec<TransferEdge> {
    let mut heap = BinaryHeap::new();
    dist[source.idx()] = 0;
    touched.push(source.idx());
    heap.push(Reverse((0u32, source.0)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[v as usize] {
            continue;
        }
        for e in graph.outgoing(VertexId(v)) {
            let nd = d.saturating_add(e.duration.0);
            if nd <= threshold.0 && nd < dist[e.target.idx()] {
                if dist[e.target.idx()] == u32::MAX {
                    touched.push(e.target.idx());
                }
                dist[e.target.idx()] = nd;
                heap.push(Reverse((nd, e.target.0)));
            }
        }
    }
    touched.sort_unstable();
    let out = touched
        .iter()
        .filter(|&&v| v != source.idx())
        .map(|&v| TransferEdge { target: VertexId::from_idx(v), duration: Duration(dist[v]) })
        .collect();
    for &v in touched.iter() {
        dist[v] = u32::MAX;
    }
    touched.clear();
    out
}

/// Sorts each adjacency list by non-decreasing duration (ties by target
/// id) and marks the graph sorted. Returns the wall time spent sorting.
pub fn sort_edges(graph: TransferGraph) -> (TransferGraph, std::time::Duration) {
    let mut graph = graph;
    let start = Instant::now();
    graph.sort_in_place();
    (graph, start.elapsed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    fn edge(t: u32, d: u32) -> TransferEdge {
        TransferEdge { target: v(t), duration: Duration(d) }
    }

    #[test]
    fn closure_adds_short_indirect_edges_only() {
        let chain = TransferGraph::from_edges(3, [(v(0), v(1), Duration(60)), (v(1), v(2), Duration(60))]).unwrap();
        let c = transitive_closure(&chain, Duration(120));
        assert_eq!(c.duration(v(0), v(2)), Some(Duration(120)));
        let c = transitive_closure(&chain, Duration(100));
        assert_eq!(c.duration(v(0), v(2)), None);
        assert_eq!(c.duration(v(0), v(1)), Some(Duration(60)));
    }

    /// All-pairs shortest paths by Floyd-Warshall, the independent reference.
    fn floyd(g: &TransferGraph) -> Vec<Vec<u64>> {
        let n = g.vertex_count();
        let mut d = vec![vec![u64::MAX; n]; n];
        for (u, e) in g.edges() {
            d[u.idx()][e.target.idx()] = d[u.idx()][e.target.idx()].min(u64::from(e.duration.0));
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] != u64::MAX && d[k][j] != u64::MAX {
                        d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                    }
                }
            }
        }
        d
    }

    fn random_graph(seed: u64, n: usize, m: usize, max_w: u32) -> TransferGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges: Vec<_> = (0..m)
            .filter_map(|_| {
                let a = rng.random_range(0..n as u32);
                let b = rng.random_range(0..n as u32);
                (a != b).then(|| (v(a), v(b), Duration(rng.random_range(1..=max_w))))
            })
            .collect();
        TransferGraph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn closure_matches_all_pairs_brute_force() {
        for seed in 0..5 {
            let g = random_graph(seed, 30, 80, 200);
            let c = transitive_closure(&g, Duration(300));
            let d = floyd(&g);
            let mut expected = 0;
            for i in 0..30 {
                for j in 0..30 {
                    let want = (i != j && d[i][j] <= 300).then(|| Duration(d[i][j] as u32));
                    assert_eq!(c.duration(v(i as u32), v(j as u32)), want, "pair {i}->{j}");
                    expected += usize::from(want.is_some());
                }
            }
            assert_eq!(c.edge_count(), expected);
        }
    }

    #[test]
    fn sort_edges_orders_by_duration_then_target() {
        // a=1, b=2, c=3 out of u=0.
        let g = TransferGraph::from_adjacency(
            vec![vec![edge(3, 540), edge(1, 120), edge(2, 300)], vec![], vec![], vec![]],
            false,
        )
        .unwrap();
        let (s, _) = sort_edges(g);
        assert!(s.is_sorted());
        assert_eq!(s.outgoing(v(0)), &[edge(1, 120), edge(2, 300), edge(3, 540)]);
        let again = sort_edges(s.clone()).0;
        assert_eq!(again, s);

        let ties =
            TransferGraph::from_adjacency(vec![vec![edge(2, 100), edge(1, 100)], vec![], vec![]], false).unwrap();
        assert_eq!(sort_edges(ties).0.outgoing(v(0)), &[edge(1, 100), edge(2, 100)]);
    }

    #[test]
    fn footpaths_follow_distance_over_speed() {
        // 150 m apart along a meridian.
        let dlat = 150.0 / (EARTH_RADIUS_M * std::f64::consts::PI / 180.0);
        let stops = vec![
            Stop { code: "A".into(), name: "A".into(), coord: Some((48.0, 11.0)) },
            Stop { code: "B".into(), name: "B".into(), coord: Some((48.0 + dlat, 11.0)) },
            Stop { code: "C".into(), name: "C".into(), coord: Some((49.0, 11.0)) },
        ];
        assert!((haversine_m(stops[0].coord.unwrap(), stops[1].coord.unwrap()) - 150.0).abs() < 1e-6);
        let fp = footpaths(&stops, 500.0, 1.25);
        assert_eq!(fp, vec![(v(0), v(1), Duration(120)), (v(1), v(0), Duration(120))]);
    }

    proptest! {
        #[test]
        fn sort_is_a_stable_permutation_and_idempotent(seed in 0u64..10_000, n in 2usize..12, m in 0usize..60) {
            let g = random_graph(seed, n, m, 20);
            let (s, _) = sort_edges(g.clone());
            prop_assert!(s.scan_sorted());
            for u in 0..n {
                let mut before = g.outgoing(v(u as u32)).to_vec();
                let after = s.outgoing(v(u as u32)).to_vec();
                before.sort_by_key(|e| (e.duration, e.target));
                prop_assert_eq!(&before, &after);
            }
            prop_assert_eq!(sort_edges(s.clone()).0, s);
        }

        #[test]
        fn closure_is_idempotent(seed in 0u64..10_000, n in 2usize..20, m in 0usize..60, thr in 1u32..400) {
            let g = random_graph(seed, n, m, 150);
            let once = transitive_closure(&g, Duration(thr));
            let twice = transitive_closure(&once, Duration(thr));
            prop_assert_eq!(once, twice);
        }
    }
}
