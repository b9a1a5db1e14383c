//! Paired benchmarking of pruning off vs early, network statistics, and
//! the density/speedup correlation study.

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::ingest::{generate_synthetic, sort_edges, IngestError, SyntheticSpec};
use crate::mcraptor::mc_query;
use crate::model::{density, StopId, Time, Timetable};
use crate::raptor::{self, Counters, Pruning, Query, RoutingError, DEFAULT_MAX_ROUNDS};

pub const QUERY_DISTRIBUTION: &str = "uniform-over-stops";
pub const DEPARTURE_DISTRIBUTION: &str = "uniform-over-service-span";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("invalid benchmark configuration: {0}")]
    Config(String),
    #[error("correlation undefined: {0}")]
    Correlation(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Raptor,
    McRaptor,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Raptor => "raptor",
            Algorithm::McRaptor => "mcraptor",
        })
    }
}

impl FromStr for Algorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raptor" => Ok(Algorithm::Raptor),
            "mcraptor" => Ok(Algorithm::McRaptor),
            _ => Err(BenchError::Config(format!("unknown algorithm {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PruningMode {
    Off,
    Early,
    Both,
}

impl PruningMode {
    pub fn modes(self) -> &'static [Pruning] {
        match self {
            PruningMode::Off => &[Pruning::Off],
            PruningMode::Early => &[Pruning::Early],
            PruningMode::Both => &[Pruning::Off, Pruning::Early],
        }
    }
}

impl FromStr for PruningMode {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(PruningMode::Off),
            "early" => Ok(PruningMode::Early),
            "both" => Ok(PruningMode::Both),
            _ => Err(BenchError::Config(format!("unknown pruning mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub query_count: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub pruning: PruningMode,
    pub warmup_queries: usize,
    pub max_rounds: usize,
    /// Shard queries across threads. Wall times are then not comparable.
    pub parallel: bool,
    /// CSV destination; the sidecar goes next to it as `<path>.meta.json`.
    pub output: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            query_count: 1000,
            seed: 0,
            algorithms: vec![Algorithm::Raptor],
            pruning: PruningMode::Both,
            warmup_queries: 10,
            max_rounds: DEFAULT_MAX_ROUNDS,
            parallel: false,
            output: None,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.query_count == 0 {
            return Err(BenchError::Config("query_count must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(BenchError::Config("no algorithm selected".into()));
        }
        if self.max_rounds == 0 {
            return Err(BenchError::Config("max_rounds must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub source: StopId,
    pub target: StopId,
    pub departure: Time,
}

/// Seeded random queries: source and target uniform over stops (distinct
/// when there are at least two), departure uniform over the service span.
pub fn generate_queries(tt: &Timetable, count: usize, seed: u64) -> Vec<QuerySpec> {
    let n = tt.stop_count();
    if n == 0 {
        return Vec::new();
    }
    let (lo, hi) = tt.service_span().map_or((0, 0), |(a, b)| (a.secs(), b.secs().max(a.secs())));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let source = rng.random_range(0..n);
            let target = if n > 1 {
                let t = rng.random_range(0..n - 1);
                if t >= source {
                    t + 1
                } else {
                    t
                }
            } else {
                source
            };
            let departure = Time::from_secs(rng.random_range(lo..=hi)).expect("service span is finite");
            QuerySpec { source: StopId::from_idx(source), target: StopId::from_idx(target), departure }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRow {
    pub algorithm: Algorithm,
    pub pruning: Pruning,
    pub source: String,
    pub target: String,
    pub departure: Time,
    pub wall_time_ns: u64,
    pub edges_examined: u64,
    pub edges_relaxed: u64,
    pub edges_pruned: u64,
    pub result_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub stops: usize,
    pub routes: usize,
    pub trips: usize,
    pub stop_events: usize,
    pub vertices: usize,
    pub edges: usize,
    /// `None` for graphs with fewer than two vertices.
    pub density: Option<f64>,
    pub average_degree: f64,
    pub sort_time_ns: u64,
}

/// Table-style statistics. The sort time is measured by sorting a copy of
/// the transfer graph.
pub fn network_stats(tt: &Timetable) -> NetworkStats {
    let g = tt.transfers();
    let (_, elapsed) = sort_edges(g.clone());
    NetworkStats {
        stops: tt.stop_count(),
        routes: tt.routes().len(),
        trips: tt.trips().len(),
        stop_events: tt.stop_event_count(),
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        density: density(g).ok(),
        average_degree: if g.vertex_count() == 0 { 0.0 } else { g.edge_count() as f64 / g.vertex_count() as f64 },
        sort_time_ns: elapsed.as_nanos() as u64,
    }
}

impl fmt::Display for NetworkStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "stops            {}", self.stops)?;
        writeln!(f, "routes           {}", self.routes)?;
        writeln!(f, "trips            {}", self.trips)?;
        writeln!(f, "stop events      {}", self.stop_events)?;
        writeln!(f, "vertices         {}", self.vertices)?;
        writeln!(f, "edges            {}", self.edges)?;
        match self.density {
            Some(d) => writeln!(f, "density          {d:.3e}")?,
            None => writeln!(f, "density          n/a")?,
        }
        writeln!(f, "average degree   {:.2}", self.average_degree)?;
        write!(f, "edge sort time   {:.3} ms", self.sort_time_ns as f64 / 1e6)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub algorithm: Algorithm,
    pub pruning: Pruning,
    pub queries: usize,
    pub mean_wall_ns: f64,
    pub median_wall_ns: f64,
    pub p95_wall_ns: f64,
    pub edges_examined: u64,
    pub edges_relaxed: u64,
    pub edges_pruned: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub stats: NetworkStats,
    pub rows: Vec<QueryRow>,
    pub summaries: Vec<ModeSummary>,
    /// Off/Early pairs compared.
    pub pairs: usize,
    /// Pairs whose result hashes differ. Must be zero.
    pub hash_mismatches: usize,
    /// Pairs violating examined(early) + pruned(early) == examined(off).
    pub counter_mismatches: usize,
}

fn hash_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

struct Outcome {
    counters: Counters,
    hash: String,
    wall_ns: u64,
}

fn run_one(tt: &Timetable, algorithm: Algorithm, q: &Query) -> Result<Outcome, RoutingError> {
    let start = Instant::now();
    let (counters, hash) = match algorithm {
        Algorithm::Raptor => {
            let r = raptor::query(tt, q)?;
            let wall = start.elapsed();
            let body = serde_json::to_vec(&r.entries).expect("entries serialize");
            return Ok(Outcome { counters: r.counters, hash: hash_hex(&body), wall_ns: wall.as_nanos() as u64 });
        }
        Algorithm::McRaptor => {
            let r = mc_query(tt, q)?;
            (r.counters, serde_json::to_vec(&r.entries).expect("entries serialize"))
        }
    };
    let wall = start.elapsed();
    Ok(Outcome { counters, hash: hash_hex(&hash), wall_ns: wall.as_nanos() as u64 })
}

/// Runs every query with every selected algorithm and pruning mode. Off
/// and Early runs of one query are adjacent (ABAB order).
pub fn run_bench(tt: &Timetable, config: &BenchConfig) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let modes = config.pruning.modes();
    if modes.contains(&Pruning::Early) && !tt.transfers().is_sorted() {
        return Err(RoutingError::UnsortedTransferGraph.into());
    }
    let queries = generate_queries(tt, config.query_count, config.seed);
    let warmup = generate_queries(tt, config.warmup_queries, config.seed ^ 0x5741_524d);

    let make = |spec: &QuerySpec, pruning: Pruning| {
        Query::new(spec.source, spec.target, spec.departure).with_max_rounds(config.max_rounds).with_pruning(pruning)
    };
    for spec in &warmup {
        for &a in &config.algorithms {
            for &m in modes {
                run_one(tt, a, &make(spec, m))?;
            }
        }
    }

    let per_query = |spec: &QuerySpec| -> Result<Vec<QueryRow>, RoutingError> {
        let mut rows = Vec::with_capacity(config.algorithms.len() * modes.len());
        for &algorithm in &config.algorithms {
            for &pruning in modes {
                let o = run_one(tt, algorithm, &make(spec, pruning))?;
                rows.push(QueryRow {
                    algorithm,
                    pruning,
                    source: tt.stop(spec.source).code.clone(),
                    target: tt.stop(spec.target).code.clone(),
                    departure: spec.departure,
                    wall_time_ns: o.wall_ns,
                    edges_examined: o.counters.edges_examined,
                    edges_relaxed: o.counters.edges_relaxed,
                    edges_pruned: o.counters.edges_pruned,
                    result_hash: o.hash,
                });
            }
        }
        Ok(rows)
    };
    let grouped: Vec<Vec<QueryRow>> = if config.parallel {
        queries.par_iter().map(per_query).collect::<Result<_, _>>()?
    } else {
        queries.iter().map(per_query).collect::<Result<_, _>>()?
    };

    let (mut pairs, mut hash_mismatches, mut counter_mismatches) = (0, 0, 0);
    for group in &grouped {
        for chunk in group.chunks(modes.len()) {
            if let [off, early] = chunk {
                pairs += 1;
                hash_mismatches += usize::from(off.result_hash != early.result_hash);
                counter_mismatches += usize::from(early.edges_examined + early.edges_pruned != off.edges_examined);
            }
        }
    }
    let rows: Vec<QueryRow> = grouped.into_iter().flatten().collect();

    let mut summaries = Vec::new();
    for &algorithm in &config.algorithms {
        for &pruning in modes {
            let sel: Vec<&QueryRow> =
                rows.iter().filter(|r| r.algorithm == algorithm && r.pruning == pruning).collect();
            let mut times: Vec<u64> = sel.iter().map(|r| r.wall_time_ns).collect();
            times.sort_unstable();
            summaries.push(ModeSummary {
                algorithm,
                pruning,
                queries: sel.len(),
                mean_wall_ns: times.iter().sum::<u64>() as f64 / times.len().max(1) as f64,
                median_wall_ns: percentile(&times, 0.5),
                p95_wall_ns: percentile(&times, 0.95),
                edges_examined: sel.iter().map(|r| r.edges_examined).sum(),
                edges_relaxed: sel.iter().map(|r| r.edges_relaxed).sum(),
                edges_pruned: sel.iter().map(|r| r.edges_pruned).sum(),
            });
        }
    }

    let report = BenchReport {
        config: config.clone(),
        stats: network_stats(tt),
        rows,
        summaries,
        pairs,
        hash_mismatches,
        counter_mismatches,
    };
    if let Some(path) = &config.output {
        report.write(path)?;
    }
    Ok(report)
}

/// Nearest-rank percentile of sorted values.
fn percentile(sorted: &[u64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1] as f64
}

impl BenchReport {
    pub fn summary(&self, algorithm: Algorithm, pruning: Pruning) -> Option<&ModeSummary> {
        self.summaries.iter().find(|s| s.algorithm == algorithm && s.pruning == pruning)
    }

    /// 100 * (1 - mean_early / mean_off) on wall time.
    pub fn wall_speedup_pct(&self, algorithm: Algorithm) -> Option<f64> {
        let off = self.summary(algorithm, Pruning::Off)?;
        let early = self.summary(algorithm, Pruning::Early)?;
        (off.mean_wall_ns > 0.0).then(|| 100.0 * (1.0 - early.mean_wall_ns / off.mean_wall_ns))
    }

    /// 100 * (1 - examined_early / examined_off) on edge counters.
    pub fn counter_speedup_pct(&self, algorithm: Algorithm) -> Option<f64> {
        let off = self.summary(algorithm, Pruning::Off)?;
        let early = self.summary(algorithm, Pruning::Early)?;
        (off.edges_examined > 0).then(|| 100.0 * (1.0 - early.edges_examined as f64 / off.edges_examined as f64))
    }

    /// Aggregate `key,value` pairs. Keys containing `wall` depend on timing.
    pub fn aggregates(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = vec![
            ("queries".into(), self.config.query_count.to_string()),
            ("seed".into(), self.config.seed.to_string()),
            ("pairs".into(), self.pairs.to_string()),
            ("hash_mismatches".into(), self.hash_mismatches.to_string()),
            ("counter_mismatches".into(), self.counter_mismatches.to_string()),
            ("stops".into(), self.stats.stops.to_string()),
            ("routes".into(), self.stats.routes.to_string()),
            ("trips".into(), self.stats.trips.to_string()),
            ("stop_events".into(), self.stats.stop_events.to_string()),
            ("edges".into(), self.stats.edges.to_string()),
            ("density".into(), self.stats.density.map_or("n/a".into(), |d| format!("{d:.6e}"))),
            ("edge_sort_wall_ns".into(), self.stats.sort_time_ns.to_string()),
        ];
        for s in &self.summaries {
            let p = format!("{}_{}", s.algorithm, s.pruning);
            out.push((format!("{p}_mean_wall_ns"), format!("{:.1}", s.mean_wall_ns)));
            out.push((format!("{p}_median_wall_ns"), format!("{:.1}", s.median_wall_ns)));
            out.push((format!("{p}_p95_wall_ns"), format!("{:.1}", s.p95_wall_ns)));
            out.push((format!("{p}_edges_examined"), s.edges_examined.to_string()));
            out.push((format!("{p}_edges_relaxed"), s.edges_relaxed.to_string()));
            out.push((format!("{p}_edges_pruned"), s.edges_pruned.to_string()));
        }
        for &a in &self.config.algorithms {
            if let Some(v) = self.wall_speedup_pct(a) {
                out.push((format!("{a}_wall_speedup_pct"), format!("{v:.3}")));
            }
            if let Some(v) = self.counter_speedup_pct(a) {
                out.push((format!("{a}_counter_speedup_pct"), format!("{v:.3}")));
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "algorithm",
            "pruning",
            "source",
            "target",
            "departure",
            "wall_time_ns",
            "edges_examined",
            "edges_relaxed",
            "edges_pruned",
            "result_hash",
        ])
        .expect("write to memory");
        for r in &self.rows {
            w.write_record([
                r.algorithm.to_string(),
                r.pruning.to_string(),
                r.source.clone(),
                r.target.clone(),
                r.departure.to_string(),
                r.wall_time_ns.to_string(),
                r.edges_examined.to_string(),
                r.edges_relaxed.to_string(),
                r.edges_pruned.to_string(),
                r.result_hash.clone(),
            ])
            .expect("write to memory");
        }
        let mut out = String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is UTF-8");
        for (k, v) in self.aggregates() {
            out.push_str(&format!("# {k},{v}\n"));
        }
        out
    }

    /// Hash of the CSV with timing data removed; equal for runs with the
    /// same network and seeds.
    pub fn digest(&self) -> String {
        csv_digest(&self.to_csv())
    }

    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config,
            "seeds": { "queries": self.config.seed, "warmup": self.config.seed ^ 0x5741_524d },
            "query_distribution": QUERY_DISTRIBUTION,
            "departure_distribution": DEPARTURE_DISTRIBUTION,
            "execution_order": if self.config.parallel { "parallel (wall times not comparable)" } else { "sequential, off/early interleaved per query" },
            "network": self.stats,
            "pairs": self.pairs,
            "hash_mismatches": self.hash_mismatches,
            "counter_mismatches": self.counter_mismatches,
        })
    }

    /// Writes the CSV to `path` and the sidecar to `<path>.meta.json`.
    pub fn write(&self, path: &Path) -> Result<(), BenchError> {
        let io = |p: &Path, e| BenchError::Io { path: p.to_owned(), source: e };
        std::fs::write(path, self.to_csv()).map_err(|e| io(path, e))?;
        let meta = sidecar_path(path);
        let mut f = std::fs::File::create(&meta).map_err(|e| io(&meta, e))?;
        serde_json::to_writer_pretty(&mut f, &self.sidecar()).expect("sidecar serializes");
        f.write_all(b"\n").map_err(|e| io(&meta, e))?;
        Ok(())
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Hash of a report CSV ignoring the wall-time column and timing
/// aggregates.
pub fn csv_digest(csv: &str) -> String {
    let mut h = Sha256::new();
    let mut wall_col = None;
    for (i, line) in csv.lines().enumerate() {
        if let Some(agg) = line.strip_prefix("# ") {
            let key = agg.split(',').next().unwrap_or("");
            if !key.contains("wall") {
                h.update(agg.as_bytes());
                h.update(b"\n");
            }
            continue;
        }
        let mut fields: Vec<&str> = line.split(',').collect();
        if i == 0 {
            wall_col = fields.iter().position(|f| *f == "wall_time_ns");
        } else if let Some(c) = wall_col {
            if c < fields.len() {
                fields[c] = "";
            }
        }
        h.update(fields.join(",").as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Sample Pearson correlation and its two-sided p-value from Student's t
/// with n - 2 degrees of freedom.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<(f64, f64), BenchError> {
    if xs.len() != ys.len() {
        return Err(BenchError::Correlation(format!("lengths differ: {} vs {}", xs.len(), ys.len())));
    }
    let n = xs.len();
    if n < 3 {
        return Err(BenchError::Correlation(format!("need at least 3 points, got {n}")));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(BenchError::Correlation("non-finite value".into()));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(BenchError::Correlation("zero variance".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");
        (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
    };
    Ok((r, p))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyPoint {
    pub spec: SyntheticSpec,
    pub density: f64,
    pub counter_speedup_pct: f64,
    pub wall_speedup_pct: Option<f64>,
    pub edges_examined_off: u64,
    pub edges_examined_early: u64,
    pub hash_mismatches: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub points: Vec<StudyPoint>,
    pub r: f64,
    pub p: f64,
}

impl StudyReport {
    /// Mean counter speedup per target density, ascending by density.
    pub fn mean_by_level(&self) -> Vec<(f64, f64)> {
        let mut levels: Vec<f64> = self.points.iter().map(|p| p.spec.target_density).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        levels
            .into_iter()
            .map(|d| {
                let sel: Vec<f64> =
                    self.points.iter().filter(|p| p.spec.target_density == d).map(|p| p.counter_speedup_pct).collect();
                (d, sel.iter().sum::<f64>() / sel.len() as f64)
            })
            .collect()
    }
}

/// Generates each network, benchmarks it with pruning off and early, and
/// correlates measured density with counter-based speedup. The first
/// configured algorithm is used.
pub fn speedup_density_study(specs: &[SyntheticSpec], config: &BenchConfig) -> Result<StudyReport, BenchError> {
    let mut levels: Vec<f64> = specs.iter().map(|s| s.target_density).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    if levels.len() < 3 {
        return Err(BenchError::Config(format!("need at least 3 density levels, got {}", levels.len())));
    }
    let algorithm = *config.algorithms.first().ok_or_else(|| BenchError::Config("no algorithm selected".into()))?;
    let cfg = BenchConfig { pruning: PruningMode::Both, algorithms: vec![algorithm], output: None, ..config.clone() };
    let mut points = Vec::with_capacity(specs.len());
    for spec in specs {
        let tt = generate_synthetic(spec)?;
        let report = run_bench(&tt, &cfg)?;
        let off = report.summary(algorithm, Pruning::Off).expect("off ran");
        let early = report.summary(algorithm, Pruning::Early).expect("early ran");
        points.push(StudyPoint {
            spec: spec.clone(),
            density: report.stats.density.unwrap_or(0.0),
            counter_speedup_pct: report.counter_speedup_pct(algorithm).unwrap_or(0.0),
            wall_speedup_pct: report.wall_speedup_pct(algorithm),
            edges_examined_off: off.edges_examined,
            edges_examined_early: early.edges_examined,
            hash_mismatches: report.hash_mismatches,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.density).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.counter_speedup_pct).collect();
    let (r, p) = pearson(&xs, &ys)?;
    Ok(StudyReport { points, r, p })
}
