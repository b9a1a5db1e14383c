use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;

use transit_prune::bench::{self, Algorithm, BenchConfig, PruningMode};
use transit_prune::ingest::{self, generate_synthetic, IngestConfig, SyntheticSpec};
use transit_prune::mcraptor::mc_query;
use transit_prune::model::{validate, Leg};
use transit_prune::oracle::{self, MAX_ORACLE_STOPS, MAX_ORACLE_TRIPS};
use transit_prune::raptor::{self, Counters, RoutingError, DEFAULT_MAX_ROUNDS};
use transit_prune::{Duration, Journey, Pruning, Query, StopId, Time, Timetable};

/// Bad arguments: reported with exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser)]
#[command(name = "transit-prune", version, about = "Transit routing with early pruning of sorted transfer edges")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest a network, close and sort its transfer graph, write a binary network file.
    Build(BuildArgs),
    /// Answer one query.
    Query(QueryArgs),
    /// Run paired benchmark queries and write a CSV.
    Bench(BenchArgs),
    /// Print network statistics.
    Stats(StatsArgs),
    /// Generate a synthetic network.
    Gen(GenArgs),
    /// Cross-check pruning modes and the oracles on a network.
    Verify(VerifyArgs),
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["gtfs", "native"])))]
struct BuildArgs {
    /// GTFS feed directory.
    #[arg(long, value_name = "DIR")]
    gtfs: Option<PathBuf>,
    /// Network file, binary or text.
    #[arg(long, value_name = "FILE")]
    native: Option<PathBuf>,
    /// Closure threshold in seconds.
    #[arg(long, value_name = "SECONDS", default_value_t = 240, value_parser = clap::value_parser!(u32).range(1..))]
    threshold: u32,
    /// Walking speed in meters per second.
    #[arg(long, value_name = "MPS", default_value_t = 1.25)]
    walk_speed: f64,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PruningArg {
    Off,
    Early,
}

impl From<PruningArg> for Pruning {
    fn from(p: PruningArg) -> Pruning {
        match p {
            PruningArg::Off => Pruning::Off,
            PruningArg::Early => Pruning::Early,
        }
    }
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long, value_name = "FILE")]
    net: PathBuf,
    /// Stop code or name.
    #[arg(long, value_name = "STOP")]
    from: String,
    #[arg(long, value_name = "STOP")]
    to: String,
    #[arg(long, value_name = "HH:MM:SS")]
    depart: String,
    /// Three criteria: arrival, trips, walking.
    #[arg(long)]
    mc: bool,
    #[arg(long, value_enum, default_value = "early")]
    pruning: PruningArg,
    #[arg(long)]
    json: bool,
    /// Also print the brute-force reference answer.
    #[arg(long, hide = true)]
    oracle: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchPruningArg {
    Off,
    Early,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Raptor,
    Mcraptor,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_name = "FILE")]
    net: PathBuf,
    #[arg(long, default_value_t = 1000)]
    queries: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "both")]
    pruning: BenchPruningArg,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "raptor")]
    algorithm: Vec<AlgorithmArg>,
    #[arg(long, default_value_t = 10)]
    warmup: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
    max_rounds: usize,
    /// Spread queries over threads. Wall times are then not comparable.
    #[arg(long)]
    parallel: bool,
    /// CSV path; a `.meta.json` sidecar is written next to it. Without it the CSV goes to stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long, value_name = "FILE")]
    net: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    stops: usize,
    /// Target transfer graph density in [0, 1].
    #[arg(long)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    routes: usize,
    #[arg(long, default_value_t = 20)]
    trips_per_route: usize,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_name = "FILE")]
    net: PathBuf,
    #[arg(long, default_value_t = 100)]
    queries: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TRANSIT_PRUNE_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Query(a) => cmd_query(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.downcast_ref::<UsageError>().is_some() { 2 } else { 1 })
        }
    }
}

fn load(path: &Path) -> Result<Timetable> {
    if !path.exists() {
        return Err(usage(format!("{} does not exist", path.display())));
    }
    let tt = ingest::load_native(path).with_context(|| format!("loading {}", path.display()))?;
    info!("loaded {}: {} stops, {} edges", path.display(), tt.stop_count(), tt.transfers().edge_count());
    Ok(tt)
}

fn cmd_build(a: BuildArgs) -> Result<ExitCode> {
    let config = IngestConfig {
        walking_speed: a.walk_speed,
        closure_threshold: Duration(a.threshold),
        ..IngestConfig::default()
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    let tt = match (&a.gtfs, &a.native) {
        (Some(dir), _) => {
            if !dir.is_dir() {
                return Err(usage(format!("{} is not a directory", dir.display())));
            }
            ingest::load_gtfs(dir, &config).with_context(|| format!("reading feed {}", dir.display()))?
        }
        (None, Some(file)) => load(file)?,
        (None, None) => unreachable!("clap requires one input"),
    };
    let closed = ingest::transitive_closure(tt.transfers(), config.closure_threshold);
    info!("closure at {}: {} -> {} edges", config.closure_threshold, tt.transfers().edge_count(), closed.edge_count());
    let (sorted, sort_time) = ingest::sort_edges(closed);
    let tt = tt.with_transfers(sorted)?;
    ingest::save_native(&tt, &a.out)?;

    let mut stats = bench::network_stats(&tt);
    stats.sort_time_ns = sort_time.as_nanos() as u64;
    println!("wrote {}", a.out.display());
    println!("{stats}");
    Ok(ExitCode::SUCCESS)
}

/// Resolves a stop by code, then by exact name; otherwise lists the closest codes and names.
fn resolve_stop(tt: &Timetable, text: &str) -> Result<StopId> {
    if let Some(id) = tt.stop_by_code(text) {
        return Ok(id);
    }
    let by_name: Vec<usize> = (0..tt.stop_count()).filter(|&i| tt.stops()[i].name == text).collect();
    if let [only] = by_name[..] {
        return Ok(StopId::from_idx(only));
    }
    if by_name.len() > 1 {
        let codes: Vec<&str> = by_name.iter().map(|&i| tt.stops()[i].code.as_str()).collect();
        return Err(usage(format!("stop name {text:?} is ambiguous; use a code: {}", codes.join(", "))));
    }
    let mut scored: Vec<(f64, &str, &str)> = tt
        .stops()
        .iter()
        .map(|s| {
            let score = strsim::jaro_winkler(text, &s.code).max(strsim::jaro_winkler(text, &s.name));
            (score, s.code.as_str(), s.name.as_str())
        })
        .filter(|(score, _, _)| *score >= 0.7)
        .collect();
    scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(y.1)));
    scored.truncate(5);
    if scored.is_empty() {
        return Err(usage(format!("unknown stop {text:?}")));
    }
    let list: Vec<String> =
        scored.iter().map(|(_, c, n)| if n.is_empty() { c.to_string() } else { format!("{c} ({n})") }).collect();
    Err(usage(format!("unknown stop {text:?}; did you mean: {}", list.join(", "))))
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum JsonLeg {
    Trip { trip: String, board: String, alight: String, departure: String, arrival: String },
    Transfer { from: String, to: String, duration_secs: u32 },
}

#[derive(Serialize)]
struct JsonEntry {
    trips: usize,
    arrival: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    walking_secs: Option<u32>,
    legs: Vec<JsonLeg>,
}

#[derive(Serialize)]
struct JsonAnswer {
    from: String,
    to: String,
    departure: String,
    criteria: &'static str,
    pruning: Pruning,
    entries: Vec<JsonEntry>,
    counters: Counters,
    truncated: bool,
}

fn json_legs(tt: &Timetable, j: &Journey) -> Vec<JsonLeg> {
    j.legs
        .iter()
        .map(|leg| match *leg {
            Leg::Trip { trip, board, alight } => {
                let t = tt.trip(trip);
                let stops = &tt.route(t.route).stops;
                JsonLeg::Trip {
                    trip: t.code.clone(),
                    board: tt.stop(stops[board]).code.clone(),
                    alight: tt.stop(stops[alight]).code.clone(),
                    departure: t.events[board].departure.to_string(),
                    arrival: t.events[alight].arrival.to_string(),
                }
            }
            Leg::Transfer { from, to, duration } => JsonLeg::Transfer {
                from: tt.vertex_name(from).to_owned(),
                to: tt.vertex_name(to).to_owned(),
                duration_secs: duration.secs(),
            },
        })
        .collect()
}

fn print_legs(legs: &[JsonLeg]) {
    for leg in legs {
        match leg {
            JsonLeg::Trip { trip, board, alight, departure, arrival } => {
                println!("    ride {trip}  {board} {departure} -> {alight} {arrival}")
            }
            JsonLeg::Transfer { from, to, duration_secs } => println!("    walk {from} -> {to}  {duration_secs}s"),
        }
    }
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        "trip"
    } else {
        "trips"
    }
}

fn cmd_query(a: QueryArgs) -> Result<ExitCode> {
    let tt = load(&a.net)?;
    let from = resolve_stop(&tt, &a.from)?;
    let to = resolve_stop(&tt, &a.to)?;
    let departure = Time::parse_hms(&a.depart).map_err(|e| usage(format!("--depart {:?}: {e}", a.depart)))?;
    let pruning = Pruning::from(a.pruning);
    let q = Query::new(from, to, departure).with_pruning(pruning);
    let routing = |e: RoutingError| match e {
        RoutingError::UnsortedTransferGraph => {
            usage(format!("{e}; rebuild the network with `transit-prune build` or pass --pruning off"))
        }
        e => anyhow::Error::new(e),
    };

    let (entries, counters, truncated) = if a.mc {
        let r = mc_query(&tt, &q).map_err(routing)?;
        let entries = r
            .entries
            .iter()
            .map(|e| JsonEntry {
                trips: e.trips,
                arrival: e.arrival.to_string(),
                walking_secs: Some(e.walking.secs()),
                legs: json_legs(&tt, &e.journey),
            })
            .collect::<Vec<_>>();
        (entries, r.counters, r.truncated)
    } else {
        let r = raptor::query(&tt, &q).map_err(routing)?;
        let entries = r
            .entries
            .iter()
            .map(|e| JsonEntry {
                trips: e.num_trips,
                arrival: e.arrival.to_string(),
                walking_secs: None,
                legs: json_legs(&tt, &e.journey),
            })
            .collect::<Vec<_>>();
        (entries, r.counters, r.truncated)
    };
    if truncated {
        warn!("labels were still improving after {} rounds", q.max_rounds);
    }

    if a.json {
        let doc = JsonAnswer {
            from: tt.stop(from).code.clone(),
            to: tt.stop(to).code.clone(),
            departure: departure.to_string(),
            criteria: if a.mc { "arrival,trips,walking" } else { "arrival,trips" },
            pruning,
            entries,
            counters,
            truncated,
        };
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        if entries.is_empty() {
            println!("no journey from {} to {} departing {departure}", tt.stop(from).code, tt.stop(to).code);
        }
        for e in &entries {
            match e.walking_secs {
                Some(w) => println!("{} {}, arr {}, walk {w}s", e.trips, plural(e.trips), e.arrival),
                None => println!("{} {}, arr {}", e.trips, plural(e.trips), e.arrival),
            }
            print_legs(&e.legs);
        }
        println!(
            "edges examined {}, relaxed {}, pruned {}",
            counters.edges_examined, counters.edges_relaxed, counters.edges_pruned
        );
    }

    if a.oracle {
        if a.mc {
            let labels = oracle::pareto_oracle(&tt, from, to, departure, MAX_ORACLE_TRIPS)?;
            for l in labels {
                println!("oracle: {} {}, arr {}, walk {}s", l.trips, plural(l.trips), l.arrival, l.walking.secs());
            }
        } else {
            println!("oracle: earliest arrival {}", oracle::earliest_arrival_oracle(&tt, from, to, departure));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(a: BenchArgs) -> Result<ExitCode> {
    let tt = load(&a.net)?;
    let config = BenchConfig {
        query_count: a.queries,
        seed: a.seed,
        algorithms: a
            .algorithm
            .iter()
            .map(|x| match x {
                AlgorithmArg::Raptor => Algorithm::Raptor,
                AlgorithmArg::Mcraptor => Algorithm::McRaptor,
            })
            .collect(),
        pruning: match a.pruning {
            BenchPruningArg::Off => PruningMode::Off,
            BenchPruningArg::Early => PruningMode::Early,
            BenchPruningArg::Both => PruningMode::Both,
        },
        warmup_queries: a.warmup,
        max_rounds: a.max_rounds,
        parallel: a.parallel,
        output: a.out.clone(),
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    let report = bench::run_bench(&tt, &config).map_err(|e| match e {
        bench::BenchError::Routing(RoutingError::UnsortedTransferGraph) => usage(format!("{e}; use --pruning off")),
        e => e.into(),
    })?;

    match &a.out {
        Some(path) => {
            println!("wrote {} and {}", path.display(), bench::sidecar_path(path).display());
            for (k, v) in report.aggregates() {
                println!("{k} {v}");
            }
        }
        None => print!("{}", report.to_csv()),
    }
    if report.hash_mismatches > 0 || report.counter_mismatches > 0 {
        bail!(
            "{} result mismatches and {} counter mismatches between pruning modes",
            report.hash_mismatches,
            report.counter_mismatches
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_stats(a: StatsArgs) -> Result<ExitCode> {
    let tt = load(&a.net)?;
    println!("sorted           {}", tt.transfers().is_sorted());
    println!("{}", bench::network_stats(&tt));
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(a: GenArgs) -> Result<ExitCode> {
    let spec = SyntheticSpec {
        stop_count: a.stops,
        route_count: a.routes,
        trips_per_route: a.trips_per_route,
        target_density: a.density,
        seed: a.seed,
    };
    spec.validate().map_err(|e| usage(e.to_string()))?;
    let tt = generate_synthetic(&spec).map_err(|e| usage(e.to_string()))?;
    ingest::save_native(&tt, &a.out)?;
    println!("wrote {}", a.out.display());
    println!("{}", bench::network_stats(&tt));
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: VerifyArgs) -> Result<ExitCode> {
    let tt = load(&a.net)?;
    let violations = validate(&tt);
    if !violations.is_empty() {
        bail!("network is invalid: {violations:?}");
    }
    if !tt.transfers().is_sorted() {
        return Err(usage("transfer edges are not sorted; rebuild the network with `transit-prune build`"));
    }
    let queries = bench::generate_queries(&tt, a.queries, a.seed);

    let mut identity = Vec::new();
    for q in &queries {
        let base = Query::new(q.source, q.target, q.departure);
        let off = raptor::query(&tt, &base.with_pruning(Pruning::Off))?;
        let early = raptor::query(&tt, &base.with_pruning(Pruning::Early))?;
        if off.entries != early.entries {
            identity.push(format!("raptor {q:?}"));
        }
        let off = mc_query(&tt, &base.with_pruning(Pruning::Off))?;
        let early = mc_query(&tt, &base.with_pruning(Pruning::Early))?;
        if off.entries != early.entries {
            identity.push(format!("mcraptor {q:?}"));
        }
    }

    // Earliest arrival is checked at any size; the Pareto enumeration only on small networks.
    let pareto = tt.stop_count() <= MAX_ORACLE_STOPS;
    let rounds = 2 * tt.vertex_count() + 2;
    let mut agreement = Vec::new();
    for q in &queries {
        let expected = oracle::earliest_arrival_oracle(&tt, q.source, q.target, q.departure);
        let r = raptor::query(&tt, &Query::new(q.source, q.target, q.departure).with_max_rounds(rounds))?;
        let best = r.entries.iter().map(|e| e.arrival).min().unwrap_or(Time::INFINITY);
        if best != expected {
            agreement.push(format!("raptor {q:?}: {best} vs {expected}"));
        }
        if pareto {
            let expected = oracle::pareto_oracle(&tt, q.source, q.target, q.departure, MAX_ORACLE_TRIPS)?;
            let got =
                mc_query(&tt, &Query::new(q.source, q.target, q.departure).with_max_rounds(MAX_ORACLE_TRIPS))?.labels();
            if got != expected {
                agreement.push(format!("mcraptor {q:?}"));
            }
        }
    }
    if !pareto {
        info!("{} stops is above the Pareto oracle's limit; checked earliest arrival only", tt.stop_count());
    }

    let mut ok = true;
    for (name, failures) in [("pruning-identity", &identity), ("oracle-agreement", &agreement)] {
        if failures.is_empty() {
            println!("{name}: PASS");
        } else {
            ok = false;
            println!("{name}: FAIL ({} of {} queries)", failures.len(), queries.len());
            for f in failures.iter().take(5) {
                println!("    {f}");
            }
        }
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
