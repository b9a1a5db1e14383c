//! Line-oriented text format for small hand-written networks.
//!
//! ```text
//! tprn-text 1
//! # comment
//! stop A 48.1 11.5 Central Station
//! stop B - - Market
//! vertex junction-7
//! route A B
//! trip T1 00:01:40 00:01:40 00:03:20 00:03:20
//! transfer A B 120
//! sorted
//! ```
//!
//! `stop CODE LAT LON [NAME...]` declares a stop (`-` for unknown
//! coordinates). `vertex NAME` declares a non-stop transfer vertex; all
//! stops must come before the first vertex. `route STOP...` opens a route,
//! and each following `trip CODE (ARR DEP)...` adds a trip to it, one
//! arrival/departure pair per route stop. `transfer FROM TO SECONDS` adds
//! an edge; edges keep their file order within each source vertex.
//! `sorted` asserts that every adjacency list is in duration order, which
//! is checked. Trip ids are assigned in file order.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::model::{
    Duration, Route, RouteId, Stop, StopEvent, StopId, Time, Timetable, TransferEdge, TransferGraph, Trip, TripId,
    VertexId,
};

use super::IngestError;

pub const HEADER: &str = "tprn-text 1";
const FILE: &str = "<text>";

fn parse_err(line: usize, message: impl Into<String>) -> IngestError {
    IngestError::Parse { file: FILE.into(), line: line as u64, message: message.into() }
}

pub fn parse(input: &str) -> Result<Timetable, IngestError> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.find(|(_, l)| !l.is_empty() && !l.starts_with('#')) {
        Some((_, HEADER)) => {}
        Some((n, other)) => return Err(parse_err(n, format!("expected header {HEADER:?}, found {other:?}"))),
        None => return Err(parse_err(1, "empty input")),
    }

    let mut stops: Vec<Stop> = Vec::new();
    let mut vertices: Vec<String> = Vec::new();
    let mut names: HashMap<String, VertexId> = HashMap::new();
    let mut routes: Vec<Route> = Vec::new();
    let mut trips: Vec<Trip> = Vec::new();
    let mut trip_codes: HashMap<String, usize> = HashMap::new();
    let mut edges: Vec<(usize, VertexId, VertexId, Duration)> = Vec::new();
    let mut sorted = false;

    for (n, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim_start();
        let lookup = |code: &str| {
            names.get(code).copied().ok_or_else(|| IngestError::UnknownStop {
                file: FILE.into(),
                line: n as u64,
                stop: code.into(),
            })
        };
        match keyword {
            "stop" => {
                if !vertices.is_empty() {
                    return Err(parse_err(n, "stops must be declared before vertices"));
                }
                let mut f = rest.splitn(4, char::is_whitespace);
                let (Some(code), Some(lat), Some(lon)) = (f.next(), f.next(), f.next()) else {
                    return Err(parse_err(n, "expected: stop CODE LAT LON [NAME]"));
                };
                let name = f.next().unwrap_or("").trim().to_owned();
                let coord = match (lat, lon) {
                    ("-", "-") => None,
                    _ => Some((coordinate(n, lat, 90.0)?, coordinate(n, lon, 180.0)?)),
                };
                declare(&mut names, n, code, VertexId::from_idx(stops.len()))?;
                stops.push(Stop { code: code.into(), name, coord });
            }
            "vertex" => {
                let mut f = rest.split_whitespace();
                let (Some(name), None) = (f.next(), f.next()) else {
                    return Err(parse_err(n, "expected: vertex NAME"));
                };
                declare(&mut names, n, name, VertexId::from_idx(stops.len() + vertices.len()))?;
                vertices.push(name.into());
            }
            "route" => {
                let seq = rest
                    .split_whitespace()
                    .map(|code| {
                        let v = lookup(code)?;
                        if v.idx() >= stops.len() {
                            return Err(parse_err(n, format!("{code:?} is a vertex, not a stop")));
                        }
                        Ok(StopId(v.0))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if seq.len() < 2 {
                    return Err(parse_err(n, "a route needs at least 2 stops"));
                }
                routes.push(Route { stops: seq, trips: Vec::new() });
            }
            "trip" => {
                let Some(route) = routes.last_mut() else {
                    return Err(parse_err(n, "trip before any route"));
                };
                let mut f = rest.split_whitespace();
                let code = f.next().ok_or_else(|| parse_err(n, "expected: trip CODE (ARR DEP)..."))?;
                let times = f
                    .map(|t| Time::parse_hms(t).map_err(|e| parse_err(n, e.to_string())))
                    .collect::<Result<Vec<_>, _>>()?;
                if times.len() != 2 * route.stops.len() {
                    return Err(parse_err(
                        n,
                        format!("trip {code} has {} times, route needs {}", times.len(), 2 * route.stops.len()),
                    ));
                }
                if trip_codes.insert(code.into(), n).is_some() {
                    return Err(parse_err(n, format!("trip {code} defined twice")));
                }
                let id = TripId::from_idx(trips.len());
                route.trips.push(id);
                let events = times.chunks(2).map(|p| StopEvent { arrival: p[0], departure: p[1] }).collect();
                trips.push(Trip { code: code.into(), route: RouteId::from_idx(routes.len() - 1), events });
            }
            "transfer" => {
                let f: Vec<&str> = rest.split_whitespace().collect();
                let [from, to, secs] = f[..] else {
                    return Err(parse_err(n, "expected: transfer FROM TO SECONDS"));
                };
                let secs: u32 = secs.parse().map_err(|_| parse_err(n, format!("bad duration {secs:?}")))?;
                edges.push((n, lookup(from)?, lookup(to)?, Duration(secs)));
            }
            "sorted" => {
                if !rest.is_empty() {
                    return Err(parse_err(n, "unexpected text after sorted"));
                }
                sorted = true;
            }
            other => return Err(parse_err(n, format!("unknown keyword {other:?}"))),
        }
    }

    let vertex_count = stops.len() + vertices.len();
    let mut lists = vec![Vec::new(); vertex_count];
    for (n, from, to, duration) in edges {
        if from == to || duration == Duration::ZERO {
            return Err(parse_err(n, "transfers need distinct ends and a positive duration"));
        }
        lists[from.idx()].push(TransferEdge { target: to, duration });
    }
    let graph = TransferGraph::from_adjacency(lists, sorted)?;
    Ok(Timetable::new(stops, routes, trips, graph, vertices)?)
}

fn coordinate(line: usize, text: &str, limit: f64) -> Result<f64, IngestError> {
    match text.parse::<f64>() {
        Ok(v) if v.abs() <= limit => Ok(v),
        _ => Err(parse_err(line, format!("bad coordinate {text:?}"))),
    }
}

fn declare(names: &mut HashMap<String, VertexId>, line: usize, code: &str, id: VertexId) -> Result<(), IngestError> {
    if code.starts_with('#') {
        return Err(parse_err(line, format!("name {code:?} may not start with #")));
    }
    if names.insert(code.into(), id).is_some() {
        return Err(parse_err(line, format!("{code:?} declared twice")));
    }
    Ok(())
}

/// Renders a timetable in the text format. Trips are written route by
/// route, so a timetable whose trip ids are not grouped that way comes
/// back renumbered.
///
/// Fails if a code or name cannot be represented (whitespace in codes,
/// line breaks or surrounding spaces in names).
pub fn write(tt: &Timetable) -> Result<String, IngestError> {
    let bad = |what: String| Err(IngestError::Config(format!("cannot write as text: {what}")));
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    for s in tt.stops() {
        if !plain_code(&s.code) {
            return bad(format!("stop code {:?}", s.code));
        }
        if s.name.contains(['\n', '\r']) || s.name.trim() != s.name {
            return bad(format!("stop name {:?}", s.name));
        }
        let (lat, lon) = match s.coord {
            Some((lat, lon)) if lat.is_finite() && lon.is_finite() => (lat.to_string(), lon.to_string()),
            Some(_) => return bad(format!("coordinates of {:?}", s.code)),
            None => ("-".into(), "-".into()),
        };
        let line = format!("stop {} {lat} {lon} {}", s.code, s.name);
        writeln!(out, "{}", line.trim_end()).unwrap();
    }
    for v in tt.extra_vertices() {
        if !plain_code(v) {
            return bad(format!("vertex name {v:?}"));
        }
        writeln!(out, "vertex {v}").unwrap();
    }
    for r in tt.routes() {
        let codes: Vec<&str> = r.stops.iter().map(|&s| tt.stop(s).code.as_str()).collect();
        writeln!(out, "route {}", codes.join(" ")).unwrap();
        for &t in &r.trips {
            let trip = tt.trip(t);
            if !plain_code(&trip.code) {
                return bad(format!("trip code {:?}", trip.code));
            }
            write!(out, "trip {}", trip.code).unwrap();
            for e in &trip.events {
                write!(out, " {} {}", e.arrival, e.departure).unwrap();
            }
            out.push('\n');
        }
    }
    for (u, e) in tt.transfers().edges() {
        writeln!(out, "transfer {} {} {}", tt.vertex_name(u), tt.vertex_name(e.target), e.duration.secs()).unwrap();
    }
    if tt.transfers().is_sorted() {
        out.push_str("sorted\n");
    }
    Ok(out)
}

fn plain_code(code: &str) -> bool {
    !code.is_empty() && !code.starts_with('#') && !code.contains(char::is_whitespace)
}
