use std::collections::HashMap;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord};

use crate::model::{Duration, Stop, StopEvent, StopId, Time, Timetable};

use super::{footpaths, IngestConfig, IngestError, TimetableBuilder, TripInput};

/// Raw contents of the recognized GTFS files.
#[derive(Clone, Copy, Debug)]
pub struct GtfsSources<'a> {
    pub stops: &'a [u8],
    pub trips: &'a [u8],
    pub stop_times: &'a [u8],
    pub transfers: Option<&'a [u8]>,
}

/// Loads the GTFS subset from a feed directory.
pub fn load_gtfs(dir: &Path, config: &IngestConfig) -> Result<Timetable, IngestError> {
    config.validate()?;
    let read = |name: &str| -> Result<Option<Vec<u8>>, IngestError> {
        let path = dir.join(name);
        match std::fs::read(&path) {
            Ok(b) => Ok(Some(b)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(IngestError::io(&path, e)),
        }
    };
    let required = |name: &str| read(name)?.ok_or_else(|| IngestError::MissingFile(dir.join(name)));
    let stops = required("stops.txt")?;
    let trips = required("trips.txt")?;
    let stop_times = required("stop_times.txt")?;
    let transfers = read("transfers.txt")?;
    parse_gtfs(
        &GtfsSources { stops: &stops, trips: &trips, stop_times: &stop_times, transfers: transfers.as_deref() },
        config,
    )
}

struct Table<'a> {
    file: &'static str,
    reader: csv::Reader<&'a [u8]>,
    columns: HashMap<String, usize>,
}

impl<'a> Table<'a> {
    fn open(file: &'static str, data: &'a [u8]) -> Result<Table<'a>, IngestError> {
        let mut reader = ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(data);
        let headers = reader.headers().map_err(|e| csv_error(file, &e))?.clone();
        let columns =
            headers.iter().enumerate().map(|(i, h)| (h.trim_start_matches('\u{feff}').to_owned(), i)).collect();
        Ok(Table { file, reader, columns })
    }

    fn column(&self, name: &str) -> Result<usize, IngestError> {
        self.columns.get(name).copied().ok_or_else(|| IngestError::Parse {
            file: self.file.into(),
            line: 1,
            message: format!("missing column {name}"),
        })
    }

    fn optional(&self, name: &str) -> Option<usize> {
        self.columns.get(name).copied()
    }

    /// Iterates records as (line number, record).
    fn rows(&mut self) -> impl Iterator<Item = Result<(u64, StringRecord), IngestError>> + use<'_, 'a> {
        let file = self.file;
        self.reader.records().map(move |r| {
            let rec = r.map_err(|e| csv_error(file, &e))?;
            let line = rec.position().map_or(0, |p| p.line());
            Ok((line, rec))
        })
    }
}

fn csv_error(file: &str, e: &csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line());
    IngestError::Parse { file: file.into(), line, message: e.to_string() }
}

fn field(rec: &StringRecord, col: usize) -> &str {
    rec.get(col).unwrap_or("")
}

/// Parses the GTFS subset from in-memory file contents.
///
/// Trips sharing a stop sequence become one route; overtaking trips get a
/// route of their own. Transfers come from `transfers.txt` when present,
/// otherwise from straight-line footpaths within the configured radius.
pub fn parse_gtfs(src: &GtfsSources<'_>, config: &IngestConfig) -> Result<Timetable, IngestError> {
    config.validate()?;
    let parse_err = |file: &str, line: u64, message: String| IngestError::Parse { file: file.into(), line, message };

    // stops.txt
    let mut t = Table::open("stops.txt", src.stops)?;
    let (c_id, c_name) = (t.column("stop_id")?, t.optional("stop_name"));
    let (c_lat, c_lon) = (t.optional("stop_lat"), t.optional("stop_lon"));
    let mut stops = Vec::new();
    let mut stop_ids: HashMap<String, StopId> = HashMap::new();
    for row in t.rows() {
        let (line, rec) = row?;
        let code = field(&rec, c_id).to_owned();
        if code.is_empty() {
            return Err(parse_err("stops.txt", line, "empty stop_id".into()));
        }
        let coord = match (c_lat.map(|c| field(&rec, c)), c_lon.map(|c| field(&rec, c))) {
            (Some(lat), Some(lon)) if !lat.is_empty() && !lon.is_empty() => {
                let p = |s: &str, what: &str, lim: f64| -> Result<f64, IngestError> {
                    s.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite() && v.abs() <= lim)
                        .ok_or_else(|| parse_err("stops.txt", line, format!("bad {what} {s:?}")))
                };
                Some((p(lat, "stop_lat", 90.0)?, p(lon, "stop_lon", 180.0)?))
            }
            _ => None,
        };
        let name = c_name.map(|c| field(&rec, c)).filter(|n| !n.is_empty()).unwrap_or(&code).to_owned();
        if stop_ids.insert(code.clone(), StopId::from_idx(stops.len())).is_some() {
            return Err(parse_err("stops.txt", line, format!("duplicate stop_id {code:?}")));
        }
        stops.push(Stop { code, name, coord });
    }

    // trips.txt
    let mut t = Table::open("trips.txt", src.trips)?;
    let c_trip = t.column("trip_id")?;
    t.column("route_id")?;
    let mut trip_order: Vec<String> = Vec::new();
    let mut trip_ids: HashMap<String, usize> = HashMap::new();
    for row in t.rows() {
        let (line, rec) = row?;
        let code = field(&rec, c_trip).to_owned();
        if code.is_empty() {
            return Err(parse_err("trips.txt", line, "empty trip_id".into()));
        }
        if trip_ids.insert(code.clone(), trip_order.len()).is_some() {
            return Err(parse_err("trips.txt", line, format!("duplicate trip_id {code:?}")));
        }
        trip_order.push(code);
    }

    // stop_times.txt
    let mut t = Table::open("stop_times.txt", src.stop_times)?;
    let c_trip = t.column("trip_id")?;
    let c_arr = t.column("arrival_time")?;
    let c_dep = t.column("departure_time")?;
    let c_stop = t.column("stop_id")?;
    let c_seq = t.column("stop_sequence")?;
    let mut calls: Vec<Vec<(u32, u64, StopId, StopEvent)>> = vec![Vec::new(); trip_order.len()];
    for row in t.rows() {
        let (line, rec) = row?;
        let trip = field(&rec, c_trip);
        let Some(&ti) = trip_ids.get(trip) else {
            return Err(parse_err("stop_times.txt", line, format!("trip {trip:?} not defined in trips.txt")));
        };
        let stop_code = field(&rec, c_stop);
        let stop = *stop_ids.get(stop_code).ok_or_else(|| IngestError::UnknownStop {
            file: "stop_times.txt".into(),
            line,
            stop: stop_code.into(),
        })?;
        let seq: u32 = field(&rec, c_seq)
            .parse()
            .map_err(|_| parse_err("stop_times.txt", line, format!("bad stop_sequence {:?}", field(&rec, c_seq))))?;
        let time = |s: &str| Time::parse_hms(s).map_err(|e| parse_err("stop_times.txt", line, e.to_string()));
        let (arr, dep) = match (field(&rec, c_arr), field(&rec, c_dep)) {
            ("", "") => return Err(parse_err("stop_times.txt", line, "no arrival or departure time".into())),
            ("", d) => (time(d)?, time(d)?),
            (a, "") => (time(a)?, time(a)?),
            (a, d) => (time(a)?, time(d)?),
        };
        calls[ti].push((seq, line, stop, StopEvent { arrival: arr, departure: dep }));
    }

    let mut builder = TimetableBuilder::new(stops);
    builder.keep_parallel_edges(!config.collapse_parallel_edges);
    for (ti, mut c) in calls.into_iter().enumerate() {
        c.sort_by_key(|x| x.0);
        if let Some(w) = c.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(parse_err(
                "stop_times.txt",
                w[1].1,
                format!("duplicate stop_sequence {} in trip {:?}", w[1].0, trip_order[ti]),
            ));
        }
        if c.len() < 2 {
            log::warn!("trip {:?} has {} stop times; dropped", trip_order[ti], c.len());
            continue;
        }
        builder
            .add_trip(TripInput { code: trip_order[ti].clone(), calls: c.into_iter().map(|x| (x.2, x.3)).collect() });
    }

    match src.transfers {
        Some(data) => {
            let mut t = Table::open("transfers.txt", data)?;
            let c_from = t.column("from_stop_id")?;
            let c_to = t.column("to_stop_id")?;
            let c_min = t.column("min_transfer_time")?;
            for row in t.rows() {
                let (line, rec) = row?;
                let lookup = |col: usize| {
                    let code = field(&rec, col);
                    stop_ids.get(code).copied().ok_or_else(|| IngestError::UnknownStop {
                        file: "transfers.txt".into(),
                        line,
                        stop: code.into(),
                    })
                };
                let (from, to) = (lookup(c_from)?, lookup(c_to)?);
                let raw = field(&rec, c_min);
                if raw.is_empty() {
                    log::debug!("transfers.txt:{line}: no min_transfer_time; skipped");
                    continue;
                }
                let secs: u32 = raw
                    .parse()
                    .map_err(|_| parse_err("transfers.txt", line, format!("bad min_transfer_time {raw:?}")))?;
                if from == to {
                    continue;
                }
                builder.add_transfer(from.into(), to.into(), Duration(secs.max(1)));
            }
        }
        None => {
            if let Some(s) = builder.stops().iter().find(|s| s.coord.is_none()) {
                return Err(IngestError::MissingCoordinates(s.code.clone()));
            }
            for (a, b, d) in footpaths(builder.stops(), config.footpath_radius, config.walking_speed) {
                builder.add_transfer(a, b, d);
            }
        }
    }
    builder.build()
}

/// Writes a timetable as a GTFS feed that [`load_gtfs`] reads back to the
/// same timetable. Non-stop transfer vertices cannot be expressed.
pub fn write_gtfs(tt: &Timetable, dir: &Path) -> Result<(), IngestError> {
    if tt.vertex_count() > tt.stop_count() {
        return Err(IngestError::Config("GTFS cannot express non-stop transfer vertices".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| IngestError::io(dir, e))?;
    let write = |name: &str, header: &[&str], rows: Vec<Vec<String>>| -> Result<(), IngestError> {
        let path = dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| IngestError::io(&path, e.into()))?;
        let io = |e: csv::Error| IngestError::io(&path, e.into());
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(&r).map_err(io)?;
        }
        w.flush().map_err(|e| IngestError::io(&path, e))
    };

    let stops = tt
        .stops()
        .iter()
        .map(|s| {
            let (lat, lon) = s.coord.map_or((String::new(), String::new()), |(a, b)| (a.to_string(), b.to_string()));
            vec![s.code.clone(), s.name.clone(), lat, lon]
        })
        .collect();
    write("stops.txt", &["stop_id", "stop_name", "stop_lat", "stop_lon"], stops)?;

    let trips = tt.trips().iter().map(|t| vec![t.code.clone(), t.route.to_string()]).collect();
    write("trips.txt", &["trip_id", "route_id"], trips)?;

    let mut st = Vec::new();
    for t in tt.trips() {
        for (i, (ev, s)) in t.events.iter().zip(&tt.route(t.route).stops).enumerate() {
            st.push(vec![
                t.code.clone(),
                ev.arrival.to_string(),
                ev.departure.to_string(),
                tt.stop(*s).code.clone(),
                (i + 1).to_string(),
            ]);
        }
    }
    write("stop_times.txt", &["trip_id", "arrival_time", "departure_time", "stop_id", "stop_sequence"], st)?;

    let xfers = tt
        .transfers()
        .edges()
        .map(|(u, e)| vec![tt.vertex_name(u).to_owned(), tt.vertex_name(e.target).to_owned(), e.duration.0.to_string()])
        .collect();
    write("transfers.txt", &["from_stop_id", "to_stop_id", "min_transfer_time"], xfers)?;
    Ok(())
}
