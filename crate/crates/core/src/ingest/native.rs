//! Binary network container.
//!
//! ```text
//! magic    "TPRN"
//! version  u32
//! section* tag [u8; 4], length u64, payload[length]
//! ```
//!
//! All integers are little-endian; strings are a u32 byte length followed
//! by UTF-8. Sections appear in the order below and end with `END `.
//! Readers skip sections with unknown tags.
//!
//! | tag    | payload |
//! |--------|---------|
//! | `STOP` | u32 n; n x (string code, string name, u8 has_coord, [f64 lat, f64 lon]) |
//! | `VERT` | u32 n; n x string name of each non-stop transfer vertex |
//! | `ROUT` | u32 n; n x (u32 k, k x u32 stop, u32 m, m x u32 trip) |
//! | `TRIP` | u32 n; n x (string code, u32 route, u32 k, k x (u32 arrival, u32 departure)) |
//! | `XFER` | u8 sorted; u32 vertex_count; u64 e; e x (u32 from, u32 to, u32 seconds) in adjacency order |
//! | `END ` | empty |
//!
//! Decoding rebuilds the timetable through the validating constructors,
//! so a file that decodes is always a well-formed timetable.

use crate::model::{
    Duration, Route, RouteId, Stop, StopEvent, StopId, Time, Timetable, TransferEdge, TransferGraph, Trip, TripId,
    VertexId,
};

use super::IngestError;

pub const MAGIC: &[u8; 4] = b"TPRN";
pub const VERSION: u32 = 1;

pub fn encode(tt: &Timetable) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());

    let mut w = Writer::default();
    w.u32(tt.stops().len() as u32);
    for s in tt.stops() {
        w.str(&s.code);
        w.str(&s.name);
        match s.coord {
            Some((lat, lon)) => {
                w.u8(1);
                w.f64(lat);
                w.f64(lon);
            }
            None => w.u8(0),
        }
    }
    section(&mut out, b"STOP", w);

    let mut w = Writer::default();
    w.u32(tt.extra_vertices().len() as u32);
    for name in tt.extra_vertices() {
        w.str(name);
    }
    section(&mut out, b"VERT", w);

    let mut w = Writer::default();
    w.u32(tt.routes().len() as u32);
    for r in tt.routes() {
        w.u32(r.stops.len() as u32);
        r.stops.iter().for_each(|s| w.u32(s.0));
        w.u32(r.trips.len() as u32);
        r.trips.iter().for_each(|t| w.u32(t.0));
    }
    section(&mut out, b"ROUT", w);

    let mut w = Writer::default();
    w.u32(tt.trips().len() as u32);
    for t in tt.trips() {
        w.str(&t.code);
        w.u32(t.route.0);
        w.u32(t.events.len() as u32);
        for e in &t.events {
            w.u32(e.arrival.secs());
            w.u32(e.departure.secs());
        }
    }
    section(&mut out, b"TRIP", w);

    let g = tt.transfers();
    let mut w = Writer::default();
    w.u8(u8::from(g.is_sorted()));
    w.u32(g.vertex_count() as u32);
    w.u64(g.edge_count() as u64);
    for (u, e) in g.edges() {
        w.u32(u.0);
        w.u32(e.target.0);
        w.u32(e.duration.0);
    }
    section(&mut out, b"XFER", w);
    section(&mut out, b"END ", Writer::default());
    out
}

fn section(out: &mut Vec<u8>, tag: &[u8; 4], body: Writer) {
    out.extend_from_slice(tag);
    out.extend_from_slice(&(body.0.len() as u64).to_le_bytes());
    out.extend_from_slice(&body.0);
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.0.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
    /// Offset of `data[0]` in the whole file, for error messages.
    base: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, message: impl Into<String>) -> IngestError {
        IngestError::Decode { offset: self.base + self.pos, message: message.into() }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], IngestError> {
        if self.data.len() - self.pos < n {
            return Err(self.err(format!("need {n} bytes, {} left", self.data.len() - self.pos)));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, IngestError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, IngestError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, IngestError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, IngestError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn str(&mut self) -> Result<String, IngestError> {
        let n = self.u32()? as usize;
        let b = self.take(n)?;
        String::from_utf8(b.to_vec()).map_err(|_| self.err("string is not UTF-8"))
    }

    /// Reads an element count and checks that at least `min_size` bytes per
    /// element remain, so hostile counts cannot force huge allocations.
    fn count(&mut self, min_size: usize) -> Result<usize, IngestError> {
        let n = self.u32()? as usize;
        self.check_room(n, min_size)?;
        Ok(n)
    }

    fn check_room(&self, n: usize, min_size: usize) -> Result<(), IngestError> {
        let left = self.data.len() - self.pos;
        if n.checked_mul(min_size).is_none_or(|need| need > left) {
            return Err(self.err(format!("count {n} exceeds remaining {left} bytes")));
        }
        Ok(())
    }

    fn time(&mut self) -> Result<Time, IngestError> {
        let v = self.u32()?;
        Time::from_secs(v).map_err(|e| self.err(e.to_string()))
    }

    fn done(&self) -> Result<(), IngestError> {
        if self.pos != self.data.len() {
            return Err(self.err("trailing bytes in section"));
        }
        Ok(())
    }
}

#[derive(Default)]
struct Parts {
    stops: Option<Vec<Stop>>,
    vertices: Option<Vec<String>>,
    routes: Option<Vec<Route>>,
    trips: Option<Vec<Trip>>,
    graph: Option<TransferGraph>,
}

/// Decodes a binary network. Never panics on malformed input.
pub fn decode(bytes: &[u8]) -> Result<Timetable, IngestError> {
    let mut r = Reader { data: bytes, pos: 0, base: 0 };
    if r.take(4).map_err(|_| r.err("file too short"))? != MAGIC {
        return Err(IngestError::Decode { offset: 0, message: "bad magic, not a TPRN file".into() });
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(r.err(format!("unsupported format version {version}")));
    }

    let mut parts = Parts::default();
    loop {
        let tag: [u8; 4] = r.take(4)?.try_into().unwrap();
        let len = r.u64()?;
        let len = usize::try_from(len).map_err(|_| r.err("section too long"))?;
        let start = r.pos;
        let body = r.take(len)?;
        let mut s = Reader { data: body, pos: 0, base: start };
        match &tag {
            b"STOP" => parts.stops = Some(read_stops(&mut s)?),
            b"VERT" => {
                let n = s.count(4)?;
                parts.vertices = Some((0..n).map(|_| s.str()).collect::<Result<_, _>>()?);
            }
            b"ROUT" => parts.routes = Some(read_routes(&mut s)?),
            b"TRIP" => parts.trips = Some(read_trips(&mut s)?),
            b"XFER" => parts.graph = Some(read_graph(&mut s, bytes.len())?),
            b"END " => {
                if len != 0 {
                    return Err(s.err("END section must be empty"));
                }
                break;
            }
            _ => {
                log::debug!("skipping unknown section {:?}", String::from_utf8_lossy(&tag));
                continue;
            }
        }
        s.done()?;
    }
    if r.pos != bytes.len() {
        return Err(r.err("data after END section"));
    }

    let missing = |what: &str| IngestError::Decode { offset: bytes.len(), message: format!("missing {what} section") };
    let stops = parts.stops.ok_or_else(|| missing("STOP"))?;
    let routes = parts.routes.ok_or_else(|| missing("ROUT"))?;
    let trips = parts.trips.ok_or_else(|| missing("TRIP"))?;
    let graph = parts.graph.ok_or_else(|| missing("XFER"))?;
    let vertices = parts.vertices.unwrap_or_default();
    if graph.vertex_count() != stops.len() + vertices.len() {
        return Err(IngestError::Decode {
            offset: bytes.len(),
            message: format!(
                "transfer graph has {} vertices, expected {} stops + {} others",
                graph.vertex_count(),
                stops.len(),
                vertices.len()
            ),
        });
    }
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = stops.iter().find(|s| !seen.insert(s.code.as_str())) {
        return Err(IngestError::Decode {
            offset: bytes.len(),
            message: format!("duplicate stop code {:?}", dup.code),
        });
    }
    Ok(Timetable::new(stops, routes, trips, graph, vertices)?)
}

fn read_stops(s: &mut Reader<'_>) -> Result<Vec<Stop>, IngestError> {
    let n = s.count(9)?;
    let mut stops = Vec::with_capacity(n);
    for _ in 0..n {
        let code = s.str()?;
        let name = s.str()?;
        let coord = match s.u8()? {
            0 => None,
            1 => Some((s.f64()?, s.f64()?)),
            other => return Err(s.err(format!("bad coordinate flag {other}"))),
        };
        stops.push(Stop { code, name, coord });
    }
    Ok(stops)
}

fn read_routes(s: &mut Reader<'_>) -> Result<Vec<Route>, IngestError> {
    let n = s.count(8)?;
    let mut routes = Vec::with_capacity(n);
    for _ in 0..n {
        let k = s.count(4)?;
        let stops = (0..k).map(|_| s.u32().map(StopId)).collect::<Result<_, _>>()?;
        let m = s.count(4)?;
        let trips = (0..m).map(|_| s.u32().map(TripId)).collect::<Result<_, _>>()?;
        routes.push(Route { stops, trips });
    }
    Ok(routes)
}

fn read_trips(s: &mut Reader<'_>) -> Result<Vec<Trip>, IngestError> {
    let n = s.count(12)?;
    let mut trips = Vec::with_capacity(n);
    for _ in 0..n {
        let code = s.str()?;
        let route = RouteId(s.u32()?);
        let k = s.count(8)?;
        let mut events = Vec::with_capacity(k);
        for _ in 0..k {
            events.push(StopEvent { arrival: s.time()?, departure: s.time()? });
        }
        trips.push(Trip { code, route, events });
    }
    Ok(trips)
}

fn read_graph(s: &mut Reader<'_>, file_len: usize) -> Result<TransferGraph, IngestError> {
    let sorted = match s.u8()? {
        0 => false,
        1 => true,
        other => return Err(s.err(format!("bad sorted flag {other}"))),
    };
    let vertex_count = s.u32()? as usize;
    // Every vertex is a stop or a named vertex, each at least 4 bytes of file.
    if vertex_count > file_len / 4 {
        return Err(s.err(format!("implausible vertex count {vertex_count}")));
    }
    let edges = s.u64()?;
    let edges = usize::try_from(edges).map_err(|_| s.err("edge count too large"))?;
    s.check_room(edges, 12)?;
    let mut lists: Vec<Vec<TransferEdge>> = vec![Vec::new(); vertex_count];
    let mut last_from = 0u32;
    for _ in 0..edges {
        let (from, to, secs) = (s.u32()?, s.u32()?, s.u32()?);
        if from < last_from {
            return Err(s.err("edges not grouped by source vertex"));
        }
        last_from = from;
        let list = lists.get_mut(from as usize).ok_or_else(|| s.err(format!("edge source {from} out of range")))?;
        list.push(TransferEdge { target: VertexId(to), duration: Duration(secs) });
    }
    TransferGraph::from_adjacency(lists, sorted).map_err(|e| s.err(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{generate_synthetic, SyntheticSpec};
    use proptest::prelude::*;

    fn sample(seed: u64) -> Timetable {
        generate_synthetic(&SyntheticSpec {
            stop_count: 12,
            route_count: 3,
            trips_per_route: 4,
            target_density: 0.3,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn header_is_magic_and_version() {
        let b = encode(&sample(1));
        assert_eq!(&b[..4], b"TPRN");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), VERSION);
    }

    #[test]
    fn rejects_bad_magic_version_and_truncation() {
        let b = encode(&sample(1));
        assert!(decode(b"NOPE").is_err());
        let mut v = b.clone();
        v[4] = 9;
        assert!(decode(&v).is_err());
        for cut in [0, 3, 8, 20, b.len() / 2, b.len() - 1] {
            assert!(decode(&b[..cut]).is_err(), "cut at {cut}");
        }
    }

    #[test]
    fn unknown_sections_are_skipped() {
        let b = encode(&sample(2));
        let mut v = b[..8].to_vec();
        v.extend_from_slice(b"XTRA");
        v.extend_from_slice(&3u64.to_le_bytes());
        v.extend_from_slice(b"abc");
        v.extend_from_slice(&b[8..]);
        assert_eq!(decode(&v).unwrap(), sample(2));
    }

    #[test]
    fn false_sorted_claim_is_rejected() {
        let tt = sample(3);
        let lists: Vec<_> = tt
            .transfers()
            .to_adjacency()
            .into_iter()
            .map(|mut l| {
                l.reverse();
                l
            })
            .collect();
        let unsorted = TransferGraph::from_adjacency(lists, false).unwrap();
        assert!(!unsorted.scan_sorted());
        let mut b = encode(&tt.with_transfers(unsorted).unwrap());
        // Flip the sorted flag: first byte of the XFER payload.
        let at = b.windows(4).position(|w| w == b"XFER").unwrap() + 12;
        b[at] = 1;
        assert!(decode(&b).is_err());
    }

    proptest! {
        #[test]
        fn round_trips(seed in 0u64..5000) {
            let tt = sample(seed);
            prop_assert_eq!(decode(&encode(&tt)).unwrap(), tt);
        }

        #[test]
        fn never_panics_on_corruption(seed in 0u64..200, flips in proptest::collection::vec((any::<usize>(), any::<u8>()), 1..8)) {
            let mut b = encode(&sample(seed));
            for (at, byte) in flips {
                let n = b.len();
                b[at % n] = byte;
            }
            let _ = decode(&b);
        }
    }
}
