#![no_main]
use libfuzzer_sys::fuzz_target;
use transit_prune::ingest::{parse_gtfs, GtfsSources, IngestConfig};

// Input is stops.txt, trips.txt, stop_times.txt and optionally
// transfers.txt, separated by NUL bytes.
fuzz_target!(|data: &[u8]| {
    let parts: Vec<&[u8]> = data.splitn(4, |&b| b == 0).collect();
    let [stops, trips, stop_times, rest @ ..] = &parts[..] else { return };
    let src = GtfsSources { stops, trips, stop_times, transfers: rest.first().copied() };
    if let Ok(tt) = parse_gtfs(&src, &IngestConfig::default()) {
        assert!(transit_prune::model::validate(&tt).is_empty());
    }
});
