use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use transit_prune::bench::csv_digest;
use transit_prune::ingest::load_native;
use transit_prune::model::{validate, Leg, TripId, VertexId};
use transit_prune::oracle::pareto_oracle;
use transit_prune::{Duration, Journey, Time, Timetable};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_transit-prune")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_from_gtfs_prints_stats_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.bin"), dir.path().join("b.bin"));
    let feed = fixture("gtfs3");
    for out in [&a, &b] {
        let o = run(&["build", "--gtfs", path_str(&feed), "--out", path_str(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let text = stdout(&o);
        assert!(text.contains("stops            3"), "{text}");
        assert!(text.contains("edge sort time"), "{text}");
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let tt = load_native(&a).unwrap();
    assert!(tt.transfers().is_sorted());
    assert!(validate(&tt).is_empty());
}

#[test]
fn build_rejects_bad_arguments() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.bin");
    let o = run(&["build", "--native", path_str(&fixture("one_leg.txt")), "--threshold", "0", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["build", "--native", "/nonexistent/net.bin", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["build", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn build_reports_data_errors_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let feed = dir.path().join("feed");
    std::fs::create_dir(&feed).unwrap();
    for f in ["stops.txt", "trips.txt"] {
        std::fs::copy(fixture("gtfs3").join(f), feed.join(f)).unwrap();
    }
    std::fs::write(
        feed.join("stop_times.txt"),
        "trip_id,arrival_time,departure_time,stop_id,stop_sequence\nT1,08:00:00,08:00:00,A,1\nT1,08:04:00,08:04:00,Q,2\n",
    )
    .unwrap();
    let o = run(&["build", "--gtfs", path_str(&feed), "--out", path_str(&dir.path().join("x.bin"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("stop_times.txt:3"), "{}", stderr(&o));
}

#[test]
fn query_one_leg_table() {
    let o =
        run(&["query", "--net", path_str(&fixture("one_leg.txt")), "--from", "a", "--to", "b", "--depart", "00:00:50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| l.contains(", arr ")).collect();
    assert_eq!(rows, vec!["1 trip, arr 00:03:20"]);
}

#[test]
fn query_by_stop_name() {
    let o = run(&[
        "query",
        "--net",
        path_str(&fixture("one_leg.txt")),
        "--from",
        "Alpha",
        "--to",
        "Bravo",
        "--depart",
        "00:00:50",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("1 trip, arr 00:03:20"));
}

#[test]
fn query_without_journey_is_not_an_error() {
    let o =
        run(&["query", "--net", path_str(&fixture("one_leg.txt")), "--from", "a", "--to", "b", "--depart", "00:05:00"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("no journey"));
}

#[test]
fn query_unknown_stop_lists_near_matches() {
    let o = run(&[
        "query",
        "--net",
        path_str(&fixture("one_leg.txt")),
        "--from",
        "a",
        "--to",
        "Brav",
        "--depart",
        "00:00:50",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("did you mean") && err.contains("b (Bravo)"), "{err}");
}

#[test]
fn query_rejects_bad_time_and_flags() {
    let net = fixture("one_leg.txt");
    let o = run(&["query", "--net", path_str(&net), "--from", "a", "--to", "b", "--depart", "8am"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["query", "--net", path_str(&net), "--from", "a", "--to", "b", "--depart", "00:00:50", "--fast"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["route", "--net", path_str(&net)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn early_pruning_on_unsorted_network_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("unsorted.txt");
    std::fs::write(&net, "tprn-text 1\nstop a - -\nstop b - -\nstop c - -\nroute a b\ntrip T 08:00:00 08:00:00 08:10:00 08:10:00\ntransfer b c 300\ntransfer b a 60\n").unwrap();
    let args = ["query", "--net", path_str(&net), "--from", "a", "--to", "c", "--depart", "07:00:00"];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sorted"), "{}", stderr(&o));
    let o = run(&[&args[..], &["--pruning", "off"]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("1 trip, arr 08:15:00"));
}

#[test]
fn mc_query_matches_pareto_oracle() {
    let net = fixture("two_alternatives.txt");
    let o = run(&["query", "--net", path_str(&net), "--from", "S", "--to", "T", "--depart", "07:50:00", "--mc"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| l.contains(", arr ")).collect();

    let tt = load_native(&net).unwrap();
    let (s, t) = (tt.stop_by_code("S").unwrap(), tt.stop_by_code("T").unwrap());
    let expected: Vec<String> = pareto_oracle(&tt, s, t, Time::parse_hms("07:50:00").unwrap(), 6)
        .unwrap()
        .iter()
        .map(|l| format!("{} trip, arr {}, walk {}s", l.trips, l.arrival, l.walking.secs()))
        .collect();
    assert_eq!(expected.len(), 2);
    assert_eq!(rows, expected);
}

fn vertex_by_name(tt: &Timetable, name: &str) -> VertexId {
    (0..tt.vertex_count()).map(VertexId::from_idx).find(|&v| tt.vertex_name(v) == name).unwrap()
}

/// Rebuilds the legs of a JSON entry against the timetable.
fn legs_from_json(tt: &Timetable, legs: &Value) -> Vec<Leg> {
    legs.as_array()
        .unwrap()
        .iter()
        .map(|l| match l["kind"].as_str().unwrap() {
            "trip" => {
                let code = l["trip"].as_str().unwrap();
                let id = TripId::from_idx(tt.trips().iter().position(|t| t.code == code).unwrap());
                let trip = tt.trip(id);
                let stops = &tt.route(trip.route).stops;
                let at = |key: &str, time: &str, dep: bool| {
                    let when = Time::parse_hms(l[time].as_str().unwrap()).unwrap();
                    (0..stops.len())
                        .find(|&i| {
                            tt.stop(stops[i]).code == l[key].as_str().unwrap()
                                && if dep { trip.events[i].departure == when } else { trip.events[i].arrival == when }
                        })
                        .unwrap()
                };
                Leg::Trip { trip: id, board: at("board", "departure", true), alight: at("alight", "arrival", false) }
            }
            "transfer" => Leg::Transfer {
                from: vertex_by_name(tt, l["from"].as_str().unwrap()),
                to: vertex_by_name(tt, l["to"].as_str().unwrap()),
                duration: Duration(l["duration_secs"].as_u64().unwrap() as u32),
            },
            other => panic!("unexpected leg kind {other}"),
        })
        .collect()
}

#[test]
fn json_output_replays_to_printed_arrivals() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.bin");
    let o = run(&["gen", "--stops", "40", "--density", "0.2", "--seed", "5", "--out", path_str(&net)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let tt = load_native(&net).unwrap();
    let mut checked = 0;
    for (from, to, dep) in [("S0", "S17", "06:00:00"), ("S3", "S31", "12:30:00"), ("S25", "S8", "09:15:00")] {
        for mc in [false, true] {
            let mut args =
                vec!["query", "--net", path_str(&net), "--from", from, "--to", to, "--depart", dep, "--json"];
            if mc {
                args.push("--mc");
            }
            let o = run(&args);
            assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
            let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
            assert!(doc["counters"]["edges_examined"].is_u64());
            for e in doc["entries"].as_array().unwrap() {
                let legs = legs_from_json(&tt, &e["legs"]);
                let j = Journey::from_legs(
                    &tt,
                    tt.stop_by_code(from).unwrap(),
                    tt.stop_by_code(to).unwrap(),
                    Time::parse_hms(dep).unwrap(),
                    legs,
                )
                .unwrap();
                assert_eq!(j.arrival.to_string(), e["arrival"].as_str().unwrap());
                assert_eq!(j.num_trips as u64, e["trips"].as_u64().unwrap());
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn bench_writes_paired_rows_with_equal_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.bin");
    assert_eq!(
        run(&["gen", "--stops", "30", "--density", "0.2", "--seed", "2", "--out", path_str(&net)]).status.code(),
        Some(0)
    );
    let mut digests = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let csv = dir.path().join(name);
        let o = run(&[
            "bench",
            "--net",
            path_str(&net),
            "--queries",
            "10",
            "--seed",
            "1",
            "--pruning",
            "both",
            "--out",
            path_str(&csv),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let text = std::fs::read_to_string(&csv).unwrap();
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
        assert_eq!(rows.len(), 20);
        for pair in rows.chunks(2) {
            assert_eq!((&pair[0][1], &pair[1][1]), ("off", "early"));
            assert_eq!(pair[0][9], pair[1][9]);
        }
        assert!(dir.path().join(format!("{name}.meta.json")).exists());
        digests.push(csv_digest(&text));
    }
    assert_eq!(digests[0], digests[1]);
}

#[test]
fn gen_writes_a_valid_network() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.bin");
    let o = run(&["gen", "--stops", "20", "--density", "0.3", "--seed", "42", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let tt = load_native(&out).unwrap();
    assert!(validate(&tt).is_empty());
    assert_eq!(tt.stop_count(), 20);
    assert!(tt.transfers().is_sorted());

    let o = run(&["gen", "--stops", "20", "--density", "1.5", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_on_generated_network() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.bin");
    assert_eq!(
        run(&["gen", "--stops", "25", "--density", "0.25", "--seed", "9", "--out", path_str(&out)]).status.code(),
        Some(0)
    );
    let o = run(&["verify", "--net", path_str(&out), "--queries", "30"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o), "pruning-identity: PASS\noracle-agreement: PASS\n");
}

#[test]
fn stats_on_fixture() {
    let o = run(&["stats", "--net", path_str(&fixture("two_alternatives.txt"))]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("edges            2") && text.contains("sorted           true"), "{text}");
}

#[test]
fn logging_goes_to_stderr() {
    let o = Command::new(env!("CARGO_BIN_EXE_transit-prune"))
        .args(["stats", "--net", path_str(&fixture("one_leg.txt"))])
        .env("TRANSIT_PRUNE_LOG", "debug")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("loaded"));
    assert!(!stdout(&o).contains("loaded"));
}
