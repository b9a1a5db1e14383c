#![no_main]
use libfuzzer_sys::fuzz_target;
use transit_prune::ingest::text;

fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else { return };
    let Ok(tt) = text::parse(input) else { return };
    // Codes with whitespace can't be written back; that is an error, not a panic.
    if let Ok(out) = text::write(&tt) {
        let back = text::parse(&out).expect("written text parses");
        assert_eq!(text::write(&back).unwrap(), out);
        assert_eq!(back.stop_count(), tt.stop_count());
        assert_eq!(back.transfers().edge_count(), tt.transfers().edge_count());
    }
});
