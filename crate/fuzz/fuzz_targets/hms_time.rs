#![no_main]
use libfuzzer_sys::fuzz_target;
use transit_prune::Time;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(t) = Time::parse_hms(s) {
        assert!(t.is_finite());
        assert_eq!(Time::parse_hms(&t.to_string()), Ok(t));
    }
});
