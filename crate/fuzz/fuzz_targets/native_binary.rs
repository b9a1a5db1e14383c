#![no_main]
use libfuzzer_sys::fuzz_target;
use transit_prune::ingest::native;

fuzz_target!(|data: &[u8]| {
    if let Ok(tt) = native::decode(data) {
        let bytes = native::encode(&tt);
        let again = native::decode(&bytes).expect("re-encoded network decodes");
        assert_eq!(tt, again);
    }
});
