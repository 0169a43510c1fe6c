#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(x) = linf_fixpoint::io::parse_search_space(text) {
            let again = linf_fixpoint::io::parse_search_space(&linf_fixpoint::io::search_space_json(&x)).unwrap();
            assert_eq!(again, x);
        }
    }
});
