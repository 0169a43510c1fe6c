#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(r) = linf_fixpoint::rat::parse_rat(text) {
            let back = linf_fixpoint::rat::parse_rat(&linf_fixpoint::rat::format_rat(&r)).unwrap();
            assert_eq!(back, r);
        }
    }
});
