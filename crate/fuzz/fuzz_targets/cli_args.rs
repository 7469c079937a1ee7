#![no_main]

use grushin_core::spec_io::{
    parse_measure_arg, parse_potential_arg, parse_profile_arg, parse_sorted_list, parse_weight_arg, parse_zone_arg,
};
use libfuzzer_sys::fuzz_target;

// first byte picks the parser
fuzz_target!(|data: &[u8]| {
    let Some((&which, rest)) = data.split_first() else {
        return;
    };
    let Ok(s) = std::str::from_utf8(rest) else {
        return;
    };
    match which % 6 {
        0 => {
            if let Ok(arg) = parse_profile_arg(s) {
                let _ = arg.build(1.0, 1.0, None, None);
            }
        }
        1 => {
            let _ = parse_potential_arg(s);
        }
        2 => {
            let _ = parse_measure_arg(s);
        }
        3 => {
            let _ = parse_weight_arg(s);
        }
        4 => {
            if let Ok(zone) = parse_zone_arg(s) {
                assert!(zone.windows(2).all(|w| w[0].hi <= w[1].lo));
                assert!(zone.iter().all(|i| i.lo < i.hi));
            }
        }
        _ => {
            if let Ok(list) = parse_sorted_list(s) {
                assert!(list.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
});
