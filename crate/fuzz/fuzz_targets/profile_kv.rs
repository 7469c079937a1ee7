#![no_main]

use grushin_core::spec_io::{profile_to_kv, ProfileKv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let Ok(spec) = ProfileKv::parse(data) else {
        return;
    };
    let Ok(profile) = spec.build(None) else {
        return;
    };
    let Ok(text) = profile_to_kv(&profile, spec.delta) else {
        return;
    };
    let again = ProfileKv::parse(&text).expect("serialized profile must parse");
    let rebuilt = again.build(None).expect("serialized profile must build");
    assert_eq!(profile_to_kv(&rebuilt, again.delta).unwrap(), text);
});
