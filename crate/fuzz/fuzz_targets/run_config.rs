#![no_main]

use grushin_core::spec_io::KeyValues;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let Ok(kv) = KeyValues::parse(data) else {
        return;
    };
    let keys: Vec<String> = kv.keys().map(str::to_string).collect();
    assert_eq!(keys.len(), kv.len());
    for key in &keys {
        assert!(kv.get(key).is_some());
        assert!(kv.line_of(key) >= 1);
        let _ = kv.real(key);
        let _ = kv.unsigned(key);
        let _ = kv.reals(key);
    }
});
