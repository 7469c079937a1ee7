#![no_main]

use grushin_core::spec_io::{parse_table_csv, write_table_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(table) = parse_table_csv(data) {
        let (lo, hi) = table.range();
        assert!(lo < hi);
        assert!(table.eval(0.5 * (lo + hi)).is_finite());
        let again = parse_table_csv(&write_table_csv(&table)).expect("written table must parse");
        assert_eq!(again, table);
    }
});
