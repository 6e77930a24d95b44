#![no_main]

use corner_penalty::harness::Table;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(table) = Table::from_csv_str(text) {
        if let Ok(out) = table.to_csv_string() {
            let again = Table::from_csv_str(&out).expect("own output parses");
            assert_eq!(again.columns, table.columns);
            assert_eq!(again.rows.len(), table.rows.len());
        }
    }
});
