//! Holds the `acceptance` test target. Run it with
//! `cargo test -p carving-suite --test acceptance`, or add `-- --verbose`
//! to see every passing sub-check.
