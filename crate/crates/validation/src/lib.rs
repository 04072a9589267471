//! Holds the acceptance suite in `tests/acceptance.rs`. Run it with
//! `cargo test -p qkcount-validation --test acceptance`.
