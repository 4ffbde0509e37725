//! Acceptance suite for `secleds`; see `tests/acceptance.rs`.
//!
//! The crate has no library API. It exists so that the acceptance run is a
//! separate test target that can be invoked on its own:
//!
//! ```text
//! cargo test --release -p secleds-validation --test acceptance
//! ```
