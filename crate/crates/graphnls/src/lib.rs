//! File formats, the `graphnls` command line and the property suites on top
//! of [`graphnls_core`].

pub mod cli;
pub mod format;
pub mod output;
pub mod suites;
pub mod sweep;
