//! Run configuration files, initial-condition generators, snapshot output
//! and the thread-count setting.

mod config;
mod initial;
mod snapshot;
mod threads;

pub use config::{parse_config, serialize_config, ConfigError, OutputFormat, ParseIssue, RunConfig};
pub use initial::{InitialCondition, InitialKind};
pub use snapshot::{
    read_raw_snapshot, write_csv_snapshot, write_raw_snapshot, write_snapshot, Diagnostics, DiagnosticsWriter, RawSnapshot,
    RAW_MAGIC, RAW_VERSION,
};
pub use threads::{thread_count_from_env, with_threads, THREADS_ENV};
