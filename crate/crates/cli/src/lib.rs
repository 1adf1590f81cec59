//! Library surface of the `thetalab` command-line tool.
//!
//! The binary is a thin wrapper over [`commands`]; the pieces live in the
//! library so integration tests can drive the exact code paths that produce
//! the report files.

pub mod commands;
pub mod config;

/// Exit code contract of every subcommand.
pub mod exit {
    /// Bounds verified, no Uncertain verdicts.
    pub const OK: i32 = 0;
    /// A bound was violated or an internal computation failed.
    pub const VIOLATION: i32 = 1;
    /// Bounds hold but Uncertain verdicts were recorded.
    pub const CONDITIONAL: i32 = 2;
    /// Malformed input: flags, files, or out-of-range parameters.
    pub const USAGE: i32 = 64;
}
