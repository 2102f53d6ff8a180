//! Command-line front end: verification suites, reports and small queries.

pub mod app;
pub mod commands;
pub mod config;
pub mod report;
pub mod suites;
