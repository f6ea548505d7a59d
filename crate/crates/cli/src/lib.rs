//! Stream files, replay and reporting for the `dyncluster` command.

pub mod generate;
pub mod report;
pub mod run;
pub mod stream;
