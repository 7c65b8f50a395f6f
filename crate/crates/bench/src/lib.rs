//! Benchmark harness for the `bfeq` engine: synthetic generators, the four
//! update strategies, snapshots and CSV/JSON reports.

pub mod compare;
pub mod gen;
pub mod report;
pub mod snapshot;
pub mod strategy;

pub use compare::{agree, compare, verify, Outcome};
pub use gen::{GenSpec, Generated};
pub use report::{write_csv, CsvRow, CSV_HEADER};
pub use strategy::{materialise, run, Dataset, MaterialiseStats, Mode, Store, Strategy};
