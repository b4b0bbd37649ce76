//! Harness around udg-core: point-set I/O, seeded instance generation,
//! solver drivers with oracle cross-checks, and the benchmark ladder.

pub mod bench;
pub mod gen;
pub mod io;
pub mod report;
pub mod run;

pub use gen::{gen_points, Dist};
pub use report::RunReport;
pub use run::{run_rsp, run_select, Algo, CliError};
