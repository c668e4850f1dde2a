//! Scenario files, the staged end-to-end run, detection reports and the
//! look-ahead sweep.

pub mod pipeline;
pub mod report;
pub mod scenario;
pub mod seeds;
pub mod sweep;

pub use pipeline::{run_pipeline, RunSummary};
pub use report::{report_detection, DetectionReport};
pub use scenario::{factory_layout, LayoutSource, Scenario, SweepSpec};
pub use seeds::derive_seed;
pub use sweep::{stage_sweep, summarize, sweep_lat, SweepRow, SweepSummaryRow};
