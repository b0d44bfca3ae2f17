//! Search-volume correlation networks, epidemic case curves, and their
//! temporal alignment under Sakoe-Chiba-banded dynamic time warping.
//!
//! The pipeline, module by module:
//!
//! * [`trends`] rebuilds one daily series per keyword from 30-day segments.
//! * [`network`] turns the keyword panel into rolling distance-correlation
//!   graphs and extracts density / clustering series.
//! * [`cases`] derives daily confirmed and active counts from a line list.
//! * [`dtw`] aligns a case curve with a metric series.
//! * [`sweep`] runs the whole parameter lattice and tests each parameter.
//!
//! [`testkit`] holds exhaustive oracles and synthetic generators for tests.

pub mod cases;
pub mod dtw;
pub mod network;
pub mod series;
pub mod stats;
pub mod sweep;
pub mod testkit;
pub mod trends;

pub use dtw::{dtw, BandSpec, DtwError, DtwResult, WarpingPath};
pub use network::{KeywordPanel, MetricKind, ThresholdedGraph};
pub use series::{Date, DateIndexedSeries, SeriesError};
pub use sweep::{CaseType, SweepConfig, SweepResult};
pub use trends::Preprocess;
