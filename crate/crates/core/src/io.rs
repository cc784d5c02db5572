//! File formats and heavier output artifacts.
//!
//! Everything written here is a deterministic function of its inputs:
//! rows are explicitly ordered, floats print in shortest round-trip
//! form, and no file embeds a timestamp or environment detail, so two
//! runs with the same seed produce byte-identical trees.

pub mod campaign;
pub mod formats;
pub mod heatmap;
pub mod sankey;
