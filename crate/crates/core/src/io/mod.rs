//! Files: config, checkpoints, CSV reports and SVG plots.

pub mod checkpoint;
pub mod csv;
pub mod kv;
pub mod svg;
