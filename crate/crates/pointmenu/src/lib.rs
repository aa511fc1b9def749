//! Std companion of `pointmenu-core`: frame sources, PPM files, the player
//! command channel, configuration, the frame loop, WebSocket broadcast and
//! the benchmark behind `pointmenu bench`.

pub mod bench;
pub mod config;
pub mod control;
pub mod mock;
pub mod pipeline;
pub mod ppm;
pub mod queue;
pub mod server;
pub mod snapshot;
pub mod source;

pub use config::{ConfigError, PipelineConfig, TuningPatch};
pub use pipeline::{run_pipeline, PipelineError, RunSummary, Sinks};
pub use pointmenu_core as core;
