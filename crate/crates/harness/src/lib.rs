//! Experiment harness: synthetic sphere packs, simulated HR/LR pairs and
//! the end-to-end pipeline that writes a self-describing run directory.
//!
//! A run directory holds:
//!
//! ```text
//! config.toml            resolved config (no output path)
//! plan.json              scale plan
//! inputs/{hr,lr}.raw     binary inputs with .json sidecars
//! inputs/reference.raw   full-resolution LR region (simulation mode)
//! dicts/epd_level<k>.bin edge-pattern dictionaries
//! dicts/mpd.bin          micro-pore dictionary
//! metrics/{hr,lr,reference}.{json,csv}
//! <branch>/repeat_<i>/   pms_<k>.raw, ms.raw, stages.json, padding.json,
//!                        metrics/{pms,ms}.{json,csv}
//! comparison.{json,csv}  deltas against the reference (HR input in real mode)
//! report.json            run summary
//! timings.json           wall-clock seconds per step
//! manifest.json          status and SHA-256 of every other file
//! ```
//!
//! `<branch>` is `multi`, plus `single` when the baseline is enabled.

pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod simulation;
pub mod sphere_pack;

pub use config::{Mode, PipelineConfig};
pub use error::{HarnessError, HarnessResult};
pub use pipeline::{run_pipeline, RunReport};
pub use simulation::{make_simulation_pair, SimulationPair};
pub use sphere_pack::SpherePack;
