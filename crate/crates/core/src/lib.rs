//! Multiscale reconstruction of binary porous-media volumes.
//!
//! A large-field-of-view, low-resolution volume is refined stage by stage
//! with edge-pattern dictionaries learned from a small, high-resolution
//! volume of the same material at several scales; micro-pores too small to
//! survive at low resolution are then padded in from a micro-pore
//! dictionary. The [`metrics`] module compares the result with references.
//!
//! Volumes are binary, `0` = rock and `1` = pore, stored x-fastest with an
//! isotropic voxel size in µm.

pub mod dictionary;
pub mod edt;
pub mod error;
pub mod io;
pub mod label;
pub mod metrics;
pub mod morphology;
pub mod plan;
pub mod reconstruct;
pub mod resample;
pub mod threshold;
pub mod volume;

pub use error::{Error, Result};
pub use plan::{plan, plan_for_volumes, ScalePlan, StagePlan};
pub use volume::{
    BinaryVolume, BitDepth, Connectivity, Dims, GrayVolume, LabelField, Volume, PORE, ROCK,
};
