//! Multiscale reconstruction: upsampling onto an interleaved grid, two-step
//! edge-pattern matching, staged refinement and micro-pore padding.
//!
//! # Randomness
//!
//! Every random draw comes from a ChaCha8 generator seeded with
//! [`ReconstructionConfig::seed`]. Edge reconstruction draws from stream 0,
//! micro-pore padding from stream 1, so the two phases never perturb each
//! other. Within edge reconstruction, blocks are visited in raster order and
//! each block draws at most twice: once if several skeleton classes tie, then
//! once if several edge fills tie. A tie among `k` minimisers draws one
//! `gen_range(0..k)`. Padding draws three `gen_range` values (x, y, z anchor)
//! per placement attempt.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::Connectivity;

mod grid;
mod matching;
mod padding;
mod stage;

pub use grid::{block_origins, phi_upsample, PseudoHRGrid, VoxelState};
pub use matching::{
    fill_score, match_skeleton, nearest_classes, select_edge_fill, BlockContext, FillChoice,
    SkeletonMatch, TieBreaker,
};
pub use padding::{pad_micropores, pad_micropores_with, PaddingReport, Placement};
pub use stage::{
    reconstruct_multistage, reconstruct_multistage_with, reconstruct_stage, reconstruct_stage_with,
    Reconstruction, StageReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Lowest class / fill index among the minimisers.
    First,
    /// Uniform choice among the minimisers.
    #[default]
    SeededRandom,
}

impl std::str::FromStr for TieBreak {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "first" => Ok(TieBreak::First),
            "seeded-random" => Ok(TieBreak::SeededRandom),
            other => Err(format!(
                "tie break must be first or seeded-random, got {other:?}"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructionConfig {
    pub seed: u64,
    pub tie_break: TieBreak,
    /// Dilation applied to existing pores (and placed elements) before padding.
    pub dilation_radius: usize,
    /// Placement attempts per element copy before it is skipped.
    pub max_placement_attempts: usize,
    /// Use the native-scale dictionary at every stage.
    pub single_epd_baseline: bool,
    pub connectivity: Connectivity,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        ReconstructionConfig {
            seed: 0,
            tie_break: TieBreak::SeededRandom,
            dilation_radius: 1,
            max_placement_attempts: 1000,
            single_epd_baseline: false,
            connectivity: Connectivity::TwentySix,
        }
    }
}

impl ReconstructionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_placement_attempts < 1 {
            return Err(Error::InvalidInput(
                "max_placement_attempts must be ≥ 1".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) const EDGE_STREAM: u64 = 0;
pub(crate) const PADDING_STREAM: u64 = 1;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_validation() {
        let cfg = ReconstructionConfig::default();
        assert_eq!(cfg.tie_break, TieBreak::SeededRandom);
        assert_eq!(cfg.dilation_radius, 1);
        assert!(cfg.validate().is_ok());
        let bad = ReconstructionConfig {
            max_placement_attempts: 0,
            ..cfg
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn config_serde() {
        let cfg: ReconstructionConfig =
            serde_json::from_str(r#"{"tie_break":"first","connectivity":6}"#).unwrap();
        assert_eq!(cfg.tie_break, TieBreak::First);
        assert_eq!(cfg.connectivity, Connectivity::Six);
        assert_eq!(cfg.max_placement_attempts, 1000);
        assert!(serde_json::from_str::<ReconstructionConfig>(r#"{"connectivity":8}"#).is_err());
    }
}
