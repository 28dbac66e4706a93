//! Pattern dictionaries learned from the high-resolution volume.

pub mod codes;
pub mod epd;
pub mod mpd;

pub use codes::{assemble, extract_fill, extract_skeleton, EdgeFill, SkeletonCode};
pub use epd::{build_epd, build_multi_epd, EdgePatternDictionary};
pub use mpd::{build_mpd, MicroPore, MicroPoreDictionary};
