//! Pipeline configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use msrec_core::metrics::MetricsSettings;
use msrec_core::reconstruct::{ReconstructionConfig, TieBreak};
use msrec_core::threshold::Polarity;
use msrec_core::{Connectivity, Dims};

use crate::error::{HarnessError, HarnessResult};
use crate::sphere_pack::SpherePack;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// HR and simulated LR cut from one source volume.
    #[default]
    Simulation,
    /// Separately imaged HR and LR volumes.
    Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: Mode,
    /// Master seed; repeat `i` uses `seed + i`.
    pub seed: u64,
    pub repeats: usize,
    /// Also run the single-dictionary baseline branch.
    pub baseline: bool,
    /// Also write the final volume grown to `lr_dims * 2^m` by replicating
    /// boundary planes.
    pub pad_to_multiple: bool,
    /// Output directory. Not written to the copy stored in a run directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub real: Option<RealConfig>,
    pub ingest: IngestConfig,
    pub reconstruction: ReconstructionSettings,
    pub metrics: MetricsSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: Mode::Simulation,
            seed: 0,
            repeats: 1,
            baseline: false,
            pad_to_multiple: false,
            out: None,
            simulation: None,
            real: None,
            ingest: IngestConfig::default(),
            reconstruction: ReconstructionSettings::default(),
            metrics: MetricsSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    /// Raw volume with sidecar; when absent a sphere pack is generated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_scale_um: Option<f64>,
    pub cut: Dims,
    pub factor: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sphere_pack: Option<SpherePack>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            source: None,
            source_scale_um: None,
            cut: [96, 96, 96],
            factor: 4,
            sphere_pack: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealConfig {
    pub hr: PathBuf,
    pub lr: PathBuf,
    /// Override the sidecar scales.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hr_scale_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lr_scale_um: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    /// Gray inputs: pores are below the Otsu threshold.
    pub pores_are_dark: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            pores_are_dark: true,
        }
    }
}

impl IngestConfig {
    pub fn polarity(&self) -> Polarity {
        Polarity::from_pores_are_dark(self.pores_are_dark)
    }
}

/// Reconstruction knobs; seed and baseline come from the top level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructionSettings {
    pub tie_break: TieBreak,
    pub dilation_radius: usize,
    pub max_placement_attempts: usize,
    pub connectivity: Connectivity,
}

impl Default for ReconstructionSettings {
    fn default() -> Self {
        let d = ReconstructionConfig::default();
        ReconstructionSettings {
            tie_break: d.tie_break,
            dilation_radius: d.dilation_radius,
            max_placement_attempts: d.max_placement_attempts,
            connectivity: d.connectivity,
        }
    }
}

impl ReconstructionSettings {
    pub fn to_config(&self, seed: u64, single_epd_baseline: bool) -> ReconstructionConfig {
        ReconstructionConfig {
            seed,
            tie_break: self.tie_break,
            dilation_radius: self.dilation_radius,
            max_placement_attempts: self.max_placement_attempts,
            single_epd_baseline,
            connectivity: self.connectivity,
        }
    }
}

fn check_scale(name: &str, s: Option<f64>) -> HarnessResult<()> {
    match s {
        Some(v) if !(v.is_finite() && v > 0.0) => Err(HarnessError::Config(format!(
            "{name} must be positive, got {v}"
        ))),
        _ => Ok(()),
    }
}

fn absolute(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> HarnessResult<Self> {
        let cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> HarnessResult<Self> {
        let path = path.as_ref();
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(HarnessError::ConfigNotFound(path.to_path_buf()))
            }
            Err(e) => return Err(HarnessError::io(path, e)),
        };
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let base = std::path::absolute(&base).map_err(|e| HarnessError::io(&base, e))?;
        cfg.resolve_paths(&base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        if let Some(out) = &mut self.out {
            absolute(base, out);
        }
        if let Some(src) = self.simulation.as_mut().and_then(|s| s.source.as_mut()) {
            absolute(base, src);
        }
        if let Some(real) = &mut self.real {
            absolute(base, &mut real.hr);
            absolute(base, &mut real.lr);
        }
    }

    pub fn validate(&self) -> HarnessResult<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.repeats < 1 {
            return bad("repeats must be ≥ 1".into());
        }
        if self.reconstruction.max_placement_attempts < 1 {
            return bad("reconstruction.max_placement_attempts must be ≥ 1".into());
        }
        match self.mode {
            Mode::Simulation => {
                let Some(sim) = &self.simulation else {
                    return bad("simulation mode needs a [simulation] table".into());
                };
                if sim.source.is_some() && sim.sphere_pack.is_some() {
                    return bad("simulation.source and simulation.sphere_pack are exclusive".into());
                }
                if sim.factor < 2 {
                    return bad(format!("simulation.factor must be ≥ 2, got {}", sim.factor));
                }
                check_scale("simulation.source_scale_um", sim.source_scale_um)?;
                if let Some(sp) = &sim.sphere_pack {
                    sp.validate()
                        .map_err(|e| HarnessError::Config(e.to_string()))?;
                }
            }
            Mode::Real => {
                let Some(real) = &self.real else {
                    return bad("real mode needs a [real] table with hr and lr paths".into());
                };
                check_scale("real.hr_scale_um", real.hr_scale_um)?;
                check_scale("real.lr_scale_um", real.lr_scale_um)?;
            }
        }
        Ok(())
    }

    /// The config as stored in a run directory: no output path, so the same
    /// file can be replayed into a different directory.
    pub fn to_run_toml(&self) -> HarnessResult<String> {
        let mut copy = self.clone();
        copy.out = None;
        toml::to_string(&copy).map_err(|e| HarnessError::Config(e.to_string()))
    }
}
