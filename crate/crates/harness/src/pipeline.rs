//! End-to-end run: inputs, plan, dictionaries, reconstruction branches,
//! metrics and comparison, all written to one run directory.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use msrec_core::dictionary::{
    build_mpd, build_multi_epd, EdgePatternDictionary, MicroPoreDictionary,
};
use msrec_core::io::{load_volume, save_binary};
use msrec_core::metrics::{compare, compute_report, Comparison, MetricsReport};
use msrec_core::reconstruct::{pad_micropores, reconstruct_multistage, StageReport};
use msrec_core::threshold::{otsu_threshold, Polarity};
use msrec_core::{plan_for_volumes, BinaryVolume, Dims, ScalePlan, Volume};

use crate::config::{Mode, PipelineConfig};
use crate::error::{HarnessError, HarnessResult};
use crate::manifest::{write_manifest, RunStatus, TIMINGS_FILE};
use crate::simulation::{make_simulation_pair, CutPlacement};
use crate::sphere_pack::SpherePack;

pub const CONFIG_FILE: &str = "config.toml";
pub const PLAN_FILE: &str = "plan.json";
pub const REPORT_FILE: &str = "report.json";
pub const COMPARISON_JSON: &str = "comparison.json";
pub const COMPARISON_CSV: &str = "comparison.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub dims: Dims,
    pub scale_um: f64,
    pub porosity: f64,
    pub decorrelation_lag: Option<usize>,
}

impl InputSummary {
    fn new(v: &BinaryVolume, m: &MetricsReport) -> Self {
        InputSummary {
            dims: v.dims(),
            scale_um: v.scale(),
            porosity: m.porosity,
            decorrelation_lag: m.decorrelation_lag,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionarySummary {
    pub level: u32,
    pub classes: usize,
    pub fills: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaddingSummary {
    pub multiplicity: usize,
    pub requested: usize,
    pub placed: usize,
    pub skipped: usize,
    pub added_voxels: usize,
}

/// One reconstruction of one branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatReport {
    /// `multi` or `single`.
    pub branch: String,
    pub repeat: usize,
    pub seed: u64,
    /// Relative to the run directory.
    pub dir: String,
    pub exact_match_rates: Vec<f64>,
    pub padding: PaddingSummary,
    pub porosity_pms: f64,
    pub porosity_ms: f64,
    pub decorrelation_lag_pms: Option<usize>,
    pub decorrelation_lag_ms: Option<usize>,
    /// Mean absolute S2 deviation from the comparison reference.
    pub s2_mad_pms: f64,
    pub s2_mad_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: Mode,
    pub seed: u64,
    pub repeats: usize,
    pub baseline: bool,
    pub stages: u32,
    pub stage_shortfall: u32,
    pub output_scale_um: f64,
    pub hr: InputSummary,
    pub lr: InputSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<InputSummary>,
    /// Source of the comparison reference: `reference` or `hr`.
    pub compared_against: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cuts: Option<CutPlacement>,
    pub epd: Vec<DictionarySummary>,
    pub mpd_elements: usize,
    pub runs: Vec<RepeatReport>,
}

impl RunReport {
    pub fn branch(&self, name: &str) -> impl Iterator<Item = &RepeatReport> + '_ {
        let name = name.to_string();
        self.runs.iter().filter(move |r| r.branch == name)
    }
}

#[derive(Debug, Default, Serialize)]
struct Timings {
    steps: Vec<(String, f64)>,
}

impl Timings {
    fn time<T>(&mut self, name: impl Into<String>, f: impl FnOnce() -> T) -> T {
        let t0 = Instant::now();
        let out = f();
        self.steps.push((name.into(), t0.elapsed().as_secs_f64()));
        out
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> HarnessResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    let text = serde_json::to_string_pretty(value).expect("report types serialize") + "\n";
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// Binary volumes pass through; gray ones are Otsu-thresholded.
pub fn binarize(volume: Volume, polarity: Polarity) -> HarnessResult<BinaryVolume> {
    Ok(match volume {
        Volume::Binary(b) => b,
        Volume::Gray(g) => otsu_threshold(&g, polarity)?,
    })
}

fn with_scale(volume: Volume, scale: Option<f64>) -> HarnessResult<Volume> {
    Ok(match (volume, scale) {
        (Volume::Binary(b), Some(s)) => Volume::Binary(b.with_scale(s)?),
        (Volume::Gray(g), Some(s)) => Volume::Gray(msrec_core::GrayVolume::new(
            g.dims(),
            s,
            g.depth(),
            g.data().to_vec(),
        )?),
        (v, None) => v,
    })
}

/// Binary volumes a run works from.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub hr: BinaryVolume,
    pub lr: BinaryVolume,
    /// Full-resolution truth for the LR region (simulation mode only).
    pub reference: Option<BinaryVolume>,
    pub cuts: Option<CutPlacement>,
}

pub fn acquire_inputs(cfg: &PipelineConfig) -> HarnessResult<Inputs> {
    let polarity = cfg.ingest.polarity();
    match cfg.mode {
        Mode::Simulation => {
            let sim = cfg
                .simulation
                .as_ref()
                .ok_or_else(|| HarnessError::Config("missing [simulation]".into()))?;
            let source = match &sim.source {
                Some(path) => with_scale(load_volume(path)?, sim.source_scale_um)?,
                None => sim.sphere_pack.clone().unwrap_or_default().generate()?,
            };
            let pair = make_simulation_pair(&source, sim.cut, sim.factor, cfg.seed, polarity)?;
            Ok(Inputs {
                hr: pair.hr,
                lr: pair.lr,
                reference: Some(pair.reference),
                cuts: Some(pair.cuts),
            })
        }
        Mode::Real => {
            let real = cfg
                .real
                .as_ref()
                .ok_or_else(|| HarnessError::Config("missing [real]".into()))?;
            let hr = binarize(
                with_scale(load_volume(&real.hr)?, real.hr_scale_um)?,
                polarity,
            )?;
            let lr = binarize(
                with_scale(load_volume(&real.lr)?, real.lr_scale_um)?,
                polarity,
            )?;
            Ok(Inputs {
                hr,
                lr,
                reference: None,
                cuts: None,
            })
        }
    }
}

fn prepare_out(out: &Path) -> HarnessResult<()> {
    if out.exists() {
        let mut entries = fs::read_dir(out).map_err(|e| HarnessError::io(out, e))?;
        if entries.next().is_some() {
            return Err(HarnessError::OutputNotEmpty(out.to_path_buf()));
        }
    }
    fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))
}

/// Runs the configured experiment into `out`, which must be empty or absent.
///
/// On failure the directory keeps whatever was written, and `manifest.json`
/// records the error with status `failed`.
pub fn run_pipeline(cfg: &PipelineConfig, out: &Path) -> HarnessResult<RunReport> {
    cfg.validate()?;
    prepare_out(out)?;
    let mut timings = Timings::default();
    let result = run_inner(cfg, out, &mut timings);
    write_json(&out.join(TIMINGS_FILE), &timings)?;
    match result {
        Ok(report) => {
            write_manifest(out, RunStatus::Complete, None)?;
            Ok(report)
        }
        Err(e) => {
            log::error!("pipeline failed: {e}");
            write_manifest(out, RunStatus::Failed, Some(e.to_string()))?;
            Err(e)
        }
    }
}

fn run_inner(cfg: &PipelineConfig, out: &Path, timings: &mut Timings) -> HarnessResult<RunReport> {
    let cfg_path = out.join(CONFIG_FILE);
    fs::write(&cfg_path, cfg.to_run_toml()?).map_err(|e| HarnessError::io(&cfg_path, e))?;

    let Inputs {
        hr,
        lr,
        reference,
        cuts,
    } = timings.time("inputs", || acquire_inputs(cfg))?;
    save_binary(&hr, out.join("inputs/hr.raw"))?;
    save_binary(&lr, out.join("inputs/lr.raw"))?;
    if let Some(r) = &reference {
        save_binary(r, out.join("inputs/reference.raw"))?;
    }

    let plan = plan_for_volumes(&lr, &hr)?;
    write_json(&out.join(PLAN_FILE), &plan)?;
    log::info!(
        "plan: {} stage(s), output {:.4} µm, cc_range {:?}, multiplicity {}",
        plan.m_max,
        plan.output_scale_um,
        plan.cc_range,
        plan.pad_multiplicity
    );

    let epds = timings.time("epd", || build_multi_epd(&hr, &plan))?;
    let dict_dir = out.join("dicts");
    fs::create_dir_all(&dict_dir).map_err(|e| HarnessError::io(&dict_dir, e))?;
    for d in &epds {
        d.save(dict_dir.join(format!("epd_level{}.bin", d.level())))?;
    }
    let mpd = timings.time("mpd", || {
        build_mpd(&hr, &plan, cfg.reconstruction.connectivity)
    });
    mpd.save(dict_dir.join("mpd.bin"))?;

    let metrics_dir = out.join("metrics");
    let hr_report = compute_report(&hr, "hr", &cfg.metrics)?;
    let lr_report = compute_report(&lr, "lr", &cfg.metrics)?;
    hr_report.save(&metrics_dir, "hr")?;
    lr_report.save(&metrics_dir, "lr")?;
    // the truth for the LR region when there is one, otherwise the HR input
    let ref_report = match &reference {
        Some(r) => {
            let rep = compute_report(r, "reference", &cfg.metrics)?;
            rep.save(&metrics_dir, "reference")?;
            rep
        }
        None => hr_report.clone(),
    };
    let mut comparisons = vec![compare(&ref_report, std::slice::from_ref(&lr_report))?];
    if reference.is_some() {
        comparisons.push(compare(&ref_report, std::slice::from_ref(&hr_report))?);
    }

    let shared = Shared {
        cfg,
        out,
        lr: &lr,
        epds: &epds,
        mpd: &mpd,
        plan: &plan,
        ref_report: &ref_report,
    };
    let mut branches = vec![("multi", false)];
    if cfg.baseline {
        branches.push(("single", true));
    }
    let mut runs = Vec::new();
    for (branch, single) in branches {
        for repeat in 0..cfg.repeats {
            let seed = cfg.seed.wrapping_add(repeat as u64);
            let (run, cmp) = shared.run_repeat(branch, repeat, seed, single, timings)?;
            comparisons.extend(cmp);
            runs.push(run);
        }
    }

    write_json(&out.join(COMPARISON_JSON), &comparisons)?;
    write_comparison_csv(&out.join(COMPARISON_CSV), &comparisons)?;

    let report = RunReport {
        mode: cfg.mode,
        seed: cfg.seed,
        repeats: cfg.repeats,
        baseline: cfg.baseline,
        stages: plan.m_max,
        stage_shortfall: plan.stage_shortfall,
        output_scale_um: plan.output_scale_um,
        hr: InputSummary::new(&hr, &hr_report),
        lr: InputSummary::new(&lr, &lr_report),
        reference: reference
            .as_ref()
            .map(|r| InputSummary::new(r, &ref_report)),
        compared_against: ref_report.source.clone(),
        cuts,
        epd: epds
            .iter()
            .map(|d| DictionarySummary {
                level: d.level(),
                classes: d.class_count(),
                fills: d.fill_count(),
            })
            .collect(),
        mpd_elements: mpd.len(),
        runs,
    };
    write_json(&out.join(REPORT_FILE), &report)?;
    Ok(report)
}

/// Inputs shared by every branch and repeat.
struct Shared<'a> {
    cfg: &'a PipelineConfig,
    out: &'a Path,
    lr: &'a BinaryVolume,
    epds: &'a [EdgePatternDictionary],
    mpd: &'a MicroPoreDictionary,
    plan: &'a ScalePlan,
    ref_report: &'a MetricsReport,
}

impl Shared<'_> {
    fn run_repeat(
        &self,
        branch: &str,
        repeat: usize,
        seed: u64,
        single: bool,
        timings: &mut Timings,
    ) -> HarnessResult<(RepeatReport, Vec<Comparison>)> {
        let Shared {
            cfg,
            out,
            lr,
            epds,
            mpd,
            plan,
            ref_report,
        } = *self;
        let rel = format!("{branch}/repeat_{repeat}");
        let rel = rel.as_str();
        let dir = out.join(rel);
        let rc = cfg.reconstruction.to_config(seed, single);
        let recon = timings.time(format!("{rel}/edges"), || {
            reconstruct_multistage(lr, epds, &rc)
        })?;
        for (k, secs) in recon.stage_seconds.iter().enumerate() {
            timings
                .steps
                .push((format!("{rel}/stage_{}", k + 1), *secs));
        }
        for (k, v) in recon.stages.iter().enumerate() {
            save_binary(v, dir.join(format!("pms_{}.raw", k + 1)))?;
        }
        write_json(&dir.join("stages.json"), &recon.reports)?;
        let stage_reports: Vec<StageReport> = recon.reports.clone();
        let m = recon.stages.len();
        let pms = recon.into_final();

        let (ms, padding) = timings.time(format!("{rel}/padding"), || {
            pad_micropores(&pms, mpd, plan, &rc)
        })?;
        save_binary(&ms, dir.join("ms.raw"))?;
        write_json(&dir.join("padding.json"), &padding)?;
        if cfg.pad_to_multiple {
            let target = lr.dims().map(|d| d << m);
            save_binary(&ms.replicate_to(target)?, dir.join("ms_padded.raw"))?;
        }

        let pms_report = compute_report(&pms, &format!("{rel}/pms_{m}"), &cfg.metrics)?;
        let ms_report = compute_report(&ms, &format!("{rel}/ms"), &cfg.metrics)?;
        pms_report.save(dir.join("metrics"), "pms")?;
        ms_report.save(dir.join("metrics"), "ms")?;
        let pms_cmp = compare(ref_report, std::slice::from_ref(&pms_report))?;
        let ms_cmp = compare(ref_report, std::slice::from_ref(&ms_report))?;
        let mad = |c: &Comparison, name: &str| {
            c.row(name, "s2_mad")
                .and_then(|r| r.value)
                .expect("compare emits s2_mad")
        };

        let report = RepeatReport {
            branch: branch.to_string(),
            repeat,
            seed,
            dir: rel.to_string(),
            exact_match_rates: stage_reports.iter().map(|r| r.exact_match_rate).collect(),
            padding: PaddingSummary {
                multiplicity: padding.multiplicity,
                requested: padding.requested,
                placed: padding.placed,
                skipped: padding.skipped,
                added_voxels: padding.added_voxels,
            },
            porosity_pms: pms_report.porosity,
            porosity_ms: ms_report.porosity,
            decorrelation_lag_pms: pms_report.decorrelation_lag,
            decorrelation_lag_ms: ms_report.decorrelation_lag,
            s2_mad_pms: mad(&pms_cmp, &pms_report.source),
            s2_mad_ms: mad(&ms_cmp, &ms_report.source),
        };
        Ok((report, vec![pms_cmp, ms_cmp]))
    }
}

/// All comparison rows in one table: `candidate,metric,reference,value,abs_delta,rel_delta`.
fn write_comparison_csv(path: &Path, comparisons: &[Comparison]) -> HarnessResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in comparisons.iter().flat_map(|c| &c.rows) {
        w.serialize(row)
            .map_err(|e| msrec_core::Error::Format(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| HarnessError::io(path, e.into_error()))?;
    fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

/// Convenience for tests and examples: a small simulation config around a
/// generated sphere pack.
pub fn sphere_pack_config(pack: SpherePack, cut: Dims, factor: usize, seed: u64) -> PipelineConfig {
    PipelineConfig {
        seed,
        simulation: Some(crate::config::SimulationConfig {
            cut,
            factor,
            sphere_pack: Some(pack),
            ..Default::default()
        }),
        ..PipelineConfig::default()
    }
}
