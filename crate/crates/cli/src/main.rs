use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use msrec_core::dictionary::{
    build_mpd, build_multi_epd, EdgePatternDictionary, MicroPoreDictionary,
};
use msrec_core::io::{load_binary, load_volume, save_binary, sidecar_path};
use msrec_core::metrics::compute_report;
use msrec_core::reconstruct::{pad_micropores, reconstruct_multistage};
use msrec_core::{plan, plan_for_volumes, Dims, ScalePlan};
use msrec_harness::config::SimulationConfig;
use msrec_harness::pipeline::binarize;
use msrec_harness::{make_simulation_pair, run_pipeline, HarnessError, PipelineConfig};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_DOMAIN: u8 = 4;

#[derive(Parser)]
#[command(
    name = "msrec",
    version,
    about = "Multiscale porous-media reconstruction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Stage count, output scale and micro-pore bounds for a scale pair.
    Plan {
        #[arg(long)]
        lr_scale: Option<f64>,
        #[arg(long)]
        hr_scale: Option<f64>,
        #[arg(long)]
        lr_size: Option<usize>,
        #[arg(long)]
        hr_size: Option<usize>,
        #[arg(long, default_value_t = 5)]
        template_size: usize,
        /// Plan from volumes instead of scalars.
        #[arg(long, conflicts_with_all = ["lr_scale", "lr_size"])]
        lr: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["hr_scale", "hr_size"])]
        hr: Option<PathBuf>,
        /// Print the full plan as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Build edge-pattern and micro-pore dictionaries from an HR volume.
    BuildDicts {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        hr: PathBuf,
        /// LR volume; only its scale and size are used, for the plan.
        #[arg(long)]
        lr: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Edge reconstruction of an LR volume through every dictionary stage.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lr: PathBuf,
        /// Directory written by `build-dicts`.
        #[arg(long)]
        dicts: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Use the native-scale dictionary at every stage.
        #[arg(long)]
        baseline: bool,
    },
    /// Pad micro-pores into a reconstructed volume.
    Pad {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pms: PathBuf,
        /// Directory written by `build-dicts`.
        #[arg(long)]
        dicts: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pore-structure statistics of one volume, printed as JSON.
    Metrics {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        /// Also write `<name>.json` and `<name>.csv` here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Source label; defaults to the file stem.
        #[arg(long)]
        name: Option<String>,
    },
    /// Cut an HR volume and a downsampled LR volume from disjoint regions.
    SimulatePair {
        #[command(flatten)]
        common: Common,
        /// Source volume; without it the config's sphere pack is generated.
        #[arg(long)]
        source: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', num_args = 3)]
        cut: Option<Vec<usize>>,
        #[arg(long)]
        factor: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full experiment into a fresh run directory.
    Pipeline {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        baseline: bool,
        #[arg(long)]
        repeats: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(common: &Common) -> Result<PipelineConfig, HarnessError> {
    let mut cfg = match &common.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |e| HarnessError::io(path, e)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    fs::write(path, text).map_err(io_err(path))
}

fn read_plan(dicts: &Path) -> Result<ScalePlan, HarnessError> {
    let path = dicts.join("plan.json");
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text)
        .map_err(|e| msrec_core::Error::Format(format!("{}: {e}", path.display())).into())
}

/// Every `epd_level<k>.bin` in `dir`, coarsest first.
fn load_epds(dir: &Path) -> Result<Vec<EdgePatternDictionary>, HarnessError> {
    let mut levels = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let name = entry.map_err(io_err(dir))?.file_name();
        let name = name.to_string_lossy();
        if let Some(k) = name
            .strip_prefix("epd_level")
            .and_then(|s| s.strip_suffix(".bin"))
        {
            if let Ok(k) = k.parse::<u32>() {
                levels.push(k);
            }
        }
    }
    levels.sort_unstable_by(|a, b| b.cmp(a));
    levels
        .into_iter()
        .map(|k| {
            Ok(EdgePatternDictionary::load(
                dir.join(format!("epd_level{k}.bin")),
            )?)
        })
        .collect()
}

fn print_plan(p: &ScalePlan, json: bool) {
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(p).expect("plan serializes")
        );
        return;
    }
    println!("n_max={} m_max={}", p.n_max, p.m_max);
    println!("stage_shortfall={}", p.stage_shortfall);
    println!("output_scale_um={}", p.output_scale_um);
    println!("cc_range={},{}", p.cc_range[0], p.cc_range[1]);
    println!("pad_multiplicity={}", p.pad_multiplicity);
    for s in &p.stages {
        println!(
            "stage {}: {} um -> {} um, dictionary level {}",
            s.stage, s.input_scale_um, s.output_scale_um, s.dictionary_level
        );
    }
}

fn usage(msg: &str) -> HarnessError {
    HarnessError::Config(msg.to_string())
}

fn run(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Plan {
            lr_scale,
            hr_scale,
            lr_size,
            hr_size,
            template_size,
            lr,
            hr,
            json,
        } => {
            let p = match (lr, hr) {
                (Some(lr), Some(hr)) => plan_for_volumes(&load_binary(lr)?, &load_binary(hr)?)?,
                (None, None) => {
                    let need =
                        |name| usage(&format!("plan needs --{name} (or --lr and --hr volumes)"));
                    plan::plan(
                        lr_scale.ok_or_else(|| need("lr-scale"))?,
                        hr_scale.ok_or_else(|| need("hr-scale"))?,
                        lr_size.ok_or_else(|| need("lr-size"))?,
                        hr_size.ok_or_else(|| need("hr-size"))?,
                        template_size,
                    )?
                }
                _ => return Err(usage("--lr and --hr must be given together")),
            };
            print_plan(&p, json);
        }
        Command::BuildDicts {
            common,
            hr,
            lr,
            out,
        } => {
            let cfg = load_config(&common)?;
            let polarity = cfg.ingest.polarity();
            let hr = binarize(load_volume(hr)?, polarity)?;
            let lr = binarize(load_volume(lr)?, polarity)?;
            let p = plan_for_volumes(&lr, &hr)?;
            fs::create_dir_all(&out).map_err(io_err(&out))?;
            write_json(&out.join("plan.json"), &p)?;
            for d in build_multi_epd(&hr, &p)? {
                d.save(out.join(format!("epd_level{}.bin", d.level())))?;
                println!(
                    "epd level {}: {} classes, {} fills",
                    d.level(),
                    d.class_count(),
                    d.fill_count()
                );
            }
            let mpd = build_mpd(&hr, &p, cfg.reconstruction.connectivity);
            mpd.save(out.join("mpd.bin"))?;
            println!("mpd: {} elements, cc_range {:?}", mpd.len(), p.cc_range);
        }
        Command::Reconstruct {
            common,
            lr,
            dicts,
            out,
            baseline,
        } => {
            let cfg = load_config(&common)?;
            let lr = binarize(load_volume(lr)?, cfg.ingest.polarity())?;
            let epds = load_epds(&dicts)?;
            let rc = cfg
                .reconstruction
                .to_config(cfg.seed, baseline || cfg.baseline);
            let recon = reconstruct_multistage(&lr, &epds, &rc)?;
            fs::create_dir_all(&out).map_err(io_err(&out))?;
            for (k, v) in recon.stages.iter().enumerate() {
                save_binary(v, out.join(format!("pms_{}.raw", k + 1)))?;
            }
            write_json(&out.join("stages.json"), &recon.reports)?;
            for r in &recon.reports {
                println!(
                    "stage {}: exact-match rate {:.4}",
                    r.stage, r.exact_match_rate
                );
            }
        }
        Command::Pad {
            common,
            pms,
            dicts,
            out,
        } => {
            let cfg = load_config(&common)?;
            let pms = load_binary(pms)?;
            let p = read_plan(&dicts)?;
            let mpd = MicroPoreDictionary::load(dicts.join("mpd.bin"))?;
            let (ms, report) = pad_micropores(
                &pms,
                &mpd,
                &p,
                &cfg.reconstruction.to_config(cfg.seed, false),
            )?;
            fs::create_dir_all(&out).map_err(io_err(&out))?;
            save_binary(&ms, out.join("ms.raw"))?;
            write_json(&out.join("padding.json"), &report)?;
            println!(
                "placed {} of {} ({} skipped), {} voxels added",
                report.placed, report.requested, report.skipped, report.added_voxels
            );
        }
        Command::Metrics {
            common,
            input,
            out,
            name,
        } => {
            let cfg = load_config(&common)?;
            let name = name.unwrap_or_else(|| {
                input
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default()
            });
            let volume = binarize(load_volume(&input)?, cfg.ingest.polarity())?;
            let report = compute_report(&volume, &name, &cfg.metrics)?;
            if let Some(dir) = out {
                let target = dir.join(format!("{name}.json"));
                if fs::canonicalize(&target).ok() == fs::canonicalize(sidecar_path(&input)).ok()
                    && target.exists()
                {
                    return Err(usage(&format!(
                        "{} is the input's sidecar; pick another --out or --name",
                        target.display()
                    )));
                }
                report.save(dir, &name)?;
            }
            println!("{}", report.to_json()?);
        }
        Command::SimulatePair {
            common,
            source,
            cut,
            factor,
            out,
        } => {
            let cfg = load_config(&common)?;
            let mut sim = cfg
                .simulation
                .clone()
                .unwrap_or_else(SimulationConfig::default);
            if let Some(c) = cut {
                sim.cut =
                    <Dims>::try_from(c.as_slice()).map_err(|_| usage("--cut takes three sizes"))?;
            }
            if let Some(f) = factor {
                sim.factor = f;
            }
            let volume = match source.or(sim.source) {
                Some(path) => load_volume(path)?,
                None => sim.sphere_pack.unwrap_or_default().generate()?,
            };
            let pair = make_simulation_pair(
                &volume,
                sim.cut,
                sim.factor,
                cfg.seed,
                cfg.ingest.polarity(),
            )?;
            fs::create_dir_all(&out).map_err(io_err(&out))?;
            save_binary(&pair.hr, out.join("hr.raw"))?;
            save_binary(&pair.lr, out.join("lr.raw"))?;
            save_binary(&pair.reference, out.join("reference.raw"))?;
            write_json(&out.join("cuts.json"), &pair.cuts)?;
            println!(
                "hr {:?} at {} um from {:?}; lr {:?} at {} um from {:?}",
                pair.hr.dims(),
                pair.hr.scale(),
                pair.cuts.hr_origin,
                pair.lr.dims(),
                pair.lr.scale(),
                pair.cuts.lr_origin
            );
        }
        Command::Pipeline {
            common,
            baseline,
            repeats,
            out,
        } => {
            let mut cfg = load_config(&common)?;
            if baseline {
                cfg.baseline = true;
            }
            if let Some(r) = repeats {
                cfg.repeats = r;
            }
            let out = out
                .or_else(|| cfg.out.clone())
                .ok_or_else(|| usage("pipeline needs --out or `out` in the config"))?;
            let report = run_pipeline(&cfg, &out)?;
            for r in &report.runs {
                println!(
                    "{}: porosity {:.4}, S2 deviation {:.5} vs {}",
                    r.dir, r.porosity_ms, r.s2_mad_ms, report.compared_against
                );
            }
            println!("run directory: {}", out.display());
        }
    }
    Ok(())
}

fn exit_code(e: &HarnessError) -> u8 {
    use msrec_core::Error as E;
    match e {
        HarnessError::ConfigNotFound(_) | HarnessError::Config(_) => EXIT_USAGE,
        HarnessError::Io { .. } | HarnessError::OutputNotEmpty(_) => EXIT_IO,
        HarnessError::Core(
            E::Io { .. }
            | E::Sidecar { .. }
            | E::DataLength { .. }
            | E::UnknownEncoding(_)
            | E::Format(_),
        ) => EXIT_IO,
        HarnessError::Core(_) => EXIT_DOMAIN,
    }
}

fn category(code: u8) -> &'static str {
    match code {
        EXIT_USAGE => "usage error",
        EXIT_IO => "i/o error",
        _ => "error",
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("msrec: {}: {e}", category(code));
            ExitCode::from(code)
        }
    }
}
