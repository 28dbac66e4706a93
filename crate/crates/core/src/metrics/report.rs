use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{
    bin_radii, cc_size_histogram, component_radii, decorrelation_lag, porosity,
    two_point_correlation, validate_edges, RadiusHistogram, S2_ESTIMATOR,
};
use crate::volume::{BinaryVolume, Connectivity, Dims};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSettings {
    /// Largest S2 lag in voxels; clamped to the smallest dimension minus one.
    pub max_lag: usize,
    pub radius_bins_um: Vec<f64>,
    pub micropore_radius_um: f64,
    pub connectivity: Connectivity,
}

impl Default for MetricsSettings {
    fn default() -> Self {
        MetricsSettings {
            max_lag: 32,
            radius_bins_um: vec![0.0, 2.5, 5.0, 10.0, 20.0, 40.0, 80.0],
            micropore_radius_um: 2.5,
            connectivity: Connectivity::TwentySix,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct S2Point {
    pub lag: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub source: String,
    pub dims: Dims,
    pub scale_um: f64,
    pub porosity: f64,
    pub s2_estimator: String,
    pub s2: Vec<S2Point>,
    /// Decorrelation lag in voxels, `None` if S2 stays above the cut.
    pub decorrelation_lag: Option<usize>,
    pub connectivity: Connectivity,
    pub component_count: usize,
    pub cc_histogram: BTreeMap<usize, usize>,
    pub pore_radius_histogram: RadiusHistogram,
    pub mean_pore_radius_um: f64,
    pub micropore_radius_um: f64,
    pub micropore_count: usize,
}

pub fn compute_report(
    volume: &BinaryVolume,
    source: &str,
    settings: &MetricsSettings,
) -> Result<MetricsReport> {
    validate_edges(&settings.radius_bins_um)?;
    let min_dim = volume.dims().into_iter().min().unwrap_or(0);
    if min_dim == 0 {
        return Err(Error::InvalidInput("empty volume".into()));
    }
    let max_lag = settings.max_lag.min(min_dim - 1);
    if max_lag < settings.max_lag {
        log::warn!(
            "{source}: S2 max_lag clamped from {} to {max_lag}",
            settings.max_lag
        );
    }
    let p = porosity(volume);
    let s2 = two_point_correlation(volume, max_lag)?;
    let radii = component_radii(volume, settings.connectivity);
    let cc_histogram = cc_size_histogram(volume, settings.connectivity);
    let mean_radius = if radii.is_empty() {
        0.0
    } else {
        radii.iter().sum::<f64>() / radii.len() as f64
    };
    Ok(MetricsReport {
        source: source.to_string(),
        dims: volume.dims(),
        scale_um: volume.scale(),
        porosity: p,
        s2_estimator: S2_ESTIMATOR.to_string(),
        decorrelation_lag: decorrelation_lag(&s2, p),
        s2: s2
            .into_iter()
            .enumerate()
            .map(|(lag, value)| S2Point { lag, value })
            .collect(),
        connectivity: settings.connectivity,
        component_count: radii.len(),
        cc_histogram,
        pore_radius_histogram: bin_radii(&radii, &settings.radius_bins_um)?,
        mean_pore_radius_um: mean_radius,
        micropore_radius_um: settings.micropore_radius_um,
        micropore_count: radii
            .iter()
            .filter(|&&r| r < settings.micropore_radius_um)
            .count(),
    })
}

impl MetricsReport {
    pub fn s2_values(&self) -> Vec<f64> {
        self.s2.iter().map(|p| p.value).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }

    /// Long-format CSV with columns `kind,key,value`: scalar rows, one `s2`
    /// row per lag, one `cc_size` row per component size and one
    /// `radius_bin` row per histogram bin (key is the bin's lower edge).
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut row = |kind: &str, key: String, value: String| w.write_record([kind, &key, &value]);
        row("kind", "key".into(), "value".into()).map_err(csv_err)?;
        row("scalar", "porosity".into(), self.porosity.to_string()).map_err(csv_err)?;
        row("scalar", "scale_um".into(), self.scale_um.to_string()).map_err(csv_err)?;
        row(
            "scalar",
            "decorrelation_lag".into(),
            self.decorrelation_lag
                .map(|l| l.to_string())
                .unwrap_or_default(),
        )
        .map_err(csv_err)?;
        row(
            "scalar",
            "component_count".into(),
            self.component_count.to_string(),
        )
        .map_err(csv_err)?;
        row(
            "scalar",
            "mean_pore_radius_um".into(),
            self.mean_pore_radius_um.to_string(),
        )
        .map_err(csv_err)?;
        row(
            "scalar",
            "micropore_count".into(),
            self.micropore_count.to_string(),
        )
        .map_err(csv_err)?;
        for p in &self.s2 {
            row("s2", p.lag.to_string(), p.value.to_string()).map_err(csv_err)?;
        }
        for (size, count) in &self.cc_histogram {
            row("cc_size", size.to_string(), count.to_string()).map_err(csv_err)?;
        }
        let h = &self.pore_radius_histogram;
        for (edge, count) in h.edges_um.iter().zip(&h.counts) {
            row("radius_bin", edge.to_string(), count.to_string()).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_text(&dir.join(format!("{stem}.json")), &(self.to_json()? + "\n"))?;
        write_text(&dir.join(format!("{stem}.csv")), &self.to_csv()?)
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
