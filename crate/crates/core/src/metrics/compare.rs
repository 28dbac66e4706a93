use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::report::csv_err;
use crate::metrics::MetricsReport;

/// One metric of one candidate against the reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub candidate: String,
    pub metric: String,
    pub reference: Option<f64>,
    pub value: Option<f64>,
    /// `value - reference`.
    pub abs_delta: Option<f64>,
    /// `(value - reference) / reference`; 0 when equal, empty when the reference is 0.
    pub rel_delta: Option<f64>,
}

impl DeltaRow {
    fn new(
        candidate: &str,
        metric: impl Into<String>,
        reference: Option<f64>,
        value: Option<f64>,
    ) -> Self {
        let (abs_delta, rel_delta) = match (reference, value) {
            (Some(r), Some(v)) => {
                let rel = if v == r {
                    Some(0.0)
                } else if r == 0.0 {
                    None
                } else {
                    Some((v - r) / r)
                };
                (Some(v - r), rel)
            }
            _ => (None, None),
        };
        DeltaRow {
            candidate: candidate.to_string(),
            metric: metric.into(),
            reference,
            value,
            abs_delta,
            rel_delta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub reference: String,
    /// Common physical lag grid (µm) the S2 curves were resampled onto.
    pub s2_lags_um: Vec<f64>,
    pub rows: Vec<DeltaRow>,
}

/// Linear interpolation of a report's S2 curve at physical lags (µm).
pub fn resample_s2(report: &MetricsReport, lags_um: &[f64]) -> Vec<f64> {
    let s2 = report.s2_values();
    lags_um
        .iter()
        .map(|&l| {
            let t = l / report.scale_um;
            let i = (t.floor() as usize).min(s2.len() - 1);
            if i + 1 >= s2.len() {
                return s2[i];
            }
            let f = t - i as f64;
            s2[i] + f * (s2[i + 1] - s2[i])
        })
        .collect()
}

/// Compares each candidate to `reference`.
///
/// S2 curves are resampled onto lags spaced by the coarsest voxel size
/// among all reports, out to the shortest physical extent any curve covers,
/// and summarised as the mean absolute deviation from the reference.
pub fn compare(reference: &MetricsReport, candidates: &[MetricsReport]) -> Result<Comparison> {
    let all = || std::iter::once(reference).chain(candidates);
    let step = all().map(|r| r.scale_um).fold(f64::MIN, f64::max);
    let extent = all()
        .map(|r| r.s2.len().saturating_sub(1) as f64 * r.scale_um)
        .fold(f64::INFINITY, f64::min);
    // small slack so an extent that is an exact multiple of the step keeps its last lag
    let points = (extent / step + 1e-9).floor() as usize + 1;
    if points < 2 {
        return Err(Error::Incompatible(format!(
            "S2 curves share fewer than two lags on a {step} µm grid"
        )));
    }
    let bins = &reference.pore_radius_histogram.edges_um;
    if let Some(c) = candidates
        .iter()
        .find(|c| &c.pore_radius_histogram.edges_um != bins)
    {
        return Err(Error::Incompatible(format!(
            "{} uses different radius bins from {}",
            c.source, reference.source
        )));
    }

    let lags: Vec<f64> = (0..points).map(|k| k as f64 * step).collect();
    let ref_s2 = resample_s2(reference, &lags);
    let ref_rstar = reference
        .decorrelation_lag
        .map(|l| l as f64 * reference.scale_um);
    let mut rows = Vec::new();
    for c in candidates {
        let s2 = resample_s2(c, &lags);
        let mad = s2
            .iter()
            .zip(&ref_s2)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / points as f64;
        let name = c.source.as_str();
        rows.push(DeltaRow::new(
            name,
            "porosity",
            Some(reference.porosity),
            Some(c.porosity),
        ));
        rows.push(DeltaRow::new(name, "s2_mad", Some(0.0), Some(mad)));
        rows.push(DeltaRow::new(
            name,
            "decorrelation_lag_um",
            ref_rstar,
            c.decorrelation_lag.map(|l| l as f64 * c.scale_um),
        ));
        rows.push(DeltaRow::new(
            name,
            "component_count",
            Some(reference.component_count as f64),
            Some(c.component_count as f64),
        ));
        rows.push(DeltaRow::new(
            name,
            "micropore_count",
            Some(reference.micropore_count as f64),
            Some(c.micropore_count as f64),
        ));
        rows.push(DeltaRow::new(
            name,
            "mean_pore_radius_um",
            Some(reference.mean_pore_radius_um),
            Some(c.mean_pore_radius_um),
        ));
        let h = &c.pore_radius_histogram;
        for (i, (&rc, &cc)) in reference
            .pore_radius_histogram
            .counts
            .iter()
            .zip(&h.counts)
            .enumerate()
        {
            rows.push(DeltaRow::new(
                name,
                format!("radius_bin_{}_{}", h.edges_um[i], h.edges_um[i + 1]),
                Some(rc as f64),
                Some(cc as f64),
            ));
        }
    }
    Ok(Comparison {
        reference: reference.source.clone(),
        s2_lags_um: lags,
        rows,
    })
}

impl Comparison {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// Columns: `candidate,metric,reference,value,abs_delta,rel_delta`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn row(&self, candidate: &str, metric: &str) -> Option<&DeltaRow> {
        self.rows
            .iter()
            .find(|r| r.candidate == candidate && r.metric == metric)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{compute_report, MetricsSettings};
    use crate::volume::BinaryVolume;

    fn report(scale: f64, n: usize, seed: usize) -> MetricsReport {
        let v = BinaryVolume::from_fn([n, n, n], scale, |x, y, z| {
            (x * 7 + y * 3 + z * z + seed) % 5 < 2
        })
        .unwrap();
        compute_report(&v, &format!("v{seed}"), &MetricsSettings::default()).unwrap()
    }

    #[test]
    fn self_comparison_is_zero() {
        let r = report(1.0, 12, 0);
        let c = compare(&r, std::slice::from_ref(&r)).unwrap();
        assert!(c
            .rows
            .iter()
            .all(|row| row.abs_delta.is_none_or(|d| d == 0.0)));
        assert!(c
            .rows
            .iter()
            .all(|row| row.rel_delta.is_none_or(|d| d == 0.0)));
    }

    #[test]
    fn relative_porosity_delta() {
        let mut a = report(1.0, 12, 0);
        let mut b = a.clone();
        a.porosity = 0.2;
        b.porosity = 0.25;
        b.source = "b".into();
        let c = compare(&a, &[b]).unwrap();
        let row = c.row("b", "porosity").unwrap();
        assert!((row.rel_delta.unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn mixed_scales_share_coarse_grid() {
        let fine = report(1.0, 20, 0);
        let coarse = report(4.0, 6, 1);
        let c = compare(&fine, &[coarse]).unwrap();
        // coarse covers 5 lags * 4 µm = 20 µm, fine covers 19 µm
        assert_eq!(c.s2_lags_um, vec![0.0, 4.0, 8.0, 12.0, 16.0]);
        let csv = c.to_csv().unwrap();
        assert!(csv.starts_with("candidate,metric,reference,value,abs_delta,rel_delta\n"));
    }

    #[test]
    fn interpolation_is_linear() {
        let mut r = report(2.0, 8, 0);
        r.s2 = vec![
            crate::metrics::S2Point { lag: 0, value: 0.5 },
            crate::metrics::S2Point { lag: 1, value: 0.3 },
        ];
        assert_eq!(resample_s2(&r, &[0.0, 1.0, 2.0]), vec![0.5, 0.4, 0.3]);
    }

    #[test]
    fn incompatible_inputs() {
        let a = report(1.0, 12, 0);
        let mut b = a.clone();
        b.pore_radius_histogram.edges_um = vec![0.0, 1.0];
        b.pore_radius_histogram.counts = vec![0];
        assert!(matches!(compare(&a, &[b]), Err(Error::Incompatible(_))));
        let mut short = a.clone();
        short.s2.truncate(1);
        assert!(matches!(compare(&a, &[short]), Err(Error::Incompatible(_))));
    }
}
