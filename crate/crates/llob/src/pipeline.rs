//! Records to crossover estimate: rescale, size filter, bin, fit, plus the
//! optional duration analyses.

use std::collections::BTreeMap;

use serde::Serialize;

use llob_core::analysis::{
    bin_scaling, eta_star_vs_t, fit_eta_star, scaling_curve, split_by_duration, subsample_bins, EtaStarVsT, FitResult,
    ScalingCurve, SplitPoint,
};
use llob_core::integral::ScalingFn;
use llob_core::records::{filter_min_size, rescale_all, MetaorderRecord, RejectReason, RescaledMetaorder};

use crate::config::FitFileConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Half {
    pub records: usize,
    pub curve: Result<ScalingCurve, llob_core::Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DurationHalves {
    pub split: f64,
    pub short: Half,
    pub long: Half,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub n_records: usize,
    /// `(input row index, reason)`.
    pub rejected: Vec<(usize, RejectReason)>,
    pub used: Vec<RescaledMetaorder>,
    pub curve: Result<ScalingCurve, llob_core::Error>,
    pub fit: Result<FitResult, llob_core::Error>,
    pub by_duration: Option<Result<DurationHalves, llob_core::Error>>,
    pub vs_t: Option<Result<EtaStarVsT, llob_core::Error>>,
}

impl Analysis {
    /// The first failure of the main fit, if any.
    pub fn failure(&self) -> Option<&llob_core::Error> {
        self.curve.as_ref().err().or(self.fit.as_ref().err())
    }
}

fn half<F: ScalingFn>(records: &[RescaledMetaorder], scaling: &F) -> Half {
    let curve = bin_scaling(records, subsample_bins(records.len())).map(|mut c| {
        c.fit = fit_eta_star(&c, scaling).ok();
        c
    });
    Half { records: records.len(), curve }
}

pub fn analyse<F: ScalingFn + Sync>(records: &[MetaorderRecord], opts: &FitFileConfig, scaling: &F) -> Analysis {
    let outcome = rescale_all(records);
    for (i, reason) in &outcome.rejected {
        log::warn!("row {}: rejected: {reason}", i + 1);
    }
    let used = filter_min_size(&outcome.accepted, opts.phi_min);
    log::info!(
        "{} records, {} rejected, {} below phi_min = {}",
        records.len(),
        outcome.rejected.len(),
        outcome.accepted.len() - used.len(),
        opts.phi_min
    );
    let (curve, fit) = match scaling_curve(&used, opts.bins, scaling) {
        Ok((c, f)) => (Ok(c), f),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    let by_duration = opts.by_duration.then(|| {
        split_by_duration(&used, SplitPoint::default()).map(|s| DurationHalves {
            split: s.split,
            short: half(&s.short, scaling),
            long: half(&s.long, scaling),
        })
    });
    let vs_t = opts.eta_star_vs_t.then(|| eta_star_vs_t(&used, opts.t_bins, scaling));
    Analysis { n_records: records.len(), rejected: outcome.rejected, used, curve, fit, by_duration, vs_t }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub eta_star: f64,
    pub amplitude: f64,
    pub plateau: f64,
    pub residual: f64,
    pub bins_used: usize,
}

impl From<&FitResult> for FitSummary {
    fn from(f: &FitResult) -> Self {
        Self { eta_star: f.eta_star, amplitude: f.amplitude, plateau: f.plateau(), residual: f.residual, bins_used: f.bins_used }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HalfReport {
    pub records: usize,
    pub bins: Option<usize>,
    pub fit: Option<FitSummary>,
    pub error: Option<String>,
}

impl From<&Half> for HalfReport {
    fn from(h: &Half) -> Self {
        match &h.curve {
            Ok(c) => Self {
                records: h.records,
                bins: Some(c.bins.len()),
                fit: c.fit.as_ref().map(FitSummary::from),
                error: c.fit.is_none().then(|| "fit failed".to_string()),
            },
            Err(e) => Self { records: h.records, bins: None, fit: None, error: Some(e.to_string()) },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DurationReport {
    #[serde(rename = "T_split")]
    pub split: f64,
    pub short: HalfReport,
    pub long: HalfReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct TBinReport {
    #[serde(rename = "T_mean")]
    pub t_mean: f64,
    pub count: usize,
    pub eta_star: Option<f64>,
    pub amplitude: Option<f64>,
    pub error: Option<String>,
}

/// Fit report, also written as diagnostics when the fit fails.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub eta_star: Option<f64>,
    pub amplitude: Option<f64>,
    pub plateau: Option<f64>,
    pub residual: Option<f64>,
    pub bins_used: Option<usize>,
    pub n_records: usize,
    pub n_rejected: usize,
    pub n_used: usize,
    pub rejected_by_reason: BTreeMap<&'static str, usize>,
    #[serde(rename = "slope_vs_T")]
    pub slope_vs_t: Option<f64>,
    #[serde(rename = "slope_vs_T_stderr")]
    pub slope_vs_t_stderr: Option<f64>,
    pub error: Option<String>,
    pub settings: FitFileConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub by_duration: Option<Result<DurationReport, String>>,
    #[serde(rename = "eta_star_vs_T", skip_serializing_if = "Option::is_none")]
    pub eta_star_vs_t: Option<Result<Vec<TBinReport>, String>>,
}

impl FitReport {
    pub fn new(analysis: &Analysis, settings: &FitFileConfig) -> Self {
        let mut rejected_by_reason = BTreeMap::new();
        for (_, reason) in &analysis.rejected {
            *rejected_by_reason.entry(reason.code()).or_insert(0) += 1;
        }
        let fit = analysis.fit.as_ref().ok();
        let slope = analysis.vs_t.as_ref().and_then(|v| v.as_ref().ok()).and_then(|v| v.slope);
        Self {
            eta_star: fit.map(|f| f.eta_star),
            amplitude: fit.map(|f| f.amplitude),
            plateau: fit.map(|f| f.plateau()),
            residual: fit.map(|f| f.residual),
            bins_used: fit.map(|f| f.bins_used),
            n_records: analysis.n_records,
            n_rejected: analysis.rejected.len(),
            n_used: analysis.used.len(),
            rejected_by_reason,
            slope_vs_t: slope.map(|s| s.slope),
            slope_vs_t_stderr: slope.and_then(|s| s.slope_stderr),
            error: analysis.failure().map(|e| e.to_string()),
            settings: settings.clone(),
            by_duration: analysis.by_duration.as_ref().map(|r| {
                r.as_ref()
                    .map(|d| DurationReport { split: d.split, short: (&d.short).into(), long: (&d.long).into() })
                    .map_err(|e| e.to_string())
            }),
            eta_star_vs_t: analysis.vs_t.as_ref().map(|r| {
                r.as_ref()
                    .map(|v| {
                        v.points
                            .iter()
                            .map(|p| TBinReport {
                                t_mean: p.t_mean,
                                count: p.count,
                                eta_star: p.fit.as_ref().ok().map(|f| f.eta_star),
                                amplitude: p.fit.as_ref().ok().map(|f| f.amplitude),
                                error: p.fit.as_ref().err().map(|e| e.to_string()),
                            })
                            .collect()
                    })
                    .map_err(|e| e.to_string())
            }),
        }
    }
}
