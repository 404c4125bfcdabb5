//! Estimation of the crossover from rescaled metaorders: quantile binning
//! in `eta`, the scaling-collapse fit of `eta*`, conditioning on duration
//! and the execution-time exponents.

use alloc::vec::Vec;

use crate::integral::ScalingFn;
use crate::math::{golden_section_min, linear_fit, ln, sqrt, LinearFit};
use crate::records::RescaledMetaorder;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub eta_mean: f64,
    /// Mean of `impact_obs / sqrt(phi)`.
    pub f_hat: f64,
    pub stderr: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub eta_star: f64,
    pub amplitude: f64,
    /// Weighted sum of squared log residuals at the optimum.
    pub residual: f64,
    pub bins_used: usize,
    /// First-pass `(eta*, A)` whose model values set the bin weights.
    pub pilot: (f64, f64),
}

impl FitResult {
    /// Large-`eta` limit of `A F(eta / eta*)`.
    pub fn plateau(&self) -> f64 {
        self.amplitude * crate::integral::LARGE_ETA_PLATEAU
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingCurve {
    pub bins: Vec<Bin>,
    pub fit: Option<FitResult>,
}

impl ScalingCurve {
    /// Bins holding at least two records yet no spread.
    pub fn zero_stderr_bins(&self) -> usize {
        self.bins.iter().filter(|b| b.count >= 2 && b.stderr == 0.0).count()
    }
}

pub const DEFAULT_BINS: usize = 30;
pub const MIN_SUBSAMPLE_BINS: usize = 8;
pub const DEFAULT_T_BINS: usize = 5;

/// Bin count for a subsample: `30 sqrt(count / 1e6)`, between 8 and 30.
pub fn subsample_bins(count: usize) -> usize {
    let scaled = DEFAULT_BINS as f64 * sqrt(count as f64 / 1e6);
    (libm::round(scaled) as usize).clamp(MIN_SUBSAMPLE_BINS, DEFAULT_BINS)
}

/// Sizes of `k` consecutive quantile groups of `n` sorted items.
fn group_sizes(n: usize, k: usize) -> impl Iterator<Item = usize> {
    let (base, extra) = (n / k, n % k);
    (0..k).map(move |i| base + usize::from(i < extra))
}

struct Moments {
    count: usize,
    eta_sum: f64,
    y_sum: f64,
    y_sq: f64,
}

impl Moments {
    fn bin(&self) -> Bin {
        let n = self.count as f64;
        let mean = self.y_sum / n;
        let var = (self.y_sq / n - mean * mean).max(0.0);
        Bin { eta_mean: self.eta_sum / n, f_hat: mean, stderr: sqrt(var / n), count: self.count }
    }
}

/// Evenly populated bins in `eta`, each carrying the mean of
/// `impact_obs / sqrt(phi)`. The standard error uses the population
/// standard deviation. Bins with equal mean `eta` (ties) are merged.
pub fn bin_scaling(records: &[RescaledMetaorder], n_bins: usize) -> Result<ScalingCurve> {
    if n_bins < 2 {
        return Err(Error::invalid("n_bins", "must be >= 2"));
    }
    if records.len() < n_bins {
        return Err(Error::InsufficientData { needed: n_bins, available: records.len() });
    }
    let mut points: Vec<(f64, f64)> = records.iter().map(|r| (r.eta, r.impact_obs / sqrt(r.phi))).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut groups: Vec<Moments> = Vec::with_capacity(n_bins);
    let mut start = 0;
    for size in group_sizes(points.len(), n_bins) {
        let chunk = &points[start..start + size];
        start += size;
        let m = Moments {
            count: size,
            eta_sum: chunk.iter().map(|p| p.0).sum(),
            y_sum: chunk.iter().map(|p| p.1).sum(),
            y_sq: chunk.iter().map(|p| p.1 * p.1).sum(),
        };
        match groups.last_mut() {
            Some(last) if last.bin().eta_mean >= m.bin().eta_mean => {
                last.count += m.count;
                last.eta_sum += m.eta_sum;
                last.y_sum += m.y_sum;
                last.y_sq += m.y_sq;
            }
            _ => groups.push(m),
        }
    }
    Ok(ScalingCurve { bins: groups.iter().map(Moments::bin).collect(), fit: None })
}

/// Relative-variance floor so that noise-free bins get equal weight.
const MIN_RELATIVE_VARIANCE: f64 = 1e-12;
const SCAN_POINTS: usize = 241;
const SCAN_MARGIN: f64 = 100.0;
const MIN_FIT_BINS: usize = 5;
const MIN_FIT_SPAN: f64 = 100.0;

struct FitPoint {
    ln_eta: f64,
    ln_f: f64,
    weight: f64,
}

fn fit_bins(curve: &ScalingCurve) -> impl Iterator<Item = &Bin> {
    curve.bins.iter().filter(|b| b.f_hat > 0.0 && b.eta_mean > 0.0 && b.f_hat.is_finite())
}

fn weight(stderr: f64, reference: f64) -> f64 {
    let rel = stderr / reference;
    1.0 / (rel * rel).max(MIN_RELATIVE_VARIANCE)
}

/// Bins usable in log space, weighted by the inverse relative variance
/// `(reference / stderr)²`, with the bin's own `F_hat` as reference when no
/// model is given.
fn fit_points<F: ScalingFn>(curve: &ScalingCurve, scaling: &F, model: Option<(f64, f64)>) -> Result<Vec<FitPoint>> {
    let points: Vec<FitPoint> = fit_bins(curve)
        .map(|b| {
            let reference = match model {
                Some((eta_star, amplitude)) => amplitude * scaling.value(b.eta_mean / eta_star),
                None => b.f_hat,
            };
            FitPoint { ln_eta: ln(b.eta_mean), ln_f: ln(b.f_hat), weight: weight(b.stderr, reference) }
        })
        .collect();
    if points.len() < MIN_FIT_BINS {
        return Err(Error::InsufficientData { needed: MIN_FIT_BINS, available: points.len() });
    }
    let lo = points.iter().map(|p| p.ln_eta).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.ln_eta).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < ln(MIN_FIT_SPAN) {
        return Err(Error::InsufficientSpan("fit needs bins spanning two decades of eta"));
    }
    Ok(points)
}

/// Objective and optimal `ln A` at a given `ln eta*`.
fn profile<F: ScalingFn>(points: &[FitPoint], scaling: &F, ln_eta_star: f64) -> (f64, f64) {
    let mut model = Vec::with_capacity(points.len());
    for p in points {
        let f = scaling.value(libm::exp(p.ln_eta - ln_eta_star));
        model.push(if f > 0.0 { ln(f) } else { f64::NEG_INFINITY });
    }
    let w_sum: f64 = points.iter().map(|p| p.weight).sum();
    let ln_a = points.iter().zip(&model).map(|(p, m)| p.weight * (p.ln_f - m)).sum::<f64>() / w_sum;
    let objective = points
        .iter()
        .zip(&model)
        .map(|(p, m)| {
            let r = p.ln_f - ln_a - m;
            p.weight * r * r
        })
        .sum::<f64>();
    (if objective.is_nan() { f64::INFINITY } else { objective }, ln_a)
}

/// Objective of `fit` evaluated at another `(amplitude, eta_star)`, with
/// the same bin weights.
pub fn fit_objective<F: ScalingFn>(curve: &ScalingCurve, scaling: &F, fit: &FitResult, amplitude: f64, eta_star: f64) -> Result<f64> {
    let points = fit_points(curve, scaling, Some(fit.pilot))?;
    let ln_a = ln(amplitude);
    Ok(points
        .iter()
        .map(|p| {
            let r = p.ln_f - ln_a - ln(scaling.value(libm::exp(p.ln_eta) / eta_star));
            p.weight * r * r
        })
        .sum())
}

fn minimise<F: ScalingFn>(points: &[FitPoint], scaling: &F) -> Result<(f64, f64, f64)> {
    let lo = points.iter().map(|p| p.ln_eta).fold(f64::INFINITY, f64::min) - ln(SCAN_MARGIN);
    let hi = points.iter().map(|p| p.ln_eta).fold(f64::NEG_INFINITY, f64::max) + ln(SCAN_MARGIN);
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let scan: Vec<f64> = (0..SCAN_POINTS).map(|i| profile(points, scaling, lo + i as f64 * step).0).collect();
    let best = scan.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
    if !scan[best].is_finite() {
        return Err(Error::NonFinite("fit objective"));
    }
    if best == 0 || best == SCAN_POINTS - 1 {
        return Err(Error::CrossoverNotIdentified);
    }
    let a = lo + (best - 1) as f64 * step;
    let b = lo + (best + 1) as f64 * step;
    let (refined, objective) = golden_section_min(|x| profile(points, scaling, x).0, a, b, 1e-10);
    let ln_star = if objective <= scan[best] { refined } else { lo + best as f64 * step };
    let (residual, ln_a) = profile(points, scaling, ln_star);
    Ok((ln_star, ln_a, residual))
}

/// Fits `F_hat = A F(eta / eta*)` by weighted least squares in logs: a
/// log-spaced scan over `eta*` followed by golden-section refinement, with
/// `A` in closed form. A pilot fit weighted by the observed `F_hat` sets
/// model-based weights for the final fit, so that upward fluctuations do
/// not earn extra weight.
pub fn fit_eta_star<F: ScalingFn>(curve: &ScalingCurve, scaling: &F) -> Result<FitResult> {
    let pilot_points = fit_points(curve, scaling, None)?;
    let (ln_star, ln_a, _) = minimise(&pilot_points, scaling)?;
    let pilot = (libm::exp(ln_star), libm::exp(ln_a));
    let points = fit_points(curve, scaling, Some(pilot))?;
    let (ln_star, ln_a, residual) = minimise(&points, scaling)?;
    Ok(FitResult { eta_star: libm::exp(ln_star), amplitude: libm::exp(ln_a), residual, bins_used: points.len(), pilot })
}

/// Bins and fits in one go; the fit is left empty when it fails.
pub fn scaling_curve<F: ScalingFn>(records: &[RescaledMetaorder], n_bins: usize, scaling: &F) -> Result<(ScalingCurve, Result<FitResult>)> {
    let mut curve = bin_scaling(records, n_bins)?;
    let fit = fit_eta_star(&curve, scaling);
    curve.fit = fit.as_ref().ok().copied();
    Ok((curve, fit))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitPoint {
    /// Quantile of `T_vol` in `(0, 1)`.
    Quantile(f64),
    Value(f64),
}

impl Default for SplitPoint {
    fn default() -> Self {
        SplitPoint::Quantile(0.5)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DurationSplit {
    /// Records with `T_vol < split`.
    pub short: Vec<RescaledMetaorder>,
    pub long: Vec<RescaledMetaorder>,
    pub split: f64,
}

impl DurationSplit {
    /// True when either half is empty.
    pub fn degenerate(&self) -> bool {
        self.short.is_empty() || self.long.is_empty()
    }
}

fn sorted_durations(records: &[RescaledMetaorder]) -> Vec<f64> {
    let mut t: Vec<f64> = records.iter().map(|r| r.t_vol).collect();
    t.sort_by(f64::total_cmp);
    t
}

pub fn split_by_duration(records: &[RescaledMetaorder], at: SplitPoint) -> Result<DurationSplit> {
    if records.is_empty() {
        return Err(Error::InsufficientData { needed: 1, available: 0 });
    }
    let split = match at {
        SplitPoint::Value(v) => v,
        SplitPoint::Quantile(q) => {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::invalid("quantile", "must lie in (0, 1)"));
            }
            let t = sorted_durations(records);
            t[((q * t.len() as f64) as usize).min(t.len() - 1)]
        }
    };
    let (short, long) = records.iter().partition(|r| r.t_vol < split);
    Ok(DurationSplit { short, long, split })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DurationBinFit {
    pub t_mean: f64,
    pub count: usize,
    pub fit: Result<FitResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaStarVsT {
    pub points: Vec<DurationBinFit>,
    /// Regression of `ln eta*` on `ln T` over the bins that fitted.
    pub slope: Option<LinearFit>,
}

/// Crossover per evenly populated bin of `T_vol`, each bin binned with
/// [`subsample_bins`] and fitted on its own.
pub fn eta_star_vs_t<F: ScalingFn + Sync>(records: &[RescaledMetaorder], n_t_bins: usize, scaling: &F) -> Result<EtaStarVsT> {
    if n_t_bins < 3 {
        return Err(Error::invalid("n_t_bins", "must be >= 3"));
    }
    if records.len() < n_t_bins {
        return Err(Error::InsufficientData { needed: n_t_bins, available: records.len() });
    }
    let mut sorted = records.to_vec();
    sorted.sort_by(|a, b| a.t_vol.total_cmp(&b.t_vol).then(a.eta.total_cmp(&b.eta)));
    let mut points = Vec::with_capacity(n_t_bins);
    let mut start = 0;
    for size in group_sizes(sorted.len(), n_t_bins) {
        let chunk = &sorted[start..start + size];
        start += size;
        let t_mean = chunk.iter().map(|r| r.t_vol).sum::<f64>() / size as f64;
        let fit = bin_scaling(chunk, subsample_bins(size)).and_then(|c| fit_eta_star(&c, scaling));
        points.push(DurationBinFit { t_mean, count: size, fit });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        points.iter().filter_map(|p| p.fit.as_ref().ok().map(|f| (ln(p.t_mean), ln(f.eta_star)))).unzip();
    let slope = if xs.len() >= 2 { linear_fit(&xs, &ys).ok() } else { None };
    Ok(EtaStarVsT { points, slope })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Square-root regime: `impact ~ sqrt(phi) T^-beta`.
    AboveEtaStar,
    /// Linear regime: `impact ~ phi T^-beta`.
    BelowEtaStar,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaFit {
    pub beta: f64,
    pub stderr: Option<f64>,
    pub n: usize,
}

const MIN_T_SPAN: f64 = 10.0;

/// Least-squares exponent `beta` of the duration dependence of impact
/// within one regime. Records with non-positive impact cannot enter the
/// log fit and are skipped.
pub fn regress_t_exponent(records: &[RescaledMetaorder], regime: Regime, eta_star: f64) -> Result<BetaFit> {
    if !(eta_star.is_finite() && eta_star > 0.0) {
        return Err(Error::invalid("eta_star", "must be finite and > 0"));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| match regime {
            Regime::AboveEtaStar => r.eta > eta_star,
            Regime::BelowEtaStar => r.eta < eta_star,
        })
        .filter(|r| r.impact_obs > 0.0)
        .map(|r| {
            let scale = match regime {
                Regime::AboveEtaStar => sqrt(r.phi),
                Regime::BelowEtaStar => r.phi,
            };
            (ln(r.t_vol), ln(r.impact_obs / scale))
        })
        .unzip();
    if xs.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, available: xs.len() });
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < ln(MIN_T_SPAN) {
        return Err(Error::InsufficientSpan("durations span less than a decade"));
    }
    let fit = linear_fit(&xs, &ys)?;
    Ok(BetaFit { beta: -fit.slope, stderr: fit.slope_stderr, n: fit.n })
}
