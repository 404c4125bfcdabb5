//! JSON configuration files of the subcommands.
//!
//! Books are given as `{"D": .., "nu": .., "lam": ..}` under `book` (one
//! book) or `slow` and `fast` (two books). Synthetic data may instead name
//! the crossover it should realise under `crossover`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use llob_core::dual::DualBookParams;
use llob_core::params::{BookParams, MetaorderSpec, Side};
use llob_core::synth::{NoiseScaling, SynthModel};

use crate::error::{CliError, Result};

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn load_or_default<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    path.map_or_else(|| Ok(T::default()), load)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BookConfig {
    #[serde(rename = "D")]
    pub d: f64,
    pub nu: f64,
    pub lam: f64,
}

impl BookConfig {
    pub fn params(&self) -> Result<BookParams> {
        BookParams::new(self.d, self.nu, self.lam).map_err(|e| CliError::Config(e.to_string()))
    }
}

impl From<&BookParams> for BookConfig {
    fn from(p: &BookParams) -> Self {
        Self { d: p.d(), nu: p.nu(), lam: p.lam() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossoverConfig {
    pub eta_star: f64,
    /// Large-`eta` limit of `impact / sqrt(phi)`.
    pub plateau: f64,
    pub t_dagger: f64,
    #[serde(rename = "J", default = "one")]
    pub total_rate: f64,
    #[serde(default = "default_nu_slow")]
    pub nu_slow: f64,
}

fn one() -> f64 {
    1.0
}

fn default_nu_slow() -> f64 {
    1e-3
}

/// Picks the model from the book fields present in a config file.
fn resolve_model(
    book: Option<BookConfig>,
    slow: Option<BookConfig>,
    fast: Option<BookConfig>,
    crossover: Option<CrossoverConfig>,
) -> Result<SynthModel> {
    match (book, slow, fast, crossover) {
        (Some(b), None, None, None) => Ok(SynthModel::Single(b.params()?)),
        (None, Some(s), Some(f), None) => Ok(SynthModel::Dual(DualBookParams::new(s.params()?, f.params()?))),
        (None, None, None, Some(c)) => DualBookParams::from_crossover(c.eta_star, c.plateau, c.t_dagger, c.total_rate, c.nu_slow)
            .map(SynthModel::Dual)
            .map_err(|e| CliError::Config(e.to_string())),
        _ => Err(CliError::Config("give exactly one of `book`, `slow` together with `fast`, or `crossover`".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaorderConfig {
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(default = "buy")]
    pub sign: i64,
}

fn buy() -> i64 {
    1
}

impl MetaorderConfig {
    pub fn spec(&self) -> Result<MetaorderSpec> {
        let side = Side::from_sign(self.sign).map_err(|e| CliError::Config(e.to_string()))?;
        MetaorderSpec::new(self.q, self.t, side).map_err(|e| CliError::Config(e.to_string()))
    }
}

pub const DEFAULT_CELLS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_cells")]
    pub cells: usize,
    /// Half-width of the symmetric grid; chosen from the books and the
    /// metaorder when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
}

fn default_cells() -> usize {
    DEFAULT_CELLS
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { cells: DEFAULT_CELLS, half_width: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub book: Option<BookConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slow: Option<BookConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast: Option<BookConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossover: Option<CrossoverConfig>,
    pub metaorder: MetaorderConfig,
    #[serde(default)]
    pub grid: GridConfig,
    /// Time step; the largest stable one when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

impl SimulateConfig {
    pub fn model(&self) -> Result<SynthModel> {
        resolve_model(self.book, self.slow, self.fast, self.crossover)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingFnConfig {
    pub eta_min: f64,
    pub eta_max: f64,
    pub points: usize,
    pub n_steps: usize,
    pub tol: f64,
}

impl Default for ScalingFnConfig {
    fn default() -> Self {
        Self {
            eta_min: 1e-4,
            eta_max: 1e4,
            points: 81,
            n_steps: llob_core::integral::DEFAULT_STEPS,
            tol: llob_core::integral::DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseConfig {
    #[default]
    Absolute,
    PerSqrtPhi,
}

impl From<NoiseConfig> for NoiseScaling {
    fn from(n: NoiseConfig) -> Self {
        match n {
            NoiseConfig::Absolute => NoiseScaling::Absolute,
            NoiseConfig::PerSqrtPhi => NoiseScaling::PerSqrtPhi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthFileConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub book: Option<BookConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slow: Option<BookConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast: Option<BookConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossover: Option<CrossoverConfig>,
    pub n: usize,
    #[serde(rename = "Q_range", default = "default_q_range")]
    pub q_range: (f64, f64),
    #[serde(rename = "T_range", default = "default_t_range")]
    pub t_range: (f64, f64),
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub seed: u64,
}

impl SynthFileConfig {
    pub fn model(&self) -> Result<SynthModel> {
        resolve_model(self.book, self.slow, self.fast, self.crossover)
    }
}

fn default_q_range() -> (f64, f64) {
    (1e-5, 1e-1)
}

fn default_t_range() -> (f64, f64) {
    (1e-2, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitFileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    pub bins: usize,
    pub phi_min: f64,
    pub by_duration: bool,
    #[serde(rename = "eta_star_vs_T")]
    pub eta_star_vs_t: bool,
    #[serde(rename = "T_bins")]
    pub t_bins: usize,
}

impl Default for FitFileConfig {
    fn default() -> Self {
        Self {
            input: None,
            bins: llob_core::analysis::DEFAULT_BINS,
            phi_min: llob_core::records::DEFAULT_PHI_MIN,
            by_duration: false,
            eta_star_vs_t: false,
            t_bins: llob_core::analysis::DEFAULT_T_BINS,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_and_dual_shapes() {
        let single: SimulateConfig =
            serde_json::from_str(r#"{"book": {"D": 1, "nu": 0.01, "lam": 0.1}, "metaorder": {"Q": 0.5, "T": 1}}"#).unwrap();
        assert!(matches!(single.model().unwrap(), SynthModel::Single(_)));
        assert_eq!(single.grid, GridConfig::default());
        assert_eq!(single.metaorder.sign, 1);

        let dual: SimulateConfig = serde_json::from_str(
            r#"{"slow": {"D": 1e-3, "nu": 1e-3, "lam": 0.01}, "fast": {"D": 1, "nu": 50, "lam": 5},
                "metaorder": {"Q": 0.1, "T": 1, "sign": -1}, "grid": {"cells": 1000}, "dt": 1e-4}"#,
        )
        .unwrap();
        assert!(matches!(dual.model().unwrap(), SynthModel::Dual(_)));
        assert_eq!(dual.metaorder.spec().unwrap().side(), Side::Sell);
    }

    #[test]
    fn ambiguous_or_bad_models_rejected() {
        let b = BookConfig { d: 1.0, nu: 1.0, lam: 1.0 };
        assert!(resolve_model(None, None, None, None).is_err());
        assert!(resolve_model(Some(b), Some(b), None, None).is_err());
        assert!(resolve_model(None, Some(b), None, None).is_err());
        assert!(resolve_model(Some(BookConfig { d: -1.0, ..b }), None, None, None).is_err());
        let c = CrossoverConfig { eta_star: 1e-3, plateau: 0.4, t_dagger: 1.0, total_rate: 1.0, nu_slow: 1e-3 };
        assert!(matches!(resolve_model(None, None, None, Some(c)), Ok(SynthModel::Dual(_))));
    }

    #[test]
    fn unknown_keys_rejected() {
        let r: std::result::Result<MetaorderConfig, _> = serde_json::from_str(r#"{"Q": 1, "T": 1, "m": 2}"#);
        assert!(r.is_err());
        let r: std::result::Result<FitFileConfig, _> = serde_json::from_str(r#"{"binz": 3}"#);
        assert!(r.is_err());
        let r: std::result::Result<SimulateConfig, _> =
            serde_json::from_str(r#"{"book": {"D": 1, "nu": 1, "lam": 1}, "metaorder": {"Q": 1, "T": 1}, "extra": 0}"#);
        assert!(r.is_err());
    }

    #[test]
    fn fit_defaults() {
        let c: FitFileConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c.bins, 30);
        assert_eq!(c.phi_min, 1e-5);
        assert_eq!(c.t_bins, 5);
    }
}
