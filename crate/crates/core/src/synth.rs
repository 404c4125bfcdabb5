//! Synthetic metaorders drawn from the impact law, for closed-loop tests of
//! the estimation pipeline.
//!
//! Records are emitted in model units: `V_d = 1`, `V_T = J T` and a daily
//! range with `sigma_d = 1`, so that rescaling returns `eta = Q / (J T)`,
//! `phi = Q` and `T_vol = J T` with `J` the total transaction rate.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::dual::{impact_dual, DualBookParams};
use crate::integral::{impact, ScalingFn};
use crate::math::{exp, ln, sqrt};
use crate::params::{BookParams, MetaorderSpec, Side};
use crate::records::{MetaorderRecord, Timestamp};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthModel {
    Single(BookParams),
    Dual(DualBookParams),
}

impl SynthModel {
    pub fn transaction_rate(&self) -> f64 {
        match self {
            SynthModel::Single(p) => p.transaction_rate(),
            SynthModel::Dual(p) => p.total_rate(),
        }
    }

    /// Unsigned model impact of a buy of `q` over `t`.
    pub fn impact<F: ScalingFn>(&self, q: f64, t: f64, scaling: &F) -> Result<f64> {
        let spec = MetaorderSpec::buy(q, t)?;
        Ok(match self {
            SynthModel::Single(p) => impact(p, &spec, scaling),
            SynthModel::Dual(p) => impact_dual(p, &spec, scaling).impact,
        })
    }
}

/// How the noise standard deviation relates to the recorded impact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseScaling {
    /// `impact_obs += sigma * N(0, 1)`.
    #[default]
    Absolute,
    /// `impact_obs += sigma * sqrt(phi) * N(0, 1)`: unit-free noise on
    /// `impact_obs / sqrt(phi)`, the quantity that gets binned.
    PerSqrtPhi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub model: SynthModel,
    pub n: usize,
    /// Log-uniform range of `Q` in daily volumes.
    pub q_range: (f64, f64),
    /// Log-uniform range of `T` in days.
    pub t_range: (f64, f64),
    pub noise_sigma: f64,
    pub noise: NoiseScaling,
    pub seed: u64,
}

/// Midnight UTC, 4 January 2010.
const BASE_EPOCH: i64 = 1_262_563_200;
const SESSION_OPEN: i64 = 34_200;
const SESSION_SECONDS: f64 = 23_400.0;
const RECORDS_PER_DAY: usize = 64;
const SYMBOLS: usize = 50;
const MAX_TRIALS_PER_RECORD: usize = 10_000;

fn check_range(name: &'static str, (lo, hi): (f64, f64)) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi {
        Ok(())
    } else {
        Err(Error::invalid(name, "need 0 < lo <= hi"))
    }
}

fn log_uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        return lo;
    }
    exp(ln(lo) + rng.random::<f64>() * (ln(hi) - ln(lo)))
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n", "must be >= 1"));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::invalid("noise_sigma", "must be finite and >= 0"));
        }
        check_range("q_range", self.q_range)?;
        check_range("t_range", self.t_range)?;
        let j = self.model.transaction_rate();
        if j * self.t_range.0 > 1.0 {
            return Err(Error::invalid("t_range", "market volume J T exceeds the daily volume"));
        }
        if self.q_range.0 > j * self.t_range.1.min(1.0 / j) {
            return Err(Error::invalid("q_range", "no draw with Q <= J T is possible"));
        }
        Ok(())
    }
}

/// Draws `n` records; identical configs give identical output.
pub fn synth_generate<F: ScalingFn>(config: &SynthConfig, scaling: &F) -> Result<Vec<MetaorderRecord>> {
    config.validate()?;
    let j = config.model.transaction_rate();
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, 1.0).map_err(|_| Error::invalid("noise_sigma", "bad normal"))?;
    let mut out = Vec::with_capacity(config.n);
    let mut trials = 0usize;
    while out.len() < config.n {
        trials += 1;
        if trials > MAX_TRIALS_PER_RECORD * config.n {
            return Err(Error::invalid("q_range/t_range", "acceptance region is too small"));
        }
        let t = log_uniform(&mut rng, config.t_range);
        let q = log_uniform(&mut rng, config.q_range);
        let v_t = j * t;
        if q > v_t || v_t > 1.0 {
            continue;
        }
        let side = if rng.random::<bool>() { Side::Buy } else { Side::Sell };
        let noise = config.noise_sigma * normal.sample(&mut rng);
        let scale = match config.noise {
            NoiseScaling::Absolute => 1.0,
            NoiseScaling::PerSqrtPhi => sqrt(q),
        };
        let impact_obs = config.model.impact(q, t, scaling)? + noise * scale;
        if !impact_obs.is_finite() {
            return Err(Error::NonFinite("impact"));
        }
        let i = out.len();
        let start = BASE_EPOCH + (i / RECORDS_PER_DAY) as i64 * 86_400 + SESSION_OPEN;
        let seconds = libm::round(t * SESSION_SECONDS).max(1.0) as i64;
        let p_start = 100.0;
        out.push(MetaorderRecord {
            symbol: format!("SYN{:02}", i % SYMBOLS),
            side,
            q,
            t_start: Timestamp(start),
            t_end: Timestamp(start + seconds),
            p_start,
            p_end: p_start * exp(side.sign() * impact_obs),
            v_t,
            v_d: 1.0,
            p_high: 150.0,
            p_low: 50.0,
            p_open: 100.0,
        });
    }
    Ok(out)
}
