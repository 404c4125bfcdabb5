//! Executed metaorders and their normalisation to model units.
//!
//! Prices become `log P / sigma_d` with the daily range proxy
//! `sigma_d = (P_high − P_low) / P_open`; volumes are measured in daily
//! volume and durations in volume time `V_T / V_d`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::math::{exp, ln};
use crate::params::Side;

/// Seconds since the Unix epoch, UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(pub i64);

#[derive(Debug, Clone, PartialEq)]
pub struct MetaorderRecord {
    pub symbol: String,
    pub side: Side,
    /// Executed volume in shares.
    pub q: f64,
    pub t_start: Timestamp,
    pub t_end: Timestamp,
    pub p_start: f64,
    pub p_end: f64,
    /// Market volume traded during the execution.
    pub v_t: f64,
    /// Daily market volume.
    pub v_d: f64,
    pub p_high: f64,
    pub p_low: f64,
    pub p_open: f64,
}

/// Why a record was left out of the analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    NonFinite,
    NonPositiveVolume,
    ZeroMarketVolume,
    MarketVolumeAboveDaily,
    ParticipationAboveOne,
    NonPositiveDuration,
    NonPositivePrice,
    OpenOutsideRange,
    ZeroVolatility,
}

impl RejectReason {
    pub const ALL: [RejectReason; 9] = [
        RejectReason::NonFinite,
        RejectReason::NonPositiveVolume,
        RejectReason::ZeroMarketVolume,
        RejectReason::MarketVolumeAboveDaily,
        RejectReason::ParticipationAboveOne,
        RejectReason::NonPositiveDuration,
        RejectReason::NonPositivePrice,
        RejectReason::OpenOutsideRange,
        RejectReason::ZeroVolatility,
    ];

    /// Stable machine-readable code.
    pub fn code(self) -> &'static str {
        match self {
            RejectReason::NonFinite => "non_finite",
            RejectReason::NonPositiveVolume => "non_positive_q",
            RejectReason::ZeroMarketVolume => "zero_market_volume",
            RejectReason::MarketVolumeAboveDaily => "v_t_above_v_d",
            RejectReason::ParticipationAboveOne => "q_above_v_t",
            RejectReason::NonPositiveDuration => "t_end_not_after_t_start",
            RejectReason::NonPositivePrice => "non_positive_price",
            RejectReason::OpenOutsideRange => "open_outside_daily_range",
            RejectReason::ZeroVolatility => "zero_daily_range",
        }
    }
}

impl core::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.code())
    }
}

/// A record in model units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaledMetaorder {
    /// `Q / V_T`.
    pub eta: f64,
    /// `eta * t_vol`, i.e. `Q / V_d` up to rounding.
    pub phi: f64,
    /// `V_T / V_d`.
    pub t_vol: f64,
    /// `sign (ln P_end − ln P_start) / sigma_d`.
    pub impact_obs: f64,
}

impl MetaorderRecord {
    pub fn daily_volatility(&self) -> f64 {
        (self.p_high - self.p_low) / self.p_open
    }

    pub fn validate(&self) -> Result<(), RejectReason> {
        let numbers = [self.q, self.p_start, self.p_end, self.v_t, self.v_d, self.p_high, self.p_low, self.p_open];
        if numbers.iter().any(|x| !x.is_finite()) {
            return Err(RejectReason::NonFinite);
        }
        if self.q <= 0.0 {
            return Err(RejectReason::NonPositiveVolume);
        }
        if self.v_t <= 0.0 {
            return Err(RejectReason::ZeroMarketVolume);
        }
        if self.v_d < self.v_t {
            return Err(RejectReason::MarketVolumeAboveDaily);
        }
        if self.q > self.v_t {
            return Err(RejectReason::ParticipationAboveOne);
        }
        if self.t_end <= self.t_start {
            return Err(RejectReason::NonPositiveDuration);
        }
        if [self.p_start, self.p_end, self.p_high, self.p_low, self.p_open].iter().any(|&p| p <= 0.0) {
            return Err(RejectReason::NonPositivePrice);
        }
        if !(self.p_low <= self.p_open && self.p_open <= self.p_high) {
            return Err(RejectReason::OpenOutsideRange);
        }
        if self.p_high == self.p_low {
            return Err(RejectReason::ZeroVolatility);
        }
        Ok(())
    }

    /// Checks the record and converts it to model units.
    pub fn rescale(&self) -> Result<RescaledMetaorder, RejectReason> {
        self.validate()?;
        let sigma = self.daily_volatility();
        let eta = self.q / self.v_t;
        let t_vol = self.v_t / self.v_d;
        let impact_obs = self.side.sign() * (ln(self.p_end) - ln(self.p_start)) / sigma;
        Ok(RescaledMetaorder { eta, phi: eta * t_vol, t_vol, impact_obs })
    }

    /// End price implied by a normalised impact, the inverse of [`rescale`](Self::rescale).
    pub fn end_price_for(&self, impact_obs: f64) -> f64 {
        self.p_start * exp(self.side.sign() * impact_obs * self.daily_volatility())
    }
}

/// Rescaled records with the rejected ones counted by reason.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RescaleOutcome {
    pub accepted: Vec<RescaledMetaorder>,
    /// `(input index, reason)` for every rejected record.
    pub rejected: Vec<(usize, RejectReason)>,
}

impl RescaleOutcome {
    pub fn count(&self, reason: RejectReason) -> usize {
        self.rejected.iter().filter(|(_, r)| *r == reason).count()
    }
}

pub fn rescale_all(records: &[MetaorderRecord]) -> RescaleOutcome {
    let mut out = RescaleOutcome::default();
    for (i, rec) in records.iter().enumerate() {
        match rec.rescale() {
            Ok(r) => out.accepted.push(r),
            Err(reason) => out.rejected.push((i, reason)),
        }
    }
    out
}

pub const DEFAULT_PHI_MIN: f64 = 1e-5;

/// Keeps the records with `phi >= phi_min`.
pub fn filter_min_size(records: &[RescaledMetaorder], phi_min: f64) -> Vec<RescaledMetaorder> {
    records.iter().copied().filter(|r| r.phi >= phi_min).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record() -> MetaorderRecord {
        MetaorderRecord {
            symbol: "ABC".into(),
            side: Side::Buy,
            q: 1000.0,
            t_start: Timestamp(0),
            t_end: Timestamp(600),
            p_start: 100.0,
            p_end: 100.4,
            v_t: 20_000.0,
            v_d: 1_000_000.0,
            p_high: 102.0,
            p_low: 98.0,
            p_open: 100.0,
        }
    }

    #[test]
    fn rescale_example() {
        let r = record().rescale().unwrap();
        // ln(1.004) = 0.0039920212695374..., sigma_d = 4 / 100.
        assert!((r.impact_obs - 0.003_992_021_269_537_4 / 0.04).abs() < 1e-12);
        assert!((r.impact_obs - 0.0998).abs() < 1e-4);
        assert_eq!(r.eta, 0.05);
        assert_eq!(r.t_vol, 0.02);
        assert_eq!(r.phi, r.eta * r.t_vol);
        assert!((r.phi - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn flat_price_zero_impact_and_full_participation() {
        let mut rec = record();
        rec.p_end = rec.p_start;
        rec.q = rec.v_t;
        let r = rec.rescale().unwrap();
        assert_eq!(r.impact_obs, 0.0);
        assert_eq!(r.eta, 1.0);
    }

    #[test]
    fn sell_sign_flips_impact() {
        let mut rec = record();
        rec.side = Side::Sell;
        rec.p_end = 99.6;
        assert!(rec.rescale().unwrap().impact_obs > 0.0);
    }

    #[test]
    fn rejections() {
        let cases: [(fn(&mut MetaorderRecord), RejectReason); 8] = [
            (|r| r.p_low = r.p_high, RejectReason::OpenOutsideRange),
            (|r| r.v_t = 0.0, RejectReason::ZeroMarketVolume),
            (|r| r.q = 0.0, RejectReason::NonPositiveVolume),
            (|r| r.v_d = 1.0, RejectReason::MarketVolumeAboveDaily),
            (|r| r.q = 1e9, RejectReason::ParticipationAboveOne),
            (|r| r.t_end = r.t_start, RejectReason::NonPositiveDuration),
            (|r| r.p_end = -1.0, RejectReason::NonPositivePrice),
            (|r| r.p_start = f64::NAN, RejectReason::NonFinite),
        ];
        for (edit, reason) in cases {
            let mut rec = record();
            edit(&mut rec);
            assert_eq!(rec.rescale(), Err(reason));
        }
        let mut rec = record();
        rec.p_high = 100.0;
        rec.p_low = 100.0;
        assert_eq!(rec.rescale(), Err(RejectReason::ZeroVolatility));
    }

    #[test]
    fn codes_are_distinct() {
        let mut codes: Vec<_> = RejectReason::ALL.iter().map(|r| r.code()).collect();
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), RejectReason::ALL.len());
    }

    #[test]
    fn rescale_all_counts_rejections() {
        let mut bad = record();
        bad.v_t = 0.0;
        let out = rescale_all(&[record(), bad, record()]);
        assert_eq!(out.accepted.len(), 2);
        assert_eq!(out.rejected, [(1, RejectReason::ZeroMarketVolume)]);
        assert_eq!(out.count(RejectReason::ZeroMarketVolume), 1);
    }

    fn with_phi(phi: f64) -> RescaledMetaorder {
        RescaledMetaorder { eta: 0.1, phi, t_vol: phi / 0.1, impact_obs: 0.0 }
    }

    #[test]
    fn size_filter() {
        let set = [with_phi(1e-6), with_phi(1e-4)];
        assert_eq!(filter_min_size(&set, 0.0), set.to_vec());
        assert_eq!(filter_min_size(&set, DEFAULT_PHI_MIN), [with_phi(1e-4)]);
        assert!(filter_min_size(&set, 1.0).is_empty());
    }

    proptest! {
        #[test]
        fn rescale_roundtrips_end_price(
            p_start in 1.0..1e3f64, ret in -0.2..0.2f64, range in 1e-3..0.5f64, open_pos in 0.0..1.0f64,
            q in 1.0..1e4f64, extra in 0.0..1e5f64, daily in 0.0..1e7f64, sell in any::<bool>(),
        ) {
            let p_low = 100.0 * (1.0 - range * open_pos);
            let mut rec = record();
            rec.side = if sell { Side::Sell } else { Side::Buy };
            rec.p_start = p_start;
            rec.p_end = p_start * ret.exp();
            rec.p_open = 100.0;
            rec.p_low = p_low;
            rec.p_high = p_low + 100.0 * range;
            rec.q = q;
            rec.v_t = q + extra;
            rec.v_d = rec.v_t + daily;
            let r = rec.rescale().unwrap();
            prop_assert!((rec.end_price_for(r.impact_obs) / rec.p_end - 1.0).abs() < 1e-12);
            prop_assert_eq!(r.phi, r.eta * r.t_vol);
            prop_assert!(r.eta > 0.0 && r.eta <= 1.0 && r.t_vol > 0.0 && r.t_vol <= 1.0 && r.eta >= r.phi);
        }
    }
}
