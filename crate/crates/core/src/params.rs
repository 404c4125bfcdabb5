//! Model parameters and the dimensionless control variables.
//!
//! Units follow one convention everywhere: prices in daily-volatility
//! normalised log-price units, volumes in units of the daily volume and
//! times in fractions of a trading day (volume time).

use crate::math::sqrt;
use crate::{Error, Result};

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(name, "must be finite and > 0"))
    }
}

/// Parameters of one latent order book.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BookParams {
    d: f64,
    nu: f64,
    lam: f64,
}

impl BookParams {
    /// `d`: price diffusivity, `nu`: cancellation rate, `lam`: deposition rate.
    pub fn new(d: f64, nu: f64, lam: f64) -> Result<Self> {
        Ok(Self { d: positive("D", d)?, nu: positive("nu", nu)?, lam: positive("lam", lam)? })
    }

    /// Book with prescribed slope `L` and transaction rate `J` for a given `nu`.
    pub fn from_liquidity(liquidity: f64, transaction_rate: f64, nu: f64) -> Result<Self> {
        let l = positive("L", liquidity)?;
        let j = positive("J", transaction_rate)?;
        let nu = positive("nu", nu)?;
        let d = j / l;
        Self::new(d, nu, l * sqrt(d * nu))
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn lam(&self) -> f64 {
        self.lam
    }

    /// Slope of the stationary density at the price, `lam / sqrt(D nu)`.
    pub fn slope(&self) -> f64 {
        self.lam / sqrt(self.d * self.nu)
    }

    /// Flux of orders through the price, `D L`.
    pub fn transaction_rate(&self) -> f64 {
        self.d * self.slope()
    }

    /// Distance over which the stationary density saturates, `sqrt(D / nu)`.
    pub fn decay_length(&self) -> f64 {
        sqrt(self.d / self.nu)
    }

    /// Far-field density magnitude `lam / nu`.
    pub fn far_field(&self) -> f64 {
        self.lam / self.nu
    }

    pub fn with_lam(&self, lam: f64) -> Result<Self> {
        Self::new(self.d, self.nu, lam)
    }
}

/// Stationary slope and transaction rate of a book.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Liquidity {
    pub slope: f64,
    pub transaction_rate: f64,
}

pub fn liquidity(params: &BookParams) -> Liquidity {
    Liquidity { slope: params.slope(), transaction_rate: params.transaction_rate() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Buy => 1.0,
            Side::Sell => -1.0,
        }
    }

    pub fn from_sign(sign: i64) -> Result<Self> {
        match sign {
            1 => Ok(Side::Buy),
            -1 => Ok(Side::Sell),
            _ => Err(Error::invalid("sign", "must be +1 or -1")),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        }
    }
}

/// A metaorder executed at constant rate over `[0, T]`.
///
/// A zero volume is accepted and describes the absence of a metaorder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetaorderSpec {
    volume: f64,
    duration: f64,
    side: Side,
}

impl MetaorderSpec {
    pub fn new(volume: f64, duration: f64, side: Side) -> Result<Self> {
        if !(volume.is_finite() && volume >= 0.0) {
            return Err(Error::invalid("Q", "must be finite and >= 0"));
        }
        Ok(Self { volume, duration: positive("T", duration)?, side })
    }

    pub fn buy(volume: f64, duration: f64) -> Result<Self> {
        Self::new(volume, duration, Side::Buy)
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Unsigned execution rate `m = Q / T`.
    pub fn rate(&self) -> f64 {
        self.volume / self.duration
    }

    pub fn with_side(self, side: Side) -> Self {
        Self { side, ..self }
    }

    pub fn with_duration(self, duration: f64) -> Result<Self> {
        Self::new(self.volume, duration, self.side)
    }
}

/// Participation rate and daily volume fraction of one execution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dimensionless {
    pub eta: f64,
    pub phi: f64,
}

impl Dimensionless {
    /// Model form: `eta = Q / (J T)`, `phi = Q / (J T_d)` with a one-day `T_d`.
    pub fn from_model(spec: &MetaorderSpec, transaction_rate: f64) -> Self {
        Self {
            eta: participation_rate(spec, transaction_rate),
            phi: spec.volume() / transaction_rate,
        }
    }
}

/// `eta = Q / (J T)`.
pub fn participation_rate(spec: &MetaorderSpec, transaction_rate: f64) -> f64 {
    spec.rate() / transaction_rate
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn liquidity_examples() {
        for &(d, nu, lam, l, j) in &[
            (1.0, 1.0, 1.0, 1.0, 1.0),
            (4.0, 1.0, 2.0, 1.0, 4.0),
            (0.25, 4.0, 3.0, 3.0, 0.75),
        ] {
            let liq = liquidity(&BookParams::new(d, nu, lam).unwrap());
            assert!(close(liq.slope, l) && close(liq.transaction_rate, j), "{d} {nu} {lam}");
        }
    }

    #[test]
    fn participation_examples() {
        let eta = |q, t, j| participation_rate(&MetaorderSpec::buy(q, t).unwrap(), j);
        assert!(close(eta(1.0, 1.0, 1.0), 1.0));
        assert!(close(eta(10.0, 2.0, 100.0), 0.05));
        assert!((eta(0.5, 0.09, 1.0) - 5.56).abs() < 0.005);
    }

    #[test]
    fn rejects_non_positive_inputs() {
        assert!(BookParams::new(0.0, 1.0, 1.0).is_err());
        assert!(BookParams::new(1.0, -1.0, 1.0).is_err());
        assert!(BookParams::new(1.0, 1.0, f64::NAN).is_err());
        assert!(MetaorderSpec::buy(-1.0, 1.0).is_err());
        assert!(MetaorderSpec::buy(1.0, 0.0).is_err());
        assert!(Side::from_sign(0).is_err());
    }

    #[test]
    fn rate_times_duration_is_volume() {
        let spec = MetaorderSpec::buy(3.0, 1.5).unwrap();
        assert_eq!(spec.rate() * spec.duration(), spec.volume());
    }

    #[test]
    fn from_liquidity_roundtrip() {
        let p = BookParams::from_liquidity(2.5, 0.3, 0.01).unwrap();
        assert!(close(p.slope(), 2.5));
        assert!(close(p.transaction_rate(), 0.3));
    }

    proptest! {
        #[test]
        fn liquidity_scales_with_deposition(d in 1e-3..1e3f64, nu in 1e-3..1e3f64, lam in 1e-3..1e3f64, c in 1e-3..1e3f64) {
            let base = liquidity(&BookParams::new(d, nu, lam).unwrap());
            let scaled = liquidity(&BookParams::new(d, nu, c * lam).unwrap());
            prop_assert!((scaled.slope / base.slope / c - 1.0).abs() < 1e-12);
            prop_assert!((scaled.transaction_rate / base.transaction_rate / c - 1.0).abs() < 1e-12);
        }

        #[test]
        fn participation_is_scale_free(q in 1e-6..1e3f64, t in 1e-4..1e2f64, j in 1e-3..1e3f64, c in 1e-3..1e3f64) {
            let a = participation_rate(&MetaorderSpec::buy(q, t).unwrap(), j);
            let b = participation_rate(&MetaorderSpec::buy(c * q, c * t).unwrap(), j);
            prop_assert!((a / b - 1.0).abs() < 1e-12);
        }
    }
}
