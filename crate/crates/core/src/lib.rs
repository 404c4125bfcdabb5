//! Latent-liquidity ("locally linear order book") theory of metaorder impact.
//!
//! The crate is `no_std` and only needs an allocator. It contains:
//!
//! * [`params`]: book parameters, metaorders and derived liquidity quantities.
//! * [`pde`]: explicit finite-difference solver for the latent order density
//!   with a moving transaction price and a metaorder source.
//! * [`integral`]: the self-consistent price trajectory during execution and
//!   the linear to square-root crossover function `F(eta)`.
//! * [`dual`]: the slow/fast two-book extension.
//! * [`records`] and [`synth`]: metaorder records, their normalisation and a
//!   model-driven synthetic generator.
//! * [`analysis`]: quantile binning, crossover fits and exponent regressions.
//!
//! IO, file formats and the command line live in the companion `llob` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod dual;
mod error;
pub mod integral;
pub mod math;
pub mod params;
pub mod pde;
pub mod records;
pub mod synth;

pub use error::Error;

/// Advisory flags raised when inputs leave the regime an asymptotic result
/// was derived for. Never fatal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeWarning {
    /// `nu T` above 0.1 for a book treated as slow.
    SlowBook { nu_t: f64 },
    /// `nu T` below 10 for a book treated as fast.
    FastBook { nu_t: f64 },
    /// `J_s / J_f` above 0.1.
    FlowRatio { ratio: f64 },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
