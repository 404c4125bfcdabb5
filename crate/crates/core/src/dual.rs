//! Slow and fast latent books sharing one transaction price.
//!
//! The fast book carries most of the traded volume while the slow book
//! governs the impact. The crossover participation rate becomes
//! `eta* = J_s / J_f` and, for executions shorter than `T†`, the impact is
//! damped by `sqrt(T / T†)` with the crossover shifted to `eta* T† / T`.

use alloc::vec::Vec;

use crate::integral::ScalingFn;
use crate::math::{abs, sqrt};
use crate::params::{BookParams, MetaorderSpec};
use crate::pde::{self, Boundary, Coefficients, Grid};
use crate::{Error, RegimeWarning, Result};

/// `J_s / J_f` above which the fast book no longer dominates the volume.
pub const FLOW_RATIO_LIMIT: f64 = 0.1;
/// `nu_f T` below which the fast book is not renewed during execution.
pub const FAST_BOOK_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualBookParams {
    pub slow: BookParams,
    pub fast: BookParams,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverQuantities {
    pub eta_star: f64,
    pub t_dagger: f64,
}

impl DualBookParams {
    pub fn new(slow: BookParams, fast: BookParams) -> Self {
        Self { slow, fast }
    }

    /// Books realising a given crossover `eta* = J_s / J_f`, large-`eta`
    /// impact plateau `sqrt(2 D_s / J_s)` (per unit `sqrt(Q)`) and `T†`,
    /// with `J_s + J_f = total_rate` and `D_f = 1`. The cancellation rate of
    /// the slow book is the free parameter `nu_slow`.
    pub fn from_crossover(eta_star: f64, plateau: f64, t_dagger: f64, total_rate: f64, nu_slow: f64) -> Result<Self> {
        for (name, v) in [("eta_star", eta_star), ("plateau", plateau), ("t_dagger", t_dagger), ("J", total_rate)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, "must be finite and > 0"));
            }
        }
        let j_f = total_rate / (1.0 + eta_star);
        let j_s = eta_star * j_f;
        let amplitude = plateau / crate::integral::LARGE_ETA_PLATEAU;
        let d_s = amplitude * amplitude * j_s;
        let d_f = 1.0;
        let nu_f = d_s / (d_f * t_dagger * eta_star * eta_star);
        let slow = BookParams::from_liquidity(j_s / d_s, j_s, nu_slow)?;
        let fast = BookParams::from_liquidity(j_f / d_f, j_f, nu_f)?;
        Ok(Self { slow, fast })
    }

    pub fn total_rate(&self) -> f64 {
        self.slow.transaction_rate() + self.fast.transaction_rate()
    }

    /// Advisory flags for an execution of duration `duration`.
    pub fn regime_warnings(&self, duration: f64) -> Vec<RegimeWarning> {
        let mut out = Vec::new();
        let ratio = self.slow.transaction_rate() / self.fast.transaction_rate();
        if ratio > FLOW_RATIO_LIMIT {
            out.push(RegimeWarning::FlowRatio { ratio });
        }
        let slow = self.slow.nu() * duration;
        if slow > pde::SLOW_BOOK_LIMIT {
            out.push(RegimeWarning::SlowBook { nu_t: slow });
        }
        let fast = self.fast.nu() * duration;
        if fast < FAST_BOOK_LIMIT {
            out.push(RegimeWarning::FastBook { nu_t: fast });
        }
        out
    }
}

pub fn crossover(params: &DualBookParams) -> CrossoverQuantities {
    let eta_star = params.slow.transaction_rate() / params.fast.transaction_rate();
    let t_dagger = params.slow.d() / params.fast.d() / (eta_star * eta_star) / params.fast.nu();
    CrossoverQuantities { eta_star, t_dagger }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualImpact {
    /// Signed impact.
    pub impact: f64,
    /// `Q / (J_f T)`.
    pub eta: f64,
    /// Crossover in effect for this duration (shifted when `T < T†`).
    pub effective_eta_star: f64,
    pub crossover: CrossoverQuantities,
    pub warnings: Vec<RegimeWarning>,
}

/// Two-book impact law. The participation rate is measured against the
/// fast transaction rate, which dominates the market volume.
pub fn impact_dual<F: ScalingFn>(params: &DualBookParams, spec: &MetaorderSpec, scaling: &F) -> DualImpact {
    let crossover = crossover(params);
    let t = spec.duration();
    let eta = spec.rate() / params.fast.transaction_rate();
    let (damping, shift) = if t < crossover.t_dagger {
        (sqrt(t / crossover.t_dagger), crossover.t_dagger / t)
    } else {
        (1.0, 1.0)
    };
    let effective_eta_star = crossover.eta_star * shift;
    let q = spec.volume();
    let impact = if q == 0.0 {
        0.0
    } else {
        let prefactor = sqrt(params.slow.d() * q / params.slow.transaction_rate());
        spec.side().sign() * damping * prefactor * scaling.value(eta / effective_eta_star)
    };
    DualImpact { impact, eta, effective_eta_star, crossover, warnings: params.regime_warnings(t) }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualPdeRun {
    pub times: Vec<f64>,
    pub prices: Vec<f64>,
    /// Signed displacement `p(T) − p(0)`.
    pub impact: f64,
    /// Fraction of the metaorder volume absorbed by the slow book.
    pub slow_share: f64,
    pub warnings: Vec<RegimeWarning>,
}

/// Symmetric grid wide enough for both books.
pub fn dual_grid(params: &DualBookParams, spec: &MetaorderSpec, n_cells: usize) -> Result<Grid> {
    let half = pde::auto_half_width(&params.slow, spec).max(pde::auto_half_width(&params.fast, spec));
    Grid::symmetric(half, n_cells)
}

pub fn run_dual_pde(params: &DualBookParams, spec: &MetaorderSpec, grid: Grid, dt: f64) -> Result<DualPdeRun> {
    for book in [&params.slow, &params.fast] {
        pde::check_span(&grid, book.decay_length())?;
    }
    let mut run = run_dual_pde_with(&Coefficients::from(&params.slow), &Coefficients::from(&params.fast), spec, grid, dt)?;
    run.warnings = params.regime_warnings(spec.duration());
    Ok(run)
}

/// Both books start from their stationary profiles around zero. The
/// source is shared in proportion to each book's density gradient at the
/// price (evenly when both vanish). A book with `lam = 0` starts empty.
pub fn run_dual_pde_with(
    slow: &Coefficients,
    fast: &Coefficients,
    spec: &MetaorderSpec,
    grid: Grid,
    dt: f64,
) -> Result<DualPdeRun> {
    let n = grid.n_cells();
    let mut books = [initial_book(slow, &grid)?, initial_book(fast, &grid)?];
    let coeffs = [*slow, *fast];
    let (steps, dt) = pde::time_steps(spec.duration(), dt)?;
    pde::check_dt(&grid, slow.d.max(fast.d), dt)?;

    let mut scratch = alloc::vec![0.0; n];
    let mut total: Vec<f64> = (0..n).map(|i| books[0].0[i] + books[1].0[i]).collect();
    let mut price = pde::locate_price(&total, &grid, 0.0).ok_or(Error::PriceEscapedDomain { time: 0.0 })?;
    let p0 = price;
    let rate = spec.side().sign() * spec.rate();
    let mut slow_mass = 0.0;
    let mut times = Vec::with_capacity(steps + 1);
    let mut prices = Vec::with_capacity(steps + 1);
    times.push(0.0);
    prices.push(price);
    for k in 1..=steps {
        let time = k as f64 * dt;
        let share = if rate != 0.0 { slow_fraction(&books[0].0, &books[1].0, &grid, price) } else { 0.0 };
        for (b, (rho, boundary)) in books.iter_mut().enumerate() {
            pde::react_diffuse(rho, &mut scratch, &grid, &coeffs[b], *boundary, price, dt);
            core::mem::swap(rho, &mut scratch);
        }
        if rate != 0.0 {
            let mass = rate * dt;
            let escaped = Error::PriceEscapedDomain { time };
            pde::deposit_point_mass(&mut books[0].0, &grid, price, share * mass).ok_or(escaped.clone())?;
            pde::deposit_point_mass(&mut books[1].0, &grid, price, (1.0 - share) * mass).ok_or(escaped)?;
            slow_mass += share * mass;
        }
        for (i, t) in total.iter_mut().enumerate() {
            *t = books[0].0[i] + books[1].0[i];
        }
        price = pde::locate_price(&total, &grid, price).ok_or(Error::PriceEscapedDomain { time })?;
        if !price.is_finite() {
            return Err(Error::NonFinite("price"));
        }
        times.push(time);
        prices.push(price);
    }
    let q = spec.volume();
    let slow_share = if q > 0.0 { abs(slow_mass) / q } else { 0.0 };
    Ok(DualPdeRun { impact: price - p0, times, prices, slow_share, warnings: Vec::new() })
}

fn initial_book(coeffs: &Coefficients, grid: &Grid) -> Result<(Vec<f64>, Boundary)> {
    if coeffs.lam == 0.0 {
        return Ok((alloc::vec![0.0; grid.n_cells()], Boundary::Dirichlet { left: 0.0, right: 0.0 }));
    }
    let state = pde::stationary_state(coeffs, *grid)?;
    Ok((state.rho().to_vec(), state.boundary()))
}

fn gradient_at(rho: &[f64], grid: &Grid, price: f64) -> f64 {
    match pde::bracket(grid, price) {
        Some(i) => abs(rho[i] - rho[i + 1]) / grid.dx(),
        None => 0.0,
    }
}

fn slow_fraction(slow: &[f64], fast: &[f64], grid: &Grid, price: f64) -> f64 {
    let gs = gradient_at(slow, grid, price);
    let gf = gradient_at(fast, grid, price);
    if gs + gf > 0.0 {
        gs / (gs + gf)
    } else {
        0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integral::{small_eta_asymptote, LARGE_ETA_PLATEAU};
    use crate::params::Side;
    use proptest::prelude::*;

    /// Closed-form stand-in for `F` that has both asymptotes.
    struct Toy;

    impl ScalingFn for Toy {
        fn value(&self, eta: f64) -> f64 {
            let s = small_eta_asymptote(eta);
            s / sqrt(1.0 + s * s / (LARGE_ETA_PLATEAU * LARGE_ETA_PLATEAU))
        }
    }

    fn book(d: f64, nu: f64, lam: f64) -> BookParams {
        BookParams::new(d, nu, lam).unwrap()
    }

    #[test]
    fn symmetric_books() {
        let b = book(1.0, 2.0, 3.0);
        let c = crossover(&DualBookParams::new(b, b));
        assert!((c.eta_star - 1.0).abs() < 1e-15);
        assert!((c.t_dagger - 0.5).abs() < 1e-15);
    }

    #[test]
    fn doubling_slow_deposition() {
        let p = DualBookParams::new(book(0.01, 0.001, 0.02), book(1.0, 50.0, 4.0));
        let q = DualBookParams::new(p.slow.with_lam(0.04).unwrap(), p.fast);
        let (a, b) = (crossover(&p), crossover(&q));
        assert!((b.eta_star / a.eta_star - 2.0).abs() < 1e-12);
        assert!((b.t_dagger / a.t_dagger - 0.25).abs() < 1e-12);
    }

    #[test]
    fn quoted_operating_point() {
        // eta* = 3.15e-3 with D_s / D_f = 1e-4 gives T† of about 10 / nu_f.
        let t = 1e-4 / (3.15e-3f64 * 3.15e-3) / 1.0;
        assert!((t - 10.08).abs() < 0.01);
    }

    #[test]
    fn degenerate_books_reduce_to_single_book_law() {
        let b = book(1.0, 2.0, 3.0);
        let dual = DualBookParams::new(b, b);
        for &(q, t) in &[(0.01, 1.0), (3.0, 2.0), (50.0, 0.6)] {
            let spec = MetaorderSpec::buy(q, t).unwrap();
            let single = crate::integral::impact(&b, &spec, &Toy);
            let d = impact_dual(&dual, &spec, &Toy);
            assert!((d.impact / single - 1.0).abs() < 1e-14, "{q} {t}");
        }
    }

    #[test]
    fn plateau_for_large_participation() {
        let p = DualBookParams::new(book(1e-4, 1e-3, 0.03), book(1.0, 100.0, 10.0));
        let c = crossover(&p);
        let spec = MetaorderSpec::buy(1e5 * c.eta_star * p.fast.transaction_rate() * 10.0, 10.0).unwrap();
        assert!(spec.duration() >= c.t_dagger);
        let r = impact_dual(&p, &spec, &Toy);
        let expected = LARGE_ETA_PLATEAU * sqrt(p.slow.d() * spec.volume() / p.slow.transaction_rate());
        assert!((r.impact / expected - 1.0).abs() < 1e-3);
    }

    #[test]
    fn warnings_follow_regime() {
        let good = DualBookParams::new(book(1e-4, 1e-3, 0.03), book(1.0, 100.0, 10.0));
        assert!(good.regime_warnings(1.0).is_empty());
        let bad = DualBookParams::new(book(1.0, 1.0, 1.0), book(1.0, 1.0, 1.0));
        assert_eq!(bad.regime_warnings(1.0).len(), 3);
        let spec = MetaorderSpec::buy(1.0, 1.0).unwrap();
        assert_eq!(impact_dual(&bad, &spec, &Toy).warnings.len(), 3);
    }

    #[test]
    fn from_crossover_roundtrip() {
        let p = DualBookParams::from_crossover(3.15e-3, 0.4, 1e-3, 1.0, 1e-3).unwrap();
        let c = crossover(&p);
        assert!((c.eta_star / 3.15e-3 - 1.0).abs() < 1e-12);
        assert!((c.t_dagger / 1e-3 - 1.0).abs() < 1e-12);
        assert!((p.total_rate() - 1.0).abs() < 1e-12);
        let amp = sqrt(p.slow.d() / p.slow.transaction_rate()) * LARGE_ETA_PLATEAU;
        assert!((amp - 0.4).abs() < 1e-12);
    }

    #[test]
    fn zero_volume_and_sides() {
        let p = DualBookParams::new(book(1e-4, 1e-3, 0.03), book(1.0, 100.0, 10.0));
        let spec = MetaorderSpec::buy(0.0, 1.0).unwrap();
        assert_eq!(impact_dual(&p, &spec, &Toy).impact, 0.0);
        let buy = MetaorderSpec::buy(0.2, 0.5).unwrap();
        let a = impact_dual(&p, &buy, &Toy).impact;
        let b = impact_dual(&p, &buy.with_side(Side::Sell), &Toy).impact;
        assert_eq!(a, -b);
    }

    proptest! {
        #[test]
        fn continuous_across_t_dagger(ds in 1e-5..1e-2f64, nu_f in 1.0..1e3f64, lam_s in 1e-4..1e-2f64, q in 1e-5..1.0f64) {
            let p = DualBookParams::new(book(ds, 1e-3, lam_s), book(1.0, nu_f, 5.0));
            let c = crossover(&p);
            let at = MetaorderSpec::buy(q, c.t_dagger).unwrap();
            let below = at.with_duration(c.t_dagger * (1.0 - 1e-15)).unwrap();
            let a = impact_dual(&p, &at, &Toy).impact;
            let b = impact_dual(&p, &below, &Toy).impact;
            prop_assert!((a / b - 1.0).abs() < 1e-12);
        }

        #[test]
        fn linear_deep_below_crossover(q in 1e-3..1.0f64, t_scale in 1.0..100.0f64) {
            let p = DualBookParams::new(book(1e-4, 1e-3, 0.03), book(1.0, 100.0, 10.0));
            let c = crossover(&p);
            let t = c.t_dagger * t_scale;
            let q = q * 1e-3 * c.eta_star * p.fast.transaction_rate() * t;
            let a = impact_dual(&p, &MetaorderSpec::buy(q, t).unwrap(), &Toy).impact;
            let b = impact_dual(&p, &MetaorderSpec::buy(q / 2.0, t).unwrap(), &Toy).impact;
            prop_assert!((a / b / 2.0 - 1.0).abs() < 0.02);
        }
    }
}
