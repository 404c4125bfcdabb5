//! Explicit finite-difference solver for the latent order density
//!
//! ```text
//! ∂t ρ = D ∂xx ρ − ν ρ + λ sign(p − x) + m δ(x − p)
//! ```
//!
//! on a cell-centred grid, with the transaction price `p(t)` tracked as the
//! zero crossing of `ρ`. Buy orders carry positive density below the price,
//! sell orders negative density above it.
//!
//! Every operation is written so that mirroring the book (`x → −x`,
//! `ρ → −ρ`) mirrors the arithmetic exactly: a sell metaorder on a symmetric
//! grid produces the bit-exact negative of the buy trajectory.

use alloc::vec::Vec;

use crate::math::{abs, sqrt};
use crate::params::{BookParams, MetaorderSpec};
use crate::{Error, RegimeWarning, Result};

pub const MIN_CELLS: usize = 100;
/// Stationary decay lengths the domain must span on each side of the price.
pub const MIN_DECAY_LENGTHS: f64 = 8.0;
/// Explicit Euler bound `dt <= CFL dx² / D`.
pub const CFL: f64 = 0.4;
/// `nu T` above which a book no longer counts as slow.
pub const SLOW_BOOK_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_cells: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < 0.0 && x_max > 0.0) {
            return Err(Error::invalid("grid", "need finite x_min < 0 < x_max"));
        }
        if n_cells < MIN_CELLS {
            return Err(Error::invalid("n_cells", "must be >= 100"));
        }
        Ok(Self { x_min, x_max, n_cells })
    }

    pub fn symmetric(half_width: f64, n_cells: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_cells)
    }

    /// Symmetric grid wide enough for the stationary profile and the price
    /// excursion of `spec`.
    pub fn for_metaorder(params: &BookParams, spec: &MetaorderSpec, n_cells: usize) -> Result<Self> {
        Self::symmetric(auto_half_width(params, spec), n_cells)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_cells as f64
    }

    /// Centre of cell `i`, measured from the domain midpoint so that mirror
    /// cells of a symmetric grid are exact negatives.
    pub fn center(&self, i: usize) -> f64 {
        let mid = 0.5 * (self.x_min + self.x_max);
        mid + (i as f64 + 0.5 - 0.5 * self.n_cells as f64) * self.dx()
    }

    pub fn max_stable_dt(&self, d: f64) -> f64 {
        CFL * self.dx() * self.dx() / d
    }
}

pub(crate) fn auto_half_width(params: &BookParams, spec: &MetaorderSpec) -> f64 {
    let excursion = if spec.volume() > 0.0 {
        2.0 * sqrt(params.d() * spec.volume() / params.transaction_rate())
    } else {
        0.0
    };
    (MIN_DECAY_LENGTHS + 0.5) * params.decay_length() + excursion + 4.0 * sqrt(params.d() * spec.duration())
}

/// PDE coefficients. Unlike [`BookParams`] the cancellation and deposition
/// rates may vanish, which gives pure diffusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub d: f64,
    pub nu: f64,
    pub lam: f64,
}

impl Coefficients {
    pub fn new(d: f64, nu: f64, lam: f64) -> Result<Self> {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::invalid("D", "must be finite and > 0"));
        }
        if !(nu.is_finite() && nu >= 0.0 && lam.is_finite() && lam >= 0.0) {
            return Err(Error::invalid("nu/lam", "must be finite and >= 0"));
        }
        Ok(Self { d, nu, lam })
    }
}

impl From<&BookParams> for Coefficients {
    fn from(p: &BookParams) -> Self {
        Self { d: p.d(), nu: p.nu(), lam: p.lam() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Density pinned at the two faces of the domain.
    Dirichlet { left: f64, right: f64 },
    /// Zero flux through both faces.
    Reflecting,
}

/// Exact stationary profile `(λ/ν) sign(y) (1 − exp(−|y| sqrt(ν/D)))` with
/// `y = p − x`.
pub fn stationary_density(coeffs: &Coefficients, y: f64) -> f64 {
    if y == 0.0 || coeffs.lam == 0.0 {
        return 0.0;
    }
    let amplitude = coeffs.lam / coeffs.nu;
    let saturation = -libm::expm1(-abs(y) * sqrt(coeffs.nu / coeffs.d));
    amplitude * saturation * if y > 0.0 { 1.0 } else { -1.0 }
}

#[derive(Debug, Clone)]
pub struct BookState {
    grid: Grid,
    rho: Vec<f64>,
    price: f64,
    time: f64,
    boundary: Boundary,
    scratch: Vec<f64>,
}

impl BookState {
    /// State from an explicit density; the price is located as its zero
    /// crossing nearest to `price_hint`.
    pub fn from_density(grid: Grid, rho: Vec<f64>, price_hint: f64, boundary: Boundary) -> Result<Self> {
        if rho.len() != grid.n_cells() {
            return Err(Error::invalid("rho", "length must equal n_cells"));
        }
        let price = locate_price(&rho, &grid, price_hint).ok_or(Error::PriceEscapedDomain { time: 0.0 })?;
        let scratch = alloc::vec![0.0; rho.len()];
        Ok(Self { grid, rho, price, time: 0.0, boundary, scratch })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn price(&self) -> f64 {
        self.price
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn set_boundary(&mut self, boundary: Boundary) {
        self.boundary = boundary;
    }

    /// Total signed order mass `Σ ρ dx`.
    pub fn mass(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.grid.dx()
    }
}

/// Stationary book around an initial price at zero.
pub fn init_stationary(params: &BookParams, grid: Grid) -> Result<BookState> {
    let coeffs = Coefficients::from(params);
    check_span(&grid, params.decay_length())?;
    stationary_state(&coeffs, grid)
}

pub(crate) fn check_span(grid: &Grid, decay_length: f64) -> Result<()> {
    let required = MIN_DECAY_LENGTHS * decay_length;
    let available = (-grid.x_min()).min(grid.x_max());
    if available < required {
        return Err(Error::GridTooSmall { required, available });
    }
    Ok(())
}

/// Stationary state for general coefficients (`nu > 0`), pinned at the faces
/// to the profile values there.
pub fn stationary_state(coeffs: &Coefficients, grid: Grid) -> Result<BookState> {
    if !(coeffs.nu > 0.0) {
        return Err(Error::invalid("nu", "stationary profile needs nu > 0"));
    }
    let rho: Vec<f64> = (0..grid.n_cells()).map(|i| stationary_density(coeffs, -grid.center(i))).collect();
    let boundary = Boundary::Dirichlet {
        left: stationary_density(coeffs, -grid.x_min()),
        right: stationary_density(coeffs, -grid.x_max()),
    };
    let scratch = alloc::vec![0.0; rho.len()];
    Ok(BookState { grid, rho, price: 0.0, time: 0.0, boundary, scratch })
}

pub(crate) fn check_dt(grid: &Grid, d: f64, dt: f64) -> Result<()> {
    let limit = grid.max_stable_dt(d);
    if !(dt > 0.0 && dt <= limit * (1.0 + 1e-12)) {
        return Err(Error::UnstableTimeStep { dt, limit });
    }
    Ok(())
}

/// Advances the density by one explicit Euler step of diffusion,
/// cancellation and deposition around `price`, writing into `out`.
pub(crate) fn react_diffuse(
    rho: &[f64],
    out: &mut [f64],
    grid: &Grid,
    coeffs: &Coefficients,
    boundary: Boundary,
    price: f64,
    dt: f64,
) {
    let n = rho.len();
    let (ghost_left, ghost_right) = match boundary {
        Boundary::Dirichlet { left, right } => (2.0 * left - rho[0], 2.0 * right - rho[n - 1]),
        Boundary::Reflecting => (rho[0], rho[n - 1]),
    };
    let dx = grid.dx();
    let diffusion = coeffs.d * dt / (dx * dx);
    let decay = coeffs.nu * dt;
    let deposit = coeffs.lam * dt;
    for i in 0..n {
        let left = if i == 0 { ghost_left } else { rho[i - 1] };
        let right = if i + 1 == n { ghost_right } else { rho[i + 1] };
        // Cell average of sign(p - x): the flip is smooth as the price
        // crosses a cell instead of switching a whole cell at once.
        let y = price - grid.center(i);
        let side = deposit * (2.0 * y / dx).clamp(-1.0, 1.0);
        let laplacian = (left + right) - 2.0 * rho[i];
        out[i] = rho[i] + diffusion * laplacian - decay * rho[i] + side;
    }
}

/// Cells `(i, i + 1)` with `x_i <= price < x_{i+1}`.
pub(crate) fn bracket(grid: &Grid, price: f64) -> Option<usize> {
    let n = grid.n_cells();
    if !(price >= grid.center(0) && price < grid.center(n - 1)) {
        return None;
    }
    let mut i = ((price - grid.center(0)) / grid.dx()) as usize;
    i = i.min(n - 2);
    while i > 0 && grid.center(i) > price {
        i -= 1;
    }
    while i + 2 < n && grid.center(i + 1) <= price {
        i += 1;
    }
    Some(i)
}

/// Adds `mass` at `price`, shared between the two bracketing cells by
/// linear interpolation weights.
pub(crate) fn deposit_point_mass(rho: &mut [f64], grid: &Grid, price: f64, mass: f64) -> Option<()> {
    let i = bracket(grid, price)?;
    let dx = grid.dx();
    let mid = 0.5 * (grid.center(i) + grid.center(i + 1));
    let theta = (price - mid) / dx;
    let density = mass / dx;
    rho[i] += (0.5 - theta) * density;
    rho[i + 1] += (0.5 + theta) * density;
    Some(())
}

fn crossing(rho: &[f64], grid: &Grid, i: usize) -> Option<f64> {
    let (a, b) = (rho[i], rho[i + 1]);
    if (a > 0.0 && b <= 0.0) || (a >= 0.0 && b < 0.0) {
        let mid = 0.5 * (grid.center(i) + grid.center(i + 1));
        Some(mid + 0.5 * grid.dx() * ((a + b) / (a - b)))
    } else {
        None
    }
}

/// Zero crossing of `rho` (from positive to negative) nearest to `previous`,
/// located by linear interpolation between the bracketing cells.
pub fn locate_price(rho: &[f64], grid: &Grid, previous: f64) -> Option<f64> {
    let n = rho.len();
    if n < 2 {
        return None;
    }
    let start = bracket(grid, previous).unwrap_or(if previous < 0.0 { 0 } else { n - 2 });
    let mut best: Option<f64> = None;
    for offset in 0..n {
        let mut found_any = false;
        for i in [start.checked_sub(offset), start.checked_add(offset)].into_iter().flatten() {
            if i + 1 >= n {
                continue;
            }
            if let Some(p) = crossing(rho, grid, i) {
                found_any = true;
                if best.is_none_or(|b| abs(p - previous) < abs(b - previous)) {
                    best = Some(p);
                }
            }
        }
        // A crossing one offset further out can still be nearer; look once more.
        if best.is_some() && !found_any {
            break;
        }
        if start.checked_sub(offset).is_none() && start + offset + 1 >= n {
            break;
        }
    }
    best
}

/// One explicit Euler step with a signed source rate `source_rate` at the
/// current price (positive for a buy metaorder).
pub fn step(state: &mut BookState, coeffs: &Coefficients, source_rate: f64, dt: f64) -> Result<()> {
    check_dt(&state.grid, coeffs.d, dt)?;
    let grid = state.grid;
    react_diffuse(&state.rho, &mut state.scratch, &grid, coeffs, state.boundary, state.price, dt);
    core::mem::swap(&mut state.rho, &mut state.scratch);
    state.time += dt;
    if source_rate != 0.0 {
        deposit_point_mass(&mut state.rho, &grid, state.price, source_rate * dt)
            .ok_or(Error::PriceEscapedDomain { time: state.time })?;
    }
    state.price = locate_price(&state.rho, &grid, state.price).ok_or(Error::PriceEscapedDomain { time: state.time })?;
    if !state.price.is_finite() {
        return Err(Error::NonFinite("price"));
    }
    Ok(())
}

/// Price path of a PDE run.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeRun {
    pub times: Vec<f64>,
    pub prices: Vec<f64>,
    /// Signed displacement `p(T) − p(0)`.
    pub impact: f64,
    pub warnings: Vec<RegimeWarning>,
}

pub(crate) fn time_steps(duration: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", "must be finite and > 0"));
    }
    let steps = libm::ceil(duration / dt * (1.0 - 1e-12)).max(1.0) as usize;
    Ok((steps, duration / steps as f64))
}

/// Runs a constant-rate metaorder on an initially stationary book. The
/// step is reduced to `T / ceil(T / dt)` so the run ends exactly at `T`.
pub fn run_metaorder(params: &BookParams, spec: &MetaorderSpec, grid: Grid, dt: f64) -> Result<PdeRun> {
    let coeffs = Coefficients::from(params);
    let mut state = init_stationary(params, grid)?;
    let mut warnings = Vec::new();
    let nu_t = params.nu() * spec.duration();
    if nu_t > SLOW_BOOK_LIMIT {
        warnings.push(RegimeWarning::SlowBook { nu_t });
    }
    let (steps, dt) = time_steps(spec.duration(), dt)?;
    check_dt(&grid, coeffs.d, dt)?;
    let rate = spec.side().sign() * spec.rate();
    let mut times = Vec::with_capacity(steps + 1);
    let mut prices = Vec::with_capacity(steps + 1);
    times.push(0.0);
    prices.push(state.price);
    for k in 1..=steps {
        step(&mut state, &coeffs, rate, dt)?;
        times.push(k as f64 * dt);
        prices.push(state.price);
    }
    Ok(PdeRun { impact: state.price - prices[0], times, prices, warnings })
}
